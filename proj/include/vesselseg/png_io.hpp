#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vesselseg {

class PngError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImageU8 {
  int h = 0;
  int w = 0;
  int channels = 0;          // 1 or 3
  std::vector<uint8_t> data;  // row-major, interleaved

  uint8_t& at(int y, int x, int c) { return data[(static_cast<size_t>(y) * w + x) * channels + c]; }
  uint8_t at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * w + x) * channels + c];
  }
};

ImageU8 read_png_rgb(const std::string& path);
ImageU8 read_png_gray(const std::string& path);
void write_png(const std::string& path, const ImageU8& image);

}  // namespace vesselseg
