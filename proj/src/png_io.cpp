#include "vesselseg/png_io.hpp"

#include <png.h>

namespace vesselseg {

namespace {

ImageU8 read_png(const std::string& path, uint32_t format, int channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw PngError("cannot read png '" + path + "': " + image.message);
  }
  image.format = format;
  ImageU8 out;
  out.h = static_cast<int>(image.height);
  out.w = static_cast<int>(image.width);
  out.channels = channels;
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    png_image_free(&image);
    throw PngError("cannot decode png '" + path + "': " + image.message);
  }
  return out;
}

}  // namespace

ImageU8 read_png_rgb(const std::string& path) { return read_png(path, PNG_FORMAT_RGB, 3); }

ImageU8 read_png_gray(const std::string& path) { return read_png(path, PNG_FORMAT_GRAY, 1); }

void write_png(const std::string& path, const ImageU8& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw PngError("png write supports 1 or 3 channels");
  }
  if (image.h <= 0 || image.w <= 0 ||
      image.data.size() != static_cast<size_t>(image.h) * image.w * image.channels) {
    throw PngError("png write got an inconsistent image buffer");
  }
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.w);
  out.height = static_cast<png_uint_32>(image.h);
  out.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&out, path.c_str(), 0, image.data.data(), 0, nullptr)) {
    throw PngError("cannot write png '" + path + "': " + out.message);
  }
}

}  // namespace vesselseg
