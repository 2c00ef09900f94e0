#include "vesselseg/checkpoint.hpp"

#include <atomic>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace vesselseg {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace {

std::atomic<std::size_t> g_load_count{0};

constexpr char kMagic[4] = {'V', 'N', 'E', 'T'};

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& in, const char* what) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) {
    throw CheckpointError(CheckpointErrorCode::kTruncated,
                          std::string("checkpoint ends early while reading ") + what);
  }
  return v;
}

std::string read_bytes(std::istream& in, std::size_t len, const char* what) {
  std::string buf(len, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(len));
  if (!in) {
    throw CheckpointError(CheckpointErrorCode::kTruncated,
                          std::string("checkpoint ends early while reading ") + what);
  }
  return buf;
}

std::string format_header(const NetworkSpec& spec, const CheckpointMeta& meta) {
  std::ostringstream out;
  out << "in_channels=" << spec.in_channels << '\n';
  out << "num_classes=" << spec.num_classes << '\n';
  if (spec.seg_channels) out << "seg_channels=" << *spec.seg_channels << '\n';
  out << "encoder_widths=";
  for (std::size_t i = 0; i < spec.encoder_widths.size(); ++i) {
    if (i) out << ',';
    out << spec.encoder_widths[i];
  }
  out << '\n';
  out << "kernel_size=" << spec.kernel_size << '\n';
  out << "seed=" << meta.seed << '\n';
  out << "steps=" << meta.steps << '\n';
  char loss[64];
  std::snprintf(loss, sizeof(loss), "%.17g", meta.final_loss);
  out << "final_loss=" << loss << '\n';
  return out.str();
}

long long parse_int(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw CheckpointError(CheckpointErrorCode::kParse,
                          "checkpoint header has a bad value for " + key + ": '" + value + "'");
  }
}

void parse_header(const std::string& text, NetworkSpec& spec, CheckpointMeta& meta) {
  spec.seg_channels.reset();
  spec.encoder_widths.clear();
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CheckpointError(CheckpointErrorCode::kParse,
                            "checkpoint header line is not key=value: '" + line + "'");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "in_channels") {
      spec.in_channels = static_cast<int>(parse_int(value, key));
    } else if (key == "num_classes") {
      spec.num_classes = static_cast<int>(parse_int(value, key));
    } else if (key == "seg_channels") {
      spec.seg_channels = static_cast<int>(parse_int(value, key));
    } else if (key == "encoder_widths") {
      std::istringstream widths(value);
      std::string item;
      while (std::getline(widths, item, ',')) {
        spec.encoder_widths.push_back(static_cast<int>(parse_int(item, key)));
      }
    } else if (key == "kernel_size") {
      spec.kernel_size = static_cast<int>(parse_int(value, key));
    } else if (key == "seed") {
      meta.seed = static_cast<uint64_t>(parse_int(value, key));
    } else if (key == "steps") {
      meta.steps = parse_int(value, key);
    } else if (key == "final_loss") {
      char* end = nullptr;
      meta.final_loss = std::strtod(value.c_str(), &end);
      if (end == value.c_str() || *end != '\0') {
        throw CheckpointError(CheckpointErrorCode::kParse,
                              "checkpoint header has a bad final_loss: '" + value + "'");
      }
    } else {
      throw CheckpointError(CheckpointErrorCode::kParse,
                            "checkpoint header has an unknown key: '" + key + "'");
    }
  }
}

std::string describe_spec(const NetworkSpec& spec) {
  std::ostringstream out;
  out << "in=" << spec.in_channels << " classes=" << spec.num_classes << " seg=";
  if (spec.seg_channels) {
    out << *spec.seg_channels;
  } else {
    out << "none";
  }
  return out.str();
}

}  // namespace

void save_checkpoint(const Network& net, const CheckpointMeta& meta, const std::string& path) {
  net.spec.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw CheckpointError(CheckpointErrorCode::kIo, "cannot open '" + path + "' for writing");
  }
  out.write(kMagic, sizeof(kMagic));
  write_u32(out, kCheckpointVersion);
  const std::string header = format_header(net.spec, meta);
  write_u32(out, static_cast<uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  write_u32(out, static_cast<uint32_t>(net.params.size()));
  for (const auto& p : net.params) {
    write_u32(out, static_cast<uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_u32(out, 4);
    for (int d : {p.value.n, p.value.c, p.value.h, p.value.w}) {
      write_u32(out, static_cast<uint32_t>(d));
    }
    out.write(reinterpret_cast<const char*>(p.value.data.data()),
              static_cast<std::streamsize>(p.value.data.size() * sizeof(float)));
  }
  out.flush();
  if (!out) {
    throw CheckpointError(CheckpointErrorCode::kIo, "failed while writing '" + path + "'");
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError(CheckpointErrorCode::kIo, "cannot open '" + path + "' for reading");
  }
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(CheckpointErrorCode::kBadMagic, "'" + path + "' is not a checkpoint");
  }
  const uint32_t version = read_u32(in, "version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorCode::kBadVersion,
                          "unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t header_len = read_u32(in, "header length");
  const std::string header = read_bytes(in, header_len, "header");

  LoadedCheckpoint loaded;
  NetworkSpec spec;
  parse_header(header, spec, loaded.meta);
  try {
    spec.validate();
  } catch (const ShapeError& e) {
    throw CheckpointError(CheckpointErrorCode::kParse,
                          std::string("checkpoint header describes an invalid network: ") +
                              e.what());
  }

  // the fresh build provides the expected block catalog; its values are
  // overwritten below
  loaded.net = build_network(spec, 0);
  const uint32_t block_count = read_u32(in, "block count");
  if (block_count != loaded.net.params.size()) {
    throw CheckpointError(CheckpointErrorCode::kShapeMismatch,
                          "checkpoint has " + std::to_string(block_count) + " blocks, expected " +
                              std::to_string(loaded.net.params.size()));
  }
  for (auto& p : loaded.net.params) {
    const uint32_t name_len = read_u32(in, "block name length");
    const std::string name = read_bytes(in, name_len, "block name");
    if (name != p.name) {
      throw CheckpointError(CheckpointErrorCode::kShapeMismatch,
                            "checkpoint block '" + name + "' where '" + p.name + "' expected");
    }
    const uint32_t ndims = read_u32(in, "block rank");
    if (ndims != 4) {
      throw CheckpointError(CheckpointErrorCode::kShapeMismatch,
                            "checkpoint block '" + name + "' has rank " + std::to_string(ndims));
    }
    uint32_t dims[4];
    for (auto& d : dims) d = read_u32(in, "block dims");
    const int want[4] = {p.value.n, p.value.c, p.value.h, p.value.w};
    for (int i = 0; i < 4; ++i) {
      if (static_cast<int>(dims[i]) != want[i]) {
        throw CheckpointError(CheckpointErrorCode::kShapeMismatch,
                              "checkpoint block '" + name + "' shape mismatch");
      }
    }
    in.read(reinterpret_cast<char*>(p.value.data.data()),
            static_cast<std::streamsize>(p.value.data.size() * sizeof(float)));
    if (!in) {
      throw CheckpointError(CheckpointErrorCode::kTruncated,
                            "checkpoint ends early inside block '" + name + "'");
    }
  }
  g_load_count.fetch_add(1, std::memory_order_relaxed);
  return loaded;
}

LoadedCheckpoint load_checkpoint(const std::string& path, const NetworkSpec& expected) {
  LoadedCheckpoint loaded = load_checkpoint(path);
  if (!(loaded.net.spec == expected)) {
    throw CheckpointError(CheckpointErrorCode::kShapeMismatch,
                          "checkpoint architecture (" + describe_spec(loaded.net.spec) +
                              ") does not match the expected one (" + describe_spec(expected) +
                              ")");
  }
  return loaded;
}

std::size_t checkpoint_load_count() { return g_load_count.load(std::memory_order_relaxed); }

}  // namespace vesselseg
