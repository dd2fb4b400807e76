#include "qarc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace qarc {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

template <typename T>
void write_raw(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_raw(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw CheckpointError("checkpoint: truncated stream");
  return v;
}

}  // namespace

void save_checkpoint(std::ostream& os, const std::vector<Parameter>& params) {
  os.write("QARC", 4);
  write_raw<std::uint32_t>(os, kCheckpointVersion);
  write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const Parameter& p : params) {
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(p.tensor.rank()));
    for (std::size_t d : p.tensor.shape) write_raw<std::uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(p.tensor.values.data()),
             static_cast<std::streamsize>(p.tensor.values.size() * sizeof(double)));
  }
  if (!os) throw CheckpointError("checkpoint: write failed");
}

void save_checkpoint(const std::string& path, const std::vector<Parameter>& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("checkpoint: cannot open " + path + " for writing");
  save_checkpoint(os, params);
}

std::vector<Parameter> load_checkpoint(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "QARC", 4) != 0) {
    throw CheckpointError("checkpoint: bad magic");
  }
  const auto version = read_raw<std::uint32_t>(is);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = read_raw<std::uint32_t>(is);
  std::vector<Parameter> params;
  params.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_raw<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const auto rank = read_raw<std::uint32_t>(is);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(read_raw<std::uint64_t>(is));
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(t.values.size() * sizeof(double)));
    if (!is) throw CheckpointError("checkpoint: truncated tensor data for " + name);
    params.emplace_back(std::move(name), std::move(t));
  }
  return params;
}

std::vector<Parameter> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("checkpoint: cannot open " + path);
  return load_checkpoint(is);
}

void restore_checkpoint(const std::string& path, std::vector<Parameter>& params) {
  std::vector<Parameter> loaded = load_checkpoint(path);
  for (Parameter& dst : params) {
    bool found = false;
    for (Parameter& src : loaded) {
      if (src.name == dst.name) {
        if (!src.tensor.same_shape(dst.tensor)) {
          throw CheckpointError("checkpoint: shape mismatch for " + dst.name + ": file " +
                                src.tensor.shape_str() + " vs model " +
                                dst.tensor.shape_str());
        }
        dst.tensor.values = std::move(src.tensor.values);
        dst.tensor.zero_grad();
        found = true;
        break;
      }
    }
    if (!found) throw CheckpointError("checkpoint: missing tensor " + dst.name);
  }
}

}  // namespace qarc
