#include "csforge/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace csforge {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& off) {
  if (off + sizeof(T) > in.size()) {
    throw CheckpointError("checkpoint truncated");
  }
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::map<std::string, Tensor>& entries) {
  std::string out;
  out.append(kCheckpointMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) put<std::uint64_t>(out, d);
    for (double v : t.data) put<double>(out, v);
  }
  write_file(path, out);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
  const std::string in = read_file(path);
  std::size_t off = 0;
  if (in.size() < 4 || std::memcmp(in.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError("not a CSFG checkpoint: " + path);
  }
  off = 4;
  const auto version = take<std::uint32_t>(in, off);
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version) + " in " + path);
  }
  const auto count = take<std::uint32_t>(in, off);
  std::map<std::string, Tensor> entries;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto name_len = take<std::uint32_t>(in, off);
    if (off + name_len > in.size()) throw CheckpointError("checkpoint truncated");
    std::string name(in.data() + off, name_len);
    off += name_len;
    const auto rank = take<std::uint32_t>(in, off);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(take<std::uint64_t>(in, off));
    Tensor t = Tensor::zeros(shape);
    for (double& v : t.data) v = take<double>(in, off);
    entries.emplace(std::move(name), std::move(t));
  }
  if (off != in.size()) {
    throw CheckpointError("trailing bytes in checkpoint: " + path);
  }
  return entries;
}

void save_params(const std::string& path, const ParameterStore& params,
                 const std::map<std::string, double>& meta) {
  std::map<std::string, Tensor> entries;
  for (const auto& name : params.names()) {
    entries.emplace(name, params.value(name));
  }
  for (const auto& [key, v] : meta) {
    entries.emplace("meta/" + key, Tensor::scalar(v));
  }
  save_checkpoint(path, entries);
}

std::map<std::string, double> load_params(const std::string& path,
                                          ParameterStore& params) {
  std::map<std::string, double> meta;
  for (auto& [name, t] : load_checkpoint(path)) {
    if (name.rfind("meta/", 0) == 0) {
      meta[name.substr(5)] = t.scalar_value();
    } else if (params.has(name)) {
      Tensor& dst = params.value(name);
      if (!dst.same_shape(t)) {
        throw CheckpointError("checkpoint entry '" + name + "' has shape " +
                              t.shape_str() + ", expected " + dst.shape_str());
      }
      dst = t;
    } else {
      params.create(name, t.shape);
      params.value(name) = t;
    }
  }
  return meta;
}

}  // namespace csforge
