#pragma once

// Parameter checkpoint container (one file per network):
//
//   offset 0   8 bytes   magic "CZSLMLP1"
//   offset 8   4 bytes   header length H, little-endian uint32
//   offset 12  H bytes   UTF-8 JSON header:
//                        {"layers": [{"in": I, "out": O, "activation": "relu"|"identity"}, ...],
//                         "seed": S, "step": N}
//   offset 12+H          per layer: weight (out x in) then bias (out), row-major
//                        little-endian binary32
//
// float parameters round-trip bit-exactly; double parameters are narrowed.

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "czsl/core/binary_io.hpp"
#include "czsl/nn/mlp.hpp"

namespace czsl::nn {

inline constexpr char kCheckpointMagic[8] = {'C', 'Z', 'S', 'L', 'M', 'L', 'P', '1'};

template <typename T>
struct Checkpoint {
  MlpParams<T> params;
  std::uint64_t step = 0;
};

template <typename T>
nlohmann::ordered_json checkpoint_header(const MlpParams<T>& p, std::uint64_t step) {
  nlohmann::ordered_json h;
  h["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : p.layers)
    h["layers"].push_back({{"in", l.in_dim()}, {"out", l.out_dim()}, {"activation", to_string(l.activation)}});
  h["seed"] = p.seed;
  h["step"] = step;
  return h;
}

template <typename T>
std::vector<unsigned char> encode_checkpoint(const MlpParams<T>& p, std::uint64_t step = 0) {
  p.validate();
  const std::string header = checkpoint_header(p, step).dump();
  std::vector<unsigned char> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  put_u32le(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  for (const auto& l : p.layers) {
    for (Eigen::Index k = 0; k < l.weight.size(); ++k) put_f32le(out, static_cast<float>(l.weight.data()[k]));
    for (Eigen::Index k = 0; k < l.bias.size(); ++k) put_f32le(out, static_cast<float>(l.bias.data()[k]));
  }
  return out;
}

template <typename T>
Checkpoint<T> decode_checkpoint(const std::vector<unsigned char>& bytes, const fs::path& file = "<memory>") {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0)
    throw IoError(file, 0, "not a parameter checkpoint (bad magic)");
  const std::uint32_t hlen = get_u32le(bytes.data() + 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(hlen)) throw IoError(file, 8, "truncated header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + hlen);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(file, 12, std::string("malformed header: ") + e.what());
  }

  Checkpoint<T> ck;
  ck.params.seed = h.value("seed", std::uint64_t{0});
  ck.step = h.value("step", std::uint64_t{0});
  std::size_t offset = 12 + hlen;
  for (const auto& lj : h.at("layers")) {
    const auto in = lj.at("in").get<Eigen::Index>();
    const auto out = lj.at("out").get<Eigen::Index>();
    const std::size_t wbytes = static_cast<std::size_t>(in * out) * 4;
    const std::size_t bbytes = static_cast<std::size_t>(out) * 4;
    if (offset + wbytes + bbytes > bytes.size()) throw IoError(file, offset, "truncated payload");
    Layer<T> l;
    l.activation = activation_from_string(lj.at("activation").get<std::string>());
    l.weight = decode_f32(file, bytes.data() + offset, wbytes, out, in, offset).template cast<T>();
    offset += wbytes;
    l.bias = decode_f32(file, bytes.data() + offset, bbytes, 1, out, offset).template cast<T>();
    offset += bbytes;
    ck.params.layers.push_back(std::move(l));
  }
  if (offset != bytes.size())
    throw IoError(file, offset, "trailing bytes after payload (" + std::to_string(bytes.size() - offset) + ")");
  ck.params.validate();
  return ck;
}

template <typename T>
void save_checkpoint(const fs::path& path, const MlpParams<T>& p, std::uint64_t step = 0) {
  write_file_bytes(path, encode_checkpoint(p, step));
}

template <typename T>
Checkpoint<T> load_checkpoint(const fs::path& path) {
  return decode_checkpoint<T>(read_file_bytes(path), path);
}

}  // namespace czsl::nn
