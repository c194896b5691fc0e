#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "czsl/core/matrix.hpp"

namespace czsl {

namespace fs = std::filesystem;

// I/O failure tied to a file, optionally to a byte offset inside it.
class IoError : public Error {
 public:
  IoError(const fs::path& file, const std::string& msg)
      : Error(file.string() + ": " + msg), file_(file) {}
  IoError(const fs::path& file, std::uint64_t offset, const std::string& msg)
      : Error(file.string() + " @ byte " + std::to_string(offset) + ": " + msg),
        file_(file),
        offset_(offset) {}

  const fs::path& file() const { return file_; }
  std::int64_t offset() const { return offset_; }

 private:
  fs::path file_;
  std::int64_t offset_ = -1;
};

inline std::vector<unsigned char> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_file_text(const fs::path& path) {
  auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

inline void write_file_bytes(const fs::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open file for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path, "write failed");
}

inline void write_file_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::vector<unsigned char>(text.begin(), text.end()));
}

inline void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

inline void put_f32le(std::vector<unsigned char>& out, float v) {
  put_u32le(out, std::bit_cast<std::uint32_t>(v));
}

inline float get_f32le(const unsigned char* p) { return std::bit_cast<float>(get_u32le(p)); }

inline std::vector<unsigned char> encode_f32(const MatrixF& m) {
  std::vector<unsigned char> out;
  out.reserve(static_cast<std::size_t>(m.size()) * 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) put_f32le(out, m.data()[i]);
  return out;
}

inline std::vector<unsigned char> encode_u32(const Labels& v) {
  std::vector<unsigned char> out;
  out.reserve(v.size() * 4);
  for (auto x : v) put_u32le(out, x);
  return out;
}

// Decodes a row-major binary32 payload. NaN or infinite values are rejected
// with the byte offset of the first bad element.
inline MatrixF decode_f32(const fs::path& file, const unsigned char* data, std::size_t nbytes,
                          Eigen::Index rows, Eigen::Index cols, std::uint64_t base_offset = 0) {
  const auto expected = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 4;
  if (nbytes != expected) {
    throw IoError(file, base_offset,
                  "byte count " + std::to_string(nbytes) + " does not match shape " +
                      shape_str(rows, cols) + " (expected " + std::to_string(expected) + ")");
  }
  MatrixF m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const float v = get_f32le(data + 4 * i);
    if (!std::isfinite(v))
      throw IoError(file, base_offset + 4 * static_cast<std::uint64_t>(i), "non-finite value");
    m.data()[i] = v;
  }
  return m;
}

inline Labels decode_u32(const fs::path& file, const std::vector<unsigned char>& bytes,
                         std::size_t count) {
  if (bytes.size() != count * 4) {
    throw IoError(file, 0,
                  "byte count " + std::to_string(bytes.size()) + " does not match " +
                      std::to_string(count) + " labels (expected " + std::to_string(count * 4) +
                      ")");
  }
  Labels out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = get_u32le(bytes.data() + 4 * i);
  return out;
}

}  // namespace czsl
