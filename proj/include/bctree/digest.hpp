#pragma once

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace bctree {

// SHA-256 digest used as the canonical equality witness for search trees.
struct Digest {
  std::array<unsigned char, 32> bytes{};

  bool operator==(const Digest&) const = default;
  bool operator<(const Digest& o) const { return bytes < o.bytes; }

  std::string hex() const {
    static const char* k = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (unsigned char b : bytes) {
      s.push_back(k[b >> 4]);
      s.push_back(k[b & 0xf]);
    }
    return s;
  }
};

// Incremental SHA-256 writer with fixed little-endian encodings so digests
// are identical across platforms and runs.
class DigestWriter {
 public:
  DigestWriter() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("DigestWriter: EVP init failed");
  }
  ~DigestWriter() { EVP_MD_CTX_free(ctx_); }
  DigestWriter(const DigestWriter&) = delete;
  DigestWriter& operator=(const DigestWriter&) = delete;

  void write_bytes(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1)
      throw std::runtime_error("DigestWriter: update failed");
  }

  void write_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    write_bytes(b, 8);
  }

  void write_i64(std::int64_t v) { write_u64(static_cast<std::uint64_t>(v)); }

  void write_u8(std::uint8_t v) { write_bytes(&v, 1); }

  // Exact bit pattern, so -0.0 and 0.0 hash differently and no precision is lost.
  void write_double(double v) { write_u64(std::bit_cast<std::uint64_t>(v)); }

  void write_str(const std::string& s) {
    write_u64(s.size());
    write_bytes(s.data(), s.size());
  }

  Digest finish() {
    Digest d;
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, d.bytes.data(), &len) != 1 || len != 32)
      throw std::runtime_error("DigestWriter: final failed");
    return d;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace bctree
