#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <span>

namespace quantnoise {

// SplitMix64 finalizer; full-avalanche whitening of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Independent substream seed for (master, stream). Streams derived this way
// can be generated in any order (worker threads, record index, replication
// index) without affecting each other.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(mix64(master ^ 0x517cc1b727220a95ull) + stream);
}

// FNV-1a over raw bytes; used to fingerprint configuration data so mismatched
// inputs can be rejected instead of silently combined.
inline std::uint64_t fingerprint_bytes(const void* data, std::size_t size,
                                       std::uint64_t h = 0xcbf29ce484222325ull) noexcept {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fingerprint_of(std::span<const double> values) noexcept {
  std::uint64_t n = values.size();
  std::uint64_t h = fingerprint_bytes(&n, sizeof n);
  if (!values.empty()) {
    h = fingerprint_bytes(values.data(), values.size() * sizeof(double), h);
  }
  return h;
}

// One pseudorandom substream. Construct per record / per servoloop step from
// derive_seed(); never share a stream across writers.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the Marsaglia polar method.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0;
  bool has_spare_ = false;
};

}  // namespace quantnoise
