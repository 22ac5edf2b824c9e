#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace symcon {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/* error taxonomy: construction/validation failures, numerical blowups and
 * degeneracies, configuration/schema problems, and undecidable geometric
 * queries (callers fall back to the conservative answer). */
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};
class ConstructionError : public Error {
public:
  using Error::Error;
};
class NumericsError : public Error {
public:
  using Error::Error;
};
class ConfigError : public Error {
public:
  using Error::Error;
};
class IndeterminateError : public Error {
public:
  using Error::Error;
};

/* Deterministic RNG: xorshift128+ seeded via splitmix64. Self-contained so
 * that streams are reproducible independent of the standard library. */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : s_{split(seed), split(seed + 0x9e3779b97f4a7c15ull)} {}

  std::uint64_t next() {
    std::uint64_t x = s_[0];
    const std::uint64_t y = s_[1];
    s_[0] = y;
    x ^= x << 23;
    s_[1] = x ^ y ^ (x >> 17) ^ (y >> 26);
    return s_[1] + y;
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // uniform in [lo,hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // uniform integer in [0,n)
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
  // standard normal (Box-Muller, consumes two draws)
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

private:
  static std::uint64_t split(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  std::uint64_t s_[2];
};

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[v & 0xf];
    v >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

// shortest exact decimal representation (round trips through strtod)
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace symcon
