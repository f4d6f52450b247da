// xser/common.h

// Copyright 2026  xser authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef XSER_COMMON_H_
#define XSER_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace xser {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Error categories. The CLI maps these onto exit codes; library code throws
// the most specific one that applies.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Bad configuration or API misuse (exit code 1).
struct ConfigError : Error {
  using Error::Error;
};
// Malformed or inconsistent input data (exit code 2).
struct DataError : Error {
  using Error::Error;
};
// Shape/dimension mismatch between values that must agree (exit code 2).
struct ShapeError : Error {
  using Error::Error;
};
// Non-finite values, divergence, failed numerical procedures (exit code 3).
struct NumericError : Error {
  using Error::Error;
};
// backward() called with a tape that does not match the net (exit code 3).
struct TapeError : Error {
  using Error::Error;
};
// A target label was read on a training path (exit code 3).
struct LeakageError : Error {
  using Error::Error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random source. All draws are defined in terms of mt19937_64 output
// words, so sequences are identical across platforms for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller, no cached spare.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw ConfigError("Rng::uniform_int: n must be positive");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Independent child stream; the mapping (seed, id) -> child seed is fixed.
  Rng spawn(std::uint64_t stream_id) {
    return Rng(splitmix64(seed_ ^ splitmix64(stream_id + 1)));
  }

  template <typename T>
  void shuffle(std::vector<T>* v) {
    for (std::size_t i = v->size(); i > 1; --i) {
      std::size_t j = uniform_int(i);
      std::swap((*v)[i - 1], (*v)[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// FNV-1a over raw bytes. Used for parameter and input-file fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const Vector& v, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a64(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()), h);
}

inline std::uint64_t fnv1a64(const Matrix& m, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a64(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
}

std::uint64_t file_fingerprint(const std::string& path);

inline bool all_finite(const Vector& v) { return v.allFinite(); }
inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Formats a double so that it parses back to the identical bits.
std::string format_exact(double x);
double parse_double(const std::string& s, const char* what);

}  // namespace xser

#endif  // XSER_COMMON_H_
