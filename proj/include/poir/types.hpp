// Copyright 2026 The POIR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef POIR_TYPES_HPP_
#define POIR_TYPES_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace poir {

// dense aliases; double is the working scalar everywhere in the pipeline
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecXd = Vec<double>;
using MatXd = Mat<double>;

inline double clip(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

inline VecXd clip(const VecXd& x, double lo, double hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// splitmix64 finalizer; full-period bijective mixer
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// deterministic seed fan-out: every consumer of randomness gets its stream
// from (master, component tag, index).  tag is hashed with FNV-1a, the three
// parts are combined through two rounds of splitmix64 so that neighboring
// (master, index) pairs land far apart.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(mix64(master ^ h) ^ (index * 0x9e3779b97f4a7c15ULL + 1));
}

// deterministic RNG used everywhere: mt19937_64 (pinned by the standard)
// with explicit uniform/gaussian mappings so draws do not depend on any
// library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // [0, 1), 53-bit resolution
  double uniform() {
    return static_cast<double>(raw() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // unbiased-enough index draw; bias is O(n / 2^64)
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(raw() % n); }

  // Box-Muller with cached second sample
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite
    const double u1 = static_cast<double>((raw() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  VecXd gaussian_vec(int n) {
    VecXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace poir

#endif  // POIR_TYPES_HPP_
