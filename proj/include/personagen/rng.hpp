#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "personagen/error.hpp"

namespace pgen {

// Seeded generator with hand-rolled mappings. std::uniform_int_distribution
// and friends are not byte-stable across standard libraries; these mappings
// are, so goldens hold on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform index in [0, n). Modulo bias is < 2^-53 for any n that fits
  // in memory; irrelevant next to the tolerances used here.
  std::size_t index(std::size_t n) {
    if (n == 0) throw InvalidInput("rng index over empty range");
    return static_cast<std::size_t>(gen_() % n);
  }

  // Uniform integer in [lo, hi], inclusive.
  int int_in(int lo, int hi) {
    if (hi < lo) throw InvalidInput("rng int_in: hi < lo");
    return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo) + 1));
  }

  // Index drawn proportionally to non-negative weights.
  std::size_t weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw InvalidInput("negative sampling weight");
      total += w;
    }
    if (total <= 0.0) throw InvalidInput("weights sum to zero");
    double r = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (r < acc) return i;
    }
    return weights.size() - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pgen
