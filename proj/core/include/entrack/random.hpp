#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace entrack {

// Seeded generator whose outputs are identical on every standard library:
// only the raw mt19937_64 stream is used, never the std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double unit();
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  double normal();
  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);
  bool coin(double p_true) { return unit() < p_true; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  const T& choice(const std::vector<T>& items) {
    return items[below(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace entrack
