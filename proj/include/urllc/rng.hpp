#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace urllc {

// Mixes a base seed with a stream tag so sub-streams are well separated.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic RNG. The engine is std::mt19937_64, whose output sequence is
// fixed by the standard; distributions are hand-rolled because the standard
// library's distribution algorithms are implementation-defined and would break
// bit-reproducibility across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], both inclusive. Modulo bias is negligible for
  // the small ranges used here and keeps the draw sequence trivial to reason
  // about.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(eng_() % span);
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Independent child stream; consumes one draw from this stream.
  Rng fork() { return Rng(derive_seed(next_u64(), 0x5eedULL)); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace urllc
