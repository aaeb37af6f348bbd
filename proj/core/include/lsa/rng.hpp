#pragma once

#include <cstdint>
#include <limits>

namespace lsa {

// Counter-based generator: output i of stream `key` is mix64(key + (i+1)*gamma),
// i.e. SplitMix64. Streams are derived with split(), so a path's draws depend
// only on (master seed, path index).
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Independent child stream `index` of `master`.
  static constexpr std::uint64_t split(std::uint64_t master,
                                       std::uint64_t index) {
    return mix64(mix64(master ^ 0x6a09e667f3bcc909ULL) +
                 (index + 1) * 0xd1b54a32d192ed03ULL);
  }

  result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; consumes two outputs.
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace lsa
