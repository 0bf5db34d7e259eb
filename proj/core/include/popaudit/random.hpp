#pragma once

#include <cstdint>

namespace popaudit {

// Portable seeded generator. The standard distributions are implementation
// defined, so every draw used by the engines and fold planner goes through
// these helpers to stay bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;

  // Uniform in the open interval (0, 1).
  double uniform_open() noexcept;

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_[4];
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Child seed for a (root, stream, index) triple; used to fan a root seed out
// over folds and algorithms.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index) noexcept;

}  // namespace popaudit
