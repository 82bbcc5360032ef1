#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ocdc {

/// Order-sensitive 64-bit mix of a seed and a list of logical indices.
/// Used to derive independent substreams (per iteration, per direction).
std::uint64_t hash64(std::uint64_t seed, std::initializer_list<std::uint64_t> parts);

/// Seeded random stream with platform-independent draws.
///
/// std::mt19937_64's output sequence is fixed by the standard, but the
/// standard distributions are not, so the draws are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in the closed range [lo, hi]. Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Uniform real in [lo, hi) with 53 bits of resolution; returns lo if lo == hi.
  double uniform_real(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ocdc
