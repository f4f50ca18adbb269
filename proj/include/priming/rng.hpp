#pragma once

#include <array>
#include <cstdint>

namespace priming {

/// Keyed random stream: xoshiro256** whose state is derived from
/// (seed, stream_id) through SplitMix64. Draws are a pure function of the key
/// and the draw index, so simulation repetitions can run on any thread.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

  /// Standard normal via the Box-Muller transform; the second variate of each
  /// pair is cached.
  double standard_normal() noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> state_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Mixes two 64-bit words into one; used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

/// Throws ErrorKind::domain if sigma < 0. sigma == 0 returns mu exactly.
double sample_normal(SeededRng& rng, double mu, double sigma);

/// exp(N(mu, sigma)). sigma == 0 returns exp(mu) exactly.
double sample_lognormal(SeededRng& rng, double mu, double sigma);

}  // namespace priming
