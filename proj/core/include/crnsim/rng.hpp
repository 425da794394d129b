#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace crnsim {

/// Philox4x32-10 counter-based block function (Salmon et al., Random123).
/// Maps a 128-bit counter and a 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

/// Reproducible random stream. The state is a pure function of
/// (master_seed, stream_id): the master seed is the Philox key, the stream id
/// occupies the upper 64 bits of the counter and the lower 64 bits count
/// blocks. Each stream therefore has 2^64 blocks of 128 bits and distinct
/// stream ids never share a counter.
///
/// Satisfies std::uniform_random_bit_generator.
class StreamGenerator {
 public:
  using result_type = std::uint64_t;

  explicit StreamGenerator(SeedSpec seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (next_ == 2) refill();
    return buffer_[next_++];
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  const SeedSpec& seed() const noexcept { return seed_; }

 private:
  void refill() noexcept;

  SeedSpec seed_;
  std::uint64_t block_ = 0;
  std::array<result_type, 2> buffer_{};
  int next_ = 2;
};

/// Equivalent to StreamGenerator{seed}; named for the stream-splitting
/// contract.
inline StreamGenerator split_stream(SeedSpec seed) noexcept {
  return StreamGenerator(seed);
}

/// SplitMix64 finalizer; used to derive independent master seeds for
/// sub-experiments (pilot runs, convergence cells).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

/// Exp(rate) by inversion. Throws DomainError unless rate > 0 and finite.
double sample_exponential(double rate, StreamGenerator& gen);

/// Exponential from a given uniform in (0, 1); monotone decreasing in u.
double exponential_from_uniform(double rate, double u) noexcept;

/// Poisson(mean), exact in distribution. Sequential-search inversion below a
/// mean of 10, Hormann's transformed rejection (PTRS) above. Throws
/// DomainError for negative, non-finite or overflowing means.
std::int64_t sample_poisson(double mean, StreamGenerator& gen);

/// Index k with probability weights[k] / sum(weights). Throws DomainError for
/// negative entries or a non-positive sum.
std::size_t sample_categorical(std::span<const double> weights,
                               StreamGenerator& gen);

/// Same as sample_categorical with a caller-supplied positive total; skips
/// validation. Used on the simulator hot path.
std::size_t sample_categorical_unchecked(std::span<const double> weights,
                                         double total, StreamGenerator& gen);

/// log(k!) for k >= 0.
double log_factorial(std::int64_t k) noexcept;

}  // namespace crnsim
