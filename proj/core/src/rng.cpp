#include "crnsim/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "crnsim/error.hpp"

namespace crnsim {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

constexpr int kLogFactorialTableSize = 256;

struct LogFactorialTable {
  std::array<double, kLogFactorialTableSize> values{};
  LogFactorialTable() {
    long double acc = 0.0L;
    values[0] = 0.0;
    for (int k = 1; k < kLogFactorialTableSize; ++k) {
      acc += std::log(static_cast<long double>(k));
      values[k] = static_cast<double>(acc);
    }
  }
};

const LogFactorialTable& log_factorial_table() {
  static const LogFactorialTable table;
  return table;
}

// Inversion by sequential search; mean < 10.
std::int64_t poisson_inversion(double mean, StreamGenerator& gen) {
  const double p0 = std::exp(-mean);
  while (true) {
    const double u = gen.uniform();
    double p = p0;
    double cdf = p;
    std::int64_t k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      // Tail mass below double resolution: cdf has stalled short of u.
      if (p <= cdf * 1e-17) break;
      cdf += p;
    }
    if (u <= cdf) return k;
  }
}

// Transformed rejection with squeeze (Hormann 1993, "PTRS"); mean >= 10.
std::int64_t poisson_ptrs(double mean, StreamGenerator& gen) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double log_inv_alpha = std::log(1.1239 + 1.1328 / (b - 3.4));
  const double vr = 0.9277 - 3.6224 / (b - 2.0);

  while (true) {
    const double u = gen.uniform() - 0.5;
    const double v = gen.uniform();
    const double us = 0.5 - std::fabs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    const auto k = static_cast<std::int64_t>(kd);
    if (std::log(v) + log_inv_alpha - std::log(a / (us * us) + b) <=
        -mean + kd * loglam - log_factorial(k)) {
      return k;
    }
  }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

StreamGenerator::StreamGenerator(SeedSpec seed) noexcept : seed_(seed) {}

void StreamGenerator::refill() noexcept {
  const std::array<std::uint32_t, 4> counter{
      static_cast<std::uint32_t>(block_),
      static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(seed_.stream_id),
      static_cast<std::uint32_t>(seed_.stream_id >> 32)};
  const std::array<std::uint32_t, 2> key{
      static_cast<std::uint32_t>(seed_.master_seed),
      static_cast<std::uint32_t>(seed_.master_seed >> 32)};
  const auto out = philox4x32_10(counter, key);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  ++block_;
  next_ = 0;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double exponential_from_uniform(double rate, double u) noexcept {
  return -std::log(u) / rate;
}

double sample_exponential(double rate, StreamGenerator& gen) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw DomainError("exponential rate must be positive and finite");
  }
  return exponential_from_uniform(rate, gen.uniform_open());
}

std::int64_t sample_poisson(double mean, StreamGenerator& gen) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("Poisson mean must be nonnegative and finite, got " +
                      std::to_string(mean));
  }
  // Beyond this the variate no longer fits comfortably in 64 bits.
  if (mean > 1e17) {
    throw DomainError("Poisson mean " + std::to_string(mean) +
                      " is too large; the path has blown up");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) return poisson_inversion(mean, gen);
  return poisson_ptrs(mean, gen);
}

std::size_t sample_categorical(std::span<const double> weights,
                               StreamGenerator& gen) {
  double total = 0.0;
  for (const double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("categorical weights must be nonnegative and finite");
    }
    total += w;
  }
  if (!(total > 0.0)) {
    throw DomainError("categorical weights must have a positive sum");
  }
  return sample_categorical_unchecked(weights, total, gen);
}

std::size_t sample_categorical_unchecked(std::span<const double> weights,
                                         double total, StreamGenerator& gen) {
  const double target = gen.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    acc += weights[k];
    last_positive = k;
    if (target < acc) return k;
  }
  // Rounding left target >= the accumulated sum.
  return last_positive;
}

double log_factorial(std::int64_t k) noexcept {
  if (k < kLogFactorialTableSize) return log_factorial_table().values[k];
  const double n = static_cast<double>(k);
  const double inv = 1.0 / n;
  const double inv2 = inv * inv;
  return n * std::log(n) - n + 0.5 * std::log(2.0 * std::numbers::pi * n) +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

}  // namespace crnsim
