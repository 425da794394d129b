#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "crnsim/network.hpp"
#include "crnsim/observable.hpp"
#include "crnsim/simulation.hpp"

namespace crnsim {

/// Two-sided 95% normal quantile used for every confidence interval.
inline constexpr double kConfidenceZ = 1.96;

inline constexpr std::uint64_t kDefaultBatchSize = 50'000;

/// One-pass (Welford) mean and variance accumulator.
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two samples.
  double variance() const noexcept {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct EnsembleStats {
  std::uint64_t n_paths = 0;
  double mean = 0.0;
  double sample_variance = 0.0;
  /// kConfidenceZ * sqrt(sample_variance / n_paths)
  double ci_halfwidth = 0.0;
  std::uint64_t total_updates = 0;
  std::uint64_t total_clamp_events = 0;
  double wall_time = 0.0;  ///< seconds

  /// Variance of the estimator itself, sample_variance / n_paths.
  double estimator_variance() const noexcept {
    return n_paths ? sample_variance / static_cast<double>(n_paths) : 0.0;
  }
};

struct EnsembleOptions {
  /// 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;
  std::uint64_t batch_size = kDefaultBatchSize;
  /// Only for_each_path can observe trajectories; estimators ignore them.
  bool record_trajectory = false;
};

/// Simulation inputs shared by every path of an ensemble.
struct Experiment {
  const ReactionNetwork& network;
  State x0;
  double T = 1.0;
  MethodConfig method;
};

/// Runs n_paths paths, path i on stream (master_seed, i), and reduces every
/// observable in path-index order. The result does not depend on the worker
/// count or batch size. Throws DomainError for n_paths < 2 and PathFailure
/// (lowest failing index) if any path throws.
std::vector<EnsembleStats> estimate_many(const Experiment& experiment,
                                         std::span<const Observable> observables,
                                         std::uint64_t n_paths,
                                         std::uint64_t master_seed,
                                         const EnsembleOptions& options = {});

EnsembleStats estimate(const Experiment& experiment,
                       const Observable& observable, std::uint64_t n_paths,
                       std::uint64_t master_seed,
                       const EnsembleOptions& options = {});

/// estimate() with an explicit batch size; batching only changes scheduling.
EnsembleStats run_batched(const Experiment& experiment,
                          const Observable& observable, std::uint64_t n_paths,
                          std::uint64_t master_seed, std::uint64_t batch_size,
                          unsigned workers = 0);

/// Calls `sink(path_index, result)` for every path in index order. Used when
/// per-path final states are needed.
void for_each_path(const Experiment& experiment, std::uint64_t n_paths,
                   std::uint64_t master_seed, const EnsembleOptions& options,
                   const std::function<void(std::uint64_t, const PathResult&)>&
                       sink);

/// Smallest n with pilot_variance / n <= (target_halfwidth / 1.96)^2, at
/// least 1. Throws DomainError unless target_halfwidth > 0.
std::uint64_t required_paths(double target_halfwidth, double pilot_variance);

unsigned resolve_workers(unsigned requested) noexcept;

}  // namespace crnsim
