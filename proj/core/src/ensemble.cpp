#include "crnsim/ensemble.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "crnsim/error.hpp"

namespace crnsim {

namespace {

struct Failure {
  std::uint64_t index = std::numeric_limits<std::uint64_t>::max();
  std::string message;
};

// Simulates paths [0, n_paths) batch by batch. Inside a batch the range is
// split into contiguous chunks, one per worker; `on_path(index, result)` runs
// on the worker thread and must only touch per-index storage. After each
// batch `on_batch(begin, end)` runs on the calling thread.
template <typename OnPath, typename OnBatch>
void run_batches(const Experiment& ex, std::uint64_t n_paths,
                 std::uint64_t master_seed, const EnsembleOptions& options,
                 OnPath&& on_path, OnBatch&& on_batch) {
  if (options.batch_size == 0) throw DomainError("batch_size must be >= 1");
  const unsigned workers = resolve_workers(options.workers);
  const PathOptions path_options{options.record_trajectory};

  for (std::uint64_t begin = 0; begin < n_paths; begin += options.batch_size) {
    const std::uint64_t end = std::min(n_paths, begin + options.batch_size);
    const std::uint64_t size = end - begin;
    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::uint64_t>(workers, size));

    Failure failure;
    std::mutex failure_mutex;
    auto work = [&](std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t i = lo; i < hi; ++i) {
        try {
          StreamGenerator gen({master_seed, i});
          on_path(i, simulate_path(ex.network, ex.x0, ex.T, ex.method, gen, path_options));
        } catch (const std::exception& e) {
          const std::lock_guard lock(failure_mutex);
          if (i < failure.index) failure = {i, e.what()};
          return;
        }
      }
    };

    if (n_threads <= 1) {
      work(begin, end);
    } else {
      std::vector<std::jthread> threads;
      threads.reserve(n_threads);
      const std::uint64_t chunk = (size + n_threads - 1) / n_threads;
      for (unsigned w = 0; w < n_threads; ++w) {
        const std::uint64_t lo = begin + w * chunk;
        const std::uint64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back(work, lo, hi);
      }
    }
    if (failure.index != std::numeric_limits<std::uint64_t>::max()) {
      throw PathFailure(failure.index, failure.message);
    }
    on_batch(begin, end);
  }
}

}  // namespace

unsigned resolve_workers(unsigned requested) noexcept {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::vector<EnsembleStats> estimate_many(const Experiment& ex,
                                         std::span<const Observable> observables,
                                         std::uint64_t n_paths,
                                         std::uint64_t master_seed,
                                         const EnsembleOptions& options) {
  if (n_paths < 2) throw DomainError("an ensemble needs at least 2 paths");
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n_obs = observables.size();
  const std::uint64_t batch = std::min(n_paths, std::max<std::uint64_t>(options.batch_size, 1));

  std::vector<double> values(batch * n_obs);
  std::vector<std::uint64_t> updates(batch);
  std::vector<std::uint64_t> clamps(batch);
  std::vector<RunningStats> stats(n_obs);
  std::uint64_t total_updates = 0;
  std::uint64_t total_clamps = 0;

  run_batches(
      ex, n_paths, master_seed, options,
      [&](std::uint64_t i, const PathResult& path) {
        const std::uint64_t slot = i % batch;
        for (std::size_t j = 0; j < n_obs; ++j) {
          values[slot * n_obs + j] = observables[j](path.final_state);
        }
        updates[slot] = path.update_count;
        clamps[slot] = path.clamp_events;
      },
      [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
          const std::uint64_t slot = i % batch;
          for (std::size_t j = 0; j < n_obs; ++j) {
            stats[j].add(values[slot * n_obs + j]);
          }
          total_updates += updates[slot];
          total_clamps += clamps[slot];
        }
      });

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  std::vector<EnsembleStats> out;
  out.reserve(n_obs);
  for (const auto& s : stats) {
    EnsembleStats e;
    e.n_paths = n_paths;
    e.mean = s.mean();
    e.sample_variance = s.variance();
    e.ci_halfwidth =
        kConfidenceZ * std::sqrt(e.sample_variance / static_cast<double>(n_paths));
    e.total_updates = total_updates;
    e.total_clamp_events = total_clamps;
    e.wall_time = elapsed;
    out.push_back(e);
  }
  return out;
}

EnsembleStats estimate(const Experiment& experiment,
                       const Observable& observable, std::uint64_t n_paths,
                       std::uint64_t master_seed,
                       const EnsembleOptions& options) {
  return estimate_many(experiment, std::span<const Observable>(&observable, 1),
                       n_paths, master_seed, options)
      .front();
}

EnsembleStats run_batched(const Experiment& experiment,
                          const Observable& observable, std::uint64_t n_paths,
                          std::uint64_t master_seed, std::uint64_t batch_size,
                          unsigned workers) {
  return estimate(experiment, observable, n_paths, master_seed,
                  EnsembleOptions{workers, batch_size});
}

void for_each_path(const Experiment& experiment, std::uint64_t n_paths,
                   std::uint64_t master_seed, const EnsembleOptions& options,
                   const std::function<void(std::uint64_t, const PathResult&)>&
                       sink) {
  if (n_paths == 0) return;
  const std::uint64_t batch = std::min(n_paths, std::max<std::uint64_t>(options.batch_size, 1));
  std::vector<PathResult> results(batch);
  run_batches(
      experiment, n_paths, master_seed, options,
      [&](std::uint64_t i, PathResult&& path) {
        results[i % batch] = std::move(path);
      },
      [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) sink(i, results[i % batch]);
      });
}

std::uint64_t required_paths(double target_halfwidth, double pilot_variance) {
  if (!(target_halfwidth > 0.0) || !std::isfinite(target_halfwidth)) {
    throw DomainError("target half-width must be positive and finite");
  }
  if (!(pilot_variance >= 0.0) || !std::isfinite(pilot_variance)) {
    throw DomainError("pilot variance must be nonnegative and finite");
  }
  const double bound = std::pow(target_halfwidth / kConfidenceZ, 2);
  if (pilot_variance == 0.0) return 1;
  auto n = static_cast<std::uint64_t>(std::ceil(pilot_variance / bound));
  n = std::max<std::uint64_t>(n, 1);
  while (n > 1 && pilot_variance / static_cast<double>(n - 1) <= bound) --n;
  while (pilot_variance / static_cast<double>(n) > bound) ++n;
  return n;
}

}  // namespace crnsim
