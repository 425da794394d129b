#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crnsim/ensemble.hpp"
#include "crnsim/network.hpp"
#include "crnsim/observable.hpp"
#include "crnsim/simulation.hpp"

namespace crnsim {

/// A point enters a slope fit only if bias_abs > kNoiseGate * bias_ci.
inline constexpr double kNoiseGate = 3.0;

/// Minimum drop in slope from the large-h to the small-h window that counts
/// as an order crossover.
inline constexpr double kCrossoverMargin = 0.5;

/// Ground truth E f(X(T)) for a bias sweep.
struct Reference {
  enum class Source { MomentOracle, ExactEnsemble, File };

  double value = 0.0;
  double ci_halfwidth = 0.0;  ///< zero for the moment oracle
  Source source = Source::MomentOracle;
};

std::string_view to_string(Reference::Source source) noexcept;

struct BiasPoint {
  double h = 0.0;
  double estimate = 0.0;
  double bias_abs = 0.0;
  /// Reference and ensemble CI half-widths combined in quadrature.
  double bias_ci = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t total_updates = 0;

  bool signal_dominated(double gate = kNoiseGate) const noexcept {
    return bias_abs > gate * bias_ci;
  }
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  ///< natural log of the prefactor
  double residual = 0.0;   ///< RMS of the log-log residuals
  std::vector<double> used_h;
  std::vector<double> excluded_h;  ///< noise-dominated points
};

struct ConvergenceReport {
  std::string method;
  std::string observable;
  double T = 0.0;
  Reference reference;
  std::vector<BiasPoint> points;
  /// Absent when fewer than two points survive noise gating.
  std::optional<SlopeFit> fit;
};

/// Reference from the moment oracle for count/count2 observables on a
/// first-order network. Throws UnsupportedError otherwise.
Reference oracle_reference(const ReactionNetwork& network, const State& x0,
                           double T, const Observable& observable);

/// h values 3^-from ... 3^-to (from <= to), decreasing.
std::vector<double> powers_of_three(int from, int to);

/// Seed for the (method, h) cell of a sweep; independent across cells.
std::uint64_t cell_seed(std::uint64_t master_seed, Method method, double h);

/// One ensemble per h (sorted into strictly decreasing order) with the method
/// in `method`; `n_paths` holds one count for all points or one per h.
/// Throws DomainError on duplicate or non-positive h.
std::vector<BiasPoint> bias_curve(const MethodConfig& method,
                                  const ReactionNetwork& network,
                                  const State& x0, double T,
                                  const Observable& observable,
                                  std::span<const double> h_list,
                                  std::span<const std::uint64_t> n_paths,
                                  const Reference& reference,
                                  std::uint64_t master_seed,
                                  const EnsembleOptions& options = {});

/// Least squares of log(bias_abs) on log(h) over the signal-dominated points.
/// Throws InsufficientSignal, naming the excluded h values, when fewer than
/// two points remain.
SlopeFit fit_slope(std::span<const BiasPoint> points,
                   double gate = kNoiseGate);

struct CrossoverResult {
  SlopeFit large_h;
  SlopeFit small_h;
  /// large_h.slope - small_h.slope >= kCrossoverMargin
  bool crossover = false;
};

CrossoverResult crossover_from_points(std::span<const BiasPoint> large_window,
                                      std::span<const BiasPoint> small_window);

/// Runs bias_curve on two disjoint h windows and fits each.
CrossoverResult crossover_scan(const MethodConfig& method,
                               const ReactionNetwork& network, const State& x0,
                               double T, const Observable& observable,
                               std::span<const double> large_window,
                               std::span<const double> small_window,
                               std::span<const std::uint64_t> n_paths_large,
                               std::span<const std::uint64_t> n_paths_small,
                               const Reference& reference,
                               std::uint64_t master_seed,
                               const EnsembleOptions& options = {});

}  // namespace crnsim
