#include "crnsim/convergence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "crnsim/error.hpp"
#include "crnsim/moments.hpp"

namespace crnsim {

std::string_view to_string(Reference::Source source) noexcept {
  switch (source) {
    case Reference::Source::MomentOracle:
      return "oracle";
    case Reference::Source::ExactEnsemble:
      return "exact";
    case Reference::Source::File:
      return "file";
  }
  return "unknown";
}

Reference oracle_reference(const ReactionNetwork& network, const State& x0,
                           double T, const Observable& observable) {
  const MomentSystem system = build_moment_system(network);
  const MomentSolution sol = solve_moments(system, x0, T);
  const auto i = static_cast<Eigen::Index>(observable.species);
  Reference ref;
  ref.source = Reference::Source::MomentOracle;
  switch (observable.kind) {
    case Observable::Kind::Count:
      ref.value = sol.mean(i);
      break;
    case Observable::Kind::CountSquared:
      ref.value = sol.second_moment(i, i);
      break;
    case Observable::Kind::Constant:
      ref.value = observable.value;
      break;
    case Observable::Kind::IndicatorAtLeast:
      throw UnsupportedError(
          "the moment oracle provides means and second moments only; indicator "
          "observables need an exact-ensemble reference");
  }
  return ref;
}

std::vector<double> powers_of_three(int from, int to) {
  std::vector<double> h;
  for (int p = from; p <= to; ++p) h.push_back(std::pow(3.0, -p));
  return h;
}

std::uint64_t cell_seed(std::uint64_t master_seed, Method method, double h) {
  return mix_seed(mix_seed(master_seed, static_cast<std::uint64_t>(method)),
                  std::bit_cast<std::uint64_t>(h));
}

std::vector<BiasPoint> bias_curve(const MethodConfig& method,
                                  const ReactionNetwork& network,
                                  const State& x0, double T,
                                  const Observable& observable,
                                  std::span<const double> h_list,
                                  std::span<const std::uint64_t> n_paths,
                                  const Reference& reference,
                                  std::uint64_t master_seed,
                                  const EnsembleOptions& options) {
  if (n_paths.empty() || (n_paths.size() != 1 && n_paths.size() != h_list.size())) {
    throw DomainError("n_paths must hold one entry or one per step size");
  }
  std::vector<std::pair<double, std::uint64_t>> cells;
  for (std::size_t j = 0; j < h_list.size(); ++j) {
    if (!(h_list[j] > 0.0)) throw DomainError("step sizes must be positive");
    cells.emplace_back(h_list[j], n_paths.size() == 1 ? n_paths[0] : n_paths[j]);
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 1; j < cells.size(); ++j) {
    if (cells[j].first == cells[j - 1].first) {
      throw DomainError("duplicate step size in sweep");
    }
  }

  std::vector<BiasPoint> points;
  for (const auto& [h, n] : cells) {
    const MethodConfig config = with_step(method, h);
    const Experiment ex{network, x0, T, config};
    const EnsembleStats stats = estimate(
        ex, observable, n, cell_seed(master_seed, method.method, h), options);
    BiasPoint p;
    p.h = h;
    p.estimate = stats.mean;
    p.bias_abs = std::fabs(reference.value - stats.mean);
    p.bias_ci = std::hypot(reference.ci_halfwidth, stats.ci_halfwidth);
    p.n_paths = n;
    p.total_updates = stats.total_updates;
    points.push_back(p);
  }
  return points;
}

SlopeFit fit_slope(std::span<const BiasPoint> points, double gate) {
  SlopeFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : points) {
    if (p.bias_abs > 0.0 && p.signal_dominated(gate)) {
      fit.used_h.push_back(p.h);
      xs.push_back(std::log(p.h));
      ys.push_back(std::log(p.bias_abs));
    } else {
      fit.excluded_h.push_back(p.h);
    }
  }
  if (xs.size() < 2) {
    std::ostringstream msg;
    msg << "need at least 2 signal-dominated points, have " << xs.size()
        << "; noise-dominated h:";
    for (const double h : fit.excluded_h) msg << ' ' << h;
    throw InsufficientSignal(msg.str());
  }
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw InsufficientSignal("all usable points share one h");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

CrossoverResult crossover_from_points(std::span<const BiasPoint> large_window,
                                      std::span<const BiasPoint> small_window) {
  CrossoverResult result;
  result.large_h = fit_slope(large_window);
  result.small_h = fit_slope(small_window);
  result.crossover =
      result.large_h.slope - result.small_h.slope >= kCrossoverMargin;
  return result;
}

CrossoverResult crossover_scan(const MethodConfig& method,
                               const ReactionNetwork& network, const State& x0,
                               double T, const Observable& observable,
                               std::span<const double> large_window,
                               std::span<const double> small_window,
                               std::span<const std::uint64_t> n_paths_large,
                               std::span<const std::uint64_t> n_paths_small,
                               const Reference& reference,
                               std::uint64_t master_seed,
                               const EnsembleOptions& options) {
  if (large_window.size() < 2 || small_window.size() < 2) {
    throw DomainError("each crossover window needs at least two step sizes");
  }
  const double smallest_large =
      *std::min_element(large_window.begin(), large_window.end());
  const double largest_small =
      *std::max_element(small_window.begin(), small_window.end());
  if (!(largest_small < smallest_large)) {
    throw DomainError("crossover windows must be disjoint, large h first");
  }
  const auto large = bias_curve(method, network, x0, T, observable,
                                large_window, n_paths_large, reference,
                                master_seed, options);
  const auto small = bias_curve(method, network, x0, T, observable,
                                small_window, n_paths_small, reference,
                                master_seed, options);
  return crossover_from_points(large, small);
}

}  // namespace crnsim
