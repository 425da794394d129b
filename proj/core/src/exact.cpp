#include "crnsim/exact.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "crnsim/error.hpp"

namespace crnsim {

namespace {

void check_inputs(const ReactionNetwork& network, const State& x0, double T) {
  if (x0.size() != network.n_species()) {
    throw StructuralError("initial state dimension mismatch");
  }
  for (const Count c : x0) {
    if (c < 0) throw DomainError("initial state must be nonnegative");
  }
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw DomainError("final time T must be positive and finite");
  }
}

void fire(const ReactionNetwork& network, std::size_t k, State& state) {
  const auto& zeta = network.jump(k);
  for (const std::size_t i : network.changed_species(k)) state[i] += zeta[i];
}

}  // namespace

PathResult direct_method_path(const ReactionNetwork& network, const State& x0,
                              double T, StreamGenerator& gen,
                              const PathOptions& options) {
  check_inputs(network, x0, T);
  PathResult result;
  State x = x0;
  std::vector<double> a(network.n_reactions());
  double t = 0.0;
  if (options.record_trajectory) result.trajectory.push_back({0.0, x});

  while (true) {
    propensities(network, std::span<const Count>(x), std::span<double>(a));
    double a0 = 0.0;
    for (const double v : a) a0 += v;
    if (a0 <= 0.0) break;  // absorbing
    t += exponential_from_uniform(a0, gen.uniform_open());
    if (t > T) break;
    const std::size_t k = sample_categorical_unchecked(a, a0, gen);
    fire(network, k, x);
    ++result.update_count;
    if (options.record_trajectory) result.trajectory.push_back({t, x});
  }
  result.steps = result.update_count;
  result.final_state = std::move(x);
  return result;
}

PathResult next_reaction_path(const ReactionNetwork& network, const State& x0,
                              double T, StreamGenerator& gen,
                              const PathOptions& options) {
  check_inputs(network, x0, T);
  const std::size_t R = network.n_reactions();
  PathResult result;
  State x = x0;
  std::vector<double> a(R);
  std::vector<double> internal_time(R, 0.0);
  std::vector<double> next_firing(R);
  for (auto& p : next_firing) p = exponential_from_uniform(1.0, gen.uniform_open());
  propensities(network, std::span<const Count>(x), std::span<double>(a));
  double t = 0.0;
  if (options.record_trajectory) result.trajectory.push_back({0.0, x});

  constexpr double kInf = std::numeric_limits<double>::infinity();
  while (true) {
    double dt_min = kInf;
    std::size_t mu = 0;
    for (std::size_t k = 0; k < R; ++k) {
      if (a[k] <= 0.0) continue;
      const double dt = (next_firing[k] - internal_time[k]) / a[k];
      if (dt < dt_min) {
        dt_min = dt;
        mu = k;
      }
    }
    if (dt_min == kInf || t + dt_min > T) break;
    t += dt_min;
    for (std::size_t k = 0; k < R; ++k) internal_time[k] += a[k] * dt_min;
    // Pin the firing clock exactly at its target to avoid drift.
    internal_time[mu] = next_firing[mu];
    next_firing[mu] += exponential_from_uniform(1.0, gen.uniform_open());
    fire(network, mu, x);
    for (const std::size_t j : network.dependents(mu)) {
      a[j] = propensity(network, j, std::span<const Count>(x));
    }
    ++result.update_count;
    if (options.record_trajectory) result.trajectory.push_back({t, x});
  }
  result.steps = result.update_count;
  result.final_state = std::move(x);
  return result;
}

}  // namespace crnsim
