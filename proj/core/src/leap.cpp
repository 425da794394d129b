#include "crnsim/leap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crnsim/error.hpp"

namespace crnsim {

namespace {

void check_leap_inputs(const ReactionNetwork& network, const State& x0,
                       double T, double h) {
  if (x0.size() != network.n_species()) {
    throw StructuralError("initial state dimension mismatch");
  }
  for (const Count c : x0) {
    if (c < 0) throw DomainError("initial state must be nonnegative");
  }
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw DomainError("final time T must be positive and finite");
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("step size h must be positive and finite");
  }
}

// Scratch buffers shared by the three schemes.
struct LeapWorkspace {
  std::vector<double> lambda;
  std::vector<double> lambda_stage;
  std::vector<double> rho;
  std::vector<Count> firings;

  explicit LeapWorkspace(const ReactionNetwork& network)
      : lambda(network.n_reactions()),
        lambda_stage(network.n_reactions()),
        rho(network.n_species()),
        firings(network.n_reactions()) {}
};

// Draws Poisson(mean_k * scale) for every channel and applies the jumps.
std::size_t leap_stage(const ReactionNetwork& network, State& z,
                       std::span<const double> means, double scale,
                       std::vector<Count>& firings, StreamGenerator& gen,
                       ClampPolicy clamp) {
  for (std::size_t k = 0; k < means.size(); ++k) {
    firings[k] = sample_poisson(means[k] * scale, gen);
  }
  return apply_jumps(network, z, firings, clamp);
}

void fill_rho(const ReactionNetwork& network, std::span<const Count> z,
              std::span<const double> lambda, double h, bool round_to_integer,
              std::span<double> rho) {
  for (std::size_t i = 0; i < z.size(); ++i) rho[i] = static_cast<double>(z[i]);
  for (std::size_t k = 0; k < lambda.size(); ++k) {
    if (lambda[k] == 0.0) continue;
    const auto& zeta = network.jump(k);
    for (const std::size_t i : network.changed_species(k)) {
      rho[i] += 0.5 * h * lambda[k] * static_cast<double>(zeta[i]);
    }
  }
  if (round_to_integer) {
    for (auto& v : rho) v = std::round(v);
  }
}

template <typename Step>
PathResult run_leap(const ReactionNetwork& network, const State& x0, double T,
                    double h, std::uint64_t stages, const PathOptions& options,
                    Step&& step) {
  check_leap_inputs(network, x0, T, h);
  PathResult result;
  State z = x0;
  const std::uint64_t n_steps = leap_step_count(T, h);
  if (options.record_trajectory) result.trajectory.push_back({0.0, z});
  for (std::uint64_t n = 0; n < n_steps; ++n) {
    const double t_n = static_cast<double>(n) * h;
    const double h_step = (n + 1 == n_steps) ? T - t_n : h;
    result.clamp_events += step(z, t_n, h_step, result);
    if (options.record_trajectory) {
      result.trajectory.push_back({n + 1 == n_steps ? T : t_n + h_step, z});
    }
  }
  result.steps = n_steps;
  result.update_count = n_steps * stages * network.n_reactions();
  result.final_state = std::move(z);
  return result;
}

}  // namespace

XiPair xi_coefficients(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError("theta must lie in the open interval (0, 1)");
  }
  const double denom = theta * (1.0 - theta);
  const double xi1 = 0.5 / denom;
  const double xi2 = 0.5 * ((1.0 - theta) * (1.0 - theta) + theta * theta) / denom;
  return {xi1, xi2};
}

std::uint64_t leap_step_count(double T, double h) {
  if (!(T > 0.0) || !(h > 0.0)) {
    throw DomainError("leap_step_count needs T > 0 and h > 0");
  }
  const double ratio = T / h;
  const double n = std::ceil(ratio * (1.0 - 1e-10));
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

std::vector<double> midpoint_rho(const ReactionNetwork& network,
                                 std::span<const Count> z, double h,
                                 bool round_to_integer) {
  const auto lambda = propensities(network, z);
  std::vector<double> rho(network.n_species());
  fill_rho(network, z, lambda, h, round_to_integer, rho);
  return rho;
}

PathResult euler_path(const ReactionNetwork& network, const State& x0,
                      double T, double h, StreamGenerator& gen,
                      ClampPolicy clamp, const PathOptions& options) {
  LeapWorkspace ws(network);
  return run_leap(network, x0, T, h, 1, options,
                  [&](State& z, double, double h_step, PathResult&) {
                    propensities(network, std::span<const Count>(z),
                                 std::span<double>(ws.lambda));
                    return leap_stage(network, z, ws.lambda, h_step,
                                      ws.firings, gen, clamp);
                  });
}

PathResult midpoint_path(const ReactionNetwork& network, const State& x0,
                         double T, double h, StreamGenerator& gen,
                         ClampPolicy clamp, bool rho_rounding,
                         const PathOptions& options) {
  LeapWorkspace ws(network);
  return run_leap(
      network, x0, T, h, 1, options,
      [&](State& z, double, double h_step, PathResult&) {
        propensities(network, std::span<const Count>(z),
                     std::span<double>(ws.lambda));
        fill_rho(network, z, ws.lambda, h_step, rho_rounding, ws.rho);
        // propensities() clamps negative values at zero.
        propensities(network, std::span<const double>(ws.rho),
                     std::span<double>(ws.lambda_stage));
        return leap_stage(network, z, ws.lambda_stage, h_step, ws.firings, gen,
                          clamp);
      });
}

PathResult weak_trap_path(const ReactionNetwork& network, const State& x0,
                          double T, double h, double theta,
                          StreamGenerator& gen, ClampPolicy clamp,
                          const PathOptions& options) {
  const XiPair xi = xi_coefficients(theta);
  LeapWorkspace ws(network);
  return run_leap(
      network, x0, T, h, 2, options,
      [&](State& z, double t_n, double h_step, PathResult& result) {
        propensities(network, std::span<const Count>(z),
                     std::span<double>(ws.lambda));
        std::size_t clamped = leap_stage(network, z, ws.lambda, theta * h_step,
                                         ws.firings, gen, clamp);
        if (options.record_trajectory) {
          result.trajectory.push_back({t_n + theta * h_step, z});
        }
        // z now holds y*; ws.lambda still holds the intensities at Z(t_n).
        propensities(network, std::span<const Count>(z),
                     std::span<double>(ws.lambda_stage));
        for (std::size_t k = 0; k < ws.lambda_stage.size(); ++k) {
          const double corrected =
              xi.xi1 * ws.lambda_stage[k] - xi.xi2 * ws.lambda[k];
          ws.lambda_stage[k] = corrected > 0.0 ? corrected : 0.0;
        }
        clamped += leap_stage(network, z, ws.lambda_stage,
                              (1.0 - theta) * h_step, ws.firings, gen, clamp);
        return clamped;
      });
}

PathResult leap_path(const ReactionNetwork& network, const State& x0, double T,
                     const LeapConfig& config, StreamGenerator& gen,
                     const PathOptions& options) {
  switch (config.method) {
    case LeapMethod::Euler:
      return euler_path(network, x0, T, config.h, gen, config.clamp, options);
    case LeapMethod::Midpoint:
      return midpoint_path(network, x0, T, config.h, gen, config.clamp,
                           config.rho_rounding, options);
    case LeapMethod::WeakTrapezoidal:
      return weak_trap_path(network, x0, T, config.h, config.theta, gen,
                            config.clamp, options);
  }
  throw DomainError("unknown leap method");
}

std::optional<std::string> stability_warning(const ReactionNetwork& network,
                                             const State& x0, double h,
                                             double factor) {
  const auto lambda = propensities(network, std::span<const Count>(x0));
  double lambda0 = 0.0;
  for (const double v : lambda) lambda0 += v;
  if (lambda0 <= 0.0) return std::nullopt;
  Count largest = 1;
  for (const Count c : x0) largest = std::max(largest, c);
  const double expected_jumps = h * lambda0;
  if (expected_jumps <= factor * static_cast<double>(largest)) {
    return std::nullopt;
  }
  std::ostringstream msg;
  msg << "step size h=" << h << " is likely unstable: h * total intensity = "
      << expected_jumps << " exceeds " << factor << " x the largest count ("
      << largest << ")";
  return msg.str();
}

}  // namespace crnsim
