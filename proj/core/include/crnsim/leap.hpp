#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crnsim/network.hpp"
#include "crnsim/path.hpp"
#include "crnsim/rng.hpp"

namespace crnsim {

enum class LeapMethod { Euler, Midpoint, WeakTrapezoidal };

struct LeapConfig {
  LeapMethod method = LeapMethod::Euler;
  double h = 0.0;
  double theta = 0.5;          ///< weak trapezoidal only
  bool rho_rounding = false;   ///< midpoint only: round the predictor
  ClampPolicy clamp = ClampPolicy::ZeroFloor;
};

/// Weights of the weak trapezoidal corrector stage.
struct XiPair {
  double xi1 = 0.0;
  double xi2 = 0.0;
};

/// xi1 = 1 / (2 theta (1 - theta)), xi2 = ((1 - theta)^2 + theta^2) xi1, so
/// that xi1 - xi2 = 1. Throws DomainError unless 0 < theta < 1.
XiPair xi_coefficients(double theta);

/// Number of steps of length h needed to reach T; the last one is truncated.
/// A relative slack of 1e-10 absorbs representation error in h (so that
/// h = 3^-4 takes exactly 2 * 81 steps to reach T = 2).
std::uint64_t leap_step_count(double T, double h);

/// Deterministic half-step predictor z + (h / 2) sum_k lambda_k(z) zeta_k,
/// optionally rounded to the nearest integer.
std::vector<double> midpoint_rho(const ReactionNetwork& network,
                                 std::span<const Count> z, double h,
                                 bool round_to_integer = false);

/// Explicit tau-leaping.
PathResult euler_path(const ReactionNetwork& network, const State& x0,
                      double T, double h, StreamGenerator& gen,
                      ClampPolicy clamp = ClampPolicy::ZeroFloor,
                      const PathOptions& options = {});

/// Euler with Poisson means evaluated at midpoint_rho of the current state.
PathResult midpoint_path(const ReactionNetwork& network, const State& x0,
                         double T, double h, StreamGenerator& gen,
                         ClampPolicy clamp = ClampPolicy::ZeroFloor,
                         bool rho_rounding = false,
                         const PathOptions& options = {});

/// Two-stage weak trapezoidal leap: an Euler substep of length theta h to y*,
/// then a corrector of length (1 - theta) h with per-channel means
/// [xi1 lambda_k(y*) - xi2 lambda_k(z)]^+.
PathResult weak_trap_path(const ReactionNetwork& network, const State& x0,
                          double T, double h, double theta,
                          StreamGenerator& gen,
                          ClampPolicy clamp = ClampPolicy::ZeroFloor,
                          const PathOptions& options = {});

PathResult leap_path(const ReactionNetwork& network, const State& x0, double T,
                     const LeapConfig& config, StreamGenerator& gen,
                     const PathOptions& options = {});

inline constexpr double kDefaultStabilityFactor = 10.0;

/// Heuristic step-size check: warns when h * sum_k lambda_k(x0) exceeds
/// `factor` times the largest species count in x0, i.e. when a single leap is
/// expected to move the state by more than its own magnitude.
std::optional<std::string> stability_warning(
    const ReactionNetwork& network, const State& x0, double h,
    double factor = kDefaultStabilityFactor);

}  // namespace crnsim
