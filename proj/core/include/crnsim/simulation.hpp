#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "crnsim/leap.hpp"
#include "crnsim/network.hpp"
#include "crnsim/path.hpp"
#include "crnsim/rng.hpp"

namespace crnsim {

enum class Method { Direct, NextReaction, Euler, Midpoint, WeakTrapezoidal };

/// A simulation method plus its parameters. `h`, `theta` and `rho_rounding`
/// are ignored by the exact methods.
struct MethodConfig {
  Method method = Method::Direct;
  double h = 0.0;
  double theta = 0.5;
  bool rho_rounding = false;
  ClampPolicy clamp = ClampPolicy::ZeroFloor;

  static MethodConfig direct() { return {}; }
  static MethodConfig next_reaction() { return {Method::NextReaction}; }
  static MethodConfig euler(double h) { return {Method::Euler, h}; }
  static MethodConfig midpoint(double h) { return {Method::Midpoint, h}; }
  static MethodConfig weak_trap(double h, double theta = 0.5) {
    return {Method::WeakTrapezoidal, h, theta};
  }
};

bool is_leap(Method m) noexcept;

/// Canonical lowercase name: exact, nrm, euler, midpoint, weaktrap.
std::string_view method_name(Method m) noexcept;

/// Accepts the canonical names plus a few aliases (direct, ssa,
/// next-reaction, trap, weak-trapezoidal).
std::optional<Method> parse_method(std::string_view name);

/// Same config with a different step size.
MethodConfig with_step(MethodConfig config, double h);

PathResult simulate_path(const ReactionNetwork& network, const State& x0,
                         double T, const MethodConfig& config,
                         StreamGenerator& gen, const PathOptions& options = {});

/// Parses a step size written as a decimal or as `b^e` (e.g. `3^-4`).
/// Throws DomainError on malformed or non-positive values.
double parse_step_size(std::string_view text);

}  // namespace crnsim
