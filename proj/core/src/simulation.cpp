#include "crnsim/simulation.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "crnsim/error.hpp"
#include "crnsim/exact.hpp"

namespace crnsim {

namespace {

std::optional<double> to_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

}  // namespace

bool is_leap(Method m) noexcept {
  return m == Method::Euler || m == Method::Midpoint ||
         m == Method::WeakTrapezoidal;
}

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::Direct:
      return "exact";
    case Method::NextReaction:
      return "nrm";
    case Method::Euler:
      return "euler";
    case Method::Midpoint:
      return "midpoint";
    case Method::WeakTrapezoidal:
      return "weaktrap";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "exact" || name == "direct" || name == "ssa") {
    return Method::Direct;
  }
  if (name == "nrm" || name == "next-reaction") return Method::NextReaction;
  if (name == "euler") return Method::Euler;
  if (name == "midpoint") return Method::Midpoint;
  if (name == "weaktrap" || name == "trap" || name == "weak-trapezoidal") {
    return Method::WeakTrapezoidal;
  }
  return std::nullopt;
}

MethodConfig with_step(MethodConfig config, double h) {
  config.h = h;
  return config;
}

PathResult simulate_path(const ReactionNetwork& network, const State& x0,
                         double T, const MethodConfig& config,
                         StreamGenerator& gen, const PathOptions& options) {
  switch (config.method) {
    case Method::Direct:
      return direct_method_path(network, x0, T, gen, options);
    case Method::NextReaction:
      return next_reaction_path(network, x0, T, gen, options);
    case Method::Euler:
      return euler_path(network, x0, T, config.h, gen, config.clamp, options);
    case Method::Midpoint:
      return midpoint_path(network, x0, T, config.h, gen, config.clamp,
                           config.rho_rounding, options);
    case Method::WeakTrapezoidal:
      return weak_trap_path(network, x0, T, config.h, config.theta, gen,
                            config.clamp, options);
  }
  throw DomainError("unknown simulation method");
}

double parse_step_size(std::string_view text) {
  double value = 0.0;
  if (const auto caret = text.find('^'); caret != std::string_view::npos) {
    const auto base = to_double(text.substr(0, caret));
    const auto exponent = to_double(text.substr(caret + 1));
    if (!base || !exponent) {
      throw DomainError("malformed step size '" + std::string(text) + "'");
    }
    value = std::pow(*base, *exponent);
  } else {
    const auto parsed = to_double(text);
    if (!parsed) {
      throw DomainError("malformed step size '" + std::string(text) + "'");
    }
    value = *parsed;
  }
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError("step size must be positive and finite");
  }
  return value;
}

}  // namespace crnsim
