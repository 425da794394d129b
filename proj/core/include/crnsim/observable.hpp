#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "crnsim/network.hpp"

namespace crnsim {

/// Function f of the final state whose expectation is estimated.
struct Observable {
  enum class Kind {
    Constant,          ///< f(x) = value
    Count,             ///< f(x) = x_i
    CountSquared,      ///< f(x) = x_i^2
    IndicatorAtLeast,  ///< f(x) = 1{x_i >= threshold}
  };

  Kind kind = Kind::Count;
  std::size_t species = 0;
  Count threshold = 0;
  double value = 1.0;

  static Observable constant(double v) { return {Kind::Constant, 0, 0, v}; }
  static Observable count(std::size_t i) { return {Kind::Count, i, 0, 1.0}; }
  static Observable count_squared(std::size_t i) {
    return {Kind::CountSquared, i, 0, 1.0};
  }
  static Observable indicator_at_least(std::size_t i, Count threshold) {
    return {Kind::IndicatorAtLeast, i, threshold, 1.0};
  }

  double operator()(std::span<const Count> x) const {
    switch (kind) {
      case Kind::Constant:
        return value;
      case Kind::Count:
        return static_cast<double>(x[species]);
      case Kind::CountSquared: {
        const auto v = static_cast<double>(x[species]);
        return v * v;
      }
      case Kind::IndicatorAtLeast:
        return x[species] >= threshold ? 1.0 : 0.0;
    }
    return 0.0;
  }

  friend bool operator==(const Observable&, const Observable&) = default;
};

/// Parses `count(X)`, `count2(X)`, `indicator(X >= n)` or `const(v)`.
/// Throws ParseError (with column) on malformed text or an unknown species.
Observable parse_observable(std::string_view text,
                            const ReactionNetwork& network);

/// Inverse of parse_observable.
std::string to_string(const Observable& f, const ReactionNetwork& network);

}  // namespace crnsim
