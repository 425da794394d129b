#include "crnsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include "crnsim/error.hpp"

namespace crnsim {

namespace {

std::vector<Term> normalize_complex(const std::vector<Term>& terms,
                                    std::size_t n_species) {
  std::map<std::size_t, int> merged;
  for (const auto& t : terms) {
    if (t.species >= n_species) {
      throw StructuralError("reaction references undeclared species index " +
                            std::to_string(t.species));
    }
    if (t.coefficient < 0) {
      throw StructuralError("negative stoichiometric coefficient");
    }
    merged[t.species] += t.coefficient;
  }
  std::vector<Term> out;
  for (const auto& [species, coefficient] : merged) {
    if (coefficient == 0) continue;
    if (coefficient > kMaxStoichiometry) {
      throw StructuralError("stoichiometric coefficient " +
                            std::to_string(coefficient) + " exceeds " +
                            std::to_string(kMaxStoichiometry));
    }
    out.push_back({species, coefficient});
  }
  return out;
}

template <typename T>
double propensity_impl(const Reaction& r, std::span<const T> state) {
  double value = r.rate_constant;
  for (const auto& term : r.inputs) {
    value *= falling_factorial(static_cast<double>(state[term.species]),
                               term.coefficient);
  }
  return value > 0.0 ? value : 0.0;
}

template <typename T>
void propensities_impl(const ReactionNetwork& network, std::span<const T> state,
                       std::span<double> out) {
  if (state.size() != network.n_species()) {
    throw StructuralError("state has " + std::to_string(state.size()) +
                          " components, network has " +
                          std::to_string(network.n_species()) + " species");
  }
  if (out.size() != network.n_reactions()) {
    throw StructuralError("propensity buffer has wrong length");
  }
  const auto& reactions = network.reactions();
  for (std::size_t k = 0; k < reactions.size(); ++k) {
    out[k] = propensity_impl(reactions[k], state);
  }
}

// Exact rational used by the null-space elimination. Entries stay tiny for
// stoichiometry bounded by kMaxStoichiometry.
struct Rational {
  Count num = 0;
  Count den = 1;

  Rational() = default;
  Rational(Count n, Count d = 1) : num(n), den(d) { reduce(); }

  void reduce() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const Count g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  bool is_zero() const { return num == 0; }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return {a.num * b.den - b.num * a.den, a.den * b.den};
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return {a.num * b.num, a.den * b.den};
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    return {a.num * b.den, a.den * b.num};
  }
};

}  // namespace

int Reaction::order() const noexcept {
  int total = 0;
  for (const auto& t : inputs) total += t.coefficient;
  return total;
}

JumpVector jump_vector(const Reaction& reaction, std::size_t n_species) {
  JumpVector zeta(n_species, 0);
  for (const auto& t : reaction.outputs) zeta.at(t.species) += t.coefficient;
  for (const auto& t : reaction.inputs) zeta.at(t.species) -= t.coefficient;
  return zeta;
}

ReactionNetwork::ReactionNetwork(std::vector<std::string> species_names,
                                 std::vector<Reaction> reactions)
    : names_(std::move(species_names)) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw StructuralError("empty species name");
    if (!seen.insert(names_[i]).second) {
      throw StructuralError("duplicate species name '" + names_[i] + "'");
    }
    species_.push_back({i, names_[i]});
  }
  if (reactions.empty()) {
    throw StructuralError("a reaction network needs at least one reaction");
  }
  const std::size_t d = names_.size();
  for (auto& r : reactions) {
    if (!std::isfinite(r.rate_constant) || r.rate_constant <= 0.0) {
      throw DomainError("rate constant must be positive and finite");
    }
    r.inputs = normalize_complex(r.inputs, d);
    r.outputs = normalize_complex(r.outputs, d);
    if (r.inputs.empty() && r.outputs.empty()) {
      throw StructuralError("reaction has empty input and output complexes");
    }
  }
  reactions_ = std::move(reactions);

  for (const auto& r : reactions_) {
    jumps_.push_back(jump_vector(r, d));
    std::vector<std::size_t> changed;
    for (std::size_t i = 0; i < d; ++i) {
      if (jumps_.back()[i] != 0) changed.push_back(i);
    }
    changed_.push_back(std::move(changed));
  }
  const std::size_t R = reactions_.size();
  dependents_.resize(R);
  for (std::size_t k = 0; k < R; ++k) {
    for (std::size_t j = 0; j < R; ++j) {
      const bool depends = std::any_of(
          reactions_[j].inputs.begin(), reactions_[j].inputs.end(),
          [&](const Term& t) {
            return std::find(changed_[k].begin(), changed_[k].end(),
                             t.species) != changed_[k].end();
          });
      if (depends) dependents_[k].push_back(j);
    }
  }
}

std::size_t ReactionNetwork::species_index(std::string_view name) const {
  for (const auto& s : species_) {
    if (s.name == name) return s.index;
  }
  throw StructuralError("unknown species '" + std::string(name) + "'");
}

bool ReactionNetwork::has_species(std::string_view name) const noexcept {
  return std::any_of(species_.begin(), species_.end(),
                     [&](const Species& s) { return s.name == name; });
}

double falling_factorial(double x, int m) noexcept {
  double value = 1.0;
  for (int j = 0; j < m; ++j) value *= (x - j);
  return value;
}

double propensity(const ReactionNetwork& network, std::size_t k,
                  std::span<const double> state) {
  if (state.size() != network.n_species()) {
    throw StructuralError("state dimension mismatch");
  }
  return propensity_impl(network.reaction(k), state);
}

double propensity(const ReactionNetwork& network, std::size_t k,
                  std::span<const Count> state) {
  if (state.size() != network.n_species()) {
    throw StructuralError("state dimension mismatch");
  }
  return propensity_impl(network.reaction(k), state);
}

void propensities(const ReactionNetwork& network, std::span<const double> state,
                  std::span<double> out) {
  propensities_impl(network, state, out);
}

void propensities(const ReactionNetwork& network, std::span<const Count> state,
                  std::span<double> out) {
  propensities_impl(network, state, out);
}

std::vector<double> propensities(const ReactionNetwork& network,
                                 std::span<const Count> state) {
  std::vector<double> out(network.n_reactions());
  propensities_impl(network, state, std::span<double>(out));
  return out;
}

std::vector<double> propensities(const ReactionNetwork& network,
                                 std::span<const double> state) {
  std::vector<double> out(network.n_reactions());
  propensities_impl(network, state, std::span<double>(out));
  return out;
}

std::vector<std::vector<Count>> conservation_laws(
    const ReactionNetwork& network) {
  // Null space of the R x d matrix whose rows are the jump vectors.
  const std::size_t R = network.n_reactions();
  const std::size_t d = network.n_species();
  std::vector<std::vector<Rational>> m(R, std::vector<Rational>(d));
  for (std::size_t k = 0; k < R; ++k) {
    for (std::size_t i = 0; i < d; ++i) m[k][i] = Rational(network.jump(k)[i]);
  }

  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t col = 0; col < d && row < R; ++col) {
    std::size_t p = row;
    while (p < R && m[p][col].is_zero()) ++p;
    if (p == R) continue;
    std::swap(m[p], m[row]);
    const Rational pivot = m[row][col];
    for (auto& v : m[row]) v = v / pivot;
    for (std::size_t r = 0; r < R; ++r) {
      if (r == row || m[r][col].is_zero()) continue;
      const Rational factor = m[r][col];
      for (std::size_t c = 0; c < d; ++c) m[r][c] = m[r][c] - factor * m[row][c];
    }
    pivot_cols.push_back(col);
    ++row;
  }

  std::vector<std::vector<Count>> basis;
  for (std::size_t free_col = 0; free_col < d; ++free_col) {
    if (std::find(pivot_cols.begin(), pivot_cols.end(), free_col) !=
        pivot_cols.end()) {
      continue;
    }
    std::vector<Rational> w(d, Rational(0));
    w[free_col] = Rational(1);
    for (std::size_t r = 0; r < pivot_cols.size(); ++r) {
      w[pivot_cols[r]] = Rational(0) - m[r][free_col];
    }
    Count lcm = 1;
    for (const auto& v : w) lcm = std::lcm(lcm, v.den);
    std::vector<Count> iw(d);
    Count g = 0;
    for (std::size_t i = 0; i < d; ++i) {
      iw[i] = w[i].num * (lcm / w[i].den);
      g = std::gcd(g, iw[i]);
    }
    const auto lead = std::find_if(iw.begin(), iw.end(),
                                   [](Count v) { return v != 0; });
    const Count sign = (lead != iw.end() && *lead < 0) ? -1 : 1;
    for (auto& v : iw) v = sign * v / g;
    basis.push_back(std::move(iw));
  }
  return basis;
}

std::size_t apply_jumps(const ReactionNetwork& network, State& state,
                        std::span<const Count> firings, ClampPolicy clamp) {
  if (firings.size() != network.n_reactions()) {
    throw StructuralError("firings vector has wrong length");
  }
  if (state.size() != network.n_species()) {
    throw StructuralError("state dimension mismatch");
  }
  for (std::size_t k = 0; k < firings.size(); ++k) {
    const Count n = firings[k];
    if (n == 0) continue;
    const auto& zeta = network.jump(k);
    for (const std::size_t i : network.changed_species(k)) {
      state[i] += n * zeta[i];
    }
  }
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] < 0) {
      if (clamp == ClampPolicy::StrictError) {
        throw ClampError("species '" + network.species()[i].name +
                         "' went negative (" + std::to_string(state[i]) + ")");
      }
      state[i] = 0;
      ++clamped;
    }
  }
  return clamped;
}

}  // namespace crnsim
