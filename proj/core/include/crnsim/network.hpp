#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crnsim {

using Count = std::int64_t;

/// Integer path state: one molecule count per species.
using State = std::vector<Count>;

/// Largest stoichiometric coefficient accepted at construction.
inline constexpr int kMaxStoichiometry = 10;

struct Species {
  std::size_t index = 0;
  std::string name;
};

/// One term `coefficient * species` of a complex.
struct Term {
  std::size_t species = 0;
  int coefficient = 0;

  friend bool operator==(const Term&, const Term&) = default;
};

/// Mass-action reaction. `inputs` and `outputs` are sparse, sorted by species
/// index, with strictly positive coefficients.
struct Reaction {
  std::vector<Term> inputs;
  std::vector<Term> outputs;
  double rate_constant = 0.0;

  /// Total input multiplicity.
  int order() const noexcept;

  friend bool operator==(const Reaction&, const Reaction&) = default;
};

using JumpVector = std::vector<Count>;

/// Net change of every species when `reaction` fires once (outputs - inputs).
JumpVector jump_vector(const Reaction& reaction, std::size_t n_species);

enum class ClampPolicy {
  ZeroFloor,    ///< set negative components to zero and count the event
  StrictError,  ///< throw ClampError
};

/// Immutable reaction network. Safe to share across threads.
class ReactionNetwork {
 public:
  /// Validates and normalizes the reactions (merges duplicate terms, sorts by
  /// species). Throws StructuralError on undeclared species, duplicate names,
  /// empty reactions, coefficients above kMaxStoichiometry; DomainError on a
  /// non-positive or non-finite rate constant.
  ReactionNetwork(std::vector<std::string> species_names,
                  std::vector<Reaction> reactions);

  std::size_t n_species() const noexcept { return species_.size(); }
  std::size_t n_reactions() const noexcept { return reactions_.size(); }

  const std::vector<Species>& species() const noexcept { return species_; }
  const std::vector<Reaction>& reactions() const noexcept {
    return reactions_;
  }
  const Reaction& reaction(std::size_t k) const { return reactions_.at(k); }
  const JumpVector& jump(std::size_t k) const { return jumps_.at(k); }

  /// Species index by name; throws StructuralError if absent.
  std::size_t species_index(std::string_view name) const;
  bool has_species(std::string_view name) const noexcept;

  /// Reactions whose propensity depends on a species changed by reaction k
  /// (k itself included when it changes one of its own inputs).
  const std::vector<std::size_t>& dependents(std::size_t k) const {
    return dependents_.at(k);
  }

  /// Species with a nonzero entry in jump(k).
  const std::vector<std::size_t>& changed_species(std::size_t k) const {
    return changed_.at(k);
  }

  friend bool operator==(const ReactionNetwork& a, const ReactionNetwork& b) {
    return a.names_ == b.names_ && a.reactions_ == b.reactions_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Species> species_;
  std::vector<Reaction> reactions_;
  std::vector<JumpVector> jumps_;
  std::vector<std::vector<std::size_t>> changed_;
  std::vector<std::vector<std::size_t>> dependents_;
};

/// Falling factorial x (x-1) ... (x-m+1), with ff(x, 0) = 1. Defined for real
/// x so that it can be evaluated at midpoint predictions.
double falling_factorial(double x, int m) noexcept;

/// Mass-action intensity of reaction k at `state`, clamped at zero.
double propensity(const ReactionNetwork& network, std::size_t k,
                  std::span<const double> state);
double propensity(const ReactionNetwork& network, std::size_t k,
                  std::span<const Count> state);

/// All intensities at `state` into `out` (length R). Throws StructuralError on
/// a dimension mismatch.
void propensities(const ReactionNetwork& network, std::span<const double> state,
                  std::span<double> out);
void propensities(const ReactionNetwork& network, std::span<const Count> state,
                  std::span<double> out);
std::vector<double> propensities(const ReactionNetwork& network,
                                 std::span<const Count> state);
std::vector<double> propensities(const ReactionNetwork& network,
                                 std::span<const double> state);

/// Basis of integer vectors w with w . zeta_k = 0 for every reaction; each
/// vector is primitive (gcd 1) with a positive leading nonzero entry. Empty
/// when the left null space of the stoichiometry matrix is trivial.
std::vector<std::vector<Count>> conservation_laws(
    const ReactionNetwork& network);

/// state += sum_k firings[k] * zeta_k, then applies the clamp policy.
/// Returns the number of species that were clamped to zero.
std::size_t apply_jumps(const ReactionNetwork& network, State& state,
                        std::span<const Count> firings,
                        ClampPolicy clamp = ClampPolicy::ZeroFloor);

}  // namespace crnsim
