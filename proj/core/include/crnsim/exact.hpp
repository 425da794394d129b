#pragma once

#include "crnsim/network.hpp"
#include "crnsim/path.hpp"
#include "crnsim/rng.hpp"

namespace crnsim {

/// Gillespie's direct method up to time T. Holding times are Exp(lambda_0)
/// with lambda_0 the total intensity; the firing reaction is drawn with
/// probability proportional to its intensity. A state with lambda_0 = 0 is
/// absorbing and is returned as the state at T.
PathResult direct_method_path(const ReactionNetwork& network, const State& x0,
                              double T, StreamGenerator& gen,
                              const PathOptions& options = {});

/// Modified next reaction method: one unit-rate internal clock per reaction
/// channel, propensities refreshed through the dependency graph. Same law as
/// direct_method_path, different consumption of the random stream.
PathResult next_reaction_path(const ReactionNetwork& network, const State& x0,
                              double T, StreamGenerator& gen,
                              const PathOptions& options = {});

}  // namespace crnsim
