#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crnsim/network.hpp"

namespace crnsim {

/// `[experiment]` block of a .crn file. Values are kept as written for the
/// string-typed keys; numeric keys are validated at parse time.
struct ExperimentBlock {
  std::optional<std::string> method;
  std::optional<double> h;
  std::optional<double> theta;
  std::optional<double> T;
  std::optional<std::uint64_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> observable;

  friend bool operator==(const ExperimentBlock&,
                         const ExperimentBlock&) = default;
};

struct NetworkDocument {
  ReactionNetwork network;
  State initial;
  std::vector<ExperimentBlock> experiments;

  friend bool operator==(const NetworkDocument&,
                         const NetworkDocument&) = default;
};

struct ParseOptions {
  /// Species seen for the first time in a reaction or init line are declared
  /// on the spot. When false they must appear in a `species` line first.
  bool auto_declare = true;
};

/// Parses the .crn text format:
///
///   # comment
///   species A B C                 (optional explicit declaration)
///   2 A + B -> C @ 0.5
///   A <-> B @ 1.0, 2e-3           (forward reaction first, then backward)
///   0 -> S @ 10                   (`0` or `∅` is the empty complex)
///   init A=100 B=5                (missing species start at 0)
///   [experiment] method=weaktrap h=3^-3 T=1 paths=100000 seed=1
///   observable=count(D)           (continues the current block)
///
/// Throws ParseError carrying line and column.
NetworkDocument parse_network(std::string_view text,
                              const ParseOptions& options = {});

/// Canonical text form; parse_network(serialize(doc)) == doc.
std::string serialize(const NetworkDocument& doc);

}  // namespace crnsim
