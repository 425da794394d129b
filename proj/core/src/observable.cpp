#include "crnsim/observable.hpp"

#include <charconv>
#include <limits>

#include "crnsim/error.hpp"
#include "lexer.hpp"

namespace crnsim {

namespace {

using detail::Token;
using detail::TokenKind;
using detail::TokenStream;

std::size_t species_of(const TokenStream& ts, const Token& name,
                       const ReactionNetwork& network) {
  if (!network.has_species(name.text)) {
    ts.fail(name, "unknown species '" + std::string(name.text) + "'");
  }
  return network.species_index(name.text);
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Observable parse_observable(std::string_view text,
                            const ReactionNetwork& network) {
  TokenStream ts(detail::tokenize(text, 1), 1);
  const Token& head = ts.expect(TokenKind::Ident, "observable name");
  ts.expect(TokenKind::LParen, "'('");
  Observable f;
  if (head.text == "count" || head.text == "count2") {
    const Token& name = ts.expect(TokenKind::Ident, "species name");
    const std::size_t i = species_of(ts, name, network);
    f = head.text == "count" ? Observable::count(i) : Observable::count_squared(i);
  } else if (head.text == "indicator") {
    const Token& name = ts.expect(TokenKind::Ident, "species name");
    const std::size_t i = species_of(ts, name, network);
    ts.expect(TokenKind::GreaterEq, "'>='");
    const Token& num = ts.expect(TokenKind::Number, "threshold");
    const auto n = detail::integer_value(ts, num, 0,
                                         std::numeric_limits<Count>::max());
    f = Observable::indicator_at_least(i, n);
  } else if (head.text == "const") {
    const Token& num = ts.expect(TokenKind::Number, "constant value");
    f = Observable::constant(detail::number_value(ts, num));
  } else {
    ts.fail(head, "unknown observable '" + std::string(head.text) +
                      "' (expected count, count2, indicator or const)");
  }
  ts.expect(TokenKind::RParen, "')'");
  ts.expect(TokenKind::End, "end of observable");
  return f;
}

std::string to_string(const Observable& f, const ReactionNetwork& network) {
  switch (f.kind) {
    case Observable::Kind::Constant:
      return "const(" + shortest(f.value) + ")";
    case Observable::Kind::Count:
      return "count(" + network.species()[f.species].name + ")";
    case Observable::Kind::CountSquared:
      return "count2(" + network.species()[f.species].name + ")";
    case Observable::Kind::IndicatorAtLeast:
      return "indicator(" + network.species()[f.species].name +
             " >= " + std::to_string(f.threshold) + ")";
  }
  return {};
}

}  // namespace crnsim
