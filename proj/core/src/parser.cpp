#include "crnsim/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "crnsim/error.hpp"
#include "crnsim/observable.hpp"
#include "crnsim/simulation.hpp"
#include "lexer.hpp"

namespace crnsim {

namespace {

using detail::Token;
using detail::TokenKind;
using detail::TokenStream;

struct PendingReaction {
  std::vector<Term> inputs;
  std::vector<Term> outputs;
  double rate = 0.0;
};

struct PendingObservable {
  std::size_t block = 0;
  std::size_t line = 0;
  std::size_t column = 0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

class DocumentParser {
 public:
  explicit DocumentParser(const ParseOptions& options) : options_(options) {}

  NetworkDocument parse(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t last_line = 1;
    std::size_t pos = 0;
    bool any_content = false;
    while (pos <= text.size()) {
      const auto eol = text.find('\n', pos);
      std::string_view raw = text.substr(
          pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
      pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
      ++line_no;
      if (const auto hash = raw.find('#'); hash != std::string_view::npos) {
        raw = raw.substr(0, hash);
      }
      const std::string_view line = trim(raw);
      if (line.empty()) continue;
      any_content = true;
      last_line = line_no;
      const std::size_t offset = static_cast<std::size_t>(line.data() - raw.data());
      parse_line(line, line_no, offset);
    }
    if (!any_content) throw ParseError("empty document", 1, 1);
    if (reactions_.empty()) {
      throw ParseError("document declares no reactions", last_line, 1);
    }
    return finish();
  }

 private:
  void parse_line(std::string_view line, std::size_t line_no,
                  std::size_t offset) {
    if (line.find("->") != std::string_view::npos) {
      parse_reaction(line, line_no, offset);
      return;
    }
    const std::string_view head = line.substr(0, line.find_first_of(" \t"));
    if (head == "init") {
      parse_init(line.substr(4), line_no, offset + 4);
    } else if (head == "species") {
      parse_species(line.substr(7), line_no, offset + 7);
    } else if (line.front() == '[') {
      const auto close = line.find(']');
      if (close == std::string_view::npos ||
          trim(line.substr(1, close - 1)) != "experiment") {
        throw ParseError("unknown section header (only [experiment] is known)",
                         line_no, offset + 1);
      }
      experiments_.emplace_back();
      parse_key_values(line.substr(close + 1), line_no, offset + close + 1);
    } else if (!experiments_.empty()) {
      parse_key_values(line, line_no, offset);
    } else {
      throw ParseError("expected a reaction, 'init', 'species' or '[experiment]'",
                       line_no, offset + 1);
    }
  }

  std::size_t species_for(const TokenStream& ts, const Token& name) {
    const std::string key(name.text);
    if (const auto it = index_.find(key); it != index_.end()) return it->second;
    if (!options_.auto_declare) {
      ts.fail(name, "unknown species '" + key + "'");
    }
    return declare(key);
  }

  std::size_t declare(const std::string& name) {
    if (const auto it = index_.find(name); it != index_.end()) return it->second;
    const std::size_t i = names_.size();
    names_.push_back(name);
    index_.emplace(name, i);
    return i;
  }

  static bool is_zero_literal(const Token& t) {
    if (t.kind != TokenKind::Number) return false;
    return t.text.find_first_not_of("0") == std::string_view::npos;
  }

  std::vector<Term> parse_complex(TokenStream& ts) {
    std::vector<Term> terms;
    const Token& first = ts.peek();
    const TokenKind after = ts.peek(1).kind;
    const bool at_complex_end = after == TokenKind::Arrow ||
                                after == TokenKind::RevArrow ||
                                after == TokenKind::At || after == TokenKind::End;
    if (first.kind == TokenKind::EmptySet ||
        (is_zero_literal(first) && at_complex_end)) {
      ts.next();
      return terms;
    }
    while (true) {
      int coefficient = 1;
      if (ts.peek().kind == TokenKind::Number) {
        const Token& num = ts.next();
        coefficient = static_cast<int>(
            detail::integer_value(ts, num, 1, kMaxStoichiometry));
      }
      const Token& name = ts.expect(TokenKind::Ident, "species name");
      const std::size_t species = species_for(ts, name);
      auto it = std::find_if(terms.begin(), terms.end(),
                             [&](const Term& t) { return t.species == species; });
      if (it == terms.end()) {
        terms.push_back({species, coefficient});
      } else {
        it->coefficient += coefficient;
        if (it->coefficient > kMaxStoichiometry) {
          ts.fail(name, "stoichiometric coefficient exceeds " +
                            std::to_string(kMaxStoichiometry));
        }
      }
      if (!ts.accept(TokenKind::Plus)) break;
    }
    return terms;
  }

  double parse_rate(TokenStream& ts) {
    const Token& tok = ts.expect(TokenKind::Number, "rate constant");
    const double rate = detail::number_value(ts, tok);
    if (!(rate > 0.0)) {
      ts.fail(tok, "rate constant must be positive, got " + std::string(tok.text));
    }
    return rate;
  }

  void parse_reaction(std::string_view line, std::size_t line_no,
                      std::size_t offset) {
    TokenStream ts(detail::tokenize(line, line_no, offset), line_no);
    const Token& start = ts.peek();
    auto lhs = parse_complex(ts);
    const Token& arrow = ts.peek();
    bool reversible = false;
    if (arrow.kind == TokenKind::RevArrow) {
      reversible = true;
      ts.next();
    } else {
      ts.expect(TokenKind::Arrow, "'->' or '<->'");
    }
    auto rhs = parse_complex(ts);
    if (lhs.empty() && rhs.empty()) {
      ts.fail(start, "reaction has empty input and output complexes");
    }
    ts.expect(TokenKind::At, "'@' before the rate constant");
    const double forward = parse_rate(ts);
    double backward = 0.0;
    if (reversible) {
      ts.expect(TokenKind::Comma, "',' and a backward rate for '<->'");
      backward = parse_rate(ts);
    }
    ts.expect(TokenKind::End, "end of line");
    reactions_.push_back({lhs, rhs, forward});
    if (reversible) reactions_.push_back({rhs, lhs, backward});
  }

  void parse_init(std::string_view rest, std::size_t line_no,
                  std::size_t offset) {
    TokenStream ts(detail::tokenize(rest, line_no, offset), line_no);
    while (ts.peek().kind != TokenKind::End) {
      const Token& name = ts.expect(TokenKind::Ident, "species name");
      const std::size_t species = species_for(ts, name);
      ts.expect(TokenKind::Equals, "'='");
      const Token& value = ts.expect(TokenKind::Number, "molecule count");
      const auto count = detail::integer_value(
          ts, value, 0, std::numeric_limits<Count>::max());
      if (initial_.size() <= species) initial_.resize(species + 1, 0);
      if (initialized_.size() <= species) initialized_.resize(species + 1, false);
      if (initialized_[species]) {
        ts.fail(name, "species '" + std::string(name.text) +
                          "' initialized twice");
      }
      initialized_[species] = true;
      initial_[species] = count;
    }
  }

  void parse_species(std::string_view rest, std::size_t line_no,
                     std::size_t offset) {
    TokenStream ts(detail::tokenize(rest, line_no, offset), line_no);
    while (ts.peek().kind != TokenKind::End) {
      const Token& name = ts.expect(TokenKind::Ident, "species name");
      declare(std::string(name.text));
      ts.accept(TokenKind::Comma);
    }
  }

  // Whitespace-separated `key=value` tokens; a token that does not start with
  // `key=` continues the previous value (observables may contain spaces).
  void parse_key_values(std::string_view rest, std::size_t line_no,
                        std::size_t offset) {
    struct Pair {
      std::string key;
      std::string value;
      std::size_t column;
    };
    std::vector<Pair> pairs;
    std::size_t i = 0;
    while (i < rest.size()) {
      if (rest[i] == ' ' || rest[i] == '\t' || rest[i] == '\r') {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < rest.size() && rest[j] != ' ' && rest[j] != '\t' &&
             rest[j] != '\r') {
        ++j;
      }
      const std::string_view word = rest.substr(i, j - i);
      const auto eq = word.find('=');
      const bool starts_key =
          eq != std::string_view::npos && eq > 0 &&
          std::all_of(word.begin(), word.begin() + static_cast<long>(eq),
                      [](char c) {
                        return std::isalnum(static_cast<unsigned char>(c)) ||
                               c == '_';
                      });
      if (starts_key) {
        pairs.push_back({std::string(word.substr(0, eq)),
                         std::string(word.substr(eq + 1)), offset + i + 1});
      } else if (!pairs.empty()) {
        pairs.back().value += ' ';
        pairs.back().value += word;
      } else {
        throw ParseError("expected key=value", line_no, offset + i + 1);
      }
      i = j;
    }
    ExperimentBlock& block = experiments_.back();
    for (const auto& p : pairs) {
      const std::size_t value_col = p.column + p.key.size() + 1;
      if (p.value.empty()) {
        throw ParseError("missing value for '" + p.key + "'", line_no, value_col);
      }
      auto parse_real = [&](double& out) {
        const auto [ptr, ec] = std::from_chars(
            p.value.data(), p.value.data() + p.value.size(), out);
        if (ec != std::errc() || ptr != p.value.data() + p.value.size() ||
            !std::isfinite(out) || !(out > 0.0)) {
          throw ParseError("'" + p.key + "' must be a positive number",
                           line_no, value_col);
        }
      };
      auto parse_uint = [&](std::uint64_t& out) {
        const auto [ptr, ec] = std::from_chars(
            p.value.data(), p.value.data() + p.value.size(), out);
        if (ec != std::errc() || ptr != p.value.data() + p.value.size()) {
          throw ParseError("'" + p.key + "' must be a nonnegative integer",
                           line_no, value_col);
        }
      };
      if (p.key == "method") {
        if (!parse_method(p.value)) {
          throw ParseError("unknown method '" + p.value + "'", line_no,
                           value_col);
        }
        block.method = p.value;
      } else if (p.key == "h") {
        try {
          block.h = parse_step_size(p.value);
        } catch (const Error& e) {
          throw ParseError(e.what(), line_no, value_col);
        }
      } else if (p.key == "theta") {
        double v = 0.0;
        parse_real(v);
        if (!(v < 1.0)) {
          throw ParseError("theta must lie in (0, 1)", line_no, value_col);
        }
        block.theta = v;
      } else if (p.key == "T") {
        double v = 0.0;
        parse_real(v);
        block.T = v;
      } else if (p.key == "paths") {
        std::uint64_t v = 0;
        parse_uint(v);
        block.paths = v;
      } else if (p.key == "seed") {
        std::uint64_t v = 0;
        parse_uint(v);
        block.seed = v;
      } else if (p.key == "observable") {
        block.observable = p.value;
        observables_.push_back({experiments_.size() - 1, line_no, value_col});
      } else {
        throw ParseError("unknown experiment key '" + p.key + "'", line_no,
                         p.column);
      }
    }
  }

  NetworkDocument finish() {
    std::vector<Reaction> reactions;
    reactions.reserve(reactions_.size());
    for (auto& r : reactions_) {
      reactions.push_back({std::move(r.inputs), std::move(r.outputs), r.rate});
    }
    State initial(names_.size(), 0);
    std::copy(initial_.begin(), initial_.end(), initial.begin());
    NetworkDocument doc{ReactionNetwork(names_, std::move(reactions)),
                        std::move(initial), std::move(experiments_)};
    for (const auto& pending : observables_) {
      try {
        parse_observable(*doc.experiments[pending.block].observable,
                         doc.network);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), pending.line,
                         pending.column + e.column() - 1);
      }
    }
    return doc;
  }

  ParseOptions options_;
  std::vector<std::string> names_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<PendingReaction> reactions_;
  State initial_;
  std::vector<bool> initialized_;
  std::vector<ExperimentBlock> experiments_;
  std::vector<PendingObservable> observables_;
};

void write_complex(std::ostream& out, const std::vector<Term>& terms,
                   const ReactionNetwork& network) {
  if (terms.empty()) {
    out << '0';
    return;
  }
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (j) out << " + ";
    if (terms[j].coefficient != 1) out << terms[j].coefficient << ' ';
    out << network.species()[terms[j].species].name;
  }
}

}  // namespace

NetworkDocument parse_network(std::string_view text,
                              const ParseOptions& options) {
  return DocumentParser(options).parse(text);
}

std::string serialize(const NetworkDocument& doc) {
  std::ostringstream out;
  const auto& net = doc.network;
  out << "species";
  for (const auto& s : net.species()) out << ' ' << s.name;
  out << '\n';
  for (const auto& r : net.reactions()) {
    write_complex(out, r.inputs, net);
    out << " -> ";
    write_complex(out, r.outputs, net);
    out << " @ " << format_double(r.rate_constant) << '\n';
  }
  out << "init";
  for (std::size_t i = 0; i < net.n_species(); ++i) {
    out << ' ' << net.species()[i].name << '=' << doc.initial.at(i);
  }
  out << '\n';
  for (const auto& e : doc.experiments) {
    out << "[experiment]";
    if (e.method) out << " method=" << *e.method;
    if (e.h) out << " h=" << format_double(*e.h);
    if (e.theta) out << " theta=" << format_double(*e.theta);
    if (e.T) out << " T=" << format_double(*e.T);
    if (e.paths) out << " paths=" << *e.paths;
    if (e.seed) out << " seed=" << *e.seed;
    out << '\n';
    if (e.observable) out << "observable=" << *e.observable << '\n';
  }
  return out.str();
}

}  // namespace crnsim
