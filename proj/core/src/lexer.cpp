#include "lexer.hpp"

#include <charconv>
#include <cmath>

#include "crnsim/error.hpp"

namespace crnsim::detail {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

constexpr std::string_view kEmptySetUtf8 = "\xE2\x88\x85";

// Length of a number starting at s[i], or 0.
std::size_t number_length(std::string_view s, std::size_t i) {
  std::size_t j = i;
  if (j < s.size() && s[j] == '-') ++j;
  const std::size_t digits_start = j;
  while (j < s.size() && is_digit(s[j])) ++j;
  bool have_digits = j > digits_start;
  if (j < s.size() && s[j] == '.') {
    const std::size_t frac_start = ++j;
    while (j < s.size() && is_digit(s[j])) ++j;
    have_digits = have_digits || j > frac_start;
  }
  if (!have_digits) return 0;
  if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
    std::size_t k = j + 1;
    if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
    if (k < s.size() && is_digit(s[k])) {
      while (k < s.size() && is_digit(s[k])) ++k;
      j = k;
    }
  }
  return j - i;
}

}  // namespace

std::vector<Token> tokenize(std::string_view line, std::size_t line_no,
                            std::size_t column_offset) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto push = [&](TokenKind kind, std::size_t len) {
    tokens.push_back({kind, line.substr(i, len), column_offset + i + 1});
    i += len;
  };
  while (i < line.size()) {
    const char c = line[i];
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else if (line.substr(i, 3) == "<->") {
      push(TokenKind::RevArrow, 3);
    } else if (line.substr(i, 2) == "->") {
      push(TokenKind::Arrow, 2);
    } else if (line.substr(i, 2) == ">=") {
      push(TokenKind::GreaterEq, 2);
    } else if (line.substr(i, kEmptySetUtf8.size()) == kEmptySetUtf8) {
      push(TokenKind::EmptySet, kEmptySetUtf8.size());
    } else if (c == '+') {
      push(TokenKind::Plus, 1);
    } else if (c == '@') {
      push(TokenKind::At, 1);
    } else if (c == ',') {
      push(TokenKind::Comma, 1);
    } else if (c == '=') {
      push(TokenKind::Equals, 1);
    } else if (c == '(') {
      push(TokenKind::LParen, 1);
    } else if (c == ')') {
      push(TokenKind::RParen, 1);
    } else if (is_ident_start(c)) {
      std::size_t j = i + 1;
      while (j < line.size() && is_ident_char(line[j])) ++j;
      push(TokenKind::Ident, j - i);
    } else if (const std::size_t len = number_length(line, i); len > 0) {
      push(TokenKind::Number, len);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'",
                       line_no, column_offset + i + 1);
    }
  }
  tokens.push_back({TokenKind::End, {}, column_offset + line.size() + 1});
  return tokens;
}

std::string_view describe(TokenKind kind) noexcept {
  switch (kind) {
    case TokenKind::Ident:
      return "species name";
    case TokenKind::Number:
      return "number";
    case TokenKind::Arrow:
      return "'->'";
    case TokenKind::RevArrow:
      return "'<->'";
    case TokenKind::Plus:
      return "'+'";
    case TokenKind::At:
      return "'@'";
    case TokenKind::Comma:
      return "','";
    case TokenKind::Equals:
      return "'='";
    case TokenKind::LParen:
      return "'('";
    case TokenKind::RParen:
      return "')'";
    case TokenKind::GreaterEq:
      return "'>='";
    case TokenKind::EmptySet:
      return "empty complex";
    case TokenKind::End:
      return "end of line";
  }
  return "token";
}

const Token& TokenStream::expect(TokenKind kind, std::string_view what) {
  if (peek().kind != kind) {
    fail(peek(), "expected " + std::string(what) + ", found " +
                     (peek().kind == TokenKind::End
                          ? std::string("end of line")
                          : "'" + std::string(peek().text) + "'"));
  }
  return next();
}

void TokenStream::fail(const Token& at, const std::string& message) const {
  throw ParseError(message, line_, at.column);
}

double number_value(const TokenStream& ts, const Token& token) {
  double value = 0.0;
  const auto* first = token.text.data();
  const auto* last = first + token.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    ts.fail(token, "invalid number '" + std::string(token.text) + "'");
  }
  return value;
}

long long integer_value(const TokenStream& ts, const Token& token,
                        long long min, long long max) {
  long long value = 0;
  const auto* first = token.text.data();
  const auto* last = first + token.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    ts.fail(token, "expected an integer, found '" + std::string(token.text) + "'");
  }
  if (value < min || value > max) {
    ts.fail(token, "integer " + std::string(token.text) + " out of range [" +
                       std::to_string(min) + ", " + std::to_string(max) + "]");
  }
  return value;
}

}  // namespace crnsim::detail
