#pragma once

// Tokenizer shared by the network and observable parsers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace crnsim::detail {

enum class TokenKind {
  Ident,
  Number,
  Arrow,     // ->
  RevArrow,  // <->
  Plus,
  At,
  Comma,
  Equals,
  LParen,
  RParen,
  GreaterEq,
  EmptySet,  // ∅
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string_view text;
  std::size_t column = 1;  // 1-based byte offset in the line
};

/// Splits one line into tokens; throws ParseError(line, column) on a
/// character that starts no token.
std::vector<Token> tokenize(std::string_view line, std::size_t line_no,
                            std::size_t column_offset = 0);

std::string_view describe(TokenKind kind) noexcept;

/// Cursor over a token vector that always ends with an End token.
class TokenStream {
 public:
  TokenStream(std::vector<Token> tokens, std::size_t line_no)
      : tokens_(std::move(tokens)), line_(line_no) {}

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }
  bool accept(TokenKind kind) {
    if (peek().kind != kind) return false;
    next();
    return true;
  }
  const Token& expect(TokenKind kind, std::string_view what);
  [[noreturn]] void fail(const Token& at, const std::string& message) const;

  std::size_t line() const noexcept { return line_; }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

/// Parses a Number token as a finite double; ParseError otherwise.
double number_value(const TokenStream& ts, const Token& token);

/// Parses a Number token as an integer in [min, max]; ParseError otherwise.
long long integer_value(const TokenStream& ts, const Token& token,
                        long long min, long long max);

}  // namespace crnsim::detail
