#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace crnsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched dimensions or an ill-formed network.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An argument outside the domain of a sampler or scheme (rate <= 0, theta
/// outside (0,1), non-finite Poisson mean, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested computation is not available for this network, e.g. the
/// moment oracle on a network with bimolecular inputs.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A species count went negative under the StrictError clamp policy.
class ClampError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error("line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Too few signal-dominated points to fit a slope.
class InsufficientSignal : public Error {
 public:
  using Error::Error;
};

/// A single path of an ensemble failed; the ensemble is aborted.
class PathFailure : public Error {
 public:
  PathFailure(std::uint64_t path_index, const std::string& cause)
      : Error("path " + std::to_string(path_index) + " failed: " + cause),
        path_index_(path_index) {}

  std::uint64_t path_index() const noexcept { return path_index_; }

 private:
  std::uint64_t path_index_;
};

}  // namespace crnsim
