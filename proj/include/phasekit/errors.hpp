#pragma once

#include <stdexcept>
#include <string>

namespace phasekit {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different Hilbert spaces or have incompatible sizes.
class BasisMismatch : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested computation is numerically ill-posed on the chosen path
/// (for example materializing a planar kernel with s > 0).
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// Measurement records do not cover what a reconstruction needs.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// A series evaluation did not converge within the available terms.
class DivergentSeries : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; carries the offending line when known.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what, long line = -1, const std::string& file = "")
      : Error((file.empty() ? "" : file + ": ") + (line >= 0 ? "line " + std::to_string(line) + ": " : "") + what),
        detail_(what),
        line_(line) {}
  long line() const noexcept { return line_; }
  /// Same error, attributed to a file.
  FormatError in_file(const std::string& file) const { return FormatError(detail_, line_, file); }

 private:
  std::string detail_;
  long line_;
};

}  // namespace phasekit
