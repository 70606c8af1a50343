#pragma once

#include <stdexcept>
#include <string>

namespace sfnls {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Two objects that must share a grid (field/field, field/weight, ...) do not.
class GridMismatch : public Error {
public:
  using Error::Error;
};

/// A precondition on a numeric argument failed (α out of range, p < 1, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// A noise mode oscillates faster than the grid can represent.
class AliasingError : public Error {
public:
  AliasingError(int mode, double frequency, double nyquist)
      : Error("noise mode l=" + std::to_string(mode) + " has frequency " +
              std::to_string(frequency) + " above the lattice maximum " +
              std::to_string(nyquist)),
        mode_(mode) {}
  int mode() const noexcept { return mode_; }

private:
  int mode_;
};

/// Dispersive fit aborted: mass reached the box boundary.
class WraparoundError : public Error {
public:
  using Error::Error;
};

/// Config file violates the schema; `where` is a key path such as "grid.N".
class ConfigError : public Error {
public:
  ConfigError(std::string where, const std::string& what)
      : Error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

private:
  std::string where_;
};

} // namespace sfnls
