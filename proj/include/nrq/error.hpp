#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nrq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid flags, configuration values or API preconditions.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, dimensions, labels).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Parse/format failure at a known location in an input file.
class FormatError : public DataError {
 public:
  enum class Unit { byte, line };

  FormatError(const std::string& what, Unit unit, std::uint64_t position)
      : DataError(what + (unit == Unit::byte ? " (at byte offset " : " (at line ") +
                  std::to_string(position) + ")"),
        unit_(unit),
        position_(position) {}

  Unit unit() const noexcept { return unit_; }
  std::uint64_t position() const noexcept { return position_; }

 private:
  Unit unit_;
  std::uint64_t position_;
};

/// Non-finite values or solver breakdown during numerical work.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nrq
