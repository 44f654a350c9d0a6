// Copyright 2026 The simnoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simnoc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid design-time or experiment parameter. `field()` names the offender.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Address space overflow or a region that no endpoint owns.
class AddressError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Text input rejected while parsing. Line numbers are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A trace record or config that parsed fine but does not fit the mesh.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Output could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Internal invariant breach inside the simulator. Always an engine bug.
class EngineError : public Error {
 public:
  using Error::Error;
};

/// A metric was requested over an empty measurement.
class MeasurementError : public Error {
 public:
  using Error::Error;
};

}  // namespace simnoc
