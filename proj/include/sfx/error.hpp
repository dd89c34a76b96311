#pragma once

#include <stdexcept>
#include <string>

namespace sfx {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Invalid parameters or configuration; the CLI maps this to exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Malformed file or text input.
class FormatError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

/// The value function could not be evaluated; the CLI maps this to exit code 3.
class OracleError : public Error {
public:
  using Error::Error;
};

class MissingMaskError : public OracleError {
public:
  MissingMaskError(const std::string& mask)
      : OracleError("no recorded value for mask " + mask), mask_(mask) {}
  const std::string& mask() const noexcept { return mask_; }

private:
  std::string mask_;
};

class ProtocolError : public OracleError {
public:
  using OracleError::OracleError;
};

class TransportError : public OracleError {
public:
  TransportError(const std::string& what, int status) : OracleError(what), status_(status) {}
  /// Last HTTP status, or -1 when no response was received.
  int status() const noexcept { return status_; }

private:
  int status_;
};

}  // namespace sfx
