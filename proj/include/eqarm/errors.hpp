#pragma once

#include <stdexcept>
#include <string>

namespace eqarm {

/// Invalid data, schema violations, bad arguments. CLI exit code 1.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A prompt placeholder could not be resolved or is unknown.
struct TemplateError : ValidationError {
  using ValidationError::ValidationError;
};

/// Structured model output does not match the expected tag grammar.
struct ParseError : ValidationError {
  using ValidationError::ValidationError;
};

/// Bad engine or remote configuration (missing auth variable, etc.).
struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

/// An operation was asked of a policy that cannot provide it
/// (e.g. training a sampling-only remote policy).
struct CapabilityError : ValidationError {
  using ValidationError::ValidationError;
};

/// Network-level failure after retries are exhausted. CLI exit code 2.
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The remote endpoint answered with an unexpected payload shape.
struct ProtocolError : TransportError {
  using TransportError::TransportError;
};

}  // namespace eqarm
