#pragma once

#include <stdexcept>
#include <string>

namespace latentopt {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad sizes, non-positive step, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-finite value where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Run configuration could not be read or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The byte stream to a backend failed (refused, closed, short read).
class TransportError : public Error {
 public:
  using Error::Error;
};

/// The peer violated the wire protocol (bad frame, id mismatch, malformed JSON).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// hello exchange returned a protocol version we do not speak.
class VersionMismatch : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

/// The backend answered with an error frame, or a model op failed locally.
class ModelError : public Error {
 public:
  ModelError(std::string code, const std::string& message)
      : Error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Operation requested that the backend does not advertise.
class CapabilityError : public ModelError {
 public:
  explicit CapabilityError(const std::string& op)
      : ModelError("capability_absent", "backend does not support '" + op + "'") {}
};

/// Tensor shape disagrees with the advertised backend capabilities.
class ShapeMismatch : public ModelError {
 public:
  explicit ShapeMismatch(const std::string& message) : ModelError("shape_mismatch", message) {}
};

/// An optimization stage gave up (divergence, every candidate failed).
class OptimizationAborted : public Error {
 public:
  using Error::Error;
};

}  // namespace latentopt
