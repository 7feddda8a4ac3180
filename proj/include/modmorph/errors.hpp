#pragma once

#include <stdexcept>
#include <string>

namespace modmorph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Channel or shape mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Even kernel sizes, non-positive extents.
class InvalidKernelError : public Error {
 public:
  using Error::Error;
};

/// zero_pad asked to shrink or to change parity.
class InvalidPaddingError : public Error {
 public:
  using Error::Error;
};

/// Structural problem with a module graph (unknown vertex, duplicate id, invalid DAG).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// An operation needed a filter on an edge that has none.
class UnassignedEdgeError : public GraphError {
 public:
  using GraphError::GraphError;
};

/// The requested morph target cannot be realized (kernel shrink, infeasible step).
class InvalidTargetError : public Error {
 public:
  using Error::Error;
};

/// Strategy contract violated, e.g. REPLAY_ONLY on a complex module.
class StrategyError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range layer parameter (PACT slope, batch-norm statistics).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (solver settings, verification blob too small).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed MTEN or JSON input.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace modmorph
