#pragma once

#include <stdexcept>
#include <string>

namespace pidtc {

// Common base so callers can catch every library error at once.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor shapes disagree; message names both shapes.
struct DimensionError : Error {
  using Error::Error;
};

// A knob is outside its valid range (kernel size, dropout rate, ...).
struct ParameterError : Error {
  using Error::Error;
};

// A call-site precondition was violated (missing prior, wrong count, ...).
struct ContractError : Error {
  using Error::Error;
};

// Checkpoint archive malformed or incompatible with the requested config.
struct CheckpointError : Error {
  using Error::Error;
};

// Dataset-level problems (empty set, unmet quota, coordinate out of extent).
struct DataError : Error {
  using Error::Error;
};

// Text input malformed; message carries the 1-based line number.
struct ParseError : Error {
  using Error::Error;
};

// Degenerate geometry (coincident corners, ill-posed line intersection).
struct GeometryError : Error {
  using Error::Error;
};

// Ballistic simulation could not produce a usable flight.
struct SimulationError : Error {
  using Error::Error;
};

// Corner extraction could not find usable lines; message names how many survived.
struct ExtractionError : Error {
  using Error::Error;
};

// Class label outside {0, 1}.
struct LabelError : Error {
  using Error::Error;
};

// Correspondence system is rank-deficient (e.g. collinear points).
struct RankError : Error {
  using Error::Error;
};

// Homogeneous point maps to the plane at infinity.
struct PointAtInfinityError : Error {
  using Error::Error;
};

}  // namespace pidtc
