#pragma once

#include <stdexcept>
#include <string>

namespace heatgait {

// Base for all engine errors so callers can catch a single type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// graph
struct ZeroDegreeError : Error {
  using Error::Error;
};
struct DisconnectedGraphError : Error {
  using Error::Error;
};

// data
struct EmptySequenceError : Error {
  using Error::Error;
};
struct DegenerateSequenceError : Error {
  using Error::Error;
};
struct TooFewSubjectsError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct SchemaError : Error {
  using Error::Error;
};

// nnkernel
struct ShapeMismatchError : Error {
  using Error::Error;
};
struct NonFiniteError : Error {
  using Error::Error;
};

// train
struct NoPositivesError : Error {
  using Error::Error;
};
struct InsufficientClassesError : Error {
  using Error::Error;
};

// eval
struct EmptyGalleryError : Error {
  using Error::Error;
};

// cli
struct UsageError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace heatgait
