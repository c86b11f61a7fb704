#pragma once

#include <stdexcept>
#include <string>

namespace midsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateInput : Error {
  using Error::Error;
};
struct NoPath : Error {
  using Error::Error;
};
struct BadIndex : Error {
  using Error::Error;
};
struct InsufficientHistory : Error {
  using Error::Error;
};
struct WaypointOutOfView : Error {
  using Error::Error;
};
struct ShapeMismatch : Error {
  using Error::Error;
};
struct OutOfRange : Error {
  using Error::Error;
};
struct EmptyMaskSupport : Error {
  using Error::Error;
};
struct NonFiniteInput : Error {
  using Error::Error;
};
struct DivergenceDetected : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct ConfigMismatch : Error {
  using Error::Error;
};

}  // namespace midsim
