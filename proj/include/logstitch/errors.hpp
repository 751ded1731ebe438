#pragma once

#include <stdexcept>
#include <string>

namespace logstitch {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoMatchError : Error {
  using Error::Error;
};

struct AmbiguousMatchError : Error {
  using Error::Error;
};

struct EmptyExecutionError : Error {
  using Error::Error;
};

struct EmptyInputError : Error {
  using Error::Error;
};

struct AlphabetOverlapError : Error {
  using Error::Error;
};

struct ExplosionGuardError : Error {
  using Error::Error;
};

struct ReplayStuckError : Error {
  using Error::Error;
};

struct TransitionNotFoundError : Error {
  using Error::Error;
};

struct CycleDetectedError : Error {
  using Error::Error;
};

struct TooFewExecutionsError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace logstitch
