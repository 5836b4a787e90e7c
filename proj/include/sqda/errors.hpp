#pragma once

#include <stdexcept>
#include <string>

namespace sqda {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A sample eigenvalue sits inside the noise bulk, so its population spike
/// cannot be recovered.
class SpikeUndetectableError : public Error {
 public:
  using Error::Error;
};

/// The de-biased squared mean distance is not positive: the two classes are
/// indistinguishable at this sample size.
class DegenerateSeparationError : public Error {
 public:
  using Error::Error;
};

/// The Fisher-ratio numerator offset vanishes and no finite maximizer exists.
class DegenerateObjectiveError : public Error {
 public:
  using Error::Error;
};

class VarianceDegeneracyError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration (CLI exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed dataset (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error raised while training, naming the stage that failed.
class TrainingError : public Error {
 public:
  TrainingError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace sqda
