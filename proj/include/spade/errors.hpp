#ifndef SPADE_ERRORS_HPP
#define SPADE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spade {

// Base class for every error thrown by the library. The CLI maps these to
// nonzero exit codes; everything else is considered a bug.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};
struct DimError : Error {
  using Error::Error;
};
struct CodecError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct StepError : Error {
  using Error::Error;
};
struct MetricError : Error {
  using Error::Error;
};
struct CheckpointError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct Unsupported : Error {
  using Error::Error;
};

// Raised by the training loop when a loss becomes non-finite.
struct TrainingDiverged : Error {
  int epoch;
  explicit TrainingDiverged(int epoch_idx, const std::string& what)
      : Error(what), epoch(epoch_idx) {}
};

}  // namespace spade

#endif  // SPADE_ERRORS_HPP
