#ifndef BRIDGENET_ERRORS_HPP
#define BRIDGENET_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace bridgenet {

/// Base class for all library-specific failures. Argument/range validation
/// uses std::invalid_argument / std::out_of_range directly.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The current state cannot reach the segment pin in the remaining steps.
struct UnreachablePinError : Error {
  using Error::Error;
};

/// A cut (or every cut of a graph) has a zero-volume side.
struct UndefinedConductanceError : Error {
  using Error::Error;
};

/// Brute-force conductance was requested for a graph above the cutoff.
struct TooLargeError : Error {
  using Error::Error;
};

/// round(gamma * |E|) = 0: the requested edge sample is empty.
struct EmptySampleError : Error {
  using Error::Error;
};

/// Noise calibration could not fit any state (insufficient samples).
struct CalibrationFailedError : Error {
  using Error::Error;
};

/// Filter normalizer vanished: no state explains the observation.
struct DegenerateLikelihoodError : Error {
  using Error::Error;
};

/// Forward pass hit an all-zero scaling constant.
struct ImpossibleObservationError : Error {
  using Error::Error;
};

/// EM starting point assigns zero probability to the data.
struct InfeasibleStartError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// Malformed input above the tolerated fraction; carries offending line numbers.
struct FormatError : Error {
  FormatError(const std::string& msg, std::vector<int> lines)
      : Error(msg), line_numbers(std::move(lines)) {}
  std::vector<int> line_numbers;
};

/// Polarization series has no non-gap day.
struct EmptySeriesError : Error {
  using Error::Error;
};

/// Series is constant: no range to discretize over.
struct DegenerateRangeError : Error {
  using Error::Error;
};

}  // namespace bridgenet

#endif
