#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bcitk {

/// Every failure the toolkit reports. The CLI maps all of these to exit code 2.
enum class Errc {
  DimensionMismatch,
  AxisNotFound,
  AmbiguousAxis,
  ChannelMismatch,
  SamplingRateMismatch,
  NoChannelsLeft,
  InvalidBand,
  InvalidArgument,
  StateShapeMismatch,
  SignalTooShort,
  NonIntegerFactor,
  EmptyInterval,
  EmptyReference,
  TooFewSamples,
  WindowTooLarge,
  NoEpochs,
  EmptyIntervalWindow,
  NotTwoClasses,
  ZeroVariance,
  SingularCompositeCovariance,
  ColumnOutOfRange,
  LengthMismatch,
  SingularMeanCovariance,
  NonFiniteValues,
  TooFewObservations,
  SingularCovariance,
  FeatureCountMismatch,
  UnserializableExtra,
  IoFailure,
  CorruptContainer,
  UnsupportedVersion,
  RaggedRows,
  BadMarkerLine,
  BadLayout,
  MissingPosition,
  TooFewElectrodes,
  ValueOutOfRange,
  ConfigMismatch,
  IncompleteSequence,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace bcitk
