#include "bcitk/error.hpp"

namespace bcitk {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::AxisNotFound: return "AxisNotFound";
    case Errc::AmbiguousAxis: return "AmbiguousAxis";
    case Errc::ChannelMismatch: return "ChannelMismatch";
    case Errc::SamplingRateMismatch: return "SamplingRateMismatch";
    case Errc::NoChannelsLeft: return "NoChannelsLeft";
    case Errc::InvalidBand: return "InvalidBand";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::StateShapeMismatch: return "StateShapeMismatch";
    case Errc::SignalTooShort: return "SignalTooShort";
    case Errc::NonIntegerFactor: return "NonIntegerFactor";
    case Errc::EmptyInterval: return "EmptyInterval";
    case Errc::EmptyReference: return "EmptyReference";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::NoEpochs: return "NoEpochs";
    case Errc::EmptyIntervalWindow: return "EmptyIntervalWindow";
    case Errc::NotTwoClasses: return "NotTwoClasses";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::SingularCompositeCovariance: return "SingularCompositeCovariance";
    case Errc::ColumnOutOfRange: return "ColumnOutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SingularMeanCovariance: return "SingularMeanCovariance";
    case Errc::NonFiniteValues: return "NonFiniteValues";
    case Errc::TooFewObservations: return "TooFewObservations";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::FeatureCountMismatch: return "FeatureCountMismatch";
    case Errc::UnserializableExtra: return "UnserializableExtra";
    case Errc::IoFailure: return "IoFailure";
    case Errc::CorruptContainer: return "CorruptContainer";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::RaggedRows: return "RaggedRows";
    case Errc::BadMarkerLine: return "BadMarkerLine";
    case Errc::BadLayout: return "BadLayout";
    case Errc::MissingPosition: return "MissingPosition";
    case Errc::TooFewElectrodes: return "TooFewElectrodes";
    case Errc::ValueOutOfRange: return "ValueOutOfRange";
    case Errc::ConfigMismatch: return "ConfigMismatch";
    case Errc::IncompleteSequence: return "IncompleteSequence";
  }
  return "Unknown";
}

}  // namespace bcitk
