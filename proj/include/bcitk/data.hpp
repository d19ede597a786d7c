#pragma once

// The labeled tensor every toolkit operation consumes and produces.
//
// A Data value is an n-dimensional array of doubles (row-major) plus, per
// dimension, a name, a unit and a coordinate axis. Coordinate axes are either
// numeric (timestamps in ms, frequencies in Hz, ...) or text (channel names,
// class names). "#" is the pseudo-unit for enumerations.
//
// Data is immutable once built. Every operation takes its inputs by const
// reference and returns a fresh value; attributes stored in extra() are
// carried along verbatim.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace bcitk {

using Shape = std::vector<std::size_t>;
using NumericAxis = std::vector<double>;
using LabelAxis = std::vector<std::string>;
using Axis = std::variant<NumericAxis, LabelAxis>;
using Json = nlohmann::json;

inline constexpr std::string_view kTime = "time";
inline constexpr std::string_view kChannel = "channel";
inline constexpr std::string_view kClass = "class";
inline constexpr std::string_view kFrequency = "frequency";

/// Marker times within this many ms before a sample timestamp snap to it.
inline constexpr double kMarkerSnapMs = 1e-6;

/// Half-open time window [start_ms, end_ms).
struct Interval {
  double start_ms = 0.0;
  double end_ms = 0.0;

  double length_ms() const noexcept { return end_ms - start_ms; }
  bool contains(double t) const noexcept { return t >= start_ms && t < end_ms; }
};

struct Marker {
  double time_ms = 0.0;
  std::string label;
};

/// Time-ordered marker list. Markers with equal times keep insertion order.
class MarkerList {
 public:
  MarkerList() = default;
  explicit MarkerList(std::vector<Marker> entries);

  void add(double time_ms, std::string label);

  const std::vector<Marker>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }
  const Marker& operator[](std::size_t i) const { return entries_[i]; }

  /// Exact comparison: times compared bitwise.
  friend bool operator==(const MarkerList& lhs, const MarkerList& rhs) noexcept;

 private:
  std::vector<Marker> entries_;
};

/// Plain, unvalidated parts of a Data value.
struct DataParts {
  Shape shape;
  std::vector<double> values;
  std::vector<Axis> axes;
  std::vector<std::string> names;
  std::vector<std::string> units;
  Json extra = Json::object();
  std::optional<MarkerList> markers;
};

class Data {
 public:
  const Shape& shape() const noexcept { return parts_.shape; }
  std::size_t rank() const noexcept { return parts_.shape.size(); }
  std::size_t size() const noexcept { return parts_.values.size(); }
  std::span<const double> values() const noexcept { return parts_.values; }

  const std::vector<Axis>& axes() const noexcept { return parts_.axes; }
  const std::vector<std::string>& names() const noexcept { return parts_.names; }
  const std::vector<std::string>& units() const noexcept { return parts_.units; }
  const Json& extra() const noexcept { return parts_.extra; }
  const std::optional<MarkerList>& markers() const noexcept { return parts_.markers; }

  /// Throws DimensionMismatch if the axis holds labels.
  const NumericAxis& numeric_axis(std::size_t dim) const;
  /// Throws DimensionMismatch if the axis is numeric.
  const LabelAxis& label_axis(std::size_t dim) const;
  bool is_numeric_axis(std::size_t dim) const;

  /// Row-major stride of a dimension, in elements.
  std::size_t stride(std::size_t dim) const;

  const DataParts& parts() const noexcept { return parts_; }

 private:
  explicit Data(DataParts parts) : parts_(std::move(parts)) {}
  friend Data make_data(DataParts parts);

  DataParts parts_;
};

/// Validates the parts and builds a Data value.
/// Throws DimensionMismatch when axes/names/units disagree with the shape,
/// when the value count disagrees with the shape, when a time or frequency
/// axis is not strictly increasing, or when extra is not a JSON object.
Data make_data(DataParts parts);

Data make_data(Shape shape, std::vector<double> values, std::vector<Axis> axes,
               std::vector<std::string> names, std::vector<std::string> units);

/// Convenience for continuous (time x channel) data.
Data make_continuous(std::vector<double> values, NumericAxis time_ms, LabelAxis channels);

DataParts decompose(const Data& data);

/// Index of the uniquely named dimension. Throws AxisNotFound / AmbiguousAxis.
std::size_t axis_index(const Data& data, std::string_view name);

/// Exact structural equality: shapes, bitwise values, axes, names, units,
/// markers and extra must all match.
bool data_equal(const Data& a, const Data& b);

/// Replacement metadata for one dimension in with_replaced().
struct AxisUpdate {
  std::size_t dim = 0;
  Axis axis;
  std::optional<std::string> name;
  std::optional<std::string> unit;
};

/// Same metadata as `data` except for the new values/shape and the updated
/// dimensions. extra and markers are copied verbatim.
Data with_replaced(const Data& data, Shape shape, std::vector<double> values,
                   std::vector<AxisUpdate> updates = {});

Data with_markers(const Data& data, std::optional<MarkerList> markers);

/// Copy of `data` with extra[key] = value.
Data with_attribute(const Data& data, const std::string& key, Json value);

/// Sampling rate in Hz: extra["fs"] when present, otherwise inferred from the
/// time axis (needs at least two samples).
double sampling_rate(const Data& data);

/// Class names in canonical order: extra["class_names"] when present,
/// otherwise first-appearance order of the labels on the first axis.
std::vector<std::string> class_order(const Data& data);

/// Sample a marker time belongs to: the first sample at or after it.
/// Returns time_ms.size() when the marker lies past the last sample.
std::size_t marker_sample(const NumericAxis& time_ms, double marker_ms);

}  // namespace bcitk
