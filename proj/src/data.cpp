#include "bcitk/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <unordered_set>

#include "bcitk/error.hpp"

namespace bcitk {

namespace {

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

std::size_t axis_length(const Axis& axis) {
  return std::visit([](const auto& v) { return v.size(); }, axis);
}

bool axes_equal(const Axis& a, const Axis& b) {
  if (a.index() != b.index()) return false;
  if (const auto* na = std::get_if<NumericAxis>(&a)) {
    return bitwise_equal(*na, std::get<NumericAxis>(b));
  }
  return std::get<LabelAxis>(a) == std::get<LabelAxis>(b);
}

bool must_increase(const std::string& name) { return name == kTime || name == kFrequency; }

}  // namespace

MarkerList::MarkerList(std::vector<Marker> entries) : entries_(std::move(entries)) {
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const Marker& a, const Marker& b) { return a.time_ms < b.time_ms; });
}

void MarkerList::add(double time_ms, std::string label) {
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), time_ms,
                              [](double t, const Marker& m) { return t < m.time_ms; });
  entries_.insert(pos, Marker{time_ms, std::move(label)});
}

bool operator==(const MarkerList& lhs, const MarkerList& rhs) noexcept {
  if (lhs.size() != rhs.size()) return false;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(lhs[i].time_ms) != std::bit_cast<std::uint64_t>(rhs[i].time_ms) ||
        lhs[i].label != rhs[i].label) {
      return false;
    }
  }
  return true;
}

const NumericAxis& Data::numeric_axis(std::size_t dim) const {
  if (dim >= rank()) fail(Errc::DimensionMismatch, "dimension " + std::to_string(dim) + " out of range");
  const auto* axis = std::get_if<NumericAxis>(&parts_.axes[dim]);
  if (axis == nullptr) fail(Errc::DimensionMismatch, "axis '" + parts_.names[dim] + "' holds labels, not numbers");
  return *axis;
}

const LabelAxis& Data::label_axis(std::size_t dim) const {
  if (dim >= rank()) fail(Errc::DimensionMismatch, "dimension " + std::to_string(dim) + " out of range");
  const auto* axis = std::get_if<LabelAxis>(&parts_.axes[dim]);
  if (axis == nullptr) fail(Errc::DimensionMismatch, "axis '" + parts_.names[dim] + "' holds numbers, not labels");
  return *axis;
}

bool Data::is_numeric_axis(std::size_t dim) const {
  return dim < rank() && std::holds_alternative<NumericAxis>(parts_.axes[dim]);
}

std::size_t Data::stride(std::size_t dim) const {
  std::size_t s = 1;
  for (std::size_t d = dim + 1; d < rank(); ++d) s *= parts_.shape[d];
  return s;
}

Data make_data(DataParts parts) {
  const std::size_t rank = parts.shape.size();
  if (parts.axes.size() != rank || parts.names.size() != rank || parts.units.size() != rank) {
    fail(Errc::DimensionMismatch, "rank " + std::to_string(rank) + " but " + std::to_string(parts.axes.size()) +
                                      " axes, " + std::to_string(parts.names.size()) + " names, " +
                                      std::to_string(parts.units.size()) + " units");
  }
  const std::size_t count =
      std::accumulate(parts.shape.begin(), parts.shape.end(), std::size_t{1}, std::multiplies<>());
  if (parts.values.size() != count) {
    fail(Errc::DimensionMismatch,
         "shape holds " + std::to_string(count) + " values, got " + std::to_string(parts.values.size()));
  }
  for (std::size_t d = 0; d < rank; ++d) {
    if (axis_length(parts.axes[d]) != parts.shape[d]) {
      fail(Errc::DimensionMismatch, "axis '" + parts.names[d] + "' has " + std::to_string(axis_length(parts.axes[d])) +
                                        " entries for extent " + std::to_string(parts.shape[d]));
    }
    if (const auto* axis = std::get_if<NumericAxis>(&parts.axes[d]); axis && must_increase(parts.names[d])) {
      for (std::size_t i = 1; i < axis->size(); ++i) {
        if (!((*axis)[i] > (*axis)[i - 1])) {
          fail(Errc::DimensionMismatch, "axis '" + parts.names[d] + "' is not strictly increasing");
        }
      }
    }
  }
  if (!parts.extra.is_object()) fail(Errc::DimensionMismatch, "extra must be a JSON object");
  if (parts.markers) {
    const auto& m = parts.markers->entries();
    if (!std::is_sorted(m.begin(), m.end(), [](const Marker& a, const Marker& b) { return a.time_ms < b.time_ms; })) {
      parts.markers = MarkerList(m);
    }
  }
  return Data(std::move(parts));
}

Data make_data(Shape shape, std::vector<double> values, std::vector<Axis> axes, std::vector<std::string> names,
               std::vector<std::string> units) {
  return make_data(DataParts{std::move(shape), std::move(values), std::move(axes), std::move(names),
                             std::move(units), Json::object(), std::nullopt});
}

Data make_continuous(std::vector<double> values, NumericAxis time_ms, LabelAxis channels) {
  Shape shape{time_ms.size(), channels.size()};
  return make_data(std::move(shape), std::move(values), {std::move(time_ms), std::move(channels)},
                   {std::string(kTime), std::string(kChannel)}, {"ms", "#"});
}

DataParts decompose(const Data& data) { return data.parts(); }

std::size_t axis_index(const Data& data, std::string_view name) {
  const auto& names = data.names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(Errc::AxisNotFound, "no axis named '" + std::string(name) + "'");
  if (std::find(std::next(it), names.end(), name) != names.end()) {
    fail(Errc::AmbiguousAxis, "axis name '" + std::string(name) + "' occurs more than once");
  }
  return static_cast<std::size_t>(it - names.begin());
}

bool data_equal(const Data& a, const Data& b) {
  if (a.shape() != b.shape()) return false;
  if (!bitwise_equal(a.values(), b.values())) return false;
  if (a.names() != b.names() || a.units() != b.units()) return false;
  for (std::size_t d = 0; d < a.rank(); ++d) {
    if (!axes_equal(a.axes()[d], b.axes()[d])) return false;
  }
  if (a.markers().has_value() != b.markers().has_value()) return false;
  if (a.markers() && !(*a.markers() == *b.markers())) return false;
  return a.extra() == b.extra();
}

Data with_replaced(const Data& data, Shape shape, std::vector<double> values, std::vector<AxisUpdate> updates) {
  DataParts parts = data.parts();
  if (shape.size() != parts.shape.size()) {
    fail(Errc::DimensionMismatch, "with_replaced cannot change the rank");
  }
  parts.shape = std::move(shape);
  parts.values = std::move(values);
  for (auto& u : updates) {
    if (u.dim >= parts.shape.size()) fail(Errc::DimensionMismatch, "axis update out of range");
    parts.axes[u.dim] = std::move(u.axis);
    if (u.name) parts.names[u.dim] = std::move(*u.name);
    if (u.unit) parts.units[u.dim] = std::move(*u.unit);
  }
  return make_data(std::move(parts));
}

Data with_markers(const Data& data, std::optional<MarkerList> markers) {
  DataParts parts = data.parts();
  parts.markers = std::move(markers);
  return make_data(std::move(parts));
}

Data with_attribute(const Data& data, const std::string& key, Json value) {
  DataParts parts = data.parts();
  parts.extra[key] = std::move(value);
  return make_data(std::move(parts));
}

double sampling_rate(const Data& data) {
  if (auto it = data.extra().find("fs"); it != data.extra().end() && it->is_number()) {
    const double fs = it->get<double>();
    if (fs > 0.0 && std::isfinite(fs)) return fs;
  }
  const auto& time = data.numeric_axis(axis_index(data, kTime));
  if (time.size() < 2) fail(Errc::TooFewSamples, "cannot infer the sampling rate from fewer than two samples");
  return 1000.0 * static_cast<double>(time.size() - 1) / (time.back() - time.front());
}

std::vector<std::string> class_order(const Data& data) {
  if (auto it = data.extra().find("class_names"); it != data.extra().end() && it->is_array()) {
    return it->get<std::vector<std::string>>();
  }
  std::vector<std::string> order;
  if (data.rank() == 0 || data.is_numeric_axis(0)) return order;
  std::unordered_set<std::string> seen;
  for (const auto& label : data.label_axis(0)) {
    if (seen.insert(label).second) order.push_back(label);
  }
  return order;
}

std::size_t marker_sample(const NumericAxis& time_ms, double marker_ms) {
  auto it = std::lower_bound(time_ms.begin(), time_ms.end(), marker_ms - kMarkerSnapMs);
  return static_cast<std::size_t>(it - time_ms.begin());
}

}  // namespace bcitk
