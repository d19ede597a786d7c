#pragma once

// Static plots: scalp topographies, channel time courses and signed r^2 maps.
//
// Output format follows the file extension: ".png" writes an RGB PNG, anything
// else SVG. Time courses are SVG only. Renders are deterministic, so equal
// inputs give byte-identical files.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bcitk/data.hpp"
#include "bcitk/io.hpp"

namespace bcitk {

/// Thin-plate-spline interpolation of per-electrode values, sampled on a
/// resolution x resolution grid over [-1, 1]^2 (row 0 at the front, +y).
class ScalpField {
 public:
  std::size_t resolution() const noexcept { return resolution_; }
  /// Row-major grid; NaN outside the head disc.
  const std::vector<double>& grid() const noexcept { return grid_; }
  bool inside(std::size_t row, std::size_t col) const;
  /// Interpolant at an arbitrary point (also outside the disc).
  double evaluate(double x, double y) const noexcept;

  const std::vector<Electrode>& electrodes() const noexcept { return electrodes_; }
  const std::vector<double>& electrode_values() const noexcept { return values_; }

 private:
  friend ScalpField interpolate_scalp(std::span<const double>, const std::vector<std::string>&,
                                      const ElectrodeLayout&, std::size_t);

  std::size_t resolution_ = 0;
  std::vector<double> grid_;
  std::vector<Electrode> electrodes_;
  std::vector<double> values_;
  std::vector<double> cx_, cy_, weights_;
  double a0_ = 0.0, a1_ = 0.0, a2_ = 0.0;
};

/// Throws LengthMismatch / MissingPosition / TooFewElectrodes (fewer than three
/// electrodes, or positions that do not span the plane).
ScalpField interpolate_scalp(std::span<const double> values, const std::vector<std::string>& channels,
                             const ElectrodeLayout& layout, std::size_t resolution = 64);

/// 1-D Data with a channel axis.
ScalpField interpolate_scalp(const Data& values, const ElectrodeLayout& layout, std::size_t resolution = 64);

using Rgb = std::array<std::uint8_t, 3>;

/// Diverging blue-white-red map; t in [0, 1], 0.5 is white.
Rgb diverging_color(double t) noexcept;

/// Colour limits default to +-max|v| (+-1 for an all-zero field).
/// Throws IoFailure.
void render_scalp(const ScalpField& field, const std::filesystem::path& out,
                  std::optional<std::pair<double, double>> limits = std::nullopt);

/// One panel per channel; epoched or averaged data (class first) draws one
/// line per class in each panel. Throws AxisNotFound (empty or unknown
/// channels) / IoFailure.
void render_timecourse(const Data& data, const std::vector<std::string>& channels, const std::filesystem::path& out);

/// Heat map of a (time, channel) r^2 map, one row per channel in the given
/// order (data order when empty), symmetric colour scale around 0.
/// Throws ValueOutOfRange / AxisNotFound / IoFailure.
void render_r2_map(const Data& r2, const std::vector<std::string>& channel_order, const std::filesystem::path& out);

/// RGB8 PNG, rows top to bottom. Throws IoFailure.
void write_png(const std::filesystem::path& out, std::size_t width, std::size_t height,
               std::span<const std::uint8_t> rgb);

}  // namespace bcitk
