#pragma once

// On-disk formats.
//
// Container: a directory holding meta.json and data.bin. data.bin is the raw
// little-endian float64 values in row-major order. meta.json:
//
//   {"version": 1, "dtype": "float64-le", "shape": [...], "names": [...],
//    "units": [...], "axes": [{"kind": "numeric"|"label", "values": [...]}],
//    "markers": [{"time_ms": t, "label": s}] | null, "extra": {...}}
//
// Keys are sorted and numbers printed in shortest round-trip form, so equal
// Data values give byte-identical files. Non-finite axis and marker numbers
// are written as the strings "nan", "inf" and "-inf".
//
// Marker files hold lines "time_ms<TAB>label"; layout files lines "name,x,y"
// with the head as the unit circle and the nose towards +y.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bcitk/data.hpp"

namespace bcitk {

/// Writes the container, creating the directory if needed. Each file is
/// written to a temporary name and renamed into place.
/// Throws UnserializableExtra (non-finite or binary values in extra) / IoFailure.
void save_data(const Data& data, const std::filesystem::path& dir);

/// Throws IoFailure / CorruptContainer / UnsupportedVersion.
Data load_data(const std::filesystem::path& dir);

/// Whitespace-separated matrix, one row per sample, sampled at fs_hz from
/// t = 0. Empty `channel_names` yields "ch1", "ch2", ...; an empty marker path
/// attaches no markers. Throws RaggedRows / BadMarkerLine / ChannelMismatch.
Data import_ascii_matrix(const std::filesystem::path& signal_path, const std::filesystem::path& marker_path,
                         double fs_hz, const std::vector<std::string>& channel_names = {});

/// Throws BadMarkerLine / IoFailure.
MarkerList read_markers(const std::filesystem::path& path);
void write_markers(const MarkerList& markers, const std::filesystem::path& path);

struct Electrode {
  std::string name;
  double x = 0.0;
  double y = 0.0;
};

class ElectrodeLayout {
 public:
  ElectrodeLayout() = default;
  /// Throws BadLayout on duplicate names (case-insensitive) or x^2 + y^2 > 1.3.
  explicit ElectrodeLayout(std::vector<Electrode> electrodes);

  const std::vector<Electrode>& electrodes() const noexcept { return electrodes_; }
  std::size_t size() const noexcept { return electrodes_.size(); }
  /// Case-insensitive lookup.
  std::optional<Electrode> find(const std::string& name) const;

 private:
  std::vector<Electrode> electrodes_;
};

/// Throws BadLayout / IoFailure.
ElectrodeLayout read_layout(const std::filesystem::path& path);
void write_layout(const ElectrodeLayout& layout, const std::filesystem::path& path);

/// 64 positions of the extended 10-20 system projected to the unit disc by
/// azimuthal equidistant projection from Cz; the nasion-inion circle is r = 1.
ElectrodeLayout standard_1020_layout();

/// Regular rows x cols lattice inside the head disc, names assigned row-major
/// from the front row. Throws BadLayout when the name count differs.
ElectrodeLayout grid_layout(const std::vector<std::string>& names, std::size_t rows, std::size_t cols);

/// Channel names sorted front to back (y descending, then x ascending).
/// Throws MissingPosition.
std::vector<std::string> frontal_to_occipital(const std::vector<std::string>& channels,
                                              const ElectrodeLayout& layout);

}  // namespace bcitk
