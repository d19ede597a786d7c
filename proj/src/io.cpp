#include "bcitk/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <system_error>

#include "bcitk/error.hpp"

namespace bcitk {

namespace fs = std::filesystem;

namespace {

constexpr int kVersion = 1;
constexpr const char* kDtype = "float64-le";

void check_serializable(const Json& j, const std::string& where) {
  switch (j.type()) {
    case Json::value_t::number_float:
      if (!std::isfinite(j.get<double>())) fail(Errc::UnserializableExtra, "non-finite number at " + where);
      break;
    case Json::value_t::binary:
      fail(Errc::UnserializableExtra, "binary value at " + where);
    case Json::value_t::object:
      for (const auto& [k, v] : j.items()) check_serializable(v, where + "/" + k);
      break;
    case Json::value_t::array:
      for (std::size_t i = 0; i < j.size(); ++i) check_serializable(j[i], where + "/" + std::to_string(i));
      break;
    case Json::value_t::discarded:
      fail(Errc::UnserializableExtra, "discarded value at " + where);
    default:
      break;
  }
}

Json encode_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(Errc::CorruptContainer, "expected a number, got " + j.dump());
}

void write_atomically(const fs::path& target, const std::string& bytes) {
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoFailure, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(Errc::IoFailure, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) fail(Errc::IoFailure, "rename to " + target.string() + " failed: " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t to_le(std::uint64_t v) noexcept {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

void save_data(const Data& data, const fs::path& dir) {
  check_serializable(data.extra(), "extra");

  Json meta = Json::object();
  meta["version"] = kVersion;
  meta["dtype"] = kDtype;
  meta["shape"] = data.shape();
  meta["names"] = data.names();
  meta["units"] = data.units();
  Json axes = Json::array();
  for (const auto& axis : data.axes()) {
    if (const auto* num = std::get_if<NumericAxis>(&axis)) {
      Json values = Json::array();
      for (double v : *num) values.push_back(encode_number(v));
      axes.push_back({{"kind", "numeric"}, {"values", std::move(values)}});
    } else {
      axes.push_back({{"kind", "label"}, {"values", std::get<LabelAxis>(axis)}});
    }
  }
  meta["axes"] = std::move(axes);
  if (data.markers()) {
    Json markers = Json::array();
    for (const auto& m : *data.markers()) markers.push_back({{"time_ms", encode_number(m.time_ms)}, {"label", m.label}});
    meta["markers"] = std::move(markers);
  } else {
    meta["markers"] = nullptr;
  }
  meta["extra"] = data.extra();

  std::string bin(data.size() * 8, '\0');
  const auto vals = data.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(vals[i]));
    std::memcpy(bin.data() + 8 * i, &bits, 8);
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  write_atomically(dir / "data.bin", bin);
  write_atomically(dir / "meta.json", meta.dump(2) + "\n");
}

Data load_data(const fs::path& dir) {
  const std::string text = read_file(dir / "meta.json");
  Json meta;
  try {
    meta = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(Errc::CorruptContainer, "meta.json is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (!meta.is_object()) fail(Errc::CorruptContainer, "meta.json must hold an object");
    const int version = meta.at("version").get<int>();
    if (version != kVersion) fail(Errc::UnsupportedVersion, "container version " + std::to_string(version));
    if (meta.at("dtype").get<std::string>() != kDtype) fail(Errc::CorruptContainer, "unknown dtype");

    DataParts parts;
    parts.shape = meta.at("shape").get<Shape>();
    parts.names = meta.at("names").get<std::vector<std::string>>();
    parts.units = meta.at("units").get<std::vector<std::string>>();
    for (const auto& axis : meta.at("axes")) {
      const auto kind = axis.at("kind").get<std::string>();
      if (kind == "numeric") {
        NumericAxis values;
        for (const auto& v : axis.at("values")) values.push_back(decode_number(v));
        parts.axes.emplace_back(std::move(values));
      } else if (kind == "label") {
        parts.axes.emplace_back(axis.at("values").get<LabelAxis>());
      } else {
        fail(Errc::CorruptContainer, "unknown axis kind '" + kind + "'");
      }
    }
    if (const auto& markers = meta.at("markers"); !markers.is_null()) {
      std::vector<Marker> list;
      for (const auto& m : markers) list.push_back({decode_number(m.at("time_ms")), m.at("label").get<std::string>()});
      parts.markers = MarkerList(std::move(list));
    }
    parts.extra = meta.at("extra");

    std::size_t count = 1;
    for (std::size_t s : parts.shape) count *= s;
    const std::string bin = read_file(dir / "data.bin");
    if (bin.size() != count * 8) {
      fail(Errc::CorruptContainer, "data.bin holds " + std::to_string(bin.size()) + " bytes, shape needs " +
                                       std::to_string(count * 8));
    }
    parts.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, bin.data() + 8 * i, 8);
      parts.values[i] = std::bit_cast<double>(to_le(bits));
    }
    return make_data(std::move(parts));
  } catch (const Json::exception& e) {
    fail(Errc::CorruptContainer, std::string("malformed meta.json: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::DimensionMismatch) fail(Errc::CorruptContainer, e.what());
    throw;
  }
}

MarkerList read_markers(const fs::path& path) {
  const auto lines = lines_of(read_file(path));
  std::vector<Marker> markers;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto tab = lines[i].find('\t');
    double t = 0.0;
    if (tab == std::string::npos || !parse_double(trim(std::string_view(lines[i]).substr(0, tab)), t) ||
        !std::isfinite(t)) {
      fail(Errc::BadMarkerLine, path.string() + ":" + std::to_string(i + 1) + ": expected 'time_ms<TAB>label'");
    }
    markers.push_back({t, lines[i].substr(tab + 1)});
  }
  return MarkerList(std::move(markers));
}

void write_markers(const MarkerList& markers, const fs::path& path) {
  std::string out;
  for (const auto& m : markers) {
    if (m.label.find_first_of("\t\n") != std::string::npos) {
      fail(Errc::BadMarkerLine, "marker label contains a tab or newline");
    }
    out += Json(m.time_ms).dump() + "\t" + m.label + "\n";
  }
  write_atomically(path, out);
}

Data import_ascii_matrix(const fs::path& signal_path, const fs::path& marker_path, double fs_hz,
                         const std::vector<std::string>& channel_names) {
  if (!(fs_hz > 0.0)) fail(Errc::InvalidArgument, "sampling rate must be positive");
  const auto lines = lines_of(read_file(signal_path));
  std::vector<double> values;
  std::size_t cols = 0, rows = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view rest = lines[i];
    std::size_t n = 0;
    while (true) {
      rest = trim(rest);
      if (rest.empty()) break;
      auto end = std::find_if(rest.begin(), rest.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
      const auto token = rest.substr(0, static_cast<std::size_t>(end - rest.begin()));
      double v = 0.0;
      if (!parse_double(token, v)) {
        fail(Errc::RaggedRows, signal_path.string() + ":" + std::to_string(i + 1) + ": '" + std::string(token) +
                                   "' is not a number");
      }
      values.push_back(v);
      ++n;
      rest.remove_prefix(token.size());
    }
    if (n == 0) continue;
    if (rows == 0) cols = n;
    if (n != cols) {
      fail(Errc::RaggedRows, signal_path.string() + ":" + std::to_string(i + 1) + ": " + std::to_string(n) +
                                 " values, expected " + std::to_string(cols));
    }
    ++rows;
  }

  LabelAxis channels = channel_names;
  if (channels.empty()) {
    for (std::size_t c = 0; c < cols; ++c) channels.push_back("ch" + std::to_string(c + 1));
  } else if (channels.size() != cols) {
    fail(Errc::ChannelMismatch, std::to_string(channels.size()) + " channel names for " + std::to_string(cols) +
                                    " columns");
  }
  NumericAxis time(rows);
  for (std::size_t t = 0; t < rows; ++t) time[t] = static_cast<double>(t) * 1000.0 / fs_hz;

  DataParts parts{{rows, channels.size()},
                  std::move(values),
                  {std::move(time), std::move(channels)},
                  {std::string(kTime), std::string(kChannel)},
                  {"ms", "#"},
                  Json{{"fs", fs_hz}},
                  std::nullopt};
  if (!marker_path.empty()) parts.markers = read_markers(marker_path);
  return make_data(std::move(parts));
}

ElectrodeLayout::ElectrodeLayout(std::vector<Electrode> electrodes) : electrodes_(std::move(electrodes)) {
  std::vector<std::string> seen;
  for (const auto& e : electrodes_) {
    if (e.name.empty()) fail(Errc::BadLayout, "electrode without a name");
    if (!(e.x * e.x + e.y * e.y <= 1.3)) fail(Errc::BadLayout, "electrode " + e.name + " lies outside the head");
    auto key = lowercase(e.name);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) fail(Errc::BadLayout, "duplicate electrode " + e.name);
    seen.push_back(std::move(key));
  }
}

std::optional<Electrode> ElectrodeLayout::find(const std::string& name) const {
  const auto key = lowercase(name);
  for (const auto& e : electrodes_) {
    if (lowercase(e.name) == key) return e;
  }
  return std::nullopt;
}

ElectrodeLayout read_layout(const fs::path& path) {
  const auto lines = lines_of(read_file(path));
  std::vector<Electrode> electrodes;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto c1 = lines[i].find(',');
    const auto c2 = c1 == std::string::npos ? c1 : lines[i].find(',', c1 + 1);
    Electrode e;
    const std::string_view line = lines[i];
    if (c2 == std::string::npos || !parse_double(trim(line.substr(c1 + 1, c2 - c1 - 1)), e.x) ||
        !parse_double(trim(line.substr(c2 + 1)), e.y)) {
      fail(Errc::BadLayout, path.string() + ":" + std::to_string(i + 1) + ": expected 'name,x,y'");
    }
    e.name = std::string(trim(line.substr(0, c1)));
    electrodes.push_back(std::move(e));
  }
  return ElectrodeLayout(std::move(electrodes));
}

void write_layout(const ElectrodeLayout& layout, const fs::path& path) {
  std::string out;
  for (const auto& e : layout.electrodes()) {
    out += e.name + "," + Json(e.x).dump() + "," + Json(e.y).dump() + "\n";
  }
  write_atomically(path, out);
}

namespace {

struct Vec3 {
  double x, y, z;
};

Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
Vec3 normalized(Vec3 a) { return (1.0 / std::sqrt(dot(a, a))) * a; }

// Point on the unit sphere; inclination from the vertex, azimuth from +x
// (right ear) towards +y (nose), both in degrees.
Vec3 sphere(double incl_deg, double azim_deg) {
  const double t = incl_deg * std::numbers::pi / 180.0;
  const double p = azim_deg * std::numbers::pi / 180.0;
  return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
}

// Nine points spaced at equal angles along the circle through a, m, b, with m
// halfway between a and b.
std::vector<Vec3> arc9(Vec3 a, Vec3 m, Vec3 b) {
  const Vec3 ab = b - a, am = m - a;
  const Vec3 n = cross(ab, am);
  // Circumcentre of the triangle (a, m, b).
  const Vec3 c = a + (1.0 / (2.0 * dot(n, n))) * (dot(am, am) * cross(n, ab) + dot(ab, ab) * cross(am, n));
  const Vec3 u = a - c;
  const double radius = std::sqrt(dot(u, u));
  const Vec3 e1 = normalized(u);
  const Vec3 e2 = normalized(cross(normalized(n), e1));
  const Vec3 vm = m - c;
  const double half = std::atan2(dot(vm, e2), dot(vm, e1));
  std::vector<Vec3> pts;
  for (int k = 0; k <= 8; ++k) {
    const double t = half * k / 4.0;
    pts.push_back(c + radius * (std::cos(t) * e1 + std::sin(t) * e2));
  }
  return pts;
}

Electrode project(const std::string& name, Vec3 p) {
  const Vec3 u = normalized(p);
  const double incl = std::acos(std::clamp(u.z, -1.0, 1.0));
  const double r = incl / (std::numbers::pi / 2.0);
  const double az = std::atan2(u.y, u.x);
  double x = r * std::cos(az), y = r * std::sin(az);
  if (std::abs(x) < 1e-12) x = 0.0;
  if (std::abs(y) < 1e-12) y = 0.0;
  return {name, x, y};
}

}  // namespace

ElectrodeLayout standard_1020_layout() {
  constexpr double kRing = 72.0;  // Fpz, T7, Oz, T8 lie 10% above the nasion-inion plane
  struct Row {
    double ring_azim;   // azimuth of the right end point on the ring
    double mid_incl;    // inclination of the midline point, signed front (+) / back (-)
    const char* names[9];
  };
  // Rows run left to right; indices 0..8 correspond to positions 7,5,3,1,z,2,4,6,8.
  const Row rows[] = {
      {54.0, 54.0, {"AF7", nullptr, "AF3", nullptr, "AFz", nullptr, "AF4", nullptr, "AF8"}},
      {36.0, 36.0, {"F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8"}},
      {18.0, 18.0, {"FT7", "FC5", "FC3", "FC1", "FCz", "FC2", "FC4", "FC6", "FT8"}},
      {0.0, 0.0, {"T7", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "T8"}},
      {-18.0, -18.0, {"TP7", "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6", "TP8"}},
      {-36.0, -36.0, {"P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8"}},
      {-54.0, -54.0, {"PO7", nullptr, "PO3", nullptr, "POz", nullptr, "PO4", nullptr, "PO8"}},
  };
  std::vector<Electrode> out;
  out.push_back(project("Fp1", sphere(kRing, 108.0)));
  out.push_back(project("Fpz", sphere(kRing, 90.0)));
  out.push_back(project("Fp2", sphere(kRing, 72.0)));
  for (const auto& row : rows) {
    const Vec3 right = sphere(kRing, row.ring_azim);
    const Vec3 left = sphere(kRing, 180.0 - row.ring_azim);
    const Vec3 mid = sphere(std::abs(row.mid_incl), row.mid_incl >= 0.0 ? 90.0 : -90.0);
    const auto pts = arc9(left, mid, right);
    for (int k = 0; k < 9; ++k) {
      if (row.names[k] != nullptr) out.push_back(project(row.names[k], pts[static_cast<std::size_t>(k)]));
    }
  }
  out.push_back(project("O1", sphere(kRing, -108.0)));
  out.push_back(project("Oz", sphere(kRing, -90.0)));
  out.push_back(project("O2", sphere(kRing, -72.0)));
  out.push_back(project("T9", sphere(90.0, 180.0)));
  out.push_back(project("T10", sphere(90.0, 0.0)));
  out.push_back(project("Iz", sphere(90.0, -90.0)));
  return ElectrodeLayout(std::move(out));
}

ElectrodeLayout grid_layout(const std::vector<std::string>& names, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0 || names.size() != rows * cols) {
    fail(Errc::BadLayout, std::to_string(names.size()) + " names for a " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " grid");
  }
  // The lattice fills the square inscribed in r = 0.9.
  const double half = 0.9 / std::sqrt(2.0);
  auto coord = [&](std::size_t i, std::size_t n) {
    return n == 1 ? 0.0 : -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  std::vector<Electrode> out;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out.push_back({names[r * cols + c], coord(c, cols), -coord(r, rows)});
  }
  return ElectrodeLayout(std::move(out));
}

std::vector<std::string> frontal_to_occipital(const std::vector<std::string>& channels,
                                              const ElectrodeLayout& layout) {
  std::vector<Electrode> pos;
  for (const auto& ch : channels) {
    auto e = layout.find(ch);
    if (!e) fail(Errc::MissingPosition, "no layout position for channel " + ch);
    pos.push_back({ch, e->x, e->y});
  }
  std::stable_sort(pos.begin(), pos.end(), [](const Electrode& a, const Electrode& b) {
    return a.y != b.y ? a.y > b.y : a.x < b.x;
  });
  std::vector<std::string> out;
  for (auto& e : pos) out.push_back(std::move(e.name));
  return out;
}

}  // namespace bcitk
