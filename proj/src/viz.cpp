#include "bcitk/viz.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <limits>

#include <Eigen/Dense>

#include "bcitk/error.hpp"
#include "bcitk/kernels.hpp"
#include "kernels_detail.hpp"

namespace bcitk {

namespace fs = std::filesystem;

namespace {

bool wants_png(const fs::path& out) {
  auto ext = out.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

void write_text(const fs::path& out, const std::string& text) {
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) fail(Errc::IoFailure, "cannot open " + out.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) fail(Errc::IoFailure, "write to " + out.string() + " failed");
}

std::string num(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) return "0";
  return s;
}

std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::pair<double, double> symmetric_limits(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) {
    if (std::isfinite(v)) m = std::max(m, std::abs(v));
  }
  if (m == 0.0) m = 1.0;
  return {-m, m};
}

double unit_position(double v, std::pair<double, double> lim) {
  if (!(lim.second > lim.first)) return 0.5;
  return std::clamp((v - lim.first) / (lim.second - lim.first), 0.0, 1.0);
}

struct Raster {
  std::size_t w, h;
  std::vector<std::uint8_t> px;

  Raster(std::size_t width, std::size_t height) : w(width), h(height), px(width * height * 3, 255) {}

  void put(long x, long y, Rgb c) {
    if (x < 0 || y < 0 || static_cast<std::size_t>(x) >= w || static_cast<std::size_t>(y) >= h) return;
    std::copy(c.begin(), c.end(), px.begin() + static_cast<std::ptrdiff_t>((static_cast<std::size_t>(y) * w +
                                                                            static_cast<std::size_t>(x)) * 3));
  }
};

constexpr Rgb kBlack{0, 0, 0};

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double t = std::clamp(((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
  return std::hypot(px - (ax + t * dx), py - (ay + t * dy));
}

// Head drawing extent: the unit disc plus room for the nose.
constexpr double kExtent = 1.15;
constexpr double kNoseHalfWidth = 0.12;
constexpr double kNoseTip = 1.12;

}  // namespace

Rgb diverging_color(double t) noexcept {
  // Blue (low) through white to red (high).
  static constexpr std::array<Rgb, 11> stops{{{5, 48, 97},
                                             {33, 102, 172},
                                             {67, 147, 195},
                                             {146, 197, 222},
                                             {209, 229, 240},
                                             {247, 247, 247},
                                             {253, 219, 199},
                                             {244, 165, 130},
                                             {214, 96, 77},
                                             {178, 24, 43},
                                             {103, 0, 31}}};
  if (!(t >= 0.0)) t = 0.0;
  if (t > 1.0) t = 1.0;
  const double pos = t * 10.0;
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(pos), 9);
  const double f = pos - static_cast<double>(i);
  Rgb out{};
  for (std::size_t k = 0; k < 3; ++k) {
    const double v = (1.0 - f) * stops[i][k] + f * stops[i + 1][k];
    out[k] = static_cast<std::uint8_t>(std::lround(v));
  }
  return out;
}

bool ScalpField::inside(std::size_t row, std::size_t col) const {
  return row < resolution_ && col < resolution_ && !std::isnan(grid_[row * resolution_ + col]);
}

double ScalpField::evaluate(double x, double y) const noexcept {
  const kernels::TpsModel m{cx_, cy_, weights_, a0_, a1_, a2_};
  return kernels::detail::tps_eval(m, x, y);
}

ScalpField interpolate_scalp(std::span<const double> values, const std::vector<std::string>& channels,
                             const ElectrodeLayout& layout, std::size_t resolution) {
  if (values.size() != channels.size()) {
    fail(Errc::LengthMismatch, std::to_string(values.size()) + " values for " + std::to_string(channels.size()) +
                                   " channels");
  }
  if (resolution < 2) fail(Errc::InvalidArgument, "resolution must be at least 2");
  ScalpField f;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    auto e = layout.find(channels[i]);
    if (!e) fail(Errc::MissingPosition, "no layout position for channel " + channels[i]);
    if (!std::isfinite(values[i])) fail(Errc::NonFiniteValues, "value of channel " + channels[i] + " is not finite");
    f.electrodes_.push_back({channels[i], e->x, e->y});
    f.cx_.push_back(e->x);
    f.cy_.push_back(e->y);
    f.values_.push_back(values[i]);
  }
  const auto n = static_cast<Eigen::Index>(channels.size());
  if (n < 3) fail(Errc::TooFewElectrodes, "need at least three electrodes, got " + std::to_string(n));

  // [K P; P^T 0] [w; a] = [v; 0]
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(n + 3, n + 3);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      const double dx = f.cx_[si] - f.cx_[sj], dy = f.cy_[si] - f.cy_[sj];
      sys(i, j) = kernels::tps_kernel(dx * dx + dy * dy);
    }
    sys(i, n) = sys(n, i) = 1.0;
    sys(i, n + 1) = sys(n + 1, i) = f.cx_[si];
    sys(i, n + 2) = sys(n + 2, i) = f.cy_[si];
    rhs(i) = f.values_[si];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (lu.rank() < n + 3) {
    fail(Errc::TooFewElectrodes, "electrode positions are collinear or coincide");
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  f.weights_.assign(sol.data(), sol.data() + n);
  f.a0_ = sol(n);
  f.a1_ = sol(n + 1);
  f.a2_ = sol(n + 2);

  f.resolution_ = resolution;
  f.grid_.resize(resolution * resolution);
  kernels::omp::tps_grid(kernels::TpsModel{f.cx_, f.cy_, f.weights_, f.a0_, f.a1_, f.a2_}, resolution, f.grid_);
  return f;
}

ScalpField interpolate_scalp(const Data& values, const ElectrodeLayout& layout, std::size_t resolution) {
  if (values.rank() != 1) fail(Errc::DimensionMismatch, "scalp values must be one value per channel");
  const std::size_t dim = axis_index(values, kChannel);
  return interpolate_scalp(values.values(), values.label_axis(dim), layout, resolution);
}

void write_png(const fs::path& out, std::size_t width, std::size_t height, std::span<const std::uint8_t> rgb) {
  if (rgb.size() != width * height * 3 || width == 0 || height == 0) {
    fail(Errc::InvalidArgument, "pixel buffer does not match the image size");
  }
  std::vector<std::uint8_t> raw;
  raw.reserve(height * (1 + width * 3));
  for (std::size_t y = 0; y < height; ++y) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), rgb.begin() + static_cast<std::ptrdiff_t>(y * width * 3),
               rgb.begin() + static_cast<std::ptrdiff_t>((y + 1) * width * 3));
  }
  uLongf packed_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> packed(packed_len);
  if (compress2(packed.data(), &packed_len, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
    fail(Errc::IoFailure, "zlib compression failed");
  }
  packed.resize(packed_len);

  std::string file = "\x89PNG\r\n\x1a\n";
  auto be32 = [](std::string& s, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  };
  auto chunk = [&](const char* type, const std::vector<std::uint8_t>& data) {
    be32(file, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body.append(data.begin(), data.end());
    file += body;
    be32(file, static_cast<std::uint32_t>(
                   crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
  };
  std::vector<std::uint8_t> ihdr;
  for (std::uint32_t v : {static_cast<std::uint32_t>(width), static_cast<std::uint32_t>(height)}) {
    for (int i = 3; i >= 0; --i) ihdr.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xffu));
  }
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // 8-bit RGB, no interlace
  chunk("IHDR", ihdr);
  chunk("IDAT", packed);
  chunk("IEND", {});
  write_text(out, file);
}

void render_scalp(const ScalpField& field, const fs::path& out, std::optional<std::pair<double, double>> limits) {
  const auto lim = limits.value_or(symmetric_limits(field.grid()));
  const std::size_t r = field.resolution();
  const auto& grid = field.grid();

  if (wants_png(out)) {
    const std::size_t size = std::max<std::size_t>(256, r * 4);
    Raster img(size, size);
    const double px_size = 2.0 * kExtent / static_cast<double>(size);
    for (std::size_t py = 0; py < size; ++py) {
      for (std::size_t px = 0; px < size; ++px) {
        const double x = -kExtent + (static_cast<double>(px) + 0.5) * px_size;
        const double y = kExtent - (static_cast<double>(py) + 0.5) * px_size;
        const double rad = std::hypot(x, y);
        const bool nose = segment_distance(x, y, -kNoseHalfWidth, std::sqrt(1 - kNoseHalfWidth * kNoseHalfWidth), 0.0,
                                           kNoseTip) < px_size ||
                          segment_distance(x, y, kNoseHalfWidth, std::sqrt(1 - kNoseHalfWidth * kNoseHalfWidth), 0.0,
                                           kNoseTip) < px_size;
        if (std::abs(rad - 1.0) < px_size || (nose && rad > 1.0)) {
          img.put(static_cast<long>(px), static_cast<long>(py), kBlack);
          continue;
        }
        if (rad >= 1.0) continue;
        const auto col = std::min(r - 1, static_cast<std::size_t>((x + 1.0) / 2.0 * static_cast<double>(r)));
        const auto row = std::min(r - 1, static_cast<std::size_t>((1.0 - y) / 2.0 * static_cast<double>(r)));
        const double v = grid[row * r + col];
        if (std::isnan(v)) continue;
        img.put(static_cast<long>(px), static_cast<long>(py), diverging_color(unit_position(v, lim)));
      }
    }
    for (const auto& e : field.electrodes()) {
      const double cx = (e.x + kExtent) / px_size, cy = (kExtent - e.y) / px_size;
      for (long dy = -2; dy <= 2; ++dy) {
        for (long dx = -2; dx <= 2; ++dx) {
          if (dx * dx + dy * dy <= 4) img.put(std::lround(cx - 0.5) + dx, std::lround(cy - 0.5) + dy, kBlack);
        }
      }
    }
    write_png(out, size, size, img.px);
    return;
  }

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"400\" height=\"400\" viewBox=\"" + num(-kExtent) + " " +
         num(-kExtent) + " " + num(2 * kExtent) + " " + num(2 * kExtent) + "\" shape-rendering=\"crispEdges\">\n";
  svg += "<rect x=\"" + num(-kExtent) + "\" y=\"" + num(-kExtent) + "\" width=\"" + num(2 * kExtent) +
         "\" height=\"" + num(2 * kExtent) + "\" fill=\"#ffffff\"/>\n";
  svg += "<g class=\"field\">\n";
  const double cell = 2.0 / static_cast<double>(r);
  for (std::size_t row = 0; row < r; ++row) {
    for (std::size_t col = 0; col < r; ++col) {
      const double v = grid[row * r + col];
      if (std::isnan(v)) continue;
      svg += "<rect x=\"" + num(-1.0 + static_cast<double>(col) * cell) + "\" y=\"" +
             num(-1.0 + static_cast<double>(row) * cell) + "\" width=\"" + num(cell) + "\" height=\"" + num(cell) +
             "\" fill=\"" + hex(diverging_color(unit_position(v, lim))) + "\"/>\n";
    }
  }
  svg += "</g>\n";
  const double base = std::sqrt(1 - kNoseHalfWidth * kNoseHalfWidth);
  svg += "<g fill=\"none\" stroke=\"#000000\" stroke-width=\"0.015\" shape-rendering=\"auto\">\n";
  svg += "<circle cx=\"0\" cy=\"0\" r=\"1\"/>\n";
  svg += "<polyline points=\"" + num(-kNoseHalfWidth) + "," + num(-base) + " 0," + num(-kNoseTip) + " " +
         num(kNoseHalfWidth) + "," + num(-base) + "\"/>\n";
  svg += "</g>\n<g class=\"electrodes\" fill=\"#000000\">\n";
  for (const auto& e : field.electrodes()) {
    svg += "<circle cx=\"" + num(e.x) + "\" cy=\"" + num(-e.y) + "\" r=\"0.02\"><title>" + escape(e.name) +
           "</title></circle>\n";
  }
  svg += "</g>\n</svg>\n";
  write_text(out, svg);
}

void render_timecourse(const Data& data, const std::vector<std::string>& channels, const fs::path& out) {
  if (channels.empty()) fail(Errc::AxisNotFound, "no channels selected");
  if (wants_png(out)) fail(Errc::InvalidArgument, "time courses are written as SVG only");
  const std::size_t tdim = axis_index(data, kTime);
  const std::size_t cdim = axis_index(data, kChannel);
  const auto& time = data.numeric_axis(tdim);
  const auto& names = data.label_axis(cdim);
  if (time.size() < 2) fail(Errc::TooFewSamples, "need at least two samples to draw a line");

  std::size_t line_dim = data.rank();
  LabelAxis line_names{""};
  if (data.rank() == 3) {
    line_dim = 3 - tdim - cdim;
    line_names.clear();
    for (std::size_t i = 0; i < data.shape()[line_dim]; ++i) {
      line_names.push_back(data.is_numeric_axis(line_dim) ? num(data.numeric_axis(line_dim)[i], 2)
                                                          : data.label_axis(line_dim)[i]);
    }
  } else if (data.rank() != 2) {
    fail(Errc::DimensionMismatch, "time courses need (time, channel) or epoched data");
  }

  auto value_at = [&](std::size_t line, std::size_t t, std::size_t c) {
    std::size_t offset = 0;
    for (std::size_t d = 0; d < data.rank(); ++d) {
      const std::size_t i = d == tdim ? t : d == cdim ? c : line;
      offset += i * data.stride(d);
    }
    return data.values()[offset];
  };

  static constexpr std::array<const char*, 6> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                                      "#8c564b"};
  constexpr double kW = 600, kH = 140, kLeft = 60, kRight = 20, kTop = 20, kGap = 30;
  const double height = kTop + static_cast<double>(channels.size()) * (kH + kGap);
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW + kLeft + kRight, 0) +
                    "\" height=\"" + num(height, 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (std::size_t p = 0; p < channels.size(); ++p) {
    auto it = std::find(names.begin(), names.end(), channels[p]);
    if (it == names.end()) fail(Errc::AxisNotFound, "no channel named '" + channels[p] + "'");
    const auto c = static_cast<std::size_t>(it - names.begin());

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t l = 0; l < line_names.size(); ++l) {
      for (std::size_t t = 0; t < time.size(); ++t) {
        const double v = value_at(l, t, c);
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    if (!(hi > lo)) {
      const double mid = std::isfinite(lo) ? lo : 0.0;
      lo = mid - 1.0;
      hi = mid + 1.0;
    }
    const double y0 = kTop + static_cast<double>(p) * (kH + kGap);
    auto sx = [&](double t) { return kLeft + (t - time.front()) / (time.back() - time.front()) * kW; };
    auto sy = [&](double v) { return y0 + kH - (v - lo) / (hi - lo) * kH; };

    svg += "<g class=\"panel\">\n";
    svg += "<rect x=\"" + num(kLeft, 0) + "\" y=\"" + num(y0, 0) + "\" width=\"" + num(kW, 0) + "\" height=\"" +
           num(kH, 0) + "\" fill=\"none\" stroke=\"#888888\"/>\n";
    svg += "<text x=\"" + num(kLeft + 4, 0) + "\" y=\"" + num(y0 + 14, 0) + "\">" + escape(channels[p]) + "</text>\n";
    if (lo < 0.0 && hi > 0.0) {
      svg += "<line x1=\"" + num(kLeft, 0) + "\" x2=\"" + num(kLeft + kW, 0) + "\" y1=\"" + num(sy(0.0), 2) +
             "\" y2=\"" + num(sy(0.0), 2) + "\" stroke=\"#cccccc\"/>\n";
    }
    svg += "<text x=\"" + num(kLeft, 0) + "\" y=\"" + num(y0 + kH + 13, 0) + "\">" + num(time.front(), 0) +
           " ms</text>\n";
    svg += "<text x=\"" + num(kLeft + kW, 0) + "\" y=\"" + num(y0 + kH + 13, 0) + "\" text-anchor=\"end\">" +
           num(time.back(), 0) + " ms</text>\n";
    svg += "<text x=\"" + num(kLeft - 4, 0) + "\" y=\"" + num(y0 + 10, 0) + "\" text-anchor=\"end\">" + num(hi, 3) +
           "</text>\n";
    svg += "<text x=\"" + num(kLeft - 4, 0) + "\" y=\"" + num(y0 + kH, 0) + "\" text-anchor=\"end\">" + num(lo, 3) +
           "</text>\n";
    for (std::size_t l = 0; l < line_names.size(); ++l) {
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(palette[l % palette.size()]) + "\" points=\"";
      for (std::size_t t = 0; t < time.size(); ++t) {
        const double v = value_at(l, t, c);
        if (!std::isfinite(v)) continue;
        svg += num(sx(time[t]), 2) + "," + num(sy(v), 2) + (t + 1 < time.size() ? " " : "");
      }
      svg += "\"/>\n";
      if (!line_names[l].empty() && p == 0) {
        svg += "<text x=\"" + num(kLeft + kW - 4, 0) + "\" y=\"" + num(y0 + 14 + 13 * static_cast<double>(l), 0) +
               "\" text-anchor=\"end\" fill=\"" + palette[l % palette.size()] + "\">" + escape(line_names[l]) +
               "</text>\n";
      }
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  write_text(out, svg);
}

void render_r2_map(const Data& r2, const std::vector<std::string>& channel_order, const fs::path& out) {
  if (r2.rank() != 2) fail(Errc::DimensionMismatch, "r^2 map must be (time, channel)");
  const std::size_t tdim = axis_index(r2, kTime);
  const std::size_t cdim = axis_index(r2, kChannel);
  for (double v : r2.values()) {
    if (!(v >= -1.0 && v <= 1.0)) fail(Errc::ValueOutOfRange, "r^2 value " + num(v, 6) + " outside [-1, 1]");
  }
  const auto& time = r2.numeric_axis(tdim);
  const auto& names = r2.label_axis(cdim);
  const std::vector<std::string>& order = channel_order.empty() ? names : channel_order;
  std::vector<std::size_t> rows;
  for (const auto& ch : order) {
    auto it = std::find(names.begin(), names.end(), ch);
    if (it == names.end()) fail(Errc::AxisNotFound, "no channel named '" + ch + "'");
    rows.push_back(static_cast<std::size_t>(it - names.begin()));
  }
  const auto lim = symmetric_limits(r2.values());
  auto value = [&](std::size_t t, std::size_t c) { return r2.values()[t * r2.stride(tdim) + c * r2.stride(cdim)]; };
  const std::size_t nt = time.size();

  if (wants_png(out)) {
    constexpr std::size_t kCell = 8;
    if (nt == 0 || rows.empty()) fail(Errc::InvalidArgument, "empty r^2 map");
    Raster img(nt * kCell, rows.size() * kCell);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t t = 0; t < nt; ++t) {
        const Rgb c = diverging_color(unit_position(value(t, rows[r]), lim));
        for (std::size_t dy = 0; dy < kCell; ++dy) {
          for (std::size_t dx = 0; dx < kCell; ++dx) {
            img.put(static_cast<long>(t * kCell + dx), static_cast<long>(r * kCell + dy), c);
          }
        }
      }
    }
    write_png(out, img.w, img.h, img.px);
    return;
  }

  constexpr double kCellW = 8, kCellH = 10, kLeft = 60, kTop = 10;
  const double width = kLeft + static_cast<double>(nt) * kCellW + 80;
  const double height = kTop + static_cast<double>(rows.size()) * kCellH + 30;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, 0) + "\" height=\"" +
                    num(height, 0) + "\" font-family=\"sans-serif\" font-size=\"9\" shape-rendering=\"crispEdges\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n<g class=\"map\">\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double y = kTop + static_cast<double>(r) * kCellH;
    svg += "<text x=\"" + num(kLeft - 4, 0) + "\" y=\"" + num(y + kCellH - 2, 0) + "\" text-anchor=\"end\">" +
           escape(names[rows[r]]) + "</text>\n";
    for (std::size_t t = 0; t < nt; ++t) {
      svg += "<rect x=\"" + num(kLeft + static_cast<double>(t) * kCellW, 0) + "\" y=\"" + num(y, 0) + "\" width=\"" +
             num(kCellW, 0) + "\" height=\"" + num(kCellH, 0) + "\" fill=\"" +
             hex(diverging_color(unit_position(value(t, rows[r]), lim))) + "\"/>\n";
    }
  }
  svg += "</g>\n";
  const double yb = kTop + static_cast<double>(rows.size()) * kCellH + 14;
  if (nt > 0) {
    svg += "<text x=\"" + num(kLeft, 0) + "\" y=\"" + num(yb, 0) + "\">" + num(time.front(), 0) + " ms</text>\n";
    svg += "<text x=\"" + num(kLeft + static_cast<double>(nt) * kCellW, 0) + "\" y=\"" + num(yb, 0) +
           "\" text-anchor=\"end\">" + num(time.back(), 0) + " ms</text>\n";
  }
  // Colour bar.
  const double bx = kLeft + static_cast<double>(nt) * kCellW + 20;
  constexpr int kSteps = 21;
  const double bar_h = static_cast<double>(rows.size()) * kCellH;
  for (int s = 0; s < kSteps; ++s) {
    const double t = 1.0 - static_cast<double>(s) / (kSteps - 1);
    svg += "<rect x=\"" + num(bx, 0) + "\" y=\"" + num(kTop + bar_h * s / kSteps, 2) + "\" width=\"10\" height=\"" +
           num(bar_h / kSteps + 0.5, 2) + "\" fill=\"" + hex(diverging_color(t)) + "\"/>\n";
  }
  svg += "<text x=\"" + num(bx + 14, 0) + "\" y=\"" + num(kTop + 8, 0) + "\">" + num(lim.second, 3) + "</text>\n";
  svg += "<text x=\"" + num(bx + 14, 0) + "\" y=\"" + num(kTop + bar_h, 0) + "\">" + num(lim.first, 3) + "</text>\n";
  svg += "</svg>\n";
  write_text(out, svg);
}

}  // namespace bcitk
