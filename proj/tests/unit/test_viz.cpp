#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <numbers>
#include <fstream>

#include "bcitk/io.hpp"
#include "bcitk/viz.hpp"
#include "common.hpp"

using namespace bcitk;
using namespace bcitk::testing;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct Image {
  std::size_t w = 0, h = 0;
  std::vector<std::uint8_t> rgb;
  Rgb at(std::size_t x, std::size_t y) const {
    const std::size_t i = (y * w + x) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
};

/// Minimal decoder for unfiltered 8-bit RGB PNGs.
Image decode_png(const fs::path& p) {
  const std::string f = read_text(p);
  REQUIRE(f.substr(0, 8) == "\x89PNG\r\n\x1a\n");
  auto be32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(f[at + static_cast<std::size_t>(i)]);
    return v;
  };
  Image img;
  std::string idat;
  for (std::size_t at = 8; at < f.size();) {
    const std::uint32_t len = be32(at);
    const std::string type = f.substr(at + 4, 4);
    const std::string body = f.substr(at + 4, 4 + len);
    CHECK(be32(at + 8 + len) == crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
    if (type == "IHDR") {
      img.w = be32(at + 8);
      img.h = be32(at + 12);
      CHECK(f[at + 16] == 8);
      CHECK(f[at + 17] == 2);
    } else if (type == "IDAT") {
      idat += f.substr(at + 8, len);
    }
    at += 12 + len;
  }
  std::vector<std::uint8_t> raw(img.h * (1 + img.w * 3));
  uLongf raw_len = raw.size();
  REQUIRE(uncompress(raw.data(), &raw_len, reinterpret_cast<const Bytef*>(idat.data()), idat.size()) == Z_OK);
  REQUIRE(raw_len == raw.size());
  for (std::size_t y = 0; y < img.h; ++y) {
    REQUIRE(raw[y * (1 + img.w * 3)] == 0);
    img.rgb.insert(img.rgb.end(), raw.begin() + static_cast<std::ptrdiff_t>(y * (1 + img.w * 3) + 1),
                   raw.begin() + static_cast<std::ptrdiff_t>((y + 1) * (1 + img.w * 3)));
  }
  return img;
}

bool reddish(const Rgb& c) { return c[0] > c[2] + 40; }
bool bluish(const Rgb& c) { return c[2] > c[0] + 40; }

const std::vector<std::string> kNames{"Fz", "Cz", "Pz", "C3", "C4", "Oz", "T7", "T8", "Fp1", "Fp2"};

}  // namespace

TEST_SUITE("viz") {
  TEST_CASE("constant values give a constant field") {
    const std::vector<double> v(kNames.size(), 3.5);
    const auto f = interpolate_scalp(v, kNames, standard_1020_layout(), 32);
    std::size_t inside = 0;
    for (std::size_t r = 0; r < 32; ++r) {
      for (std::size_t c = 0; c < 32; ++c) {
        const double g = f.grid()[r * 32 + c];
        CHECK(f.inside(r, c) == !std::isnan(g));
        if (f.inside(r, c)) {
          ++inside;
          CHECK(g == doctest::Approx(3.5).epsilon(1e-9));
        }
      }
    }
    const double disc = std::numbers::pi / 4.0 * 32 * 32;
    CHECK(std::abs(static_cast<double>(inside) - disc) < 30.0);
  }

  TEST_CASE("interpolant passes through the electrode values") {
    Rng rng(51);
    const auto v = normals(rng, kNames.size());
    const auto layout = standard_1020_layout();
    const auto f = interpolate_scalp(v, kNames, layout);
    for (std::size_t i = 0; i < kNames.size(); ++i) {
      const auto e = *layout.find(kNames[i]);
      CHECK(f.evaluate(e.x, e.y) == doctest::Approx(v[i]).epsilon(1e-9).scale(1.0));
    }
  }

  TEST_CASE("interpolation is affine equivariant") {
    Rng rng(52);
    const auto v = normals(rng, kNames.size());
    std::vector<double> w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = -2.0 * v[i] + 0.75;
    const auto layout = standard_1020_layout();
    const auto fv = interpolate_scalp(v, kNames, layout, 24), fw = interpolate_scalp(w, kNames, layout, 24);
    for (std::size_t i = 0; i < fv.grid().size(); ++i) {
      if (!std::isnan(fv.grid()[i])) CHECK(fw.grid()[i] == doctest::Approx(-2.0 * fv.grid()[i] + 0.75).epsilon(1e-9).scale(1.0));
    }
  }

  TEST_CASE("interpolation errors") {
    const auto layout = standard_1020_layout();
    const std::vector<double> three{1, 2, 3}, two{1, 2};
    CHECK(code_of([&] { interpolate_scalp(three, {"Fz", "Cz", "Nope"}, layout); }) == Errc::MissingPosition);
    CHECK(code_of([&] { interpolate_scalp(two, {"Fz", "Cz"}, layout); }) == Errc::TooFewElectrodes);
    CHECK(code_of([&] { interpolate_scalp(three, {"Fz", "Cz", "Pz"}, layout); }) == Errc::TooFewElectrodes);  // collinear
    CHECK(code_of([&] { interpolate_scalp(two, {"Fz", "Cz", "Pz"}, layout); }) == Errc::LengthMismatch);
  }

  TEST_CASE("scalp PNG shows a front-back dipole") {
    TempDir tmp("viz_png");
    std::vector<double> v(kNames.size(), 0.0);
    v[0] = 1.0;   // Fz
    v[2] = -1.0;  // Pz
    const auto f = interpolate_scalp(v, kNames, standard_1020_layout());
    render_scalp(f, tmp / "s.png");
    const Image img = decode_png(tmp / "s.png");
    REQUIRE(img.w == img.h);
    // Coloured pixels on the vertical midline: front (top) red, back blue.
    std::vector<Rgb> mid;
    for (std::size_t y = 0; y < img.h; ++y) {
      const Rgb c = img.at(img.w / 2 + 6, y);
      if (c[0] != c[1] || c[1] != c[2]) mid.push_back(c);
    }
    REQUIRE(mid.size() > img.h / 2);
    CHECK(reddish(mid[mid.size() / 4]));
    CHECK(bluish(mid[3 * mid.size() / 4]));

    render_scalp(f, tmp / "a.png");
    CHECK(read_text(tmp / "s.png") == read_text(tmp / "a.png"));
    render_scalp(f, tmp / "s.svg");
    CHECK(read_text(tmp / "s.svg").rfind("<svg", 0) == 0);
  }

  TEST_CASE("r2 map colours follow the sign") {
    TempDir tmp("viz_r2");
    DataParts p{{2, 2}, {0.5, -0.8, 0.0, 0.9}, {NumericAxis{0.0, 10.0}, LabelAxis{"Cz", "Fz"}},
                {"time", "channel"}, {"ms", "#"}, Json::object(), std::nullopt};
    const Data r2 = make_data(p);
    render_r2_map(r2, {"Fz", "Cz"}, tmp / "r.png");
    const Image img = decode_png(tmp / "r.png");
    CHECK(img.w == 16);
    CHECK(img.h == 16);
    // Row 0 is Fz: -0.8 at t0, 0.9 at t1. Row 1 is Cz: 0.5, 0.0.
    CHECK(bluish(img.at(0, 0)));
    CHECK(reddish(img.at(8, 0)));
    CHECK(reddish(img.at(0, 8)));
    const Rgb zero = img.at(8, 8);
    CHECK(zero[0] == zero[2]);

    for (auto& x : p.values) x = -x;
    render_r2_map(make_data(p), {"Fz", "Cz"}, tmp / "n.png");
    const Image neg = decode_png(tmp / "n.png");
    CHECK(reddish(neg.at(0, 0)));
    CHECK(bluish(neg.at(8, 0)));

    p.values[0] = 1.5;
    CHECK(code_of([&] { render_r2_map(make_data(p), {}, tmp / "x.svg"); }) == Errc::ValueOutOfRange);
    CHECK(code_of([&] { render_r2_map(r2, {"Oz"}, tmp / "x.svg"); }) == Errc::AxisNotFound);
  }

  TEST_CASE("diverging colour map") {
    const Rgb w = diverging_color(0.5);
    CHECK(w[0] == w[1]);
    CHECK(w[1] == w[2]);
    CHECK(w[0] > 240);
    CHECK(reddish(diverging_color(1.0)));
    CHECK(bluish(diverging_color(0.0)));
  }

  TEST_CASE("time courses") {
    TempDir tmp("viz_tc");
    Rng rng(53);
    const Data d = noise_signal(rng, 50, 4, 100.0);
    render_timecourse(d, {"ch1", "ch3", "ch4"}, tmp / "t.svg");
    const std::string svg = read_text(tmp / "t.svg");
    std::size_t panels = 0;
    for (std::size_t at = svg.find("class=\"panel\""); at != std::string::npos; at = svg.find("class=\"panel\"", at + 1)) {
      ++panels;
    }
    CHECK(panels == 3);
    render_timecourse(d, {"ch1", "ch3", "ch4"}, tmp / "u.svg");
    CHECK(read_text(tmp / "u.svg") == svg);
    CHECK(code_of([&] { render_timecourse(d, {}, tmp / "e.svg"); }) == Errc::AxisNotFound);
    CHECK(code_of([&] { render_timecourse(d, {"nope"}, tmp / "e.svg"); }) == Errc::AxisNotFound);
  }
}
