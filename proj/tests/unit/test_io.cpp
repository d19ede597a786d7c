#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "bcitk/io.hpp"
#include "common.hpp"

using namespace bcitk;
using namespace bcitk::testing;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("io-formats") {
  TEST_CASE("container round trip and size") {
    TempDir tmp("io_rt");
    Rng rng(41);
    const Data d = with_markers(noise_signal(rng, 30, 20, 100.0), MarkerList({{10.0, "S 1"}, {250.5, "trial:A"}}));
    save_data(d, tmp / "c");
    CHECK(fs::file_size(tmp / "c" / "data.bin") == 4800);
    CHECK(data_equal(load_data(tmp / "c"), d));
    // Deterministic bytes.
    save_data(load_data(tmp / "c"), tmp / "c2");
    CHECK(read_text(tmp / "c" / "meta.json") == read_text(tmp / "c2" / "meta.json"));
    CHECK(read_text(tmp / "c" / "data.bin") == read_text(tmp / "c2" / "data.bin"));
  }

  TEST_CASE("special values survive") {
    TempDir tmp("io_special");
    const double inf = std::numeric_limits<double>::infinity();
    DataParts p{{3, 1},
                {std::nan(""), -0.0, std::numeric_limits<double>::denorm_min()},
                {NumericAxis{-inf, 0.0, inf}, LabelAxis{"\xc3\xa9\t\"q\""}},
                {"x", "channel"},
                {"", ""},
                Json::object(),
                MarkerList({{-inf, "a"}})};
    const Data d = make_data(p);
    save_data(d, tmp / "c");
    const Data r = load_data(tmp / "c");
    CHECK(data_equal(r, d));
    CHECK(std::signbit(r.values()[1]));
  }

  TEST_CASE("extra must be plain JSON") {
    TempDir tmp("io_extra");
    const Data d = with_attribute(make_continuous({1.0}, {0.0}, {"a"}), "bad", Json(std::nan("")));
    CHECK(code_of([&] { save_data(d, tmp / "c"); }) == Errc::UnserializableExtra);
    const Data b = with_attribute(make_continuous({1.0}, {0.0}, {"a"}), "bin", Json::binary({1, 2}));
    CHECK(code_of([&] { save_data(b, tmp / "c"); }) == Errc::UnserializableExtra);
  }

  TEST_CASE("hand-written container") {
    TempDir tmp("io_hand");
    fs::create_directories(tmp / "c");
    write_text(tmp / "c" / "meta.json", R"({"version": 1, "dtype": "float64-le", "shape": [1, 1],
      "names": ["time", "channel"], "units": ["ms", "#"],
      "axes": [{"kind": "numeric", "values": [0]}, {"kind": "label", "values": ["Cz"]}],
      "markers": null, "extra": {"fs": 100}})");
    const double seven = 7.0;
    std::string bin(8, '\0');
    std::memcpy(bin.data(), &seven, 8);  // the test host is little-endian
    write_text(tmp / "c" / "data.bin", bin);
    const Data d = load_data(tmp / "c");
    CHECK(d.values()[0] == 7.0);
    CHECK(d.label_axis(1) == LabelAxis{"Cz"});
    CHECK(sampling_rate(d) == 100.0);
    CHECK_FALSE(d.markers().has_value());
  }

  TEST_CASE("corrupt containers") {
    TempDir tmp("io_bad");
    save_data(make_continuous({1, 2, 3, 4}, {0.0, 1.0}, {"a", "b"}), tmp / "c");
    const std::string meta = read_text(tmp / "c" / "meta.json");
    write_text(tmp / "c" / "data.bin", std::string(24, '\0'));
    CHECK(code_of([&] { load_data(tmp / "c"); }) == Errc::CorruptContainer);

    write_text(tmp / "c" / "data.bin", std::string(32, '\0'));
    Json j = Json::parse(meta);
    j["version"] = 2;
    write_text(tmp / "c" / "meta.json", j.dump());
    CHECK(code_of([&] { load_data(tmp / "c"); }) == Errc::UnsupportedVersion);

    write_text(tmp / "c" / "meta.json", meta.substr(0, meta.size() / 2));
    CHECK(code_of([&] { load_data(tmp / "c"); }) == Errc::CorruptContainer);

    j = Json::parse(meta);
    j["shape"] = {4, 1};
    write_text(tmp / "c" / "meta.json", j.dump());
    CHECK(code_of([&] { load_data(tmp / "c"); }) == Errc::CorruptContainer);

    CHECK(code_of([&] { load_data(tmp / "missing"); }) == Errc::IoFailure);
  }

  TEST_CASE("ASCII import") {
    TempDir tmp("io_ascii");
    write_text(tmp / "s.txt", "1 2\n3\t4\n  5 6  \n");
    write_text(tmp / "m.txt", "");
    const Data d = import_ascii_matrix(tmp / "s.txt", tmp / "m.txt", 100.0);
    CHECK(d.shape() == Shape{3, 2});
    CHECK(d.numeric_axis(0) == NumericAxis{0.0, 10.0, 20.0});
    CHECK(d.label_axis(1) == LabelAxis{"ch1", "ch2"});
    CHECK(sampling_rate(d) == 100.0);
    REQUIRE(d.markers().has_value());
    CHECK(d.markers()->empty());
    CHECK_FALSE(import_ascii_matrix(tmp / "s.txt", "", 100.0).markers().has_value());

    write_text(tmp / "m2.txt", "10\tS 1\n20.5\ttrial:B\n");
    const Data m = import_ascii_matrix(tmp / "s.txt", tmp / "m2.txt", 100.0, {"Fz", "Cz"});
    CHECK(*m.markers() == MarkerList({{10.0, "S 1"}, {20.5, "trial:B"}}));
    CHECK(m.label_axis(1) == LabelAxis{"Fz", "Cz"});

    write_text(tmp / "r.txt", "1 2\n3\n");
    CHECK(code_of([&] { import_ascii_matrix(tmp / "r.txt", "", 100.0); }) == Errc::RaggedRows);
    write_text(tmp / "bad.txt", "ten\tS\n");
    CHECK(code_of([&] { import_ascii_matrix(tmp / "s.txt", tmp / "bad.txt", 100.0); }) == Errc::BadMarkerLine);
    CHECK(code_of([&] { import_ascii_matrix(tmp / "s.txt", "", 100.0, {"a"}); }) == Errc::ChannelMismatch);
  }

  TEST_CASE("marker files round trip") {
    TempDir tmp("io_markers");
    const MarkerList m({{0.1, "a b"}, {1e6 / 3.0, "trial:Z"}});
    write_markers(m, tmp / "m.txt");
    CHECK(read_markers(tmp / "m.txt") == m);
    CHECK(code_of([&] { write_markers(MarkerList({{0.0, "a\tb"}}), tmp / "x.txt"); }) == Errc::BadMarkerLine);
  }

  TEST_CASE("layouts") {
    TempDir tmp("io_layout");
    const ElectrodeLayout l({{"Fz", 0.0, 0.4}, {"Cz", 0.0, 0.0}, {"Oz", 0.0, -0.9}});
    write_layout(l, tmp / "l.csv");
    const ElectrodeLayout r = read_layout(tmp / "l.csv");
    REQUIRE(r.size() == 3);
    CHECK(r.find("cz")->name == "Cz");
    CHECK(r.find("Oz")->y == -0.9);
    CHECK_FALSE(r.find("Pz").has_value());

    CHECK(code_of([] { ElectrodeLayout({{"Cz", 0, 0}, {"CZ", 0.1, 0}}); }) == Errc::BadLayout);
    CHECK(code_of([] { ElectrodeLayout({{"far", 1.0, 0.6}}); }) == Errc::BadLayout);
    write_text(tmp / "bad.csv", "Cz,0\n");
    CHECK(code_of([&] { read_layout(tmp / "bad.csv"); }) == Errc::BadLayout);

    CHECK(frontal_to_occipital({"Oz", "Cz", "Fz"}, l) == std::vector<std::string>{"Fz", "Cz", "Oz"});
    CHECK(code_of([&] { frontal_to_occipital({"Pz"}, l); }) == Errc::MissingPosition);
  }

  TEST_CASE("standard and grid layouts") {
    const auto s = standard_1020_layout();
    CHECK(s.size() == 64);
    CHECK(s.find("Cz")->x == 0.0);
    CHECK(s.find("Cz")->y == 0.0);
    CHECK(s.find("Fz")->y > 0.0);
    CHECK(s.find("C3")->x < 0.0);
    CHECK(std::hypot(s.find("Fpz")->x, s.find("Fpz")->y) == doctest::Approx(0.8));
    CHECK(std::hypot(s.find("T7")->x, s.find("T7")->y) == doctest::Approx(0.8));

    std::vector<std::string> names;
    for (int i = 1; i <= 6; ++i) names.push_back("E" + std::to_string(i));
    const auto g = grid_layout(names, 2, 3);
    CHECK(g.find("E1")->y > g.find("E4")->y);
    CHECK(g.find("E1")->x < g.find("E2")->x);
    for (const auto& e : g.electrodes()) CHECK(std::hypot(e.x, e.y) < 1.0);
    CHECK(code_of([&] { grid_layout(names, 2, 2); }) == Errc::BadLayout);
  }

  TEST_CASE("shipped layout file equals the built-in table") {
    const auto file = read_layout(fs::path(BCITK_SOURCE_DIR) / "data" / "layouts" / "standard_1020.csv");
    const auto ref = standard_1020_layout();
    REQUIRE(file.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(file.electrodes()[i].name == ref.electrodes()[i].name);
      CHECK(file.electrodes()[i].x == ref.electrodes()[i].x);
      CHECK(file.electrodes()[i].y == ref.electrodes()[i].y);
    }
  }
}
