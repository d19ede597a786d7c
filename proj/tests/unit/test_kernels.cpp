#include <doctest.h>

#include <cmath>

#include "bcitk/kernels.hpp"
#include "common.hpp"

using namespace bcitk;
using namespace bcitk::testing;
namespace k = bcitk::kernels;

// The parallel kernels partition work across lanes, epochs, points or grid
// rows; each output element is computed by the same arithmetic as in the
// serial reference, so results must match bit for bit.

TEST_SUITE("kernels") {
  TEST_CASE("iir serial and omp agree bitwise") {
    Rng rng(11);
    const std::vector<double> b{0.2, 0.0, -0.2}, a{1.0, -1.1, 0.45};
    for (const auto layout : {k::LaneLayout{1, 500, 7}, k::LaneLayout{9, 120, 1}, k::LaneLayout{3, 64, 5}}) {
      const auto x = normals(rng, layout.size());
      const auto z0 = normals(rng, layout.lanes() * 2);
      std::vector<double> ys(x.size()), yp(x.size()), zs = z0, zp = z0;
      k::serial::iir_df2t(b, a, layout, x, ys, zs);
      k::omp::iir_df2t(b, a, layout, x, yp, zp);
      CHECK(ys == yp);
      CHECK(zs == zp);
    }
  }

  TEST_CASE("iir against a direct difference equation") {
    Rng rng(12);
    const std::vector<double> b{0.5, 0.25}, a{1.0, -0.3};
    const auto x = normals(rng, 50);
    std::vector<double> y(50), z(1, 0.0);
    k::serial::iir_df2t(b, a, {1, 50, 1}, x, y, z);
    double prev_x = 0.0, prev_y = 0.0;
    for (std::size_t t = 0; t < 50; ++t) {
      const double ref = 0.5 * x[t] + 0.25 * prev_x + 0.3 * prev_y;
      CHECK(y[t] == doctest::Approx(ref).epsilon(1e-14));
      prev_x = x[t];
      prev_y = ref;
    }
  }

  TEST_CASE("covariances serial and omp agree and match a two-pass estimate") {
    Rng rng(13);
    const std::size_t ne = 6, nt = 40, nc = 4;
    const auto x = normals(rng, ne * nt * nc);
    std::vector<double> cs(ne * nc * nc), cp(cs.size());
    k::serial::epoch_covariances(x, ne, nt, nc, cs);
    k::omp::epoch_covariances(x, ne, nt, nc, cp);
    CHECK(cs == cp);
    // Epoch 2, entry (1, 3).
    const double* e = x.data() + 2 * nt * nc;
    double m1 = 0.0, m3 = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
      m1 += e[t * nc + 1];
      m3 += e[t * nc + 3];
    }
    m1 /= nt;
    m3 /= nt;
    double acc = 0.0;
    for (std::size_t t = 0; t < nt; ++t) acc += (e[t * nc + 1] - m1) * (e[t * nc + 3] - m3);
    CHECK(cs[2 * nc * nc + 1 * nc + 3] == doctest::Approx(acc / (nt - 1)).epsilon(1e-12));
    CHECK(cs[2 * nc * nc + 1 * nc + 3] == cs[2 * nc * nc + 3 * nc + 1]);
  }

  TEST_CASE("spectra serial and omp agree within FFT rounding") {
    Rng rng(14);
    const k::LaneLayout layout{2, 128, 3};
    const auto x = normals(rng, layout.size());
    std::vector<double> w(128, 1.0);
    std::vector<double> ss(2 * 65 * 3), sp(ss.size());
    k::serial::amplitude_spectra(w, layout, x, ss);
    k::omp::amplitude_spectra(w, layout, x, sp);
    for (std::size_t i = 0; i < ss.size(); ++i) CHECK(std::abs(ss[i] - sp[i]) < 1e-12);
    // DC bin equals |mean| for a rectangular window.
    double mean = 0.0;
    for (std::size_t t = 0; t < 128; ++t) mean += x[t * 3 + 1];
    CHECK(ss[1] == doctest::Approx(std::abs(mean / 128)).epsilon(1e-12));
  }

  TEST_CASE("signed r2 serial and omp agree") {
    Rng rng(15);
    const std::size_t n = 30, p = 17;
    auto v = normals(rng, n * p);
    std::vector<int> label(n);
    for (std::size_t i = 0; i < n; ++i) label[i] = static_cast<int>(i % 3);  // 2 is skipped
    for (std::size_t i = 0; i < n; ++i) v[i * p + 4] = 1.0;                   // zero variance
    std::vector<double> rs(p), rp(p);
    CHECK(k::serial::signed_r2(v, label, p, rs) == 1);
    CHECK(k::omp::signed_r2(v, label, p, rp) == 1);
    CHECK(rs == rp);
    CHECK(rs[4] == 0.0);
    for (double r : rs) CHECK(std::abs(r) <= 1.0);
  }

  TEST_CASE("tps grid serial and omp agree") {
    const std::vector<double> cx{0.0, 0.5, -0.5, 0.2}, cy{0.0, 0.3, 0.3, -0.6}, w{1.0, -0.5, 0.25, -0.75};
    const k::TpsModel m{cx, cy, w, 0.1, 0.2, -0.3};
    std::vector<double> gs(33 * 33), gp(gs.size());
    k::serial::tps_grid(m, 33, gs);
    k::omp::tps_grid(m, 33, gp);
    for (std::size_t i = 0; i < gs.size(); ++i) {
      CHECK(std::isnan(gs[i]) == std::isnan(gp[i]));
      if (!std::isnan(gs[i])) CHECK(gs[i] == gp[i]);
    }
    CHECK(std::isnan(gs[0]));                       // corner outside the disc
    CHECK_FALSE(std::isnan(gs[16 * 33 + 16]));      // centre
    CHECK(k::tps_kernel(0.0) == 0.0);
    CHECK(k::tps_kernel(std::exp(1.0)) == doctest::Approx(std::exp(1.0) * 0.5));
  }
}
