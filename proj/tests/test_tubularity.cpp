#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ost/phantoms.hpp"
#include "ost/tubularity.hpp"

using namespace ost;

namespace {

ShScoreExpansion constant_expansion(const Dims& d, cplx value) {
  ShScoreExpansion e;
  e.dims = d;
  e.L = 2;
  e.coeffs.assign(voxel_count(d) * e.count(), cplx(0, 0));
  for (std::size_t v = 0; v < voxel_count(d); ++v) e.coeffs[v * e.count()] = value * std::sqrt(4 * M_PI);
  return e;
}

WaveletBank processing_bank() {
  CakeParams p;
  p.filter_dims = {15, 15, 15};
  p.s_rho = 12.5;
  p.s_o = 0.08;
  return build_bank(p, sample_sphere(42, 0));
}

TubularityField run(const Volume& f, const TubularityConfig& tc) {
  const auto U = forward(f, processing_bank());
  return tubularity(sh_expand(U, 5), U.design.points, tc);
}

}  // namespace

TEST_CASE("edge product clips negative responses") {
  const Dims d{9, 9, 9};
  const Vec3 x{4, 4, 4}, n{0, 0, 1};
  CHECK(eprod(constant_expansion(d, 0.0), x, n, 2.0, 0.3) == 0.0);
  CHECK(eprod(constant_expansion(d, cplx(0, -1)), x, n, 2.0, 0.3) == 0.0);
  CHECK(eprod(constant_expansion(d, cplx(0, 2)), x, n, 2.0, 0.3) == doctest::Approx(4.0));
  // samples outside the volume contribute nothing
  CHECK(eprod(constant_expansion(d, cplx(0, 2)), x, n, 6.0, 0.3) == 0.0);
}

TEST_CASE("radial kernel integrates to one over r") {
  for (double rp : {1.0, 3.5, 8.0})
    for (double s : {0.2, 0.3, 0.5}) {
      // substitute r = rp e^t
      const auto [t, w] = oracle::gauss_legendre(200, -10 * s, 10 * s);
      double acc = 0.0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const double r = rp * std::exp(t[k]);
        acc += w[k] * k_rad(r, rp, s) * r;
      }
      CHECK(acc == doctest::Approx(1.0).epsilon(1e-10));
    }
  CHECK(k_rad(2.0, 3.0, 0.3) > k_rad(1.0, 3.0, 0.3));
}

TEST_CASE("orientation kernel: periodic, symmetric, truncated Gaussian mass") {
  const double s = M_PI / 8;
  for (double t : {0.0, 0.2, 1.0, 3.0}) {
    CHECK(k_or(t, s) == doctest::Approx(k_or(-t, s)));
    CHECK(k_or(t, s) == doctest::Approx(k_or(t + 2 * M_PI, s)));
  }
  CHECK(k_or(3.5 * s, s) == 0.0);
  const auto [t, w] = oracle::gauss_legendre(400, -3 * s, 3 * s);
  double acc = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) acc += w[k] * k_or(t[k], s);
  CHECK(acc == doctest::Approx(std::erf(3 / std::sqrt(2.0))).epsilon(1e-9));
}

TEST_CASE("trapezoid weights") {
  const auto w = trapezoid_weights({1, 2, 4});
  CHECK(w == std::vector<double>{0.5, 1.5, 1.0});
  CHECK(trapezoid_weights({3}) == std::vector<double>{1.0});
}

TEST_CASE("features pick the single maximum") {
  TubularityV V;
  V.dims = {2, 2, 1};
  V.orientations = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  V.radii = {1, 2, 3, 4};
  V.data.assign(4 * 3 * 4, 0.0f);
  V.data[(2 * 3 + 1) * 4 + 3] = 5.0f;
  const auto tf = features(V);
  CHECK(tf.st[2] == 5.0);
  CHECK(tf.rstar[2] == 4.0);
  CHECK(tf.nstar_index[2] == 1);
  CHECK(tf.nstar[2] == Vec3{0, 1, 0});
  CHECK(tf.st[0] == 0.0);
}

TEST_CASE("segmentation paints balls of radius r* around centers") {
  TubularityField tf;
  tf.dims = {11, 11, 11};
  const std::size_t n = voxel_count(tf.dims);
  tf.st.assign(n, 0.0);
  tf.rstar.assign(n, 1.0);
  tf.nstar.assign(n, {0, 0, 1});
  tf.nstar_index.assign(n, 0);
  tf.st[5 + 11 * (5 + 11 * 5)] = 1.0;
  tf.rstar[5 + 11 * (5 + 11 * 5)] = 2.0;
  const auto s = segment(tf, 0.001);
  CHECK(s.centers == 1);
  int count = 0;
  for (auto m : s.mask) count += m;
  CHECK(count == 33);  // lattice points with |x| <= 2
  CHECK(count_components(s.mask, tf.dims) == 1);
  CHECK_THROWS_AS(segment(tf, 1.0), ParameterError);
}

TEST_CASE("connected components") {
  const Dims d{10, 6, 6};
  std::vector<std::uint8_t> m(voxel_count(d), 0);
  for (int x = 0; x < 10; ++x) {
    m[x + 10 * (1 + 6 * 1)] = 1;
    m[x + 10 * (4 + 6 * 4)] = 1;
  }
  CHECK(count_components(m, d) == 2);
  m[3 + 10 * (2 + 6 * 1)] = m[3 + 10 * (3 + 6 * 1)] = m[3 + 10 * (4 + 6 * 1)] = m[3 + 10 * (4 + 6 * 2)] =
      m[3 + 10 * (4 + 6 * 3)] = 1;
  CHECK(count_components(m, d) == 1);
}

TEST_CASE("straight tube: radius and axis at the centerline, flat plate scores low") {
  const Dims d{28, 28, 28};
  TubePhantomSpec spec;
  spec.dims = d;
  spec.control = {{0, 14, 14}, {27, 14, 14}};
  spec.radius = {3.0, 3.0};
  const auto f = make_tube(spec);
  TubularityConfig tc;
  tc.rmin = 1;
  tc.rmax = 6;
  tc.rstep = 1;
  const auto tf = run(f, tc);
  const std::size_t c = 14 + 28 * (14 + 28 * 14);
  CHECK(std::abs(tf.rstar[c] - 3.0) <= 1.0);
  CHECK(std::abs(tf.nstar[c][0]) > std::cos(20 * M_PI / 180));
  double tube_max = 0.0;
  for (double v : tf.st) tube_max = std::max(tube_max, v);
  CHECK(tf.st[c] > 0.5 * tube_max);

  const auto p = make_plate(d, 6.0, 1.0, 0.0, 0);
  const auto pf = run(p, tc);
  double plate_max = 0.0;
  for (double v : pf.st) plate_max = std::max(plate_max, v);
  CHECK(plate_max < 0.1 * tube_max);
}

TEST_CASE("configuration validation") {
  TubularityConfig tc;
  tc.rmin = 3;
  tc.rmax = 1;
  CHECK_THROWS_AS(tc.validate(), ParameterError);
  tc = TubularityConfig();
  tc.sigma_r = 0;
  CHECK_THROWS_AS(tc.validate(), ParameterError);
  tc = TubularityConfig();
  CHECK(tc.radii().size() == 19);
}
