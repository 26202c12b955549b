#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ost/cedos.hpp"
#include "ost/phantoms.hpp"

using namespace ost;

namespace {

WaveletBank small_bank() {
  CakeParams p;
  p.filter_dims = {9, 9, 9};
  p.s_rho = 1.805;
  p.s_o = 0.08;
  return build_bank(p, sample_sphere(12, 0));
}

Volume blob(const Dims& d, double sigma) {
  Volume v(d);
  for (int z = 0; z < d[2]; ++z)
    for (int y = 0; y < d[1]; ++y)
      for (int x = 0; x < d[0]; ++x) {
        const double r2 = (x - d[0] / 2) * (x - d[0] / 2) + (y - d[1] / 2) * (y - d[1] / 2) + (z - d[2] / 2) * (z - d[2] / 2);
        v(x, y, z) = std::exp(-r2 / (2 * sigma * sigma));
      }
  return v;
}

double l1(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

TEST_CASE("directional derivatives of constant and linear fields") {
  const Dims d{9, 9, 9};
  std::vector<double> c(729, 2.0), lin(729);
  const Vec3 a{0.3, -1.2, 0.7};
  for (int z = 0; z < 9; ++z)
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 9; ++x) lin[x + 9 * (y + 9 * z)] = a[0] * x + a[1] * y + a[2] * z;
  const Vec3 v = normalized({1, 2, -2});
  const Vec3 x{4.3, 3.6, 4.9};
  CHECK(std::abs(directional_first(c.data(), d, x, v)) < 1e-14);
  CHECK(std::abs(directional_second(c.data(), d, x, v)) < 1e-14);
  CHECK(directional_first(lin.data(), d, x, v) == doctest::Approx(dot(a, v)).epsilon(1e-12));
  CHECK(std::abs(directional_second(lin.data(), d, x, v)) < 1e-12);
}

TEST_CASE("score derivatives: constant channels vanish, a linear field is read along n_i") {
  const auto design = sample_sphere(12, 0);
  const Dims d{15, 15, 15};
  Channels W(12, std::vector<double>(voxel_count(d), 1.5));
  const auto D0 = derivatives(W, design, d, 1.0);
  for (int i = 0; i < 12; ++i) {
    CHECK(l1(D0.d1[i]) < 1e-9);
    CHECK(l1(D0.d3[i]) < 1e-9);
    CHECK(l1(D0.angular[i]) < 1e-9);
  }
  for (int i = 0; i < 12; ++i)
    for (int z = 0; z < 15; ++z)
      for (int y = 0; y < 15; ++y)
        for (int x = 0; x < 15; ++x) W[i][x + 15 * (y + 15 * z)] = dot({double(x), double(y), double(z)}, design.points[i]);
  const auto D = derivatives(W, design, d, 1.0);
  const std::size_t c = 7 + 15 * (7 + 15 * 7);
  for (int i = 0; i < 12; ++i) {
    CHECK(D.d3[i][c] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(D.d1[i][c]) < 1e-6);
    CHECK(std::abs(D.d2[i][c]) < 1e-6);
  }
}

TEST_CASE("angular Laplacian: constants in the kernel, Y_1 and Y_2 eigenvalues") {
  const auto design = sample_sphere(42, 0);
  const auto L = angular_laplacian(design, 6);
  std::vector<double> one(42, 1.0), out(42);
  L.apply(one.data(), out.data());
  for (double v : out) CHECK(std::abs(v) < 1e-12);
  for (int l : {1, 2}) {
    std::vector<double> y(42), ly(42);
    for (int i = 0; i < 42; ++i) y[i] = eval_sh(l, 0, design.points[i]).real();
    L.apply(y.data(), ly.data());
    double num = 0, den = 0;
    for (int i = 0; i < 42; ++i) {
      num += (ly[i] + l * (l + 1) * y[i]) * (ly[i] + l * (l + 1) * y[i]);
      den += l * (l + 1) * y[i] * l * (l + 1) * y[i];
    }
    CHECK(std::sqrt(num / den) < (l == 1 ? 0.05 : 0.1));
  }
  CHECK(L.fit_residual < 0.1);
  for (int i = 0; i < 42; ++i)
    for (const auto& [j, w] : L.offdiag[i]) CHECK(w >= 0.0);
}

TEST_CASE("conductivity function") {
  CHECK(conductivity(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
  CHECK(conductivity(2.0, 0.0) == 1.0);
  CHECK(conductivity(0.0, 0.5) == 0.0);
  CHECK(conductivity(1.0, 1e-6) == doctest::Approx(1.0));
  CHECK(conductivity(1.0, 1e6) < 1e-11);
}

TEST_CASE("Selling decomposition reconstructs the tensor") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 200; ++t) {
    Eigen::Matrix3d A = Eigen::Matrix3d::NullaryExpr([&] { return nd(rng); });
    Eigen::Matrix3d D = A * A.transpose() + 0.05 * Eigen::Matrix3d::Identity();
    const auto s = selling({D(0, 0), D(1, 1), D(2, 2), D(0, 1), D(0, 2), D(1, 2)});
    Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
    for (int k = 0; k < 6; ++k) {
      CHECK(s.w[k] >= -1e-12);
      const Eigen::Vector3d e(s.e[k][0], s.e[k][1], s.e[k][2]);
      R += s.w[k] * e * e.transpose();
    }
    CHECK((R - D).norm() < 1e-10 * D.norm());
  }
  CHECK_THROWS(selling({1, 1, -1, 0, 0, 0}));
  CHECK_THROWS_AS(angular_laplacian(sample_sphere(6, 0)), ParameterError);
}

TEST_CASE("unit conductivities reproduce the heat equation") {
  const auto design = sample_sphere(12, 0);
  const Dims d{31, 31, 31};
  const auto f = blob(d, 3.0);
  Channels W(12, f.data);
  const auto frame = fit_frame(W, design, d, 1.0);
  Conductivities c;
  c.d11 = c.d33 = Channels(12, std::vector<double>(f.size(), 1.0));
  DiffusionConfig cfg;
  cfg.d44 = 0.0;
  cfg.T = 1.0;
  cfg.dt = 0.05;
  const auto out = diffuse(W, design, d, frame, c, cfg);
  const auto ref = gaussian_diffusion(f, 1.0);
  for (int i = 0; i < 12; ++i) {
    double e = 0, n = 0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      e += (out[i][j] - ref.data[j]) * (out[i][j] - ref.data[j]);
      n += ref.data[j] * ref.data[j];
    }
    CHECK(std::sqrt(e / n) < 1e-2);
  }
}

TEST_CASE("diffusion: identity at T = 0, mass, maximum principle, zero input") {
  const auto bank = small_bank();
  const Dims d{20, 20, 20};
  const auto f = make_crossing(d, 2.0, 1.0, 0.2, 3);
  const auto U = forward(f, bank);
  DiffusionConfig cfg;
  cfg.T = 0.0;
  CHECK(process_image(f, bank, cfg).data == reconstruct_sum(U).data);

  cfg.T = 1.0;
  DiffusionReport rep;
  const auto W0 = real_channels(U);
  const auto W = diffuse(W0, bank.design, d, cfg, &rep);
  CHECK(rep.steps == 20);
  CHECK(rep.mass.size() == 21);
  CHECK(rep.max_rel_mass_change < 1e-12);
  CHECK(rep.max_dt_diag <= 1.0 + 1e-12);
  double lo0 = 1e300, hi0 = -1e300, lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < W0.size(); ++i)
    for (std::size_t j = 0; j < W0[i].size(); ++j) {
      lo0 = std::min(lo0, W0[i][j]);
      hi0 = std::max(hi0, W0[i][j]);
      lo = std::min(lo, W[i][j]);
      hi = std::max(hi, W[i][j]);
    }
  CHECK(lo >= lo0 - 1e-12);
  CHECK(hi <= hi0 + 1e-12);

  const Volume z(d);
  for (double v : process_image(z, bank, cfg).data) CHECK(v == 0.0);
}

TEST_CASE("parameter validation") {
  const auto bank = small_bank();
  const auto f = make_crossing({16, 16, 16}, 2.0, 1.0, 0.0, 0);
  DiffusionConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 50.0;
  CHECK_THROWS_AS(process_image(f, bank, cfg), ParameterError);
  cfg = DiffusionConfig();
  cfg.quantile = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = DiffusionConfig();
  cfg.T = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}
