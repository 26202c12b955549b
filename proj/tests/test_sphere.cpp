#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "ost/sphere.hpp"

using namespace ost;

namespace {

// Product rule on the sphere: Gauss-Legendre in cos(theta), uniform in phi. Exact to degree < 2n.
struct SphereRule {
  std::vector<double> theta, phi, w;
  explicit SphereRule(int n) {
    const auto [x, wx] = oracle::gauss_legendre(n, -1.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 2 * n; ++j) {
        theta.push_back(std::acos(x[i]));
        phi.push_back(2.0 * M_PI * j / (2 * n));
        w.push_back(wx[i] * 2.0 * M_PI / (2 * n));
      }
  }
};

// 12 icosahedron vertices plus the 30 normalized edge midpoints.
std::vector<Vec3> subdivided_icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p = normalized(p);
  std::vector<Vec3> out = v;
  const double edge = std::acos(dot(v[0], v[1]));
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (std::abs(std::acos(std::min(1.0, dot(v[i], v[j]))) - edge) < 1e-9)
        out.push_back(normalized({v[i][0] + v[j][0], v[i][1] + v[j][1], v[i][2] + v[j][2]}));
  return out;
}

}  // namespace

TEST_CASE("two points are antipodal") {
  const auto d = sample_sphere(2, 0);
  REQUIRE(d.size() == 2);
  CHECK(dot(d.points[0], d.points[1]) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(d.weights[0] == doctest::Approx(2.0 * M_PI));
}

TEST_CASE("six points form an octahedron") {
  const auto d = sample_sphere(6, 3);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) {
      const double c = dot(d.points[i], d.points[j]);
      CHECK((std::abs(c) < 1e-6 || std::abs(c + 1.0) < 1e-6));
    }
}

TEST_CASE("42 points: equal weights and icosahedral spacing") {
  const auto d = sample_sphere(42, 0);
  REQUIRE(d.size() == 42);
  for (double w : d.weights) CHECK(w == doctest::Approx(4.0 * M_PI / 42.0));
  for (const auto& p : d.points) CHECK(norm(p) == doctest::Approx(1.0).epsilon(1e-12));
  const auto ico = subdivided_icosahedron();
  REQUIRE(ico.size() == 42);
  const double ref = min_pairwise_angle(ico);
  CHECK(std::abs(min_pairwise_angle(d.points) - ref) / ref < 0.05);
  // a repulsion minimum is no worse than the geodesic grid
  CHECK(sphere_energy(d.points) <= sphere_energy(ico) * (1.0 + 1e-6));
}

TEST_CASE("sampling is deterministic per seed") {
  const auto a = sample_sphere(20, 5), b = sample_sphere(20, 5);
  CHECK(a.points == b.points);
  CHECK_THROWS_AS(sample_sphere(0, 0), ParameterError);
}

TEST_CASE("low-order harmonics") {
  for (double th : {0.0, 0.7, 2.9})
    for (double ph : {0.0, 1.3, 5.0}) CHECK(std::abs(eval_sh(0, 0, th, ph) - cplx(0.28209479177387814, 0)) < 1e-15);
  CHECK(eval_sh(1, 0, 0.0, 0.0).real() == doctest::Approx(0.4886025119029199).epsilon(1e-14));
}

TEST_CASE("harmonics match the explicit formula and are orthonormal") {
  double worst = 0.0;
  for (int l = 0; l <= 10; ++l)
    for (int m = -l; m <= l; ++m)
      for (double th : {0.2, 1.1, 2.5})
        for (double ph : {0.3, 4.0}) worst = std::max(worst, std::abs(eval_sh(l, m, th, ph) - oracle::sh_explicit(l, m, th, ph)));
  CHECK(worst < 1e-10);

  const SphereRule q(16);
  double err = 0.0;
  for (int l1 = 0; l1 <= 10; ++l1)
    for (int m1 = -l1; m1 <= l1; ++m1)
      for (int l2 = l1; l2 <= 10; ++l2)
        for (int m2 = -l2; m2 <= l2; ++m2) {
          cplx s = 0.0;
          for (std::size_t k = 0; k < q.w.size(); ++k)
            s += q.w[k] * eval_sh(l1, m1, q.theta[k], q.phi[k]) * std::conj(eval_sh(l2, m2, q.theta[k], q.phi[k]));
          err = std::max(err, std::abs(s - cplx((l1 == l2 && m1 == m2) ? 1.0 : 0.0, 0.0)));
        }
  CHECK(err < 1e-8);
}

TEST_CASE("sh_basis agrees with eval_sh") {
  std::vector<cplx> b;
  const Vec3 n = normalized({0.3, -0.5, 0.8});
  sh_basis(6, n, b);
  REQUIRE(b.size() == static_cast<std::size_t>(sh_count(6)));
  for (int l = 0; l <= 6; ++l)
    for (int m = -l; m <= l; ++m) CHECK(std::abs(b[sh_index(l, m)] - eval_sh(l, m, n)) < 1e-13);
}

TEST_CASE("diffusion kernel coefficients") {
  const auto c = diffusion_kernel_coeffs(0.5 * 0.25 * 0.25, 1e-3);
  const int L = c.band_limit();
  CHECK(c.values[L] / c.values[0] < 1e-3);
  CHECK(c.values[L - 1] / c.values[0] >= 1e-3);
  for (int l = 0; l <= L; ++l)
    CHECK(c.values[l] == doctest::Approx(std::sqrt((2 * l + 1) / (4 * M_PI)) * std::exp(-l * (l + 1) * 0.03125)));
  CHECK(diffusion_kernel_coeffs(10.0).band_limit() == 1);
  for (double so : {0.01, 0.3, 4.0}) CHECK(diffusion_kernel_coeffs(so).values[0] == doctest::Approx(1 / std::sqrt(4 * M_PI)));
  CHECK_THROWS_AS(diffusion_kernel_coeffs(0.0), ParameterError);
  CHECK_THROWS_AS(diffusion_kernel_coeffs(0.1, 1.0), ParameterError);
}

TEST_CASE("Funk and antisymmetrization multipliers") {
  ZonalCoeffs c;
  c.values = {1.0, 2.0, 3.0, 4.0, 5.0};
  const auto f = funk_coeffs(c);
  CHECK(f.values[0] == 1.0);
  CHECK(f.values[1] == 0.0);
  CHECK(f.values[2] == doctest::Approx(-1.5));
  CHECK(f.values[4] == doctest::Approx(5.0 * 3.0 / 8.0));
  const auto a = antisymmetrize_coeffs(c);
  CHECK(a.values == std::vector<double>{0.0, 2.0, 0.0, 4.0, 0.0});
  CHECK(antisymmetrize_coeffs(a).values == a.values);
  ZonalCoeffs even;
  even.values = {1.0, 0.0, 3.0};
  for (double v : antisymmetrize_coeffs(even).values) CHECK(v == 0.0);
}

TEST_CASE("Wigner rows: identity, unitarity, rotate-and-project") {
  for (int l = 0; l <= 6; ++l) {
    const auto id = wigner_d_row(l, 0.0, 0.0);
    for (int m = -l; m <= l; ++m) CHECK(std::abs(id[m] - cplx(m == 0 ? 1.0 : 0.0, 0.0)) < 1e-14);
    for (double b : {0.4, 1.9})
      for (double g : {0.0, 2.2}) {
        const auto d = wigner_d_row(l, b, g);
        double s = 0.0;
        for (int m = -l; m <= l; ++m) s += std::norm(d[m]);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
      }
  }
  const auto d1 = wigner_d_row(1, M_PI / 2, 0.0);
  CHECK(std::abs(d1[0]) < 1e-14);
  CHECK(std::abs(d1[1]) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(std::abs(d1[-1]) == doctest::Approx(1 / std::sqrt(2.0)));

  // project the rotated zonal harmonic onto Y_l^m'
  const SphereRule q(16);
  double worst = 0.0;
  for (int l = 0; l <= 5; ++l)
    for (double b : {0.0, M_PI / 2, 2.1})
      for (double g : {0.0, 0.9}) {
        const Vec3 n = direction_from_angles(b, g);
        const auto d = wigner_d_row(l, b, g);
        for (int m = -l; m <= l; ++m) {
          cplx s = 0.0;
          for (std::size_t k = 0; k < q.w.size(); ++k) {
            const Vec3 u{std::sin(q.theta[k]) * std::cos(q.phi[k]), std::sin(q.theta[k]) * std::sin(q.phi[k]),
                         std::cos(q.theta[k])};
            const double zonal = std::sqrt((2 * l + 1) / (4 * M_PI)) * legendre(l, dot(n, u));
            s += q.w[k] * zonal * std::conj(oracle::sh_explicit(l, m, q.theta[k], q.phi[k]));
          }
          worst = std::max(worst, std::abs(s - d[m]));
        }
      }
  CHECK(worst < 1e-10);
}

TEST_CASE("zonal evaluation equals the steered sum") {
  ZonalCoeffs c;
  c.values = {0.3, -0.2, 0.5, 0.1, -0.05};
  const Vec3 n = normalized({1.0, 2.0, -0.5});
  double beta, gamma;
  direction_angles(n, beta, gamma);
  const Vec3 u = normalized({-0.3, 0.4, 0.9});
  cplx s = 0.0;
  for (int l = 0; l <= c.band_limit(); ++l) {
    const auto d = wigner_d_row(l, beta, gamma);
    for (int m = -l; m <= l; ++m) s += c.values[l] * d[m] * eval_sh(l, m, u);
  }
  CHECK(std::abs(s.imag()) < 1e-13);
  CHECK(s.real() == doctest::Approx(eval_zonal(c, dot(n, u))).epsilon(1e-12));
}

TEST_CASE("complement basis is orthonormal") {
  for (const auto& n : oracle::fibonacci_directions(50)) {
    Vec3 e1, e2;
    complement_basis(n, e1, e2);
    CHECK(std::abs(dot(e1, n)) < 1e-14);
    CHECK(std::abs(dot(e2, n)) < 1e-14);
    CHECK(std::abs(dot(e1, e2)) < 1e-14);
    CHECK(norm(e1) == doctest::Approx(1.0));
    CHECK(dot(cross(e1, e2), n) == doctest::Approx(1.0));
  }
}
