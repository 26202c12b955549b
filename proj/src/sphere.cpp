#include "ost/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ost {

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  return {a[0] / n, a[1] / n, a[2] / n};
}

void SphericalDesign::validate() const {
  if (points.size() != weights.size()) throw ParameterError("design points/weights length mismatch");
  if (points.empty()) throw ParameterError("empty design");
  for (const auto& p : points)
    if (std::abs(norm(p) - 1.0) > 1e-9) throw ParameterError("design point not unit length");
}

namespace {

std::vector<Vec3> expand(const std::vector<Vec3>& free, bool antipodal) {
  if (!antipodal) return free;
  std::vector<Vec3> all = free;
  for (const auto& p : free) all.push_back({-p[0], -p[1], -p[2]});
  return all;
}

// dE/dx_i for the Coulomb energy of the full set.
std::vector<Vec3> coulomb_gradient(const std::vector<Vec3>& x) {
  std::vector<Vec3> g(x.size(), Vec3{0, 0, 0});
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      Vec3 d{x[i][0] - x[j][0], x[i][1] - x[j][1], x[i][2] - x[j][2]};
      const double r = norm(d);
      const double f = -1.0 / (r * r * r);
      for (int a = 0; a < 3; ++a) {
        g[i][a] += f * d[a];
        g[j][a] -= f * d[a];
      }
    }
  return g;
}

std::vector<Vec3> fibonacci(int n, bool hemisphere) {
  std::vector<Vec3> pts(n);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = hemisphere ? 1.0 - (i + 0.5) / n : 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts[i] = {r * std::cos(golden * i), r * std::sin(golden * i), z};
  }
  return pts;
}

// Uniform random rotation from a unit quaternion.
void rotate_all(std::vector<Vec3>& pts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  double q[4];
  double s = 0.0;
  for (double& v : q) {
    v = nd(rng);
    s += v * v;
  }
  s = std::sqrt(s);
  for (double& v : q) v /= s;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  const double R[3][3] = {{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
                          {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
                          {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}};
  for (auto& p : pts) {
    Vec3 r{0, 0, 0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r[i] += R[i][j] * p[j];
    p = normalized(r);
  }
}

}  // namespace

double sphere_energy(const std::vector<Vec3>& pts) {
  double e = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      Vec3 d{pts[i][0] - pts[j][0], pts[i][1] - pts[j][1], pts[i][2] - pts[j][2]};
      e += 1.0 / norm(d);
    }
  return e;
}

double min_pairwise_angle(const std::vector<Vec3>& pts) {
  double best = M_PI;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::min(best, std::acos(std::clamp(dot(pts[i], pts[j]), -1.0, 1.0)));
  return best;
}

SphericalDesign sample_sphere(int count, std::uint64_t seed) {
  if (count < 2) throw ParameterError("sample_sphere needs at least 2 points");
  const bool antipodal = count % 2 == 0;
  const int nfree = antipodal ? count / 2 : count;
  std::vector<Vec3> p = fibonacci(nfree, antipodal);
  rotate_all(p, seed);

  double step = 0.1 / count;
  double energy = sphere_energy(expand(p, antipodal));
  for (int iter = 0; iter < 2000; ++iter) {
    const auto full = expand(p, antipodal);
    const auto gfull = coulomb_gradient(full);
    std::vector<Vec3> g(nfree);
    double gnorm2 = 0.0;
    for (int k = 0; k < nfree; ++k) {
      Vec3 gk = gfull[k];
      if (antipodal)
        for (int a = 0; a < 3; ++a) gk[a] -= gfull[k + nfree][a];
      const double radial = dot(gk, p[k]);
      for (int a = 0; a < 3; ++a) gk[a] -= radial * p[k][a];
      g[k] = gk;
      gnorm2 += dot(gk, gk);
    }
    if (std::sqrt(gnorm2) < 1e-10) break;
    bool accepted = false;
    while (!accepted && step > 1e-16) {
      std::vector<Vec3> trial(nfree);
      for (int k = 0; k < nfree; ++k)
        trial[k] = normalized({p[k][0] - step * g[k][0], p[k][1] - step * g[k][1], p[k][2] - step * g[k][2]});
      const double e = sphere_energy(expand(trial, antipodal));
      if (e < energy) {
        p = std::move(trial);
        energy = e;
        step *= 1.5;
        accepted = true;
      } else {
        step *= 0.5;
      }
    }
    if (!accepted) break;
  }

  SphericalDesign d;
  d.points = expand(p, antipodal);
  d.weights.assign(d.points.size(), 4.0 * M_PI / count);
  return d;
}

double legendre(int l, double x) {
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double legendre_at_zero(int l) {
  if (l % 2) return 0.0;
  double v = 1.0;
  for (int k = 1; k <= l / 2; ++k) v *= -(2.0 * k - 1.0) / (2.0 * k);
  return v;
}

namespace {

// Normalized sqrt((2l+1)/4pi (l-m)!/(l+m)!) P_l^m(x) for m >= 0 (Condon-Shortley phase), l <= L.
void normalized_legendre(int L, double x, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(sh_count(L)), 0.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = std::sqrt(1.0 / (4.0 * M_PI));
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    out[sh_index(m, m)] = pmm;
    if (m + 1 > L) continue;
    double p1 = x * std::sqrt(2.0 * m + 3.0) * pmm;
    out[sh_index(m + 1, m)] = p1;
    double p0 = pmm;
    for (int l = m + 2; l <= L; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      const double p2 = a * (x * p1 - b * p0);
      out[sh_index(l, m)] = p2;
      p0 = p1;
      p1 = p2;
    }
  }
}

}  // namespace

void sh_basis(int L, const Vec3& n, std::vector<cplx>& out) {
  const double r = norm(n);
  const double ct = std::clamp(n[2] / r, -1.0, 1.0);
  const double phi = std::atan2(n[1], n[0]);
  std::vector<double> p;
  normalized_legendre(L, ct, p);
  out.assign(static_cast<std::size_t>(sh_count(L)), cplx(0, 0));
  for (int m = 0; m <= L; ++m) {
    const cplx e = std::polar(1.0, m * phi);
    const double sign = (m % 2) ? -1.0 : 1.0;
    for (int l = m; l <= L; ++l) {
      const cplx y = p[sh_index(l, m)] * e;
      out[sh_index(l, m)] = y;
      if (m > 0) out[sh_index(l, -m)] = sign * std::conj(y);
    }
  }
}

cplx eval_sh(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) throw ParameterError("eval_sh requires l >= 0 and |m| <= l");
  std::vector<double> p;
  normalized_legendre(l, std::cos(theta), p);
  const int am = std::abs(m);
  const cplx y = p[sh_index(l, am)] * std::polar(1.0, am * phi);
  if (m >= 0) return y;
  return ((am % 2) ? -1.0 : 1.0) * std::conj(y);
}

cplx eval_sh(int l, int m, const Vec3& n) {
  double beta, gamma;
  direction_angles(n, beta, gamma);
  return eval_sh(l, m, beta, gamma);
}

ZonalCoeffs diffusion_kernel_coeffs(double so, double tol) {
  if (!(so > 0.0)) throw ParameterError("s_o must be > 0");
  if (!(tol > 0.0 && tol < 1.0)) throw ParameterError("tol must lie in (0,1)");
  auto a = [so](int l) { return std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI)) * std::exp(-l * (l + 1.0) * so); };
  const double a0 = a(0);
  ZonalCoeffs c;
  int l = 0;
  for (;; ++l) {
    c.values.push_back(a(l));
    if (l > 0 && a(l) / a0 < tol) break;
  }
  return c;
}

ZonalCoeffs funk_coeffs(const ZonalCoeffs& c) {
  ZonalCoeffs out = c;
  for (std::size_t l = 0; l < out.values.size(); ++l) out.values[l] *= legendre_at_zero(static_cast<int>(l));
  return out;
}

ZonalCoeffs antisymmetrize_coeffs(const ZonalCoeffs& c) {
  ZonalCoeffs out = c;
  for (std::size_t l = 0; l < out.values.size(); l += 2) out.values[l] = 0.0;
  return out;
}

double eval_zonal(const ZonalCoeffs& c, double cos_theta) {
  double acc = 0.0;
  for (int l = 0; l <= c.band_limit(); ++l)
    acc += c.values[l] * std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI)) * legendre(l, cos_theta);
  return acc;
}

SteeredCoeffs wigner_d_row(int l, double beta, double gamma) {
  if (l < 0) throw ParameterError("l must be >= 0");
  SteeredCoeffs s;
  s.l = l;
  s.values.resize(2 * l + 1);
  const double scale = std::sqrt(4.0 * M_PI / (2.0 * l + 1.0));
  for (int m = -l; m <= l; ++m) s.values[m + l] = scale * std::conj(eval_sh(l, m, beta, gamma));
  return s;
}

void direction_angles(const Vec3& n, double& beta, double& gamma) {
  const double r = norm(n);
  beta = std::acos(std::clamp(n[2] / r, -1.0, 1.0));
  gamma = std::atan2(n[1], n[0]);
}

Vec3 direction_from_angles(double beta, double gamma) {
  return {std::sin(beta) * std::cos(gamma), std::sin(beta) * std::sin(gamma), std::cos(beta)};
}

void complement_basis(const Vec3& n, Vec3& e1, Vec3& e2) {
  int axis = 0;
  for (int a = 1; a < 3; ++a)
    if (std::abs(n[a]) < std::abs(n[axis])) axis = a;
  Vec3 c{0, 0, 0};
  c[axis] = 1.0;
  const double d = dot(c, n);
  e1 = normalized({c[0] - d * n[0], c[1] - d * n[1], c[2] - d * n[2]});
  e2 = cross(n, e1);
}

}  // namespace ost
