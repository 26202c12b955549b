#pragma once

#include <cstdint>
#include <vector>

#include "ost/volume.hpp"

namespace ost {

struct SphericalDesign {
  std::vector<Vec3> points;
  std::vector<double> weights;  // steradians

  std::size_t size() const { return points.size(); }
  void validate() const;
};

// Local minimum of the Coulomb energy. Even counts are searched among
// antipodally symmetric configurations (pairs n, -n).
SphericalDesign sample_sphere(int count, std::uint64_t seed = 0);

double sphere_energy(const std::vector<Vec3>& pts);
double min_pairwise_angle(const std::vector<Vec3>& pts);

double legendre(int l, double x);
double legendre_at_zero(int l);

// Orthonormal complex harmonics with the Condon-Shortley phase and
// Y_l^{-m} = (-1)^m conj(Y_l^m).
cplx eval_sh(int l, int m, double theta, double phi);
cplx eval_sh(int l, int m, const Vec3& n);

inline int sh_index(int l, int m) { return l * l + l + m; }
inline int sh_count(int L) { return (L + 1) * (L + 1); }

// All Y_l^m for l <= L at direction n, indexed by sh_index.
void sh_basis(int L, const Vec3& n, std::vector<cplx>& out);

struct ZonalCoeffs {
  std::vector<double> values;  // a_l^0, l = 0..L
  int band_limit() const { return static_cast<int>(values.size()) - 1; }
};

ZonalCoeffs diffusion_kernel_coeffs(double so, double tol = 1e-3);
ZonalCoeffs funk_coeffs(const ZonalCoeffs& c);
ZonalCoeffs antisymmetrize_coeffs(const ZonalCoeffs& c);

// sum_l c_l Y_l^0 at polar angle theta.
double eval_zonal(const ZonalCoeffs& c, double cos_theta);

struct SteeredCoeffs {
  int l = 0;
  std::vector<cplx> values;  // m' = -l..l
  cplx operator[](int m) const { return values[m + l]; }
};

// D^l_{0,m'}(gamma, beta, 0): rotating Y_l^0 by R_{ez,gamma} R_{ey,beta}.
SteeredCoeffs wigner_d_row(int l, double beta, double gamma);

// Polar (beta) and azimuth (gamma) of a unit vector.
void direction_angles(const Vec3& n, double& beta, double& gamma);
Vec3 direction_from_angles(double beta, double gamma);

// Orthonormal e1, e2 completing n; e1 from the canonical axis least aligned with n.
void complement_basis(const Vec3& n, Vec3& e1, Vec3& e2);

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a);
Vec3 normalized(const Vec3& a);

}  // namespace ost
