#pragma once

#include <array>
#include <vector>

#include "ost/sphere.hpp"
#include "ost/volume.hpp"
#include "ost/wavelet_dft.hpp"

namespace ost {

double pochhammer(double x, double a);  // Gamma(x+a)/Gamma(x)
double jacobi(int p, double a, double b, double x);

// rho^l (1-rho^2)^alpha P_p^{(alpha, l+1/2)}(2 rho^2 - 1), n = l + 2p.
double zernike_radial(int n, int l, double alpha, double rho);
double zernike_norm(int n, int l, double alpha);
// int_0^1 R_n^{l,alpha}(rho) j_l(q rho) rho^2 drho, closed form.
double zernike_fourier_radial(int n, int l, double alpha, double q);

// Generalized binomial with real upper argument.
double gen_binomial(double x, double k);
// Coefficient of B_{alpha,beta} = rho^beta (1-rho^2)^alpha against R_{l+2p}^{l,alpha}.
double zernike_b(int n, int l, double alpha, double beta);

struct ZernikeRadialSpec {
  double alpha = 6.0;
  double beta = 2.0;
  double rho_max = 0.0;
  double b_max = 0.0;
  std::array<double, 3> c{};             // flattening coefficients of rho^0, rho^2, rho^4
  std::vector<std::vector<double>> bt;   // bt[l][p] = b~_{l+2p}^{l,alpha}
  int l_max() const { return static_cast<int>(bt.size()) - 1; }
  int p_max() const { return bt.empty() ? -1 : static_cast<int>(bt[0].size()) - 1; }
};

ZernikeRadialSpec flat_profile_coeffs(double alpha, int l_max, int p_max = 24);
// B^flat_{alpha,2}(rho), normalized to 1 at rho_max.
double flat_profile(double alpha, double rho);
// sum_p b~ R_{l+2p}^{l,alpha}(rho).
double radial_expansion(const ZernikeRadialSpec& s, int l, double rho);

struct AnalyticFilterSpec {
  ZernikeRadialSpec radial;
  ZonalCoeffs angular;  // (P_l(0) + (1-(-1)^l)/2) a_l^0
  double s_o = 0.08;
  double rho_n = 0.5;   // cycles per sample
  double coeff(int l, int p) const { return angular.values[l] * radial.bt[l][p]; }
};

AnalyticFilterSpec make_analytic_spec(double alpha, double s_o, int p_max = 24, double tol = 1e-3);

// psi_{1,n} sampled directly in space; scaled by rho_N^3 dV so it matches DFT-sampled filters.
ComplexVolume assemble_spatial_filter(const AnalyticFilterSpec& spec, const Vec3& n, const Dims& grid,
                                      const Vec3& spacing = {1.0, 1.0, 1.0});
// Partial sums over even or odd l only (parity checks).
ComplexVolume assemble_spatial_filter_bands(const AnalyticFilterSpec& spec, const Vec3& n, const Dims& grid,
                                            int parity, const Vec3& spacing = {1.0, 1.0, 1.0});

// Fourier-side profile of the analytic wavelet at omega (angular frequency), truncated expansion.
double analytic_fourier_value(const AnalyticFilterSpec& spec, const Vec3& n, const Vec3& omega,
                              double spacing = 1.0);

// sum_l r^l e^{-r^2/2} Y_l^0 / sqrt(l!), r in units of `unit` voxels.
ComplexVolume harmonic_oscillator_wavelet(int L, const Dims& grid, double unit = 0.25);

struct ZernikeParams {
  int n_o = 42;
  double alpha = 3.0;
  double s_o = 0.08;
  int p_max = 24;
  double tol = 1e-3;
  double s_rho = 1.805;
  Dims filter_dims{31, 31, 31};
  std::uint64_t seed = 0;
  Vec3 spacing{1.0, 1.0, 1.0};

  void validate() const;
  nlohmann::json to_json() const;
};

WaveletBank build_zernike_bank(const ZernikeParams& p);
WaveletBank build_zernike_bank(const ZernikeParams& p, const SphericalDesign& design);

}  // namespace ost
