#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "ost/sphere.hpp"
#include "ost/volume.hpp"

namespace ost {

struct CakeParams {
  int n_o = 42;
  double gamma = 0.85;
  double sigma_erf = 0.0;  // <= 0 selects (rho_N - varrho) / 3
  double s_rho = 128.0;
  double s_o = 0.10125;
  Dims filter_dims{11, 11, 11};
  double tol = 1e-3;
  std::uint64_t seed = 0;
  Vec3 spacing{1.0, 1.0, 1.0};

  void validate() const;
  double rho_n() const { return M_PI / spacing[0]; }
  double varrho() const { return gamma * rho_n(); }
  double sigma_erf_value() const { return sigma_erf > 0.0 ? sigma_erf : (rho_n() - varrho()) / 3.0; }
  nlohmann::json to_json() const;
  static CakeParams from_json(const nlohmann::json& j);
};

struct WaveletBank {
  std::string kind = "dft";  // "dft" or "zernike"
  SphericalDesign design;
  std::vector<ComplexVolume> filters;  // spatial psi_{1,n_i}, centered, dV absorbed
  Volume phi0;                         // G_{s_rho} sampled on the filter grid times dV
  ZonalCoeffs coeffs;                  // c_l^0
  double s_rho = 0.0;
  Vec3 spacing{1.0, 1.0, 1.0};
  Dims filter_dims{1, 1, 1};
  nlohmann::json params;  // full parameter record, including any analytic tables

  std::string hash() const;
};

double radial_g(double rho, double varrho, double sigma_erf);

// c_l^0 = (P_l(0) + (1 - (-1)^l)/2) a_l^0.
ZonalCoeffs angular_coeffs(double so, double tol = 1e-3);

// psi-hat_n on a centered frequency grid of `grid` dims (unsplit).
ComplexVolume sample_fourier_filter(const CakeParams& p, const ZonalCoeffs& c, const Vec3& n, const Dims& grid);

// Zonal evaluation of psi-hat_n at omega (same value as the steered sum).
double cake_value(const CakeParams& p, const ZonalCoeffs& c, const Vec3& n, const Vec3& omega);

std::pair<ComplexVolume, ComplexVolume> split_low_high(const ComplexVolume& psi_hat, double s_rho);

WaveletBank build_bank(const CakeParams& p);
WaveletBank build_bank(const CakeParams& p, const SphericalDesign& design);

Volume gaussian_filter_volume(const Dims& dims, const Vec3& spacing, double s_rho);

struct StabilityReport {
  double m_min = 0, m_max = 0;            // M_psi^d over B_varrho (unsplit)
  double msplit_min = 0, msplit_max = 0;  // after splitting
  double n_min = 0, n_max = 0;            // N_psi^d over B_varrho0 (grid)
  double n_dir_min = 0, n_dir_max = 0;    // angular part over a fine direction set
  double bound_lo = 0, bound_hi = 0;      // analytic envelope of N
  double split_residual = 0;              // max |M_split - (1 - 2G(1-G)) M|
  double split_factor_min = 0, split_factor_max = 0;
  double cond2_split = 0;                 // 2 M / delta
  double cond_a = 0;                      // max N / min N
  double varrho = 0, varrho0 = 0;
  bool invertible = true;
  std::vector<double> bound_terms;        // ||d_l|| sqrt((2l+1)/4pi), l >= 1

  nlohmann::json to_json() const;
};

// d_l vectors of the N envelope (index l, entries m = -l..l).
std::vector<std::vector<cplx>> angular_bound_vectors(const ZonalCoeffs& c, const SphericalDesign& d);
std::pair<double, double> angular_bounds(const ZonalCoeffs& c, const SphericalDesign& d, std::vector<double>* terms = nullptr);

// Sum_i h_{n_i}(u) Delta_i for a unit direction u.
double angular_n(const ZonalCoeffs& c, const SphericalDesign& d, const Vec3& u);

StabilityReport stability_report(const CakeParams& p, const SphericalDesign& design, const Dims& fine_grid,
                                 int directions = 500);

}  // namespace ost
