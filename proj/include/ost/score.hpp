#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ost/sphere.hpp"
#include "ost/volume.hpp"
#include "ost/wavelet_dft.hpp"

namespace ost {

// Orientation-major: channels[i] is the whole volume for n_i.
struct OrientationScore {
  Dims dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  SphericalDesign design;
  std::vector<std::vector<cplx>> channels;
  Volume low;  // G_{s_rho} * f
  std::string bank_hash;
  double s_rho = 0.0;

  std::size_t voxels() const { return voxel_count(dims); }
  std::size_t orientations() const { return channels.size(); }
  cplx at(std::size_t voxel, std::size_t orientation) const { return channels[orientation][voxel]; }
};

OrientationScore forward(const Volume& f, const WaveletBank& bank);

// Low channel only: spectral Gaussian e^{-s_rho |w|^2}.
Volume gaussian_lowpass(const Volume& f, double s_rho);

// M_total(w) = sum_i |psi-hat_{1,i}|^2 Delta_i + G^2 on the raw (origin at 0) grid of `dims`.
std::vector<double> realized_m_total(const WaveletBank& bank, const Dims& dims, std::vector<double>* g_out = nullptr);

Volume reconstruct_exact(const OrientationScore& U, const WaveletBank& bank, double eps_m = 1e-3);
Volume reconstruct_sum(const OrientationScore& U);

struct ConditionAudit {
  bool analytic = false;      // analytic report available (DFT banks)
  StabilityReport report;
  double m_min = 0, m_max = 0;  // realized M_total over B_varrho
  double n_min = 0, n_max = 0;  // realized sum_i Re psi-hat_1 Delta_i + G over B_varrho0
  double cond2 = 0;             // 2 M / delta from the analytic report when present
  double cond_a = 0;            // max N / min N
  bool invertible = true;
  nlohmann::json to_json() const;
};

ConditionAudit condition_audit(const WaveletBank& bank, const Dims& fine_grid);

// Per-voxel SH coefficients over orientation, (L+1)^2 per voxel, voxel-major.
struct ShScoreExpansion {
  Dims dims{1, 1, 1};
  int L = 0;
  std::vector<cplx> coeffs;
  double max_rel_residual = 0.0;  // worst voxel: ||fit - data|| / ||data||
  double rel_residual = 0.0;      // global

  int count() const { return sh_count(L); }
  const cplx* at(std::size_t voxel) const { return coeffs.data() + voxel * count(); }
};

ShScoreExpansion sh_expand(const OrientationScore& U, int L);
// Complex SH fit of generic per-orientation data (rows: voxels); used by sh_expand.
Eigen::MatrixXcd sh_fit_operator(const SphericalDesign& design, int L);

cplx sh_synthesize(const cplx* coeffs, int L, const Vec3& n);
cplx steer_eval(const ShScoreExpansion& e, const Vec3& x, const Vec3& n);

}  // namespace ost
