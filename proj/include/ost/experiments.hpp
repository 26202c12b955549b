#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ost/cedos.hpp"
#include "ost/phantoms.hpp"
#include "ost/score.hpp"
#include "ost/wavelet_dft.hpp"

namespace ost {

struct FilterComparison {
  std::vector<double> ncc;          // Re<a,b> / (|a| |b|) per orientation
  std::vector<double> l2_residual;  // |a - b| / |a|
  std::vector<double> max_re_a, max_im_a, max_re_b, max_im_b;
  double min_ncc = 0.0;
  nlohmann::json to_json() const;
};

FilterComparison compare_filters(const WaveletBank& a, const WaveletBank& b);

// Least-squares residual between the two banks' radial profiles over rho in [0, rho_N].
double radial_profile_residual(const CakeParams& dft, double alpha, int p_max = 24);

// Real white noise with its spectrum cut to |w| < cutoff.
Volume band_limited_phantom(const Dims& dims, double cutoff, std::uint64_t seed, const Vec3& spacing = {1, 1, 1});

// Transfer of sum reconstruction: 1/2 sum_i Delta_i (conj K_i(w) + K_i(-w)) + G(w) on the raw grid.
std::vector<cplx> sum_transfer(const WaveletBank& bank, const Dims& dims);

struct RoundTripReport {
  std::string mode;
  double rel_error = 0.0;       // whole spectrum
  double rel_error_band = 0.0;  // |w| < 0.8 varrho
  double bound = 0.0;           // sum mode: max |N - 1| over the band
  nlohmann::json to_json() const;
};

RoundTripReport roundtrip(const Volume& f, const WaveletBank& bank, const std::string& mode, Volume* out = nullptr);

struct CnrSweep {
  std::vector<double> T;
  std::vector<double> cedos, gauss;
  std::vector<Volume> cedos_volumes;
  DiffusionReport report;
  int cedos_peak() const;
  int gauss_peak() const;
  std::string csv() const;
};

CnrSweep cnr_sweep(const Volume& f, const RegionSpec& regions, const WaveletBank& bank, const DiffusionConfig& cfg,
                   const std::vector<double>& T, bool keep_volumes = false);

}  // namespace ost
