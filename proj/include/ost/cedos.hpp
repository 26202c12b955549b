#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <vector>

#include "ost/score.hpp"
#include "ost/sphere.hpp"
#include "ost/volume.hpp"
#include "ost/wavelet_dft.hpp"

namespace ost {

struct DiffusionConfig {
  double d44 = 0.01;
  double T = 4.0;
  double dt = 0.05;
  double quantile = 0.5;
  double sigma_s = 1.0;   // voxels, derivative regularization
  double cond_floor = 0.001;  // lower bound on D11 and D33
  int knn = 6;

  void validate() const;
  nlohmann::json to_json() const;
};

// Real channels, orientation-major: W[i][voxel].
using Channels = std::vector<std::vector<double>>;

Channels real_channels(const OrientationScore& U);

// Symmetric graph Laplacian on the design's k-nearest-neighbour graph. Edge weights are
// the nonnegative least-squares fit of L Y_l = -l(l+1) Y_l, l = 1, 2.
struct AngularLaplacian {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> offdiag;  // (j, L_ij), i != j
  std::vector<double> diag;
  double fit_residual = 0.0;  // relative, over the l = 1, 2 fit
  double lambda_max = 0.0;  // largest |eigenvalue|

  // out_i = sum_j L_ij in_j over contiguous per-orientation values.
  void apply(const double* in, double* out) const;
};

AngularLaplacian angular_laplacian(const SphericalDesign& d, int k = 6);

// First and second directional derivatives of a (pre-smoothed) channel, trilinear sampling.
double directional_first(const double* u, const Dims& dims, const Vec3& x, const Vec3& v);
double directional_second(const double* u, const Dims& dims, const Vec3& x, const Vec3& v);

// Gaussian-regularized derivatives along {e1(n_i), e2(n_i), n_i} and the angular Laplacian.
struct ScoreDerivatives {
  Dims dims{1, 1, 1};
  Channels d1, d2, d3;
  Channels angular;
};
ScoreDerivatives derivatives(const Channels& W, const SphericalDesign& design, const Dims& dims, double sigma_s,
                             int knn = 6);

// Per (channel, voxel): tangent B3, confidence s, along-structure derivative B3 U.
struct AdaptiveFrame {
  Dims dims{1, 1, 1};
  std::vector<std::vector<std::array<float, 3>>> b3;
  Channels s;
  Channels b3u;
};
AdaptiveFrame fit_frame(const Channels& W, const SphericalDesign& design, const Dims& dims, double sigma_s,
                        int knn = 6);

struct Conductivities {
  Channels d11, d33;
  double c1 = 0.0, c2 = 0.0;
};
double conductivity(double c, double x);  // 1 - exp(-(c/x)^2), x <= 0 -> 1
Conductivities conductivities(const AdaptiveFrame& frame, double q, double cond_floor = 0.0);

// Superbase reduction: D = sum_k w_k e_k e_k^T with integer offsets e_k, w_k >= 0.
struct SellingDecomp {
  std::array<double, 6> w{};
  std::array<std::array<int, 3>, 6> e{};
  int iterations = 0;
};
SellingDecomp selling(const std::array<double, 6>& D);  // xx, yy, zz, xy, xz, yz

struct DiffusionReport {
  double c1 = 0.0, c2 = 0.0;
  double cfl_bound = 0.0;
  double max_dt_diag = 0.0;  // max over points of dt * diagonal coefficient
  double dt = 0.0;
  int steps = 0;
  std::vector<double> mass;  // per step, including step 0
  double max_rel_mass_change = 0.0;
  int max_selling_iterations = 0;
  nlohmann::json to_json() const;
};

// Explicit Euler on dW/dt = D11 (B1^2 + B2^2) W + D33 B3^2 W + D44 Laplacian_S2 W.
// `on_step(step, W)` is called after every step.
Channels diffuse(const Channels& W0, const SphericalDesign& design, const Dims& dims, const AdaptiveFrame& frame,
                 const Conductivities& cond, const DiffusionConfig& cfg, DiffusionReport* report = nullptr,
                 const std::function<void(int, const Channels&)>& on_step = {});

// Frame and conductivities from W0, then diffusion.
Channels diffuse(const Channels& W0, const SphericalDesign& design, const Dims& dims, const DiffusionConfig& cfg,
                 DiffusionReport* report = nullptr, const std::function<void(int, const Channels&)>& on_step = {});

OrientationScore diffuse(const OrientationScore& U, const DiffusionConfig& cfg, DiffusionReport* report = nullptr);

// low + sum_i W_i Delta_i
Volume sum_channels(const Channels& W, const SphericalDesign& design, const Volume& low);

Volume process_image(const Volume& f, const WaveletBank& bank, const DiffusionConfig& cfg,
                     DiffusionReport* report = nullptr);

// Outputs at each time in `times` (multiples of dt) from one run.
std::vector<Volume> process_image_series(const Volume& f, const WaveletBank& bank, const DiffusionConfig& cfg,
                                         const std::vector<double>& times, DiffusionReport* report = nullptr);

// Heat-equation baseline: Gaussian with sigma = sqrt(2T).
Volume gaussian_diffusion(const Volume& f, double T);

}  // namespace ost
