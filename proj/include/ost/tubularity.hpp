#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <vector>

#include "ost/score.hpp"
#include "ost/sphere.hpp"
#include "ost/volume.hpp"

namespace ost {

struct TubularityConfig {
  double sigma_o = M_PI / 8.0;  // angular kernel width, radians
  double sigma_r = 0.3;         // log-radial width
  int theta = 8;                // samples of theta' over [0, pi)
  double rmin = 1.0, rmax = 10.0, rstep = 0.5;
  double edge_floor = 1e-6;     // relative to the max edge energy

  void validate() const;
  std::vector<double> radii() const;
  nlohmann::json to_json() const;
};

// Im+(U(x + r m, m)) Im+(U(x - r m, -m)), m = cos(theta) e1 + sin(theta) e2.
double eprod(const ShScoreExpansion& e, const Vec3& x, const Vec3& n, double r, double theta);

double k_rad(double r, double rp, double sigma_r);
// Wrapped Gaussian on the circle, truncated at 3 sigma.
double k_or(double dtheta, double sigma);
std::vector<double> trapezoid_weights(const std::vector<double>& r);

// Raw V(x, n_i, r_j), layout [voxel][orientation][radius].
struct TubularityV {
  Dims dims{1, 1, 1};
  std::vector<Vec3> orientations;
  std::vector<double> radii;
  std::vector<float> data;

  float at(std::size_t v, int i, int j) const {
    return data[(v * orientations.size() + i) * radii.size() + j];
  }
};

struct TubularityField {
  Dims dims{1, 1, 1};
  std::vector<double> st;
  std::vector<double> rstar;
  std::vector<Vec3> nstar;
  std::vector<int> nstar_index;
};

// Orientations default to the score's design; antipodal duplicates are skipped (V(n) = V(-n)).
TubularityField tubularity(const ShScoreExpansion& e, const std::vector<Vec3>& orientations,
                           const TubularityConfig& cfg, TubularityV* keep = nullptr);

TubularityField features(const TubularityV& V);

struct Segmentation {
  std::vector<double> distance;
  std::vector<std::uint8_t> mask;
  std::size_t centers = 0;
  bool empty = true;
};

// Centers: voxels with s^t in the top `quantile` fraction.
Segmentation segment(const TubularityField& tf, double quantile);

int count_components(const std::vector<std::uint8_t>& mask, const Dims& dims);

}  // namespace ost
