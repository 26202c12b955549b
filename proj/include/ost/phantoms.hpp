#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ost/volume.hpp"

namespace ost {

struct TubePhantomSpec {
  Dims dims{64, 64, 64};
  std::vector<Vec3> control;   // polyline centerline, voxel coordinates
  std::vector<double> radius;  // radius at each control point, linear over arclength
  double contrast = 1.0;
  double noise = 0.0;          // additive Gaussian standard deviation
  std::uint64_t seed = 0;
};

struct TubeTruth {
  std::vector<Vec3> points;
  std::vector<Vec3> tangents;
  std::vector<double> radius;
};

// contrast inside, linear partial-volume ramp of one voxel centred on the wall, 0 outside.
Volume make_tube(const TubePhantomSpec& spec, TubeTruth* truth = nullptr);

// Smooth random centerline (random Fourier series, curvature radius >= 2 rmax) and random radius profile.
TubePhantomSpec random_tube_spec(std::uint64_t seed, const Dims& dims, double rmin, double rmax, double noise,
                                 double contrast = 1.0);

// Union of several tubes, max intensity where they overlap, then noise.
Volume make_tubes(const std::vector<TubePhantomSpec>& specs, double noise, std::uint64_t seed,
                  std::vector<TubeTruth>* truths = nullptr);

// Two straight tubes through the center, crossing at `angle` radians.
std::vector<TubePhantomSpec> crossing_specs(const Dims& dims, double radius, double angle = M_PI / 2,
                                            double contrast = 1.0);
Volume make_crossing(const Dims& dims, double radius, double contrast, double noise, std::uint64_t seed,
                     std::vector<TubeTruth>* truths = nullptr, double angle = M_PI / 2);

// Slab through the center with normal `normal` and full thickness `thickness`.
Volume make_plate(const Dims& dims, double thickness, double contrast, double noise, std::uint64_t seed,
                  const Vec3& normal = {0.0, 0.0, 1.0});

void write_truth_csv(const std::vector<TubeTruth>& truths, const std::string& path);

struct Sphere {
  Vec3 c;
  double r;
};

struct RegionSpec {
  Dims dims{1, 1, 1};
  std::vector<std::uint8_t> structure;
  std::vector<std::uint8_t> background;

  static RegionSpec from_spheres(const Dims& dims, const std::vector<Sphere>& s, const std::vector<Sphere>& b);
  static RegionSpec from_json_file(const std::string& path, const Dims& dims);
  void validate() const;
};

double cnr(const Volume& f, const RegionSpec& regions);

struct EdgeEstimate {
  double radius = 0.0;           // median over valid directions
  std::vector<double> per_direction;
  int valid = 0;
};

EdgeEstimate edge_locate(const Volume& f, const Vec3& center, const Vec3& axis, double sigma_d = 1.0,
                         double r_max = 12.0);

}  // namespace ost
