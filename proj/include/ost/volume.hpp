#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "ost/errors.hpp"

namespace ost {

using cplx = std::complex<double>;
using Dims = std::array<int, 3>;
using Vec3 = std::array<double, 3>;

inline std::size_t voxel_count(const Dims& d) {
  return static_cast<std::size_t>(d[0]) * d[1] * d[2];
}

// Real scalar grid, x fastest.
struct Volume {
  Dims dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  std::vector<double> data;

  Volume() : data(1, 0.0) {}
  explicit Volume(const Dims& d, const Vec3& s = {1.0, 1.0, 1.0});

  std::size_t size() const { return data.size(); }
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * z);
  }
  double& operator()(int x, int y, int z) { return data[index(x, y, z)]; }
  double operator()(int x, int y, int z) const { return data[index(x, y, z)]; }
  bool inside(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims[0] && y < dims[1] && z < dims[2];
  }
  void validate() const;
};

enum class Domain { spatial, fourier };

// Complex grid. In both domains the origin sits at index floor(dims/2).
struct ComplexVolume {
  Dims dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  std::vector<cplx> data;
  Domain domain = Domain::spatial;

  ComplexVolume() : data(1) {}
  ComplexVolume(const Dims& d, const Vec3& s, Domain dom);

  std::size_t size() const { return data.size(); }
  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * z);
  }
  cplx& operator()(int x, int y, int z) { return data[index(x, y, z)]; }
  const cplx& operator()(int x, int y, int z) const { return data[index(x, y, z)]; }
  void validate() const;
};

// Angular frequency sample positions of a centered spectrum.
struct FrequencyGrid {
  Dims dims;
  Vec3 nyquist;  // pi / spacing per axis

  FrequencyGrid(const Dims& d, const Vec3& spacing);
  double omega(int axis, int idx) const;
  Vec3 omega(int x, int y, int z) const { return {omega(0, x), omega(1, y), omega(2, z)}; }
};

ComplexVolume to_complex(const Volume& v);
Volume real_part(const ComplexVolume& v);

ComplexVolume fft_forward(const ComplexVolume& v);
ComplexVolume fft_inverse(const ComplexVolume& v);

// Unshifted in-place transforms on raw x-fastest buffers (origin at index 0).
// sign = -1 forward, +1 backward; the backward transform is not normalized.
void fft_raw(std::vector<cplx>& buf, const Dims& dims, int sign);

// Spectrum (origin at 0) of a centered kernel embedded periodically into a grid of `dims`.
std::vector<cplx> kernel_spectrum(const ComplexVolume& kernel, const Dims& dims);

// output(x) = sum_x' conj(kernel(x'-x)) f(x'), periodic.
ComplexVolume correlate(const ComplexVolume& kernel, const Volume& f);

// Correlates many kernels against one image, reusing the image spectrum.
class Correlator {
 public:
  explicit Correlator(const Volume& f);
  ComplexVolume apply(const ComplexVolume& kernel) const;
  const std::vector<cplx>& spectrum() const { return fhat_; }
  const Dims& dims() const { return dims_; }

 private:
  Dims dims_;
  Vec3 spacing_;
  std::vector<cplx> fhat_;
};

// Separable Gaussian (sigma in voxels, clamped edges, truncated at 4 sigma).
Volume gaussian_blur(const Volume& f, double sigma);
void gaussian_blur_inplace(double* data, const Dims& dims, double sigma, std::vector<double>& scratch);

// Trilinear interpolation with clamped edges.
double sample_trilinear(const double* data, const Dims& dims, const Vec3& p);

// Edge-replicating pad and matching crop.
Volume pad_replicate(const Volume& f, const Dims& pad);
Volume crop(const Volume& f, const Dims& offset, const Dims& dims);

// Raw little-endian payload + JSON sidecar at path + ".json".
Volume read_volume(const std::string& path);
void write_volume(const Volume& v, const std::string& path);
ComplexVolume read_complex_volume(const std::string& path);
void write_complex_volume(const ComplexVolume& v, const std::string& path);

void set_threads(int n);

}  // namespace ost
