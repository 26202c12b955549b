#include "ost/volume.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ost {

namespace {

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

void check_dims(const Dims& d, const Vec3& s) {
  for (int a = 0; a < 3; ++a) {
    if (d[a] < 1) throw DimensionError("dims must be >= 1");
    if (!(s[a] > 0.0) || !std::isfinite(s[a])) throw ParameterError("spacing must be > 0");
  }
}

// out[i] = in[(i + n/2) mod n] along every axis: moves the centered origin to index 0.
template <class T>
std::vector<T> center_to_origin(const std::vector<T>& in, const Dims& d) {
  std::vector<T> out(in.size());
  const int cx = d[0] / 2, cy = d[1] / 2, cz = d[2] / 2;
  for (int z = 0; z < d[2]; ++z) {
    const int sz = (z + cz) % d[2];
    for (int y = 0; y < d[1]; ++y) {
      const int sy = (y + cy) % d[1];
      const std::size_t orow = static_cast<std::size_t>(d[0]) * (y + static_cast<std::size_t>(d[1]) * z);
      const std::size_t irow = static_cast<std::size_t>(d[0]) * (sy + static_cast<std::size_t>(d[1]) * sz);
      for (int x = 0; x < d[0]; ++x) out[orow + x] = in[irow + (x + cx) % d[0]];
    }
  }
  return out;
}

template <class T>
std::vector<T> origin_to_center(const std::vector<T>& in, const Dims& d) {
  std::vector<T> out(in.size());
  const int cx = d[0] / 2, cy = d[1] / 2, cz = d[2] / 2;
  for (int z = 0; z < d[2]; ++z) {
    const int sz = (z + cz) % d[2];
    for (int y = 0; y < d[1]; ++y) {
      const int sy = (y + cy) % d[1];
      const std::size_t irow = static_cast<std::size_t>(d[0]) * (y + static_cast<std::size_t>(d[1]) * z);
      const std::size_t orow = static_cast<std::size_t>(d[0]) * (sy + static_cast<std::size_t>(d[1]) * sz);
      for (int x = 0; x < d[0]; ++x) out[orow + (x + cx) % d[0]] = in[irow + x];
    }
  }
  return out;
}

std::vector<double> gaussian_taps(double sigma, int& radius) {
  radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> w(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    w[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += w[i + radius];
  }
  for (double& v : w) v /= sum;
  return w;
}

template <class T>
void write_le(std::ofstream& os, const std::vector<T>& vals) {
  static_assert(sizeof(T) == 4);
  std::vector<char> buf(vals.size() * 4);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::uint32_t u;
    std::memcpy(&u, &vals[i], 4);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    std::memcpy(&buf[4 * i], &u, 4);
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<float> read_le_f32(const std::string& path, std::size_t expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open payload " + path);
  is.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(is.tellg());
  if (bytes != expected * 4)
    throw FormatError("payload " + path + " has " + std::to_string(bytes) + " bytes, header implies " +
                      std::to_string(expected * 4));
  is.seekg(0);
  std::vector<char> buf(bytes);
  is.read(buf.data(), static_cast<std::streamsize>(bytes));
  std::vector<float> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint32_t u;
    std::memcpy(&u, &buf[4 * i], 4);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    std::memcpy(&out[i], &u, 4);
  }
  return out;
}

struct Header {
  Dims dims;
  Vec3 spacing;
  std::string dtype;
};

Header read_header(const std::string& path) {
  std::ifstream is(path + ".json");
  if (!is) throw FormatError("missing header " + path + ".json");
  nlohmann::json j;
  try {
    is >> j;
    Header h;
    for (int a = 0; a < 3; ++a) {
      h.dims[a] = j.at("dims").at(a).get<int>();
      h.spacing[a] = j.at("spacing").at(a).get<double>();
    }
    h.dtype = j.at("dtype").get<std::string>();
    if (j.contains("order") && j["order"].get<std::string>() != "x-fastest")
      throw FormatError("unsupported order " + j["order"].get<std::string>());
    for (int a = 0; a < 3; ++a) {
      if (h.dims[a] < 1) throw FormatError("dims must be >= 1");
      if (!(h.spacing[a] > 0.0)) throw FormatError("spacing must be > 0");
    }
    return h;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad header: ") + e.what());
  }
}

void write_header(const std::string& path, const Dims& d, const Vec3& s, const char* dtype) {
  nlohmann::json j;
  j["dims"] = {d[0], d[1], d[2]};
  j["spacing"] = {s[0], s[1], s[2]};
  j["dtype"] = dtype;
  j["order"] = "x-fastest";
  std::ofstream os(path + ".json");
  if (!os) throw FormatError("cannot write header " + path + ".json");
  os << j.dump() << "\n";
}

}  // namespace

Volume::Volume(const Dims& d, const Vec3& s) : dims(d), spacing(s) {
  check_dims(d, s);
  data.assign(voxel_count(d), 0.0);
}

void Volume::validate() const {
  check_dims(dims, spacing);
  if (data.size() != voxel_count(dims)) throw DimensionError("data length != X*Y*Z");
}

ComplexVolume::ComplexVolume(const Dims& d, const Vec3& s, Domain dom) : dims(d), spacing(s), domain(dom) {
  check_dims(d, s);
  data.assign(voxel_count(d), cplx(0.0, 0.0));
}

void ComplexVolume::validate() const {
  check_dims(dims, spacing);
  if (data.size() != voxel_count(dims)) throw DimensionError("data length != X*Y*Z");
}

FrequencyGrid::FrequencyGrid(const Dims& d, const Vec3& spacing) : dims(d) {
  check_dims(d, spacing);
  for (int a = 0; a < 3; ++a) nyquist[a] = M_PI / spacing[a];
}

double FrequencyGrid::omega(int axis, int idx) const {
  const int n = dims[axis];
  return 2.0 * nyquist[axis] * static_cast<double>(idx - n / 2) / n;
}

ComplexVolume to_complex(const Volume& v) {
  ComplexVolume c(v.dims, v.spacing, Domain::spatial);
  for (std::size_t i = 0; i < v.size(); ++i) c.data[i] = v.data[i];
  return c;
}

Volume real_part(const ComplexVolume& v) {
  Volume r(v.dims, v.spacing);
  for (std::size_t i = 0; i < v.size(); ++i) r.data[i] = v.data[i].real();
  return r;
}

void fft_raw(std::vector<cplx>& buf, const Dims& dims, int sign) {
  if (buf.size() != voxel_count(dims)) throw DimensionError("fft buffer size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_3d(dims[2], dims[1], dims[0], p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(plan);
}

ComplexVolume fft_forward(const ComplexVolume& v) {
  v.validate();
  if (v.domain != Domain::spatial) throw ParameterError("fft_forward expects a spatial volume");
  auto buf = center_to_origin(v.data, v.dims);
  fft_raw(buf, v.dims, -1);
  ComplexVolume out(v.dims, v.spacing, Domain::fourier);
  out.data = origin_to_center(buf, v.dims);
  return out;
}

ComplexVolume fft_inverse(const ComplexVolume& v) {
  v.validate();
  if (v.domain != Domain::fourier) throw ParameterError("fft_inverse expects a fourier volume");
  auto buf = center_to_origin(v.data, v.dims);
  fft_raw(buf, v.dims, +1);
  const double inv = 1.0 / static_cast<double>(buf.size());
  for (auto& c : buf) c *= inv;
  ComplexVolume out(v.dims, v.spacing, Domain::spatial);
  out.data = origin_to_center(buf, v.dims);
  return out;
}

std::vector<cplx> kernel_spectrum(const ComplexVolume& kernel, const Dims& dims) {
  for (int a = 0; a < 3; ++a)
    if (kernel.dims[a] > dims[a]) throw DimensionError("kernel larger than volume");
  std::vector<cplx> buf(voxel_count(dims), cplx(0.0, 0.0));
  const int cx = kernel.dims[0] / 2, cy = kernel.dims[1] / 2, cz = kernel.dims[2] / 2;
  for (int z = 0; z < kernel.dims[2]; ++z) {
    const int wz = ((z - cz) % dims[2] + dims[2]) % dims[2];
    for (int y = 0; y < kernel.dims[1]; ++y) {
      const int wy = ((y - cy) % dims[1] + dims[1]) % dims[1];
      for (int x = 0; x < kernel.dims[0]; ++x) {
        const int wx = ((x - cx) % dims[0] + dims[0]) % dims[0];
        buf[wx + static_cast<std::size_t>(dims[0]) * (wy + static_cast<std::size_t>(dims[1]) * wz)] += kernel(x, y, z);
      }
    }
  }
  fft_raw(buf, dims, -1);
  return buf;
}

ComplexVolume correlate(const ComplexVolume& kernel, const Volume& f) {
  return Correlator(f).apply(kernel);
}

Correlator::Correlator(const Volume& f) : dims_(f.dims), spacing_(f.spacing) {
  f.validate();
  fhat_.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fhat_[i] = f.data[i];
  fft_raw(fhat_, dims_, -1);
}

ComplexVolume Correlator::apply(const ComplexVolume& kernel) const {
  auto buf = kernel_spectrum(kernel, dims_);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = std::conj(buf[i]) * fhat_[i];
  fft_raw(buf, dims_, +1);
  const double inv = 1.0 / static_cast<double>(buf.size());
  ComplexVolume out(dims_, spacing_, Domain::spatial);
  for (std::size_t i = 0; i < buf.size(); ++i) out.data[i] = buf[i] * inv;
  return out;
}

void gaussian_blur_inplace(double* data, const Dims& d, double sigma, std::vector<double>& line) {
  if (sigma <= 0.0) return;
  int r;
  const auto w = gaussian_taps(sigma, r);
  const std::size_t stride[3] = {1, static_cast<std::size_t>(d[0]), static_cast<std::size_t>(d[0]) * d[1]};
  for (int axis = 0; axis < 3; ++axis) {
    const int n = d[axis];
    if (n == 1) continue;
    line.resize(n);
    const int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
    for (int j = 0; j < d[o2]; ++j) {
      for (int i = 0; i < d[o1]; ++i) {
        double* base = data + i * stride[o1] + j * stride[o2];
        for (int k = 0; k < n; ++k) line[k] = base[k * stride[axis]];
        for (int k = 0; k < n; ++k) {
          double acc = 0.0;
          for (int t = -r; t <= r; ++t) acc += w[t + r] * line[std::clamp(k + t, 0, n - 1)];
          base[k * stride[axis]] = acc;
        }
      }
    }
  }
}

Volume gaussian_blur(const Volume& f, double sigma) {
  Volume out = f;
  std::vector<double> scratch;
  gaussian_blur_inplace(out.data.data(), out.dims, sigma, scratch);
  return out;
}

double sample_trilinear(const double* data, const Dims& d, const Vec3& p) {
  int i0[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    const double c = std::clamp(p[a], 0.0, static_cast<double>(d[a] - 1));
    i0[a] = std::min(static_cast<int>(c), std::max(d[a] - 2, 0));
    t[a] = c - i0[a];
  }
  const int i1x = std::min(i0[0] + 1, d[0] - 1), i1y = std::min(i0[1] + 1, d[1] - 1),
            i1z = std::min(i0[2] + 1, d[2] - 1);
  const std::size_t sx = 1, sy = d[0], sz = static_cast<std::size_t>(d[0]) * d[1];
  auto at = [&](int x, int y, int z) { return data[x * sx + y * sy + z * sz]; };
  const double c00 = at(i0[0], i0[1], i0[2]) * (1 - t[0]) + at(i1x, i0[1], i0[2]) * t[0];
  const double c10 = at(i0[0], i1y, i0[2]) * (1 - t[0]) + at(i1x, i1y, i0[2]) * t[0];
  const double c01 = at(i0[0], i0[1], i1z) * (1 - t[0]) + at(i1x, i0[1], i1z) * t[0];
  const double c11 = at(i0[0], i1y, i1z) * (1 - t[0]) + at(i1x, i1y, i1z) * t[0];
  const double c0 = c00 * (1 - t[1]) + c10 * t[1];
  const double c1 = c01 * (1 - t[1]) + c11 * t[1];
  return c0 * (1 - t[2]) + c1 * t[2];
}

Volume pad_replicate(const Volume& f, const Dims& pad) {
  Dims nd{f.dims[0] + 2 * pad[0], f.dims[1] + 2 * pad[1], f.dims[2] + 2 * pad[2]};
  Volume out(nd, f.spacing);
  for (int z = 0; z < nd[2]; ++z) {
    const int sz = std::clamp(z - pad[2], 0, f.dims[2] - 1);
    for (int y = 0; y < nd[1]; ++y) {
      const int sy = std::clamp(y - pad[1], 0, f.dims[1] - 1);
      for (int x = 0; x < nd[0]; ++x) out(x, y, z) = f(std::clamp(x - pad[0], 0, f.dims[0] - 1), sy, sz);
    }
  }
  return out;
}

Volume crop(const Volume& f, const Dims& offset, const Dims& dims) {
  for (int a = 0; a < 3; ++a)
    if (offset[a] < 0 || offset[a] + dims[a] > f.dims[a]) throw DimensionError("crop outside volume");
  Volume out(dims, f.spacing);
  for (int z = 0; z < dims[2]; ++z)
    for (int y = 0; y < dims[1]; ++y)
      for (int x = 0; x < dims[0]; ++x) out(x, y, z) = f(x + offset[0], y + offset[1], z + offset[2]);
  return out;
}

Volume read_volume(const std::string& path) {
  const Header h = read_header(path);
  if (h.dtype != "f32") throw FormatError("unknown dtype " + h.dtype);
  const auto vals = read_le_f32(path, voxel_count(h.dims));
  Volume v(h.dims, h.spacing);
  for (std::size_t i = 0; i < vals.size(); ++i) v.data[i] = vals[i];
  return v;
}

void write_volume(const Volume& v, const std::string& path) {
  v.validate();
  std::vector<float> vals(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) vals[i] = static_cast<float>(v.data[i]);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path);
  write_le(os, vals);
  write_header(path, v.dims, v.spacing, "f32");
}

ComplexVolume read_complex_volume(const std::string& path) {
  const Header h = read_header(path);
  if (h.dtype != "c64") throw FormatError("unknown dtype " + h.dtype);
  const auto vals = read_le_f32(path, 2 * voxel_count(h.dims));
  ComplexVolume v(h.dims, h.spacing, Domain::spatial);
  for (std::size_t i = 0; i < v.size(); ++i) v.data[i] = cplx(vals[2 * i], vals[2 * i + 1]);
  return v;
}

void write_complex_volume(const ComplexVolume& v, const std::string& path) {
  v.validate();
  std::vector<float> vals(2 * v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    vals[2 * i] = static_cast<float>(v.data[i].real());
    vals[2 * i + 1] = static_cast<float>(v.data[i].imag());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path);
  write_le(os, vals);
  write_header(path, v.dims, v.spacing, "c64");
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace ost
