#include "ost/tubularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ost {

namespace {

inline std::size_t lin(const Dims& d, int x, int y, int z) {
  return x + static_cast<std::size_t>(d[0]) * (y + static_cast<std::size_t>(d[1]) * z);
}

bool inside(const Dims& d, const Vec3& p) {
  for (int a = 0; a < 3; ++a)
    if (p[a] < 0.0 || p[a] > d[a] - 1) return false;
  return true;
}

// Im of the SH synthesis at direction m for every voxel.
void synth_imag(const ShScoreExpansion& e, const Vec3& m, std::vector<float>& out) {
  std::vector<cplx> y;
  sh_basis(e.L, m, y);
  const int K = e.count();
  std::vector<double> yr(K), yi(K);
  for (int k = 0; k < K; ++k) {
    yr[k] = y[k].real();
    yi[k] = y[k].imag();
  }
  const std::size_t nv = voxel_count(e.dims);
  out.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const cplx* a = e.at(v);
    double acc = 0.0;
    for (int k = 0; k < K; ++k) acc += a[k].real() * yi[k] + a[k].imag() * yr[k];
    out[v] = static_cast<float>(acc);
  }
}

// out(x) = in(x + s) by trilinear interpolation; 0 when x + s leaves the volume.
void shift_sample(const std::vector<float>& in, const Dims& d, const Vec3& s, std::vector<float>& out) {
  int o[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    o[a] = static_cast<int>(std::floor(s[a]));
    t[a] = s[a] - o[a];
  }
  out.assign(in.size(), 0.0f);
  for (int z = 0; z < d[2]; ++z) {
    const int z0 = z + o[2], z1 = t[2] > 0.0 ? z0 + 1 : z0;
    if (z0 < 0 || z1 >= d[2]) continue;
    for (int y = 0; y < d[1]; ++y) {
      const int y0 = y + o[1], y1 = t[1] > 0.0 ? y0 + 1 : y0;
      if (y0 < 0 || y1 >= d[1]) continue;
      for (int x = 0; x < d[0]; ++x) {
        const int x0 = x + o[0], x1 = t[0] > 0.0 ? x0 + 1 : x0;
        if (x0 < 0 || x1 >= d[0]) continue;
        auto at = [&](int a, int b, int c) { return static_cast<double>(in[lin(d, a, b, c)]); };
        const double c00 = at(x0, y0, z0) * (1 - t[0]) + at(x1, y0, z0) * t[0];
        const double c10 = at(x0, y1, z0) * (1 - t[0]) + at(x1, y1, z0) * t[0];
        const double c01 = at(x0, y0, z1) * (1 - t[0]) + at(x1, y0, z1) * t[0];
        const double c11 = at(x0, y1, z1) * (1 - t[0]) + at(x1, y1, z1) * t[0];
        const double c0 = c00 * (1 - t[1]) + c10 * t[1], c1 = c01 * (1 - t[1]) + c11 * t[1];
        out[lin(d, x, y, z)] = static_cast<float>(c0 * (1 - t[2]) + c1 * t[2]);
      }
    }
  }
}

// Separable box dilation with radius r.
std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& m, const Dims& d, int r) {
  std::vector<std::uint8_t> a = m, b(m.size());
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t stride = axis == 0 ? 1 : axis == 1 ? d[0] : static_cast<std::size_t>(d[0]) * d[1];
    for (int z = 0; z < d[2]; ++z)
      for (int y = 0; y < d[1]; ++y)
        for (int x = 0; x < d[0]; ++x) {
          const int c[3] = {x, y, z};
          const std::size_t v = lin(d, x, y, z);
          std::uint8_t any = 0;
          for (int k = std::max(0, c[axis] - r); k <= std::min(d[axis] - 1, c[axis] + r) && !any; ++k)
            any = a[v + (static_cast<std::ptrdiff_t>(k) - c[axis]) * static_cast<std::ptrdiff_t>(stride)];
          b[v] = any;
        }
    std::swap(a, b);
  }
  return a;
}

}  // namespace

void TubularityConfig::validate() const {
  if (!(sigma_o > 0.0) || !(sigma_r > 0.0)) throw ParameterError("kernel widths must be > 0");
  if (theta < 1) throw ParameterError("theta sample count must be >= 1");
  if (!(rmin > 0.0)) throw ParameterError("rmin must be > 0");
  if (!(rstep > 0.0)) throw ParameterError("rstep must be > 0");
  if (rmax < rmin) throw ParameterError("radius grid empty");
}

std::vector<double> TubularityConfig::radii() const {
  validate();
  std::vector<double> r;
  for (int k = 0;; ++k) {
    const double v = rmin + k * rstep;
    if (v > rmax + 1e-9) break;
    r.push_back(v);
  }
  if (r.empty()) throw ParameterError("radius grid empty");
  return r;
}

nlohmann::json TubularityConfig::to_json() const {
  return {{"sigma_o", sigma_o}, {"sigma_r", sigma_r}, {"theta", theta},          {"rmin", rmin},
          {"rmax", rmax},       {"rstep", rstep},     {"edge_floor", edge_floor}};
}

double eprod(const ShScoreExpansion& e, const Vec3& x, const Vec3& n, double r, double theta) {
  Vec3 e1, e2;
  complement_basis(normalized(n), e1, e2);
  const Vec3 m{std::cos(theta) * e1[0] + std::sin(theta) * e2[0], std::cos(theta) * e1[1] + std::sin(theta) * e2[1],
               std::cos(theta) * e1[2] + std::sin(theta) * e2[2]};
  const Vec3 p{x[0] + r * m[0], x[1] + r * m[1], x[2] + r * m[2]};
  const Vec3 q{x[0] - r * m[0], x[1] - r * m[1], x[2] - r * m[2]};
  if (!inside(e.dims, p) || !inside(e.dims, q)) return 0.0;
  const double a = std::max(0.0, steer_eval(e, p, m).imag());
  const double b = std::max(0.0, steer_eval(e, q, {-m[0], -m[1], -m[2]}).imag());
  return a * b;
}

double k_rad(double r, double rp, double sigma_r) {
  const double l = std::log(r / rp);
  return std::exp(-l * l / (2.0 * sigma_r * sigma_r) - 0.5 * sigma_r * sigma_r) /
         (std::sqrt(2.0 * M_PI) * sigma_r * rp);
}

double k_or(double dtheta, double sigma) {
  double acc = 0.0;
  for (int k = -4; k <= 4; ++k) {
    const double t = dtheta + 2.0 * M_PI * k;
    if (std::abs(t) <= 3.0 * sigma) acc += std::exp(-t * t / (2.0 * sigma * sigma));
  }
  return acc / (std::sqrt(2.0 * M_PI) * sigma);
}

std::vector<double> trapezoid_weights(const std::vector<double>& r) {
  std::vector<double> w(r.size(), 0.0);
  if (r.size() == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t j = 0; j + 1 < r.size(); ++j) {
    const double h = r[j + 1] - r[j];
    w[j] += 0.5 * h;
    w[j + 1] += 0.5 * h;
  }
  return w;
}

TubularityField tubularity(const ShScoreExpansion& e, const std::vector<Vec3>& orientations,
                           const TubularityConfig& cfg, TubularityV* keep) {
  cfg.validate();
  const auto radii = cfg.radii();
  const int R = static_cast<int>(radii.size());
  const int T = cfg.theta;
  const int no = static_cast<int>(orientations.size());
  const Dims d = e.dims;
  const std::size_t nv = voxel_count(d);

  // radial and angular smoothing matrices
  const auto tw = trapezoid_weights(radii);
  std::vector<double> KR(R * R), KO(T * T);
  for (int j = 0; j < R; ++j)
    for (int jp = 0; jp < R; ++jp) KR[j * R + jp] = k_rad(radii[j], radii[jp], cfg.sigma_r) * tw[jp];
  const double dth = M_PI / T;
  for (int k = 0; k < T; ++k)
    for (int kp = 0; kp < T; ++kp) {
      // E is pi-periodic in theta; sum both copies of theta' over [0, 2 pi)
      KO[k * T + kp] = (k_or((k - kp) * dth, cfg.sigma_o) + k_or((k - kp) * dth + M_PI, cfg.sigma_o)) * dth;
    }

  // voxels with edge energy somewhere within rmax
  std::vector<std::uint8_t> mask(nv, 0);
  {
    std::vector<float> emax(nv, 0.0f), tmp;
    for (int i = 0; i < no; ++i) {
      synth_imag(e, orientations[i], tmp);
      for (std::size_t v = 0; v < nv; ++v) emax[v] = std::max(emax[v], std::abs(tmp[v]));
    }
    const float top = *std::max_element(emax.begin(), emax.end());
    for (std::size_t v = 0; v < nv; ++v) mask[v] = top > 0.0f && emax[v] > cfg.edge_floor * top;
    mask = dilate(mask, d, static_cast<int>(std::ceil(cfg.rmax)));
  }

  TubularityField tf;
  tf.dims = d;
  tf.st.assign(nv, 0.0);
  tf.rstar.assign(nv, radii[0]);
  tf.nstar.assign(nv, orientations.empty() ? Vec3{0, 0, 1} : orientations[0]);
  tf.nstar_index.assign(nv, 0);
  if (keep) {
    keep->dims = d;
    keep->orientations = orientations;
    keep->radii = radii;
    keep->data.assign(nv * no * R, 0.0f);
  }

  std::vector<float> E(static_cast<std::size_t>(T) * R * nv);
  std::vector<float> vp, vm, sp, sm;
  for (int i = 0; i < no; ++i) {
    const Vec3 n = normalized(orientations[i]);
    int twin = -1;
    for (int j = 0; j < i; ++j) {
      const Vec3 m = normalized(orientations[j]);
      if (dot(m, n) < -1.0 + 1e-12) twin = j;
    }
    if (twin >= 0 && !keep) continue;
    Vec3 e1, e2;
    complement_basis(n, e1, e2);
    for (int k = 0; k < T; ++k) {
      const double th = k * dth;
      const Vec3 m{std::cos(th) * e1[0] + std::sin(th) * e2[0], std::cos(th) * e1[1] + std::sin(th) * e2[1],
                   std::cos(th) * e1[2] + std::sin(th) * e2[2]};
      synth_imag(e, m, vp);
      synth_imag(e, {-m[0], -m[1], -m[2]}, vm);
      for (auto& x : vp) x = std::max(0.0f, x);
      for (auto& x : vm) x = std::max(0.0f, x);
      for (int j = 0; j < R; ++j) {
        const double r = radii[j];
        shift_sample(vp, d, {r * m[0], r * m[1], r * m[2]}, sp);
        shift_sample(vm, d, {-r * m[0], -r * m[1], -r * m[2]}, sm);
        float* dst = &E[(static_cast<std::size_t>(k) * R + j) * nv];
        for (std::size_t v = 0; v < nv; ++v) dst[v] = sp[v] * sm[v];
      }
    }
#pragma omp parallel
    {
      std::vector<double> er(T * R), col(T);
#pragma omp for schedule(static)
      for (std::int64_t v = 0; v < static_cast<std::int64_t>(nv); ++v) {
        if (!mask[v]) continue;
        for (int k = 0; k < T; ++k)
          for (int j = 0; j < R; ++j) {
            double acc = 0.0;
            for (int jp = 0; jp < R; ++jp) acc += KR[j * R + jp] * E[(static_cast<std::size_t>(k) * R + jp) * nv + v];
            er[k * R + j] = acc;
          }
        for (int j = 0; j < R; ++j) {
          double vmin = std::numeric_limits<double>::infinity();
          for (int k = 0; k < T; ++k) {
            double acc = 0.0;
            for (int kp = 0; kp < T; ++kp) acc += KO[k * T + kp] * er[kp * R + j];
            vmin = std::min(vmin, acc);
          }
          if (keep) keep->data[(v * no + i) * R + j] = static_cast<float>(vmin);
          if (twin < 0 && vmin > tf.st[v]) {
            tf.st[v] = vmin;
            tf.rstar[v] = radii[j];
            tf.nstar[v] = n;
            tf.nstar_index[v] = i;
          }
        }
      }
    }
  }
  return tf;
}

TubularityField features(const TubularityV& V) {
  const std::size_t nv = voxel_count(V.dims);
  const int no = static_cast<int>(V.orientations.size()), R = static_cast<int>(V.radii.size());
  TubularityField tf;
  tf.dims = V.dims;
  tf.st.assign(nv, 0.0);
  tf.rstar.assign(nv, R ? V.radii[0] : 0.0);
  tf.nstar.assign(nv, no ? V.orientations[0] : Vec3{0, 0, 1});
  tf.nstar_index.assign(nv, 0);
  for (std::size_t v = 0; v < nv; ++v)
    for (int i = 0; i < no; ++i)
      for (int j = 0; j < R; ++j) {
        const double x = V.at(v, i, j);
        if (x > tf.st[v]) {
          tf.st[v] = x;
          tf.nstar[v] = V.orientations[i];
          tf.nstar_index[v] = i;
          tf.rstar[v] = V.radii[j];
        }
      }
  return tf;
}

Segmentation segment(const TubularityField& tf, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) throw ParameterError("quantile must be in (0,1)");
  const Dims d = tf.dims;
  const std::size_t nv = voxel_count(d);
  Segmentation s;
  s.distance.assign(nv, std::numeric_limits<double>::infinity());
  s.mask.assign(nv, 0);
  std::vector<double> pos;
  for (double x : tf.st)
    if (x > 0.0) pos.push_back(x);
  if (pos.empty()) return s;
  std::sort(pos.begin(), pos.end(), std::greater<double>());
  const std::size_t keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(quantile * nv)));
  const double thr = pos[std::min(keep, pos.size()) - 1];
  std::vector<std::array<double, 4>> centers;
  for (int z = 0; z < d[2]; ++z)
    for (int y = 0; y < d[1]; ++y)
      for (int x = 0; x < d[0]; ++x) {
        const std::size_t v = lin(d, x, y, z);
        if (tf.st[v] > 0.0 && tf.st[v] >= thr) centers.push_back({double(x), double(y), double(z), tf.rstar[v]});
      }
  s.centers = centers.size();
#pragma omp parallel for schedule(static)
  for (int z = 0; z < d[2]; ++z)
    for (int y = 0; y < d[1]; ++y)
      for (int x = 0; x < d[0]; ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& c : centers) {
          const double dx = x - c[0], dy = y - c[1], dz = z - c[2];
          best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz) - c[3]);
        }
        const std::size_t v = lin(d, x, y, z);
        s.distance[v] = best;
        s.mask[v] = best <= 0.0;
      }
  s.empty = std::none_of(s.mask.begin(), s.mask.end(), [](std::uint8_t m) { return m != 0; });
  return s;
}

int count_components(const std::vector<std::uint8_t>& mask, const Dims& d) {
  std::vector<int> label(mask.size(), 0);
  int n = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (!mask[s] || label[s]) continue;
    ++n;
    label[s] = n;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      const int x = v % d[0], y = (v / d[0]) % d[1], z = v / (static_cast<std::size_t>(d[0]) * d[1]);
      const int nb[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
      for (const auto& o : nb) {
        const int a = x + o[0], b = y + o[1], c = z + o[2];
        if (a < 0 || b < 0 || c < 0 || a >= d[0] || b >= d[1] || c >= d[2]) continue;
        const std::size_t w = lin(d, a, b, c);
        if (mask[w] && !label[w]) {
          label[w] = n;
          stack.push_back(w);
        }
      }
    }
  }
  return n;
}

}  // namespace ost
