#include "ost/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>

#include "ost/sphere.hpp"

namespace ost {

namespace {

struct Segment {
  Vec3 a, b;
  double ra, rb;
};

std::vector<Segment> segments_of(const TubePhantomSpec& s) {
  if (s.control.size() < 2 || s.radius.size() != s.control.size())
    throw ParameterError("tube needs >= 2 control points with one radius each");
  for (double r : s.radius)
    if (!(r > 0.0)) throw ParameterError("tube radius must be > 0");
  for (const auto& p : s.control)
    for (int a = 0; a < 3; ++a)
      if (p[a] < 0.0 || p[a] > s.dims[a] - 1) throw ParameterError("centerline exits the volume");
  std::vector<Segment> segs;
  for (std::size_t i = 0; i + 1 < s.control.size(); ++i)
    segs.push_back({s.control[i], s.control[i + 1], s.radius[i], s.radius[i + 1]});
  return segs;
}

inline double wall_profile(double d, double r) { return std::clamp(r + 0.5 - d, 0.0, 1.0); }

void paint(std::vector<double>& out, const Dims& dims, const TubePhantomSpec& s) {
  for (const auto& seg : segments_of(s)) {
    const double reach = std::max(seg.ra, seg.rb) + 1.0;
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::max(0, static_cast<int>(std::floor(std::min(seg.a[a], seg.b[a]) - reach)));
      hi[a] = std::min(dims[a] - 1, static_cast<int>(std::ceil(std::max(seg.a[a], seg.b[a]) + reach)));
    }
    const Vec3 ab{seg.b[0] - seg.a[0], seg.b[1] - seg.a[1], seg.b[2] - seg.a[2]};
    const double len2 = dot(ab, ab);
    for (int z = lo[2]; z <= hi[2]; ++z)
      for (int y = lo[1]; y <= hi[1]; ++y)
        for (int x = lo[0]; x <= hi[0]; ++x) {
          const Vec3 ap{x - seg.a[0], y - seg.a[1], z - seg.a[2]};
          const double t = len2 > 0.0 ? std::clamp(dot(ap, ab) / len2, 0.0, 1.0) : 0.0;
          const Vec3 d{ap[0] - t * ab[0], ap[1] - t * ab[1], ap[2] - t * ab[2]};
          const double v = s.contrast * wall_profile(norm(d), seg.ra + t * (seg.rb - seg.ra));
          double& o = out[x + static_cast<std::size_t>(dims[0]) * (y + static_cast<std::size_t>(dims[1]) * z)];
          o = std::max(o, v);
        }
  }
}

void add_noise(Volume& v, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sigma);
  for (double& x : v.data) x += nd(rng);
}

TubeTruth truth_of(const TubePhantomSpec& s) {
  TubeTruth t;
  for (const auto& seg : segments_of(s)) {
    const Vec3 ab{seg.b[0] - seg.a[0], seg.b[1] - seg.a[1], seg.b[2] - seg.a[2]};
    const double len = norm(ab);
    const int n = std::max(1, static_cast<int>(std::ceil(len / 0.5)));
    for (int k = 0; k < n; ++k) {
      const double u = static_cast<double>(k) / n;
      t.points.push_back({seg.a[0] + u * ab[0], seg.a[1] + u * ab[1], seg.a[2] + u * ab[2]});
      t.tangents.push_back(normalized(ab));
      t.radius.push_back(seg.ra + u * (seg.rb - seg.ra));
    }
  }
  const auto& last = s.control.back();
  t.points.push_back(last);
  t.tangents.push_back(t.tangents.back());
  t.radius.push_back(s.radius.back());
  return t;
}

}  // namespace

Volume make_tube(const TubePhantomSpec& spec, TubeTruth* truth) {
  std::vector<TubeTruth> t;
  Volume v = make_tubes({spec}, spec.noise, spec.seed, truth ? &t : nullptr);
  if (truth) *truth = t[0];
  return v;
}

Volume make_tubes(const std::vector<TubePhantomSpec>& specs, double noise, std::uint64_t seed,
                  std::vector<TubeTruth>* truths) {
  if (specs.empty()) throw ParameterError("no tubes");
  if (!(noise >= 0.0)) throw ParameterError("noise must be >= 0");
  Volume v(specs[0].dims);
  for (const auto& s : specs) {
    if (s.dims != specs[0].dims) throw ParameterError("tube dims differ");
    paint(v.data, v.dims, s);
    if (truths) truths->push_back(truth_of(s));
  }
  add_noise(v, noise, seed);
  return v;
}

TubePhantomSpec random_tube_spec(std::uint64_t seed, const Dims& dims, double rmin, double rmax, double noise,
                                 double contrast) {
  if (!(rmin > 0.0) || rmax < rmin) throw ParameterError("invalid radius range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  TubePhantomSpec s;
  s.dims = dims;
  s.contrast = contrast;
  s.noise = noise;
  s.seed = seed;

  // straight base line through the center in a random direction
  Vec3 dir{0, 0, 0};
  while (norm(dir) < 1e-3) dir = {2 * U(rng) - 1, 2 * U(rng) - 1, 2 * U(rng) - 1};
  dir = normalized(dir);
  Vec3 e1, e2;
  complement_basis(dir, e1, e2);
  const Vec3 c{(dims[0] - 1) / 2.0, (dims[1] - 1) / 2.0, (dims[2] - 1) / 2.0};
  const double margin = 2.0;
  double half = 1e30;
  for (int a = 0; a < 3; ++a)
    if (std::abs(dir[a]) > 1e-9) half = std::min(half, (c[a] - margin) / std::abs(dir[a]));
  half *= 0.85;

  double amp[2][3], phase[2][3];
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 3; ++k) {
      amp[j][k] = (2 * U(rng) - 1) / (k + 1);
      phase[j][k] = 2 * M_PI * U(rng);
    }
  const double knots[4] = {U(rng), U(rng), U(rng), U(rng)};

  const int n = 64;
  for (double scale = 0.15 * half;; scale *= 0.7) {
    std::vector<Vec3> pts(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      double o1 = 0, o2 = 0;
      for (int k = 0; k < 3; ++k) {
        o1 += amp[0][k] * std::sin((k + 1) * M_PI * t + phase[0][k]);
        o2 += amp[1][k] * std::sin((k + 1) * M_PI * t + phase[1][k]);
      }
      const double s0 = (2 * t - 1) * half;
      for (int a = 0; a < 3; ++a) pts[i][a] = c[a] + s0 * dir[a] + scale * (o1 * e1[a] + o2 * e2[a]);
    }
    // discrete curvature radius via circumradius of consecutive triples
    double min_rc = 1e30;
    bool inside = true;
    for (int i = 0; i <= n; ++i)
      for (int a = 0; a < 3; ++a)
        if (pts[i][a] < margin || pts[i][a] > dims[a] - 1 - margin) inside = false;
    for (int i = 1; i < n; ++i) {
      const Vec3 u{pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1], pts[i][2] - pts[i - 1][2]};
      const Vec3 w{pts[i + 1][0] - pts[i][0], pts[i + 1][1] - pts[i][1], pts[i + 1][2] - pts[i][2]};
      const Vec3 uw{u[0] + w[0], u[1] + w[1], u[2] + w[2]};
      const double area2 = norm(cross(u, w));
      if (area2 > 1e-12) min_rc = std::min(min_rc, norm(u) * norm(w) * norm(uw) / (2.0 * area2));
    }
    if ((min_rc >= 2.0 * rmax && inside) || scale < 1e-3) {
      s.control = pts;
      break;
    }
  }
  // piecewise-linear radius over 4 knots along the curve
  s.radius.resize(s.control.size());
  for (std::size_t i = 0; i < s.control.size(); ++i) {
    const double t = 3.0 * i / (s.control.size() - 1);
    const int k = std::min(2, static_cast<int>(t));
    const double f = t - k;
    const double r = knots[k] * (1 - f) + knots[k + 1] * f;
    s.radius[i] = rmin + (rmax - rmin) * r;
  }
  return s;
}

std::vector<TubePhantomSpec> crossing_specs(const Dims& dims, double radius, double angle, double contrast) {
  const Vec3 c{(dims[0] - 1) / 2.0, (dims[1] - 1) / 2.0, (dims[2] - 1) / 2.0};
  const double half = std::min({c[0], c[1], c[2]}) - 1.0;
  std::vector<TubePhantomSpec> out;
  const Vec3 dirs[2] = {{std::cos(angle / 2), std::sin(angle / 2), 0.0}, {std::cos(angle / 2), -std::sin(angle / 2), 0.0}};
  for (const auto& d : dirs) {
    TubePhantomSpec s;
    s.dims = dims;
    s.contrast = contrast;
    double h = half;
    for (int a = 0; a < 2; ++a)
      if (std::abs(d[a]) > 1e-9) h = std::min(h, half / std::abs(d[a]));
    s.control = {{c[0] - h * d[0], c[1] - h * d[1], c[2]}, {c[0] + h * d[0], c[1] + h * d[1], c[2]}};
    s.radius = {radius, radius};
    out.push_back(s);
  }
  return out;
}

Volume make_crossing(const Dims& dims, double radius, double contrast, double noise, std::uint64_t seed,
                     std::vector<TubeTruth>* truths, double angle) {
  return make_tubes(crossing_specs(dims, radius, angle, contrast), noise, seed, truths);
}

Volume make_plate(const Dims& dims, double thickness, double contrast, double noise, std::uint64_t seed,
                  const Vec3& normal) {
  if (!(thickness > 0.0)) throw ParameterError("plate thickness must be > 0");
  if (!(noise >= 0.0)) throw ParameterError("noise must be >= 0");
  Volume v(dims);
  const Vec3 n = normalized(normal);
  const Vec3 c{(dims[0] - 1) / 2.0, (dims[1] - 1) / 2.0, (dims[2] - 1) / 2.0};
  for (int z = 0; z < dims[2]; ++z)
    for (int y = 0; y < dims[1]; ++y)
      for (int x = 0; x < dims[0]; ++x) {
        const double d = std::abs(dot(n, {x - c[0], y - c[1], z - c[2]}));
        v(x, y, z) = contrast * wall_profile(d, thickness / 2.0);
      }
  add_noise(v, noise, seed);
  return v;
}

void write_truth_csv(const std::vector<TubeTruth>& truths, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot write " + path);
  os << "tube,x,y,z,radius,tx,ty,tz\n";
  os.precision(9);
  for (std::size_t k = 0; k < truths.size(); ++k)
    for (std::size_t i = 0; i < truths[k].points.size(); ++i) {
      const auto& p = truths[k].points[i];
      const auto& t = truths[k].tangents[i];
      os << k << ',' << p[0] << ',' << p[1] << ',' << p[2] << ',' << truths[k].radius[i] << ',' << t[0] << ','
         << t[1] << ',' << t[2] << '\n';
    }
}

RegionSpec RegionSpec::from_spheres(const Dims& dims, const std::vector<Sphere>& s, const std::vector<Sphere>& b) {
  RegionSpec r;
  r.dims = dims;
  r.structure.assign(voxel_count(dims), 0);
  r.background.assign(voxel_count(dims), 0);
  auto fill = [&](std::vector<std::uint8_t>& mask, const std::vector<Sphere>& list) {
    for (const auto& sp : list)
      for (int z = 0; z < dims[2]; ++z)
        for (int y = 0; y < dims[1]; ++y)
          for (int x = 0; x < dims[0]; ++x) {
            const Vec3 d{x - sp.c[0], y - sp.c[1], z - sp.c[2]};
            if (dot(d, d) <= sp.r * sp.r)
              mask[x + static_cast<std::size_t>(dims[0]) * (y + static_cast<std::size_t>(dims[1]) * z)] = 1;
          }
  };
  fill(r.structure, s);
  fill(r.background, b);
  r.validate();
  return r;
}

RegionSpec RegionSpec::from_json_file(const std::string& path, const Dims& dims) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open regions " + path);
  try {
    nlohmann::json j;
    is >> j;
    auto read = [](const nlohmann::json& arr) {
      std::vector<Sphere> out;
      for (const auto& e : arr)
        out.push_back({{e.at("c").at(0).get<double>(), e.at("c").at(1).get<double>(), e.at("c").at(2).get<double>()},
                       e.at("r").get<double>()});
      return out;
    };
    return from_spheres(dims, read(j.at("structure")), read(j.at("background")));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad regions file: ") + e.what());
  }
}

void RegionSpec::validate() const {
  bool any_s = false, any_b = false;
  for (std::size_t i = 0; i < structure.size(); ++i) {
    if (structure[i] && background[i]) throw ParameterError("structure and background regions overlap");
    any_s |= structure[i] != 0;
    any_b |= background[i] != 0;
  }
  if (!any_s || !any_b) throw ParameterError("empty region");
}

double cnr(const Volume& f, const RegionSpec& regions) {
  if (f.dims != regions.dims) throw DimensionError("region dims differ from volume");
  double ss = 0.0, sb = 0.0;
  std::size_t ns = 0, nb = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (regions.structure[i]) {
      ss += f.data[i];
      ++ns;
    } else if (regions.background[i]) {
      sb += f.data[i];
      ++nb;
    }
  }
  if (ns == 0 || nb == 0) throw ParameterError("empty region");
  const double mu_s = ss / ns, mu_b = sb / nb;
  double var = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (regions.background[i]) var += (f.data[i] - mu_b) * (f.data[i] - mu_b);
  const double sigma = std::sqrt(var / nb);
  if (!(sigma > 0.0)) throw NumericError("constant background; CNR undefined");
  return (mu_s - mu_b) / sigma;
}

EdgeEstimate edge_locate(const Volume& f, const Vec3& center, const Vec3& axis, double sigma_d, double r_max) {
  for (int a = 0; a < 3; ++a)
    if (center[a] < 0.0 || center[a] > f.dims[a] - 1) throw ParameterError("center outside volume");
  Vec3 e1, e2;
  complement_basis(normalized(axis), e1, e2);
  const double step = 0.25;
  const int ns = static_cast<int>(std::floor(r_max / step)) + 1;
  const double sig = sigma_d / step;
  const int rad = static_cast<int>(std::ceil(4.0 * sig));
  std::vector<double> kern(2 * rad + 1);
  for (int i = -rad; i <= rad; ++i) kern[i + rad] = i * std::exp(-0.5 * i * i / (sig * sig));
  // unit response to a unit-slope ramp
  double norm_k = 0.0;
  for (int i = -rad; i <= rad; ++i) norm_k += kern[i + rad] * i;
  for (double& k : kern) k /= norm_k * step;

  EdgeEstimate est;
  std::vector<double> prof(ns), der(ns);
  for (int k = 0; k < 16; ++k) {
    const double th = 2.0 * M_PI * k / 16.0;
    const Vec3 d{std::cos(th) * e1[0] + std::sin(th) * e2[0], std::cos(th) * e1[1] + std::sin(th) * e2[1],
                 std::cos(th) * e1[2] + std::sin(th) * e2[2]};
    bool inside = true;
    for (int i = 0; i < ns && inside; ++i) {
      const Vec3 p{center[0] + i * step * d[0], center[1] + i * step * d[1], center[2] + i * step * d[2]};
      for (int a = 0; a < 3; ++a)
        if (p[a] < 0.0 || p[a] > f.dims[a] - 1) inside = false;
      if (inside) prof[i] = sample_trilinear(f.data.data(), f.dims, p);
    }
    if (!inside) continue;
    for (int i = 0; i < ns; ++i) {
      double acc = 0.0;
      for (int t = -rad; t <= rad; ++t) {
        int j = i + t;
        if (j < 0) j = -j;  // radial profile is even through the centerline
        j = std::min(j, ns - 1);
        acc += kern[t + rad] * prof[j];
      }
      der[i] = acc;
    }
    int best = -1;
    for (int i = 1; i < ns - 1 - rad; ++i)
      if (der[i] <= der[i - 1] && der[i] <= der[i + 1] && (best < 0 || der[i] < der[best])) best = i;
    if (best < 0 || !(der[best] < -1e-9)) continue;
    double off = 0.0;
    const double den = der[best - 1] - 2.0 * der[best] + der[best + 1];
    if (den > 0.0) off = 0.5 * (der[best - 1] - der[best + 1]) / den;
    est.per_direction.push_back((best + off) * step);
  }
  if (est.per_direction.empty()) throw NumericError("no edge found in any direction");
  est.valid = static_cast<int>(est.per_direction.size());
  auto v = est.per_direction;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  est.radius = m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
  return est;
}

}  // namespace ost
