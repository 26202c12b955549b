#include "ost/zernike.hpp"

#include <cmath>
#include <map>

namespace ost {

double pochhammer(double x, double a) {
  if (a == 0.0) return 1.0;
  return std::exp(std::lgamma(x + a) - std::lgamma(x));
}

double jacobi(int p, double a, double b, double x) {
  if (p == 0) return 1.0;
  double p0 = 1.0;
  double p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
  for (int n = 2; n <= p; ++n) {
    const double s = 2.0 * n + a + b;
    const double c1 = 2.0 * n * (n + a + b) * (s - 2.0);
    const double c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
    const double c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
    const double p2 = (c2 * p1 - c3 * p0) / c1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

namespace {

int half_order(int n, int l) {
  if (l < 0 || n < l || (n - l) % 2) throw ParameterError("Zernike index requires n - l even and >= 0");
  return (n - l) / 2;
}

}  // namespace

double zernike_radial(int n, int l, double alpha, double rho) {
  const int p = half_order(n, l);
  if (rho < 0.0 || rho > 1.0) throw DomainError("Zernike radial argument outside [0,1]");
  const double r2 = rho * rho;
  return std::pow(rho, l) * std::pow(1.0 - r2, alpha) * jacobi(p, alpha, l + 0.5, 2.0 * r2 - 1.0);
}

double zernike_norm(int n, int l, double alpha) {
  const int p = half_order(n, l);
  return pochhammer(p + 1.0, alpha) / pochhammer(p + l + 1.5, alpha) / (2.0 * (n + alpha + 1.5));
}

double zernike_fourier_radial(int n, int l, double alpha, double q) {
  const int p = half_order(n, l);
  if (q <= 0.0) {
    if (n != 0) return 0.0;
    return std::sqrt(M_PI) * std::tgamma(1.0 + alpha) / (4.0 * std::tgamma(2.5 + alpha));
  }
  const double sign = (p % 2) ? -1.0 : 1.0;
  const double pre = std::pow(2.0, alpha) * sign * pochhammer(p + 1.0, alpha);
  if (alpha == std::floor(alpha)) {
    const auto order = static_cast<unsigned>(n + static_cast<int>(alpha) + 1);
    return pre * std::sph_bessel(order, q) / std::pow(q, alpha + 1.0);
  }
  return pre * std::sqrt(M_PI / (2.0 * q)) * std::cyl_bessel_j(n + alpha + 1.5, q) / std::pow(q, alpha + 1.0);
}

double gen_binomial(double x, double k) {
  if (k == std::floor(k) && k >= 0.0) {
    // falling factorial; exact for negative or half-integer x
    double v = 1.0;
    for (int i = 0; i < static_cast<int>(k); ++i) v *= (x - i) / (i + 1.0);
    return v;
  }
  return std::exp(std::lgamma(x + 1.0) - std::lgamma(k + 1.0) - std::lgamma(x - k + 1.0));
}

double zernike_b(int n, int l, double alpha, double beta) {
  const int p = half_order(n, l);
  return gen_binomial((beta - l) / 2.0, p) /
         ((2.0 * alpha + beta + l + 2.0 * p + 3.0) * gen_binomial(0.5 * (beta + l + 1.0) + alpha + p, alpha + p));
}

double flat_profile(double alpha, double rho) {
  const double rm2 = 1.0 / (alpha + 1.0);
  const double k = std::pow(alpha + 1.0, 3) / (2.0 * alpha);
  const double bmax = rm2 * std::pow(1.0 - rm2, alpha);
  const double r2 = rho * rho;
  return r2 * std::pow(1.0 - r2, alpha) * (1.0 + k * (r2 - rm2) * (r2 - rm2)) / bmax;
}

ZernikeRadialSpec flat_profile_coeffs(double alpha, int l_max, int p_max) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0");
  if (l_max < 0 || p_max < 0) throw ParameterError("band limits must be >= 0");
  ZernikeRadialSpec s;
  s.alpha = alpha;
  s.beta = 2.0;
  const double rm2 = (s.beta / 2.0) / (alpha + s.beta / 2.0);
  s.rho_max = std::sqrt(rm2);
  s.b_max = rm2 * std::pow(1.0 - rm2, alpha);
  const double k = std::pow(alpha + 1.0, 3) / (2.0 * alpha);
  s.c = {1.0 + k * rm2 * rm2, -2.0 * k * rm2, k};
  s.bt.assign(l_max + 1, std::vector<double>(p_max + 1, 0.0));
  for (int l = 0; l <= l_max; ++l)
    for (int p = 0; p <= p_max; ++p) {
      const int n = l + 2 * p;
      double b = 0.0;
      for (int i = 0; i < 3; ++i) b += s.c[i] * zernike_b(n, l, alpha, 2.0 + 2.0 * i);
      s.bt[l][p] = b / s.b_max / zernike_norm(n, l, alpha);
    }
  return s;
}

double radial_expansion(const ZernikeRadialSpec& s, int l, double rho) {
  double acc = 0.0;
  for (int p = 0; p <= s.p_max(); ++p) acc += s.bt[l][p] * zernike_radial(l + 2 * p, l, s.alpha, rho);
  return acc;
}

AnalyticFilterSpec make_analytic_spec(double alpha, double s_o, int p_max, double tol) {
  AnalyticFilterSpec spec;
  spec.s_o = s_o;
  spec.angular = angular_coeffs(s_o, tol);
  spec.radial = flat_profile_coeffs(alpha, spec.angular.band_limit(), p_max);
  return spec;
}

namespace {

ComplexVolume assemble(const AnalyticFilterSpec& spec, const Vec3& n, const Dims& grid, int parity,
                       const Vec3& spacing) {
  for (int a = 0; a < 3; ++a)
    if (grid[a] % 2 == 0) throw ParameterError("spatial filter grid must have odd dims");
  const int L = spec.angular.band_limit();
  const double h = spacing[0];
  const double rho_n = spec.rho_n / h;
  const double scale = rho_n * rho_n * rho_n * spacing[0] * spacing[1] * spacing[2];

  // radial profiles per l, cached by distinct radius
  std::map<long long, std::vector<double>> cache;
  auto radial = [&](double r) -> const std::vector<double>& {
    const long long key = std::llround(r * r * 1e6);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<double> prof(L + 1, 0.0);
    const double q = 2.0 * M_PI * r * rho_n;
    for (int l = 0; l <= L; ++l) {
      if (parity >= 0 && l % 2 != parity) continue;
      double acc = 0.0;
      for (int p = 0; p <= spec.radial.p_max(); ++p)
        acc += spec.coeff(l, p) * 4.0 * M_PI * zernike_fourier_radial(l + 2 * p, l, spec.radial.alpha, q);
      prof[l] = acc;
    }
    return cache.emplace(key, std::move(prof)).first->second;
  };

  ComplexVolume out(grid, spacing, Domain::spatial);
  const double k0 = 1.0 / std::sqrt(4.0 * M_PI);
  for (int z = 0; z < grid[2]; ++z)
    for (int y = 0; y < grid[1]; ++y)
      for (int x = 0; x < grid[0]; ++x) {
        const Vec3 pos{(x - grid[0] / 2) * spacing[0], (y - grid[1] / 2) * spacing[1],
                       (z - grid[2] / 2) * spacing[2]};
        const double r = norm(pos);
        const auto& prof = radial(r);
        if (r == 0.0) {
          out(x, y, z) = scale * prof[0] * k0;
          continue;
        }
        const double t = dot(n, pos) / r;
        double re = 0.0, im = 0.0;
        double p0 = 1.0, p1 = t;
        for (int l = 0; l <= L; ++l) {
          double pl;
          if (l == 0) {
            pl = 1.0;
          } else if (l == 1) {
            pl = t;
          } else {
            pl = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
            p0 = p1;
            p1 = pl;
          }
          const double v = prof[l] * std::sqrt(2.0 * l + 1.0) * k0 * pl;
          // i^l: even bands real, odd bands imaginary
          switch (l % 4) {
            case 0: re += v; break;
            case 1: im += v; break;
            case 2: re -= v; break;
            default: im -= v; break;
          }
        }
        out(x, y, z) = scale * cplx(re, im);
      }
  return out;
}

}  // namespace

ComplexVolume assemble_spatial_filter(const AnalyticFilterSpec& spec, const Vec3& n, const Dims& grid,
                                      const Vec3& spacing) {
  return assemble(spec, n, grid, -1, spacing);
}

ComplexVolume assemble_spatial_filter_bands(const AnalyticFilterSpec& spec, const Vec3& n, const Dims& grid,
                                            int parity, const Vec3& spacing) {
  return assemble(spec, n, grid, parity, spacing);
}

double analytic_fourier_value(const AnalyticFilterSpec& spec, const Vec3& n, const Vec3& omega, double spacing) {
  const double rho = norm(omega) / (M_PI / spacing);
  if (rho >= 1.0) return 0.0;
  const double k0 = 1.0 / std::sqrt(4.0 * M_PI);
  double acc = 0.0;
  const double t = rho > 0.0 ? dot(n, omega) / norm(omega) : 0.0;
  for (int l = 0; l <= spec.angular.band_limit(); ++l) {
    if (rho == 0.0 && l > 0) break;
    double radial = 0.0;
    for (int p = 0; p <= spec.radial.p_max(); ++p)
      radial += spec.coeff(l, p) * zernike_radial(l + 2 * p, l, spec.radial.alpha, rho);
    acc += radial * std::sqrt(2.0 * l + 1.0) * k0 * legendre(l, t);
  }
  return acc;
}

ComplexVolume harmonic_oscillator_wavelet(int L, const Dims& grid, double unit) {
  if (L < 0) throw ParameterError("L must be >= 0");
  ComplexVolume out(grid, {1.0, 1.0, 1.0}, Domain::spatial);
  for (int z = 0; z < grid[2]; ++z)
    for (int y = 0; y < grid[1]; ++y)
      for (int x = 0; x < grid[0]; ++x) {
        const Vec3 pos{(x - grid[0] / 2) * unit, (y - grid[1] / 2) * unit, (z - grid[2] / 2) * unit};
        const double r = norm(pos);
        const double t = r > 0.0 ? pos[2] / r : 1.0;
        double acc = 0.0;
        double rl = 1.0, fact = 1.0;
        for (int l = 0; l <= L; ++l) {
          if (l > 0) {
            rl *= r;
            fact *= l;
          }
          acc += rl / std::sqrt(fact) * std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI)) * legendre(l, t);
        }
        out(x, y, z) = acc * std::exp(-0.5 * r * r);
      }
  return out;
}

void ZernikeParams::validate() const {
  if (n_o < 1) throw ParameterError("N_o must be >= 1");
  if (!(alpha > 0.0)) throw ParameterError("alpha must be > 0");
  if (!(s_o > 0.0)) throw ParameterError("s_o must be > 0");
  if (p_max < 0) throw ParameterError("p_max must be >= 0");
  if (!(s_rho > 0.0)) throw ParameterError("s_rho must be > 0");
  for (int a = 0; a < 3; ++a)
    if (filter_dims[a] < 1 || filter_dims[a] % 2 == 0) throw ParameterError("filter dims must be odd");
  if (spacing[1] != spacing[0] || spacing[2] != spacing[0]) throw ParameterError("anisotropic spacing is not supported");
}

nlohmann::json ZernikeParams::to_json() const {
  return {{"n_o", n_o},
          {"alpha", alpha},
          {"beta", 2.0},
          {"s_o", s_o},
          {"p_max", p_max},
          {"tol", tol},
          {"s_rho", s_rho},
          {"filter_dims", {filter_dims[0], filter_dims[1], filter_dims[2]}},
          {"seed", seed},
          {"spacing", {spacing[0], spacing[1], spacing[2]}}};
}

WaveletBank build_zernike_bank(const ZernikeParams& p) {
  return build_zernike_bank(p, sample_sphere(std::max(p.n_o, 2), p.seed));
}

WaveletBank build_zernike_bank(const ZernikeParams& p, const SphericalDesign& design) {
  p.validate();
  design.validate();
  const AnalyticFilterSpec spec = make_analytic_spec(p.alpha, p.s_o, p.p_max, p.tol);
  WaveletBank bank;
  bank.kind = "zernike";
  bank.design = design;
  bank.coeffs = spec.angular;
  bank.s_rho = p.s_rho;
  bank.spacing = p.spacing;
  bank.filter_dims = p.filter_dims;
  bank.params = p.to_json();
  bank.params["n_o"] = static_cast<int>(design.size());
  nlohmann::json table = nlohmann::json::array();
  for (int l = 0; l <= spec.radial.l_max(); ++l)
    for (int q = 0; q <= spec.radial.p_max(); ++q) table.push_back({l + 2 * q, l, spec.coeff(l, q)});
  bank.params["zernike_table"] = table;
  bank.filters.resize(design.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(design.size()); ++i)
    bank.filters[i] = assemble_spatial_filter(spec, design.points[i], p.filter_dims, p.spacing);
  bank.phi0 = gaussian_filter_volume(p.filter_dims, p.spacing, p.s_rho);
  return bank;
}

}  // namespace ost
