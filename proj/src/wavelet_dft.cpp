#include "ost/wavelet_dft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

namespace ost {

void CakeParams::validate() const {
  if (n_o < 1) throw ParameterError("N_o must be >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0,1)");
  if (sigma_erf < 0.0) throw ParameterError("sigma_erf must be > 0");
  if (!(s_rho > 0.0)) throw ParameterError("s_rho must be > 0");
  if (!(s_o > 0.0)) throw ParameterError("s_o must be > 0");
  if (!(tol > 0.0 && tol < 1.0)) throw ParameterError("tol must lie in (0,1)");
  for (int a = 0; a < 3; ++a) {
    if (filter_dims[a] < 1 || filter_dims[a] % 2 == 0) throw ParameterError("filter dims must be odd");
    if (!(spacing[a] > 0.0)) throw ParameterError("spacing must be > 0");
  }
  if (spacing[1] != spacing[0] || spacing[2] != spacing[0]) throw ParameterError("anisotropic spacing is not supported");
}

nlohmann::json CakeParams::to_json() const {
  return {{"n_o", n_o},
          {"gamma", gamma},
          {"sigma_erf", sigma_erf_value()},
          {"s_rho", s_rho},
          {"s_o", s_o},
          {"filter_dims", {filter_dims[0], filter_dims[1], filter_dims[2]}},
          {"tol", tol},
          {"seed", seed},
          {"spacing", {spacing[0], spacing[1], spacing[2]}}};
}

CakeParams CakeParams::from_json(const nlohmann::json& j) {
  CakeParams p;
  p.n_o = j.at("n_o").get<int>();
  p.gamma = j.at("gamma").get<double>();
  p.sigma_erf = j.at("sigma_erf").get<double>();
  p.s_rho = j.at("s_rho").get<double>();
  p.s_o = j.at("s_o").get<double>();
  for (int a = 0; a < 3; ++a) {
    p.filter_dims[a] = j.at("filter_dims").at(a).get<int>();
    p.spacing[a] = j.at("spacing").at(a).get<double>();
  }
  p.tol = j.at("tol").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

std::string WaveletBank::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  mix(kind.data(), kind.size());
  mix(&s_rho, sizeof s_rho);
  mix(spacing.data(), sizeof(double) * 3);
  for (const auto& p : design.points) mix(p.data(), sizeof(double) * 3);
  mix(design.weights.data(), sizeof(double) * design.weights.size());
  for (const auto& f : filters) mix(f.data.data(), sizeof(cplx) * f.data.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double radial_g(double rho, double varrho, double sigma_erf) {
  return 0.5 * (1.0 - std::erf((rho - varrho) / sigma_erf));
}

ZonalCoeffs angular_coeffs(double so, double tol) {
  ZonalCoeffs a = diffusion_kernel_coeffs(so, tol);
  ZonalCoeffs re = funk_coeffs(a);
  ZonalCoeffs im = antisymmetrize_coeffs(a);
  for (std::size_t l = 0; l < a.values.size(); ++l) a.values[l] = re.values[l] + im.values[l];
  return a;
}

namespace {

// P_l(x) * sqrt((2l+1)/4pi) * c_l summed.
double zonal_sum(const std::vector<double>& c, double x) {
  const double k = 1.0 / std::sqrt(4.0 * M_PI);
  double acc = c[0] * k;
  if (c.size() == 1) return acc;
  double p0 = 1.0, p1 = x;
  acc += c[1] * std::sqrt(3.0) * k * p1;
  for (std::size_t l = 2; l < c.size(); ++l) {
    const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / static_cast<double>(l);
    acc += c[l] * std::sqrt(2.0 * l + 1.0) * k * p2;
    p0 = p1;
    p1 = p2;
  }
  return acc;
}

}  // namespace

double cake_value(const CakeParams& p, const ZonalCoeffs& c, const Vec3& n, const Vec3& omega) {
  const double rho = norm(omega);
  const double g = radial_g(rho, p.varrho(), p.sigma_erf_value());
  if (rho == 0.0) return g * c.values[0] / std::sqrt(4.0 * M_PI);
  return g * zonal_sum(c.values, dot(n, omega) / rho);
}

ComplexVolume sample_fourier_filter(const CakeParams& p, const ZonalCoeffs& c, const Vec3& n, const Dims& grid) {
  p.validate();
  const int L = c.band_limit();
  double beta, gam;
  direction_angles(n, beta, gam);
  std::vector<cplx> steered(static_cast<std::size_t>(sh_count(L)));
  for (int l = 0; l <= L; ++l) {
    const auto row = wigner_d_row(l, beta, gam);
    for (int m = -l; m <= l; ++m) steered[sh_index(l, m)] = c.values[l] * row[m];
  }
  const FrequencyGrid fg(grid, p.spacing);
  const double varrho = p.varrho(), serf = p.sigma_erf_value();
  ComplexVolume out(grid, p.spacing, Domain::fourier);
  std::vector<cplx> basis;
  for (int z = 0; z < grid[2]; ++z)
    for (int y = 0; y < grid[1]; ++y)
      for (int x = 0; x < grid[0]; ++x) {
        const Vec3 w = fg.omega(x, y, z);
        const double rho = norm(w);
        const double g = radial_g(rho, varrho, serf);
        if (rho == 0.0) {
          out(x, y, z) = g * steered[0] / std::sqrt(4.0 * M_PI);
          continue;
        }
        sh_basis(L, w, basis);
        cplx acc(0, 0);
        for (std::size_t k = 0; k < basis.size(); ++k) acc += steered[k] * basis[k];
        out(x, y, z) = g * acc;
      }
  return out;
}

std::pair<ComplexVolume, ComplexVolume> split_low_high(const ComplexVolume& psi_hat, double s_rho) {
  if (psi_hat.domain != Domain::fourier) throw ParameterError("split_low_high expects a fourier volume");
  const FrequencyGrid fg(psi_hat.dims, psi_hat.spacing);
  ComplexVolume lo = psi_hat, hi = psi_hat;
  for (int z = 0; z < psi_hat.dims[2]; ++z)
    for (int y = 0; y < psi_hat.dims[1]; ++y)
      for (int x = 0; x < psi_hat.dims[0]; ++x) {
        const Vec3 w = fg.omega(x, y, z);
        const double G = std::exp(-s_rho * dot(w, w));
        const std::size_t i = psi_hat.index(x, y, z);
        lo.data[i] = G * psi_hat.data[i];
        hi.data[i] = psi_hat.data[i] - lo.data[i];
      }
  return {lo, hi};
}

Volume gaussian_filter_volume(const Dims& dims, const Vec3& spacing, double s_rho) {
  Volume g(dims, spacing);
  const double dv = spacing[0] * spacing[1] * spacing[2];
  const double k = dv / std::pow(4.0 * M_PI * s_rho, 1.5);
  for (int z = 0; z < dims[2]; ++z)
    for (int y = 0; y < dims[1]; ++y)
      for (int x = 0; x < dims[0]; ++x) {
        const double px = (x - dims[0] / 2) * spacing[0], py = (y - dims[1] / 2) * spacing[1],
                     pz = (z - dims[2] / 2) * spacing[2];
        g(x, y, z) = k * std::exp(-(px * px + py * py + pz * pz) / (4.0 * s_rho));
      }
  return g;
}

WaveletBank build_bank(const CakeParams& p) { return build_bank(p, sample_sphere(std::max(p.n_o, 2), p.seed)); }

WaveletBank build_bank(const CakeParams& p, const SphericalDesign& design) {
  p.validate();
  design.validate();
  WaveletBank bank;
  bank.kind = "dft";
  bank.design = design;
  bank.coeffs = angular_coeffs(p.s_o, p.tol);
  bank.s_rho = p.s_rho;
  bank.spacing = p.spacing;
  bank.filter_dims = p.filter_dims;
  bank.params = p.to_json();
  bank.params["n_o"] = static_cast<int>(design.size());
  bank.filters.resize(design.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(design.size()); ++i) {
    auto hat = sample_fourier_filter(p, bank.coeffs, design.points[i], p.filter_dims);
    auto [lo, hi] = split_low_high(hat, p.s_rho);
    bank.filters[i] = fft_inverse(hi);
  }
  bank.phi0 = gaussian_filter_volume(p.filter_dims, p.spacing, p.s_rho);
  return bank;
}

std::vector<std::vector<cplx>> angular_bound_vectors(const ZonalCoeffs& c, const SphericalDesign& d) {
  const int L = c.band_limit();
  std::vector<std::vector<cplx>> out(L + 1);
  for (int l = 0; l <= L; ++l) out[l].assign(2 * l + 1, cplx(0, 0));
  for (std::size_t i = 0; i < d.size(); ++i) {
    double beta, gam;
    direction_angles(d.points[i], beta, gam);
    for (int l = 0; l <= L; ++l) {
      const auto row = wigner_d_row(l, beta, gam);
      for (int m = -l; m <= l; ++m) out[l][m + l] += c.values[l] * d.weights[i] * row[m];
    }
  }
  return out;
}

std::pair<double, double> angular_bounds(const ZonalCoeffs& c, const SphericalDesign& d, std::vector<double>* terms) {
  const auto dl = angular_bound_vectors(c, d);
  double s = 0.0;
  if (terms) terms->clear();
  for (int l = 1; l < static_cast<int>(dl.size()); ++l) {
    double n2 = 0.0;
    for (const auto& v : dl[l]) n2 += std::norm(v);
    const double t = std::sqrt(n2) * std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI));
    if (terms) terms->push_back(t);
    s += t;
  }
  return {1.0 - s, 1.0 + s};
}

double angular_n(const ZonalCoeffs& c, const SphericalDesign& d, const Vec3& u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) acc += zonal_sum(c.values, dot(d.points[i], u)) * d.weights[i];
  return acc;
}

nlohmann::json StabilityReport::to_json() const {
  return {{"M_min", m_min},
          {"M_max", m_max},
          {"M_split_min", msplit_min},
          {"M_split_max", msplit_max},
          {"N_min", n_min},
          {"N_max", n_max},
          {"N_dir_min", n_dir_min},
          {"N_dir_max", n_dir_max},
          {"bound_lo", bound_lo},
          {"bound_hi", bound_hi},
          {"bound_terms", bound_terms},
          {"split_residual", split_residual},
          {"split_factor_min", split_factor_min},
          {"split_factor_max", split_factor_max},
          {"cond2_split", cond2_split},
          {"cond_A", cond_a},
          {"varrho", varrho},
          {"varrho0", varrho0},
          {"invertible", invertible}};
}

StabilityReport stability_report(const CakeParams& p, const SphericalDesign& design, const Dims& fine_grid,
                                 int directions) {
  p.validate();
  design.validate();
  StabilityReport r;
  const ZonalCoeffs c = angular_coeffs(p.s_o, p.tol);
  r.varrho = p.varrho();
  r.varrho0 = r.varrho / std::sqrt(2.0);
  const double serf = p.sigma_erf_value();
  const double inf = std::numeric_limits<double>::infinity();
  r.m_min = r.msplit_min = r.n_min = r.split_factor_min = inf;
  r.m_max = r.msplit_max = r.n_max = r.split_factor_max = -inf;

  const FrequencyGrid fg(fine_grid, p.spacing);
  const std::size_t no = design.size();
  std::vector<double> h(no);
  for (int z = 0; z < fine_grid[2]; ++z)
    for (int y = 0; y < fine_grid[1]; ++y)
      for (int x = 0; x < fine_grid[0]; ++x) {
        const Vec3 w = fg.omega(x, y, z);
        const double rho = norm(w);
        const double g = radial_g(rho, r.varrho, serf);
        const double G = std::exp(-p.s_rho * rho * rho);
        double m = 0.0, msplit = 0.0, nsum = 0.0;
        for (std::size_t i = 0; i < no; ++i) {
          const double hv = rho == 0.0 ? c.values[0] / std::sqrt(4.0 * M_PI)
                                       : zonal_sum(c.values, dot(design.points[i], w) / rho);
          const double psi = g * hv;
          const double lo = G * psi, hi = (1.0 - G) * psi;
          m += psi * psi * design.weights[i];
          msplit += (lo * lo + hi * hi) * design.weights[i];
          nsum += psi * design.weights[i];
        }
        const double factor = 1.0 - 2.0 * G * (1.0 - G);
        r.split_residual = std::max(r.split_residual, std::abs(msplit - factor * m));
        r.split_factor_min = std::min(r.split_factor_min, factor);
        r.split_factor_max = std::max(r.split_factor_max, factor);
        if (rho > r.varrho) continue;
        if (rho > 0.0) {
          // direction is undefined at DC, where only the isotropic band is sampled
          r.m_min = std::min(r.m_min, m);
          r.m_max = std::max(r.m_max, m);
          r.msplit_min = std::min(r.msplit_min, msplit);
          r.msplit_max = std::max(r.msplit_max, msplit);
        }
        if (rho <= r.varrho0) {
          r.n_min = std::min(r.n_min, nsum);
          r.n_max = std::max(r.n_max, nsum);
        }
      }

  const SphericalDesign dirs = [&] {
    SphericalDesign f;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < directions; ++i) {
      const double zz = 1.0 - 2.0 * (i + 0.5) / directions;
      const double rr = std::sqrt(1.0 - zz * zz);
      f.points.push_back({rr * std::cos(golden * i), rr * std::sin(golden * i), zz});
    }
    return f;
  }();
  r.n_dir_min = inf;
  r.n_dir_max = -inf;
  for (const auto& u : dirs.points) {
    const double v = angular_n(c, design, u);
    r.n_dir_min = std::min(r.n_dir_min, v);
    r.n_dir_max = std::max(r.n_dir_max, v);
  }

  auto [lo, hi] = angular_bounds(c, design, &r.bound_terms);
  r.bound_lo = lo;
  r.bound_hi = hi;
  r.invertible = r.m_min > 0.0;
  r.cond2_split = r.invertible ? 2.0 * r.m_max / r.m_min : inf;
  r.cond_a = r.n_min > 0.0 ? r.n_max / r.n_min : inf;
  return r;
}

}  // namespace ost
