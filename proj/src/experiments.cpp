#include "ost/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ost/zernike.hpp"

namespace ost {

namespace {

inline int raw_freq(int k, int n) { return (k + n / 2) % n - n / 2; }

template <class F>
void for_each_raw_omega(const Dims& d, const Vec3& spacing, F&& fn) {
  std::size_t i = 0;
  for (int z = 0; z < d[2]; ++z)
    for (int y = 0; y < d[1]; ++y)
      for (int x = 0; x < d[0]; ++x, ++i)
        fn(i, Vec3{2.0 * M_PI * raw_freq(x, d[0]) / (d[0] * spacing[0]),
                   2.0 * M_PI * raw_freq(y, d[1]) / (d[1] * spacing[1]),
                   2.0 * M_PI * raw_freq(z, d[2]) / (d[2] * spacing[2])},
           Dims{(d[0] - x) % d[0], (d[1] - y) % d[1], (d[2] - z) % d[2]});
}

std::vector<cplx> spectrum_of(const Volume& f) {
  std::vector<cplx> buf(f.data.begin(), f.data.end());
  fft_raw(buf, f.dims, -1);
  return buf;
}

double varrho_of(const WaveletBank& bank) { return bank.params.value("gamma", 0.85) * M_PI / bank.spacing[0]; }

}  // namespace

nlohmann::json FilterComparison::to_json() const {
  return {{"ncc", ncc},           {"l2_residual", l2_residual}, {"max_re_a", max_re_a}, {"max_im_a", max_im_a},
          {"max_re_b", max_re_b}, {"max_im_b", max_im_b},       {"min_ncc", min_ncc}};
}

FilterComparison compare_filters(const WaveletBank& a, const WaveletBank& b) {
  if (a.filter_dims != b.filter_dims) throw DimensionError("filter dims differ");
  if (a.filters.size() != b.filters.size()) throw DimensionError("orientation counts differ");
  FilterComparison c;
  c.min_ncc = 1e300;
  for (std::size_t i = 0; i < a.filters.size(); ++i) {
    const auto& x = a.filters[i].data;
    const auto& y = b.filters[i].data;
    double na = 0, nb = 0, re = 0, diff = 0, mra = 0, mia = 0, mrb = 0, mib = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      na += std::norm(x[k]);
      nb += std::norm(y[k]);
      re += (std::conj(x[k]) * y[k]).real();
      diff += std::norm(x[k] - y[k]);
      mra = std::max(mra, std::abs(x[k].real()));
      mia = std::max(mia, std::abs(x[k].imag()));
      mrb = std::max(mrb, std::abs(y[k].real()));
      mib = std::max(mib, std::abs(y[k].imag()));
    }
    const double den = na == nb ? na : std::sqrt(na * nb);
    c.ncc.push_back(den > 0.0 ? re / den : 0.0);
    c.l2_residual.push_back(na > 0.0 ? std::sqrt(diff / na) : 0.0);
    c.max_re_a.push_back(mra);
    c.max_im_a.push_back(mia);
    c.max_re_b.push_back(mrb);
    c.max_im_b.push_back(mib);
    c.min_ncc = std::min(c.min_ncc, c.ncc.back());
  }
  return c;
}

double radial_profile_residual(const CakeParams& p, double alpha, int) {
  const int n = 1000;
  double num = 0.0, den = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double w = p.rho_n() * k / n;
    const double a = radial_g(w, p.varrho(), p.sigma_erf_value()) * (1.0 - std::exp(-p.s_rho * w * w));
    const double b = flat_profile(alpha, static_cast<double>(k) / n);
    num += (a - b) * (a - b);
    den += a * a;
  }
  return std::sqrt(num / den);
}

Volume band_limited_phantom(const Dims& dims, double cutoff, std::uint64_t seed, const Vec3& spacing) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Volume f(dims, spacing);
  for (double& x : f.data) x = nd(rng);
  auto F = spectrum_of(f);
  for_each_raw_omega(dims, spacing, [&](std::size_t i, const Vec3& w, const Dims&) {
    if (norm(w) >= cutoff) F[i] = 0.0;
  });
  fft_raw(F, dims, +1);
  for (std::size_t i = 0; i < f.size(); ++i) f.data[i] = F[i].real() / static_cast<double>(f.size());
  return f;
}

std::vector<cplx> sum_transfer(const WaveletBank& bank, const Dims& dims) {
  const std::size_t nv = voxel_count(dims);
  std::vector<cplx> acc(nv, cplx(0, 0));
  for (std::size_t i = 0; i < bank.filters.size(); ++i) {
    const auto k = kernel_spectrum(bank.filters[i], dims);
    const double w = 0.5 * bank.design.weights[i];
    for_each_raw_omega(dims, bank.spacing, [&](std::size_t j, const Vec3&, const Dims& m) {
      acc[j] += w * (std::conj(k[j]) + k[m[0] + static_cast<std::size_t>(dims[0]) * (m[1] + static_cast<std::size_t>(dims[1]) * m[2])]);
    });
  }
  for_each_raw_omega(dims, bank.spacing, [&](std::size_t j, const Vec3& w, const Dims&) {
    acc[j] += std::exp(-bank.s_rho * dot(w, w));
  });
  return acc;
}

nlohmann::json RoundTripReport::to_json() const {
  return {{"mode", mode}, {"rel_error", rel_error}, {"rel_error_band", rel_error_band}, {"bound", bound}};
}

RoundTripReport roundtrip(const Volume& f, const WaveletBank& bank, const std::string& mode, Volume* out) {
  if (mode != "exact" && mode != "sum") throw ParameterError("mode must be exact or sum");
  const auto U = forward(f, bank);
  const Volume g = mode == "exact" ? reconstruct_exact(U, bank) : reconstruct_sum(U);
  RoundTripReport r;
  r.mode = mode;
  double e2 = 0.0, f2 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    e2 += (g.data[i] - f.data[i]) * (g.data[i] - f.data[i]);
    f2 += f.data[i] * f.data[i];
  }
  r.rel_error = f2 > 0.0 ? std::sqrt(e2 / f2) : 0.0;
  const auto F = spectrum_of(f), G = spectrum_of(g);
  const double band = 0.8 * varrho_of(bank);
  std::vector<cplx> N;
  if (mode == "sum") N = sum_transfer(bank, f.dims);
  double eb = 0.0, fb = 0.0;
  for_each_raw_omega(f.dims, f.spacing, [&](std::size_t i, const Vec3& w, const Dims&) {
    if (norm(w) >= band) return;
    eb += std::norm(G[i] - F[i]);
    fb += std::norm(F[i]);
    if (mode == "sum") r.bound = std::max(r.bound, std::abs(N[i] - 1.0));
  });
  r.rel_error_band = fb > 0.0 ? std::sqrt(eb / fb) : 0.0;
  if (out) *out = g;
  return r;
}

int CnrSweep::cedos_peak() const {
  return static_cast<int>(std::max_element(cedos.begin(), cedos.end()) - cedos.begin());
}
int CnrSweep::gauss_peak() const {
  return static_cast<int>(std::max_element(gauss.begin(), gauss.end()) - gauss.begin());
}

std::string CnrSweep::csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "T,cnr_cedos,cnr_gauss,peak\n";
  for (std::size_t k = 0; k < T.size(); ++k) {
    std::string tag;
    if (static_cast<int>(k) == cedos_peak()) tag += "cedos";
    if (static_cast<int>(k) == gauss_peak()) tag += tag.empty() ? "gauss" : "+gauss";
    os << T[k] << ',' << cedos[k] << ',' << gauss[k] << ',' << tag << '\n';
  }
  return os.str();
}

CnrSweep cnr_sweep(const Volume& f, const RegionSpec& regions, const WaveletBank& bank, const DiffusionConfig& cfg,
                   const std::vector<double>& T, bool keep_volumes) {
  CnrSweep s;
  s.T = T;
  std::vector<double> tc;
  for (double t : T)
    if (t > 0.0) tc.push_back(t);
  std::vector<Volume> vols;
  if (!tc.empty()) vols = process_image_series(f, bank, cfg, tc, &s.report);
  std::size_t k = 0;
  for (double t : T) {
    if (t > 0.0) {
      s.cedos.push_back(cnr(vols[k], regions));
      if (keep_volumes) s.cedos_volumes.push_back(vols[k]);
      ++k;
    } else {
      s.cedos.push_back(cnr(f, regions));
      if (keep_volumes) s.cedos_volumes.push_back(f);
    }
    s.gauss.push_back(cnr(gaussian_diffusion(f, t), regions));
  }
  return s;
}

}  // namespace ost
