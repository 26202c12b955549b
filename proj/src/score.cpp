#include "ost/score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ost {

namespace {

// Signed frequency index of a raw (origin at 0) FFT index, matching the centered convention.
inline int raw_freq(int k, int n) { return (k + n / 2) % n - n / 2; }

template <class F>
void for_each_raw_omega(const Dims& d, const Vec3& spacing, F&& fn) {
  std::size_t i = 0;
  for (int z = 0; z < d[2]; ++z) {
    const double wz = 2.0 * M_PI * raw_freq(z, d[2]) / (d[2] * spacing[2]);
    for (int y = 0; y < d[1]; ++y) {
      const double wy = 2.0 * M_PI * raw_freq(y, d[1]) / (d[1] * spacing[1]);
      for (int x = 0; x < d[0]; ++x, ++i) {
        const double wx = 2.0 * M_PI * raw_freq(x, d[0]) / (d[0] * spacing[0]);
        fn(i, Vec3{wx, wy, wz});
      }
    }
  }
}

void check_bank_volume(const WaveletBank& bank, const Dims& dims, const Vec3& spacing) {
  for (int a = 0; a < 3; ++a) {
    if (bank.spacing[a] != spacing[a]) throw ParameterError("bank/volume spacing mismatch");
    if (bank.filter_dims[a] > dims[a]) throw DimensionError("volume smaller than filters");
  }
}

}  // namespace

Volume gaussian_lowpass(const Volume& f, double s_rho) {
  std::vector<cplx> buf(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) buf[i] = f.data[i];
  fft_raw(buf, f.dims, -1);
  const double inv = 1.0 / static_cast<double>(buf.size());
  for_each_raw_omega(f.dims, f.spacing,
                     [&](std::size_t i, const Vec3& w) { buf[i] *= std::exp(-s_rho * dot(w, w)) * inv; });
  fft_raw(buf, f.dims, +1);
  Volume out(f.dims, f.spacing);
  for (std::size_t i = 0; i < f.size(); ++i) out.data[i] = buf[i].real();
  return out;
}

OrientationScore forward(const Volume& f, const WaveletBank& bank) {
  f.validate();
  check_bank_volume(bank, f.dims, f.spacing);
  OrientationScore U;
  U.dims = f.dims;
  U.spacing = f.spacing;
  U.design = bank.design;
  U.bank_hash = bank.hash();
  U.s_rho = bank.s_rho;
  U.channels.resize(bank.filters.size());
  const Correlator corr(f);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(bank.filters.size()); ++i) U.channels[i] = corr.apply(bank.filters[i]).data;
  U.low = gaussian_lowpass(f, bank.s_rho);
  return U;
}

std::vector<double> realized_m_total(const WaveletBank& bank, const Dims& dims, std::vector<double>* g_out) {
  std::vector<double> m(voxel_count(dims), 0.0);
  for (std::size_t i = 0; i < bank.filters.size(); ++i) {
    const auto k = kernel_spectrum(bank.filters[i], dims);
    const double w = bank.design.weights[i];
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += std::norm(k[j]) * w;
  }
  if (g_out) g_out->assign(m.size(), 0.0);
  for_each_raw_omega(dims, bank.spacing, [&](std::size_t i, const Vec3& w) {
    const double G = std::exp(-bank.s_rho * dot(w, w));
    m[i] += G * G;
    if (g_out) (*g_out)[i] = G;
  });
  return m;
}

Volume reconstruct_exact(const OrientationScore& U, const WaveletBank& bank, double eps_m) {
  if (U.bank_hash != bank.hash()) throw ProvenanceError("score was produced with a different bank");
  check_bank_volume(bank, U.dims, U.spacing);
  const std::size_t nv = U.voxels();
  std::vector<cplx> acc(nv, cplx(0, 0));
  for (std::size_t i = 0; i < U.orientations(); ++i) {
    auto k = kernel_spectrum(bank.filters[i], U.dims);
    std::vector<cplx> u = U.channels[i];
    fft_raw(u, U.dims, -1);
    const double w = U.design.weights[i];
    for (std::size_t j = 0; j < nv; ++j) acc[j] += k[j] * u[j] * w;
  }
  std::vector<cplx> low(nv);
  for (std::size_t j = 0; j < nv; ++j) low[j] = U.low.data[j];
  fft_raw(low, U.dims, -1);
  std::vector<double> G;
  const auto m = realized_m_total(bank, U.dims, &G);
  const double inv = 1.0 / static_cast<double>(nv);
  for (std::size_t j = 0; j < nv; ++j) acc[j] = (acc[j] + G[j] * low[j]) / std::max(m[j], eps_m) * inv;
  fft_raw(acc, U.dims, +1);
  Volume out(U.dims, U.spacing);
  for (std::size_t j = 0; j < nv; ++j) out.data[j] = acc[j].real();
  return out;
}

Volume reconstruct_sum(const OrientationScore& U) {
  Volume out = U.low;
  for (std::size_t i = 0; i < U.orientations(); ++i) {
    const double w = U.design.weights[i];
    const auto& ch = U.channels[i];
    for (std::size_t j = 0; j < out.size(); ++j) out.data[j] += ch[j].real() * w;
  }
  return out;
}

nlohmann::json ConditionAudit::to_json() const {
  nlohmann::json j = {{"realized_M_min", m_min}, {"realized_M_max", m_max}, {"realized_N_min", n_min},
                      {"realized_N_max", n_max}, {"cond2_split", cond2},    {"cond_A", cond_a},
                      {"invertible", invertible}};
  if (analytic) j["analytic"] = report.to_json();
  return j;
}

ConditionAudit condition_audit(const WaveletBank& bank, const Dims& fine_grid) {
  ConditionAudit a;
  const double rho_n = M_PI / bank.spacing[0];
  const double varrho = bank.params.value("gamma", 0.85) * rho_n;
  const double varrho0 = varrho / std::sqrt(2.0);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> nsum(voxel_count(fine_grid), 0.0);
  for (std::size_t i = 0; i < bank.filters.size(); ++i) {
    const auto k = kernel_spectrum(bank.filters[i], fine_grid);
    for (std::size_t j = 0; j < nsum.size(); ++j) nsum[j] += k[j].real() * bank.design.weights[i];
  }
  std::vector<double> G;
  const auto m = realized_m_total(bank, fine_grid, &G);
  a.m_min = a.n_min = inf;
  a.m_max = a.n_max = -inf;
  for_each_raw_omega(fine_grid, bank.spacing, [&](std::size_t i, const Vec3& w) {
    const double rho = norm(w);
    if (rho > varrho) return;
    a.m_min = std::min(a.m_min, m[i]);
    a.m_max = std::max(a.m_max, m[i]);
    if (rho <= varrho0) {
      a.n_min = std::min(a.n_min, nsum[i] + G[i]);
      a.n_max = std::max(a.n_max, nsum[i] + G[i]);
    }
  });
  if (bank.kind == "dft") {
    a.analytic = true;
    a.report = stability_report(CakeParams::from_json(bank.params), bank.design, fine_grid);
    a.invertible = a.report.invertible && a.m_min > 0.0;
    a.cond2 = a.report.cond2_split;
    a.cond_a = a.report.cond_a;
  } else {
    a.invertible = a.m_min > 0.0;
    a.cond2 = a.invertible ? a.m_max / a.m_min : inf;
    a.cond_a = a.n_min > 0.0 ? a.n_max / a.n_min : inf;
  }
  if (!a.invertible) a.cond2 = inf;
  return a;
}

Eigen::MatrixXcd sh_fit_operator(const SphericalDesign& design, int L) {
  const int K = sh_count(L);
  const int N = static_cast<int>(design.size());
  if (L < 0) throw ParameterError("L_s must be >= 0");
  if (K > N) throw ParameterError("L_s too high for the orientation design");
  Eigen::MatrixXcd Y(N, K);
  std::vector<cplx> basis;
  for (int i = 0; i < N; ++i) {
    sh_basis(L, design.points[i], basis);
    for (int k = 0; k < K; ++k) Y(i, k) = basis[k];
  }
  Eigen::VectorXd w(N);
  for (int i = 0; i < N; ++i) w(i) = design.weights[i];
  const Eigen::MatrixXcd A = Y.adjoint() * w.asDiagonal() * Y;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
  const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 1e-10 * lmax)) throw ParameterError("L_s too high for the orientation design (rank deficient fit)");
  return A.ldlt().solve(Y.adjoint() * w.asDiagonal());
}

ShScoreExpansion sh_expand(const OrientationScore& U, int L) {
  const Eigen::MatrixXcd P = sh_fit_operator(U.design, L);
  ShScoreExpansion e;
  e.dims = U.dims;
  e.L = L;
  const int K = e.count();
  const int N = static_cast<int>(U.orientations());
  const std::size_t nv = U.voxels();
  e.coeffs.assign(nv * K, cplx(0, 0));
  // synthesis matrix at design points for residuals
  Eigen::MatrixXcd Y(N, K);
  std::vector<cplx> basis;
  for (int i = 0; i < N; ++i) {
    sh_basis(L, U.design.points[i], basis);
    for (int k = 0; k < K; ++k) Y(i, k) = basis[k];
  }
  double err2 = 0.0, tot2 = 0.0, worst = 0.0;
  Eigen::VectorXcd u(N);
  for (std::size_t v = 0; v < nv; ++v) {
    for (int i = 0; i < N; ++i) u(i) = U.channels[i][v];
    const Eigen::VectorXcd a = P * u;
    for (int k = 0; k < K; ++k) e.coeffs[v * K + k] = a(k);
    const double r2 = (Y * a - u).squaredNorm(), d2 = u.squaredNorm();
    err2 += r2;
    tot2 += d2;
    if (d2 > 0.0) worst = std::max(worst, std::sqrt(r2 / d2));
  }
  e.rel_residual = tot2 > 0.0 ? std::sqrt(err2 / tot2) : 0.0;
  e.max_rel_residual = worst;
  return e;
}

cplx sh_synthesize(const cplx* coeffs, int L, const Vec3& n) {
  std::vector<cplx> basis;
  sh_basis(L, n, basis);
  cplx acc(0, 0);
  for (int k = 0; k < sh_count(L); ++k) acc += coeffs[k] * basis[k];
  return acc;
}

cplx steer_eval(const ShScoreExpansion& e, const Vec3& x, const Vec3& n) {
  const int K = e.count();
  std::vector<cplx> c(K, cplx(0, 0));
  int i0[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    const double p = std::clamp(x[a], 0.0, static_cast<double>(e.dims[a] - 1));
    i0[a] = std::min(static_cast<int>(p), std::max(e.dims[a] - 2, 0));
    t[a] = p - i0[a];
  }
  for (int dz = 0; dz < 2; ++dz)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? t[0] : 1 - t[0]) * (dy ? t[1] : 1 - t[1]) * (dz ? t[2] : 1 - t[2]);
        if (w == 0.0) continue;
        const int xi = std::min(i0[0] + dx, e.dims[0] - 1), yi = std::min(i0[1] + dy, e.dims[1] - 1),
                  zi = std::min(i0[2] + dz, e.dims[2] - 1);
        const std::size_t v = xi + static_cast<std::size_t>(e.dims[0]) * (yi + static_cast<std::size_t>(e.dims[1]) * zi);
        const cplx* src = e.at(v);
        for (int k = 0; k < K; ++k) c[k] += w * src[k];
      }
  return sh_synthesize(c.data(), e.L, n);
}

}  // namespace ost
