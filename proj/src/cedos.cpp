#include "ost/cedos.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ost {

namespace {

double quantile_of(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  const std::size_t k = static_cast<std::size_t>(std::llround(q * (v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

inline std::size_t lin(const Dims& d, int x, int y, int z) {
  return x + static_cast<std::size_t>(d[0]) * (y + static_cast<std::size_t>(d[1]) * z);
}

std::vector<double> smoothed(const std::vector<double>& u, const Dims& dims, double sigma) {
  std::vector<double> out = u, scratch;
  if (sigma > 0.0) gaussian_blur_inplace(out.data(), dims, sigma, scratch);
  return out;
}

// Lawson-Hanson active set for min ||A x - b||, x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(A.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<char> active(n, 0);
  const double tol = 1e-12 * A.norm() * b.norm();
  const auto solve_active = [&]() {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (active[j]) idx.push_back(j);
    Eigen::MatrixXd As(A.rows(), idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) As.col(k) = A.col(idx[k]);
    const Eigen::VectorXd zs = As.colPivHouseholderQr().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zs[k];
    return z;
  };
  for (int outer = 0; outer < 3 * n; ++outer) {
    const Eigen::VectorXd w = A.transpose() * (b - A * x);
    int best = -1;
    for (int j = 0; j < n; ++j)
      if (!active[j] && w[j] > tol && (best < 0 || w[j] > w[best])) best = j;
    if (best < 0) break;
    active[best] = 1;
    Eigen::VectorXd z = solve_active();
    for (int inner = 0; inner < n; ++inner) {
      bool feasible = true;
      for (int j = 0; j < n; ++j)
        if (active[j] && z[j] <= 0.0) feasible = false;
      if (feasible) break;
      double alpha = 1.0;
      for (int j = 0; j < n; ++j)
        if (active[j] && z[j] <= 0.0) alpha = std::min(alpha, x[j] / (x[j] - z[j]));
      x += alpha * (z - x);
      for (int j = 0; j < n; ++j)
        if (active[j] && x[j] <= 1e-15) {
          active[j] = 0;
          x[j] = 0.0;
        }
      z = solve_active();
    }
    x = z;
  }
  return x;
}

struct Stencil {
  float w[6];
  std::int8_t e[6][3];
};

}  // namespace

void DiffusionConfig::validate() const {
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  if (T < 0.0) throw ParameterError("T must be >= 0");
  if (T > 0.0 && T < dt) throw ParameterError("T must be >= dt");
  if (d44 < 0.0) throw ParameterError("d44 must be >= 0");
  if (!(quantile > 0.0 && quantile < 1.0)) throw ParameterError("quantile must be in (0,1)");
  if (sigma_s < 0.0) throw ParameterError("sigma_s must be >= 0");
  if (cond_floor < 0.0 || cond_floor > 1.0) throw ParameterError("conductivity floor must be in [0,1]");
  if (knn < 1) throw ParameterError("knn must be >= 1");
}

nlohmann::json DiffusionConfig::to_json() const {
  return {{"d44", d44},         {"T", T},           {"dt", dt},   {"quantile", quantile},
          {"sigma_s", sigma_s}, {"cond_floor", cond_floor}, {"knn", knn}};
}

Channels real_channels(const OrientationScore& U) {
  Channels W(U.orientations());
  for (std::size_t i = 0; i < W.size(); ++i) {
    W[i].resize(U.voxels());
    for (std::size_t v = 0; v < W[i].size(); ++v) W[i][v] = U.channels[i][v].real();
  }
  return W;
}

void AngularLaplacian::apply(const double* in, double* out) const {
  for (int i = 0; i < n; ++i) {
    double acc = diag[i] * in[i];
    for (const auto& [j, w] : offdiag[i]) acc += w * in[j];
    out[i] = acc;
  }
}

AngularLaplacian angular_laplacian(const SphericalDesign& d, int k) {
  const int n = static_cast<int>(d.size());
  if (n < 7) throw ParameterError("design needs >= 7 points for the graph Laplacian");
  k = std::min(k, n - 1);
  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec3 a = d.points[i], b = d.points[j];
      dist[i][j] = norm({a[0] - b[0], a[1] - b[1], a[2] - b[2]});
    }
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (j != i) idx.push_back(j);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return dist[i][a] < dist[i][b]; });
    const double kth = dist[i][idx[k - 1]];
    for (int j : idx)
      if (dist[i][j] <= kth + 1e-9) adj[i][j] = adj[j][i] = 1;
  }
  // edge weights on the kNN graph, fitted (w >= 0) so that L Y_l = -l(l+1) Y_l for l = 1, 2
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (adj[i][j]) edges.push_back({i, j});
  std::vector<std::array<double, 8>> f(n);
  std::vector<cplx> basis;
  for (int i = 0; i < n; ++i) {
    sh_basis(2, d.points[i], basis);
    int c = 0;
    for (int l = 1; l <= 2; ++l)
      for (int m = 0; m <= l; ++m) {
        f[i][c++] = basis[sh_index(l, m)].real();
        if (m > 0) f[i][c++] = basis[sh_index(l, m)].imag();
      }
  }
  const double lam[8] = {-2, -2, -2, -6, -6, -6, -6, -6};
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(8 * n, edges.size());
  Eigen::VectorXd rhs(8 * n);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 8; ++c) rhs[8 * i + c] = f[i][c] / lam[c];
  // rows weighted by 1/lambda^2, favouring relative accuracy on l = 1
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    for (int c = 0; c < 8; ++c) {
      A(8 * i + c, e) = (f[j][c] - f[i][c]) / (lam[c] * lam[c]);
      A(8 * j + c, e) = (f[i][c] - f[j][c]) / (lam[c] * lam[c]);
    }
  }
  const Eigen::VectorXd w = nnls(A, rhs);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    L(i, j) += w[e];
    L(j, i) += w[e];
    L(i, i) -= w[e];
    L(j, j) -= w[e];
  }
  AngularLaplacian out;
  out.n = n;
  out.fit_residual = (A * w - rhs).norm() / rhs.norm();
  out.diag.resize(n);
  out.offdiag.resize(n);
  for (int i = 0; i < n; ++i) {
    out.diag[i] = L(i, i);
    for (int j = 0; j < n; ++j)
      if (j != i && L(i, j) != 0.0) out.offdiag[i].push_back({j, L(i, j)});
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  out.lambda_max = es.eigenvalues().cwiseAbs().maxCoeff();
  return out;
}

double directional_first(const double* u, const Dims& dims, const Vec3& x, const Vec3& v) {
  const Vec3 p{x[0] + v[0], x[1] + v[1], x[2] + v[2]}, m{x[0] - v[0], x[1] - v[1], x[2] - v[2]};
  return 0.5 * (sample_trilinear(u, dims, p) - sample_trilinear(u, dims, m));
}

double directional_second(const double* u, const Dims& dims, const Vec3& x, const Vec3& v) {
  const Vec3 p{x[0] + v[0], x[1] + v[1], x[2] + v[2]}, m{x[0] - v[0], x[1] - v[1], x[2] - v[2]};
  return sample_trilinear(u, dims, p) - 2.0 * sample_trilinear(u, dims, x) + sample_trilinear(u, dims, m);
}

ScoreDerivatives derivatives(const Channels& W, const SphericalDesign& design, const Dims& dims, double sigma_s,
                             int knn) {
  if (W.size() != design.size()) throw DimensionError("channel count differs from design");
  const auto lap = angular_laplacian(design, knn);
  const std::size_t nv = voxel_count(dims);
  const int no = static_cast<int>(W.size());
  ScoreDerivatives D;
  D.dims = dims;
  Channels S(no);
  D.d1.assign(no, std::vector<double>(nv));
  D.d2 = D.d3 = D.angular = D.d1;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < no; ++i) {
    S[i] = smoothed(W[i], dims, sigma_s);
    Vec3 e1, e2;
    const Vec3& n = design.points[i];
    complement_basis(n, e1, e2);
    for (int z = 0; z < dims[2]; ++z)
      for (int y = 0; y < dims[1]; ++y)
        for (int x = 0; x < dims[0]; ++x) {
          const Vec3 p{double(x), double(y), double(z)};
          const std::size_t v = lin(dims, x, y, z);
          D.d1[i][v] = directional_first(S[i].data(), dims, p, e1);
          D.d2[i][v] = directional_first(S[i].data(), dims, p, e2);
          D.d3[i][v] = directional_first(S[i].data(), dims, p, n);
        }
  }
  std::vector<double> in(no), out(no);
  for (std::size_t v = 0; v < nv; ++v) {
    for (int i = 0; i < no; ++i) in[i] = S[i][v];
    lap.apply(in.data(), out.data());
    for (int i = 0; i < no; ++i) D.angular[i][v] = out[i];
  }
  return D;
}

AdaptiveFrame fit_frame(const Channels& W, const SphericalDesign& design, const Dims& dims, double sigma_s,
                        int knn) {
  if (W.size() != design.size()) throw DimensionError("channel count differs from design");
  const auto lap = angular_laplacian(design, knn);
  const std::size_t nv = voxel_count(dims);
  const int no = static_cast<int>(W.size());
  Channels S(no);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < no; ++i) S[i] = smoothed(W[i], dims, sigma_s);

  AdaptiveFrame F;
  F.dims = dims;
  F.b3.assign(no, {});
  F.s.assign(no, std::vector<double>(nv));
  F.b3u = F.s;
  // angular part of s: minus the Laplace-Beltrami of the smoothed score
  {
    std::vector<double> in(no), out(no);
    for (std::size_t v = 0; v < nv; ++v) {
      for (int i = 0; i < no; ++i) in[i] = S[i][v];
      lap.apply(in.data(), out.data());
      for (int i = 0; i < no; ++i) F.s[i][v] = -out[i];
    }
  }
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < no; ++i) {
    const double* u = S[i].data();
    std::array<std::vector<double>, 6> J;
    for (auto& c : J) c.resize(nv);
    for (int z = 0; z < dims[2]; ++z)
      for (int y = 0; y < dims[1]; ++y)
        for (int x = 0; x < dims[0]; ++x) {
          auto at = [&](int a, int b, int c) {
            return u[lin(dims, std::clamp(a, 0, dims[0] - 1), std::clamp(b, 0, dims[1] - 1),
                         std::clamp(c, 0, dims[2] - 1))];
          };
          const double gx = 0.5 * (at(x + 1, y, z) - at(x - 1, y, z));
          const double gy = 0.5 * (at(x, y + 1, z) - at(x, y - 1, z));
          const double gz = 0.5 * (at(x, y, z + 1) - at(x, y, z - 1));
          const std::size_t v = lin(dims, x, y, z);
          J[0][v] = gx * gx;
          J[1][v] = gy * gy;
          J[2][v] = gz * gz;
          J[3][v] = gx * gy;
          J[4][v] = gx * gz;
          J[5][v] = gy * gz;
        }
    std::vector<double> scratch;
    for (auto& c : J)
      if (sigma_s > 0.0) gaussian_blur_inplace(c.data(), dims, sigma_s, scratch);
    double tmax = 0.0;
    for (std::size_t v = 0; v < nv; ++v) tmax = std::max(tmax, J[0][v] + J[1][v] + J[2][v]);

    const Vec3& n = design.points[i];
    auto& b3 = F.b3[i];
    b3.resize(nv);
    for (int z = 0; z < dims[2]; ++z)
      for (int y = 0; y < dims[1]; ++y)
        for (int x = 0; x < dims[0]; ++x) {
          const std::size_t v = lin(dims, x, y, z);
          Vec3 t = n;
          if (J[0][v] + J[1][v] + J[2][v] > 1e-14 * tmax && tmax > 0.0) {
            Eigen::Matrix3d M;
            M << J[0][v], J[3][v], J[4][v], J[3][v], J[1][v], J[5][v], J[4][v], J[5][v], J[2][v];
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
            es.computeDirect(M);
            const Eigen::Vector3d ev = es.eigenvectors().col(0);
            t = normalized({ev(0), ev(1), ev(2)});
            if (dot(t, n) < 0.0) t = {-t[0], -t[1], -t[2]};
          }
          b3[v] = {float(t[0]), float(t[1]), float(t[2])};
          Vec3 e1, e2;
          complement_basis(t, e1, e2);
          const Vec3 p{double(x), double(y), double(z)};
          F.s[i][v] -= directional_second(u, dims, p, e1) + directional_second(u, dims, p, e2);
          F.b3u[i][v] = directional_first(u, dims, p, t);
        }
  }
  return F;
}

double conductivity(double c, double x) {
  if (!(x > 0.0)) return 1.0;
  const double r = c / x;
  return 1.0 - std::exp(-r * r);
}

Conductivities conductivities(const AdaptiveFrame& frame, double q, double cond_floor) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("quantile must be in (0,1)");
  std::vector<double> pos, abs_b3u;
  for (std::size_t i = 0; i < frame.s.size(); ++i)
    for (std::size_t v = 0; v < frame.s[i].size(); ++v) {
      if (frame.s[i][v] > 0.0) pos.push_back(frame.s[i][v]);
      abs_b3u.push_back(std::abs(frame.b3u[i][v]));
    }
  Conductivities C;
  C.c1 = quantile_of(std::move(pos), q);
  C.c2 = quantile_of(std::move(abs_b3u), q);
  C.d11.resize(frame.s.size());
  C.d33.resize(frame.s.size());
  for (std::size_t i = 0; i < frame.s.size(); ++i) {
    const std::size_t nv = frame.s[i].size();
    C.d11[i].resize(nv);
    C.d33[i].resize(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      C.d11[i][v] = std::max(cond_floor, conductivity(C.c1, frame.s[i][v]));
      C.d33[i][v] = std::max(cond_floor, conductivity(C.c2, std::abs(frame.b3u[i][v])));
    }
  }
  return C;
}

SellingDecomp selling(const std::array<double, 6>& D) {
  const double M[3][3] = {{D[0], D[3], D[4]}, {D[3], D[1], D[5]}, {D[4], D[5], D[2]}};
  auto form = [&](const std::array<int, 3>& a, const std::array<int, 3>& b) {
    double s = 0.0;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) s += a[r] * M[r][c] * b[c];
    return s;
  };
  std::array<std::array<int, 3>, 4> b{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, -1, -1}}};
  static const int pairs[6][4] = {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}, {1, 2, 0, 3}, {1, 3, 0, 2}, {2, 3, 0, 1}};
  SellingDecomp out;
  for (int it = 0;; ++it) {
    if (it > 10000) throw NumericError("Selling reduction did not terminate (tensor not positive definite)");
    bool changed = false;
    for (const auto& p : pairs) {
      const int i = p[0], j = p[1], k = p[2], l = p[3];
      if (form(b[i], b[j]) > 1e-14 * (D[0] + D[1] + D[2])) {
        for (int a = 0; a < 3; ++a) {
          b[k][a] += b[i][a];
          b[l][a] += b[i][a];
          b[i][a] = -b[i][a];
        }
        changed = true;
        break;
      }
    }
    if (!changed) {
      out.iterations = it;
      break;
    }
  }
  for (int q = 0; q < 6; ++q) {
    const int i = pairs[q][0], j = pairs[q][1], k = pairs[q][2], l = pairs[q][3];
    out.w[q] = std::max(0.0, -form(b[i], b[j]));
    const auto& u = b[k];
    const auto& v = b[l];
    out.e[q] = {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  }
  return out;
}

nlohmann::json DiffusionReport::to_json() const {
  return {{"c1", c1},
          {"c2", c2},
          {"cfl_bound", cfl_bound},
          {"max_dt_diag", max_dt_diag},
          {"dt", dt},
          {"steps", steps},
          {"mass", mass},
          {"max_rel_mass_change", max_rel_mass_change},
          {"max_selling_iterations", max_selling_iterations}};
}

Channels diffuse(const Channels& W0, const SphericalDesign& design, const Dims& dims, const AdaptiveFrame& frame,
                 const Conductivities& cond, const DiffusionConfig& cfg, DiffusionReport* report,
                 const std::function<void(int, const Channels&)>& on_step) {
  cfg.validate();
  const int no = static_cast<int>(W0.size());
  if (no != static_cast<int>(design.size())) throw DimensionError("channel count differs from design");
  const std::size_t nv = voxel_count(dims);
  const auto lap = angular_laplacian(design, cfg.knn);

  double max11 = 0.0, max33 = 0.0;
  for (int i = 0; i < no; ++i)
    for (std::size_t v = 0; v < nv; ++v) {
      max11 = std::max(max11, cond.d11[i][v]);
      max33 = std::max(max33, cond.d33[i][v]);
    }
  const double denom = 2.0 * (2.0 * max11 + max33 + cfg.d44 * lap.lambda_max);
  const double bound = denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
  const int steps = cfg.T > 0.0 ? static_cast<int>(std::ceil(cfg.T / cfg.dt - 1e-9)) : 0;
  const double dt = steps > 0 ? cfg.T / steps : cfg.dt;
  if (dt > bound * (1.0 + 1e-12))
    throw ParameterError("unstable dt " + std::to_string(dt) + " exceeds CFL bound " + std::to_string(bound));

  DiffusionReport rep;
  rep.c1 = cond.c1;
  rep.c2 = cond.c2;
  rep.cfl_bound = bound;
  rep.dt = dt;
  rep.steps = steps;

  Channels W = W0;
  auto mass_of = [&](const Channels& X) {
    double m = 0.0;
    for (const auto& c : X)
      for (double x : c) m += x;
    return m;
  };
  double l1 = 0.0;
  for (const auto& c : W0)
    for (double x : c) l1 += std::abs(x);
  rep.mass.push_back(mass_of(W));

  if (steps > 0) {
    std::vector<std::vector<Stencil>> st(no, std::vector<Stencil>(nv));
    std::vector<double> diag(nv * no, 0.0);
    int max_it = 0;
    std::string failure;
#pragma omp parallel for schedule(dynamic) reduction(max : max_it)
    for (int i = 0; i < no; ++i) {
      try {
      for (std::size_t v = 0; v < nv; ++v) {
        const auto& t = frame.b3[i][v];
        const double a = cond.d11[i][v], c = cond.d33[i][v] - a;
        // D = a I + (d33 - a) t t^T
        const std::array<double, 6> D{a + c * t[0] * t[0], a + c * t[1] * t[1], a + c * t[2] * t[2],
                                      c * t[0] * t[1],     c * t[0] * t[2],     c * t[1] * t[2]};
        const auto s = selling(D);
        max_it = std::max(max_it, s.iterations);
        for (int q = 0; q < 6; ++q) {
          st[i][v].w[q] = static_cast<float>(s.w[q]);
          for (int a2 = 0; a2 < 3; ++a2) {
            if (std::abs(s.e[q][a2]) > 127) throw NumericError("Selling offset too long");
            st[i][v].e[q][a2] = static_cast<std::int8_t>(s.e[q][a2]);
          }
        }
      }
      } catch (const std::exception& e) {
#pragma omp critical
        if (failure.empty()) failure = e.what();
      }
    }
    if (!failure.empty()) throw NumericError(failure);
    rep.max_selling_iterations = max_it;

    // exact diagonal of the assembled operator
    for (int i = 0; i < no; ++i)
      for (int z = 0; z < dims[2]; ++z)
        for (int y = 0; y < dims[1]; ++y)
          for (int x = 0; x < dims[0]; ++x) {
            const std::size_t v = lin(dims, x, y, z);
            for (int q = 0; q < 6; ++q)
              for (int sg = -1; sg <= 1; sg += 2) {
                const int xx = x + sg * st[i][v].e[q][0], yy = y + sg * st[i][v].e[q][1],
                          zz = z + sg * st[i][v].e[q][2];
                if (xx < 0 || yy < 0 || zz < 0 || xx >= dims[0] || yy >= dims[1] || zz >= dims[2]) continue;
                const double hw = 0.5 * st[i][v].w[q];
                diag[i * nv + v] += hw;
                diag[i * nv + lin(dims, xx, yy, zz)] += hw;
              }
          }
    for (int i = 0; i < no; ++i)
      for (std::size_t v = 0; v < nv; ++v)
        rep.max_dt_diag = std::max(rep.max_dt_diag, dt * (diag[i * nv + v] - cfg.d44 * lap.diag[i]));
    diag.clear();
    diag.shrink_to_fit();

    Channels dU(no, std::vector<double>(nv));
    for (int step = 1; step <= steps; ++step) {
#pragma omp parallel for schedule(dynamic)
      for (int i = 0; i < no; ++i) {
        auto& du = dU[i];
        std::fill(du.begin(), du.end(), 0.0);
        const auto& u = W[i];
        for (int z = 0; z < dims[2]; ++z)
          for (int y = 0; y < dims[1]; ++y)
            for (int x = 0; x < dims[0]; ++x) {
              const std::size_t v = lin(dims, x, y, z);
              const Stencil& s = st[i][v];
              for (int q = 0; q < 6; ++q) {
                if (s.w[q] == 0.0f) continue;
                const double hw = 0.5 * s.w[q];
                for (int sg = -1; sg <= 1; sg += 2) {
                  const int xx = x + sg * s.e[q][0], yy = y + sg * s.e[q][1], zz = z + sg * s.e[q][2];
                  if (xx < 0 || yy < 0 || zz < 0 || xx >= dims[0] || yy >= dims[1] || zz >= dims[2]) continue;
                  const std::size_t w2 = lin(dims, xx, yy, zz);
                  const double f = hw * (u[w2] - u[v]);
                  du[v] += f;
                  du[w2] -= f;
                }
              }
            }
      }
      if (cfg.d44 > 0.0) {
#pragma omp parallel
        {
          std::vector<double> in(no), out(no);
#pragma omp for schedule(static)
          for (std::int64_t v = 0; v < static_cast<std::int64_t>(nv); ++v) {
            for (int i = 0; i < no; ++i) in[i] = W[i][v];
            lap.apply(in.data(), out.data());
            for (int i = 0; i < no; ++i) dU[i][v] += cfg.d44 * out[i];
          }
        }
      }
#pragma omp parallel for schedule(static)
      for (int i = 0; i < no; ++i)
        for (std::size_t v = 0; v < nv; ++v) W[i][v] += dt * dU[i][v];
      rep.mass.push_back(mass_of(W));
      if (l1 > 0.0)
        rep.max_rel_mass_change =
            std::max(rep.max_rel_mass_change, std::abs(rep.mass.back() - rep.mass[rep.mass.size() - 2]) / l1);
      if (on_step) on_step(step, W);
    }
  }
  if (report) *report = rep;
  return W;
}

Channels diffuse(const Channels& W0, const SphericalDesign& design, const Dims& dims, const DiffusionConfig& cfg,
                 DiffusionReport* report, const std::function<void(int, const Channels&)>& on_step) {
  cfg.validate();
  const auto frame = fit_frame(W0, design, dims, cfg.sigma_s, cfg.knn);
  const auto cond = conductivities(frame, cfg.quantile, cfg.cond_floor);
  return diffuse(W0, design, dims, frame, cond, cfg, report, on_step);
}

OrientationScore diffuse(const OrientationScore& U, const DiffusionConfig& cfg, DiffusionReport* report) {
  const auto W = diffuse(real_channels(U), U.design, U.dims, cfg, report);
  OrientationScore out = U;
  for (std::size_t i = 0; i < W.size(); ++i)
    for (std::size_t v = 0; v < W[i].size(); ++v) out.channels[i][v] = cplx(W[i][v], 0.0);
  return out;
}

Volume sum_channels(const Channels& W, const SphericalDesign& design, const Volume& low) {
  Volume out = low;
  for (std::size_t i = 0; i < W.size(); ++i)
    for (std::size_t v = 0; v < out.size(); ++v) out.data[v] += W[i][v] * design.weights[i];
  return out;
}

Volume process_image(const Volume& f, const WaveletBank& bank, const DiffusionConfig& cfg, DiffusionReport* report) {
  return process_image_series(f, bank, cfg, {cfg.T}, report).back();
}

std::vector<Volume> process_image_series(const Volume& f, const WaveletBank& bank, const DiffusionConfig& cfg,
                                         const std::vector<double>& times, DiffusionReport* report) {
  if (times.empty()) throw ParameterError("no output times");
  DiffusionConfig c = cfg;
  c.T = *std::max_element(times.begin(), times.end());
  if (c.T > 0.0 && c.T < c.dt) c.dt = c.T;
  c.validate();
  const auto U = forward(f, bank);
  const auto W0 = real_channels(U);
  const int steps = c.T > 0.0 ? static_cast<int>(std::ceil(c.T / c.dt - 1e-9)) : 0;
  const double dt = steps > 0 ? c.T / steps : c.dt;
  std::vector<Volume> out(times.size());
  std::vector<int> at(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0) throw ParameterError("negative output time");
    at[k] = static_cast<int>(std::llround(times[k] / dt));
    if (std::abs(at[k] * dt - times[k]) > 1e-6 * std::max(1.0, times[k]))
      throw ParameterError("output time is not a multiple of dt");
    if (at[k] == 0) out[k] = sum_channels(W0, U.design, U.low);
  }
  diffuse(W0, U.design, U.dims, c, report, [&](int step, const Channels& W) {
    for (std::size_t k = 0; k < times.size(); ++k)
      if (at[k] == step) out[k] = sum_channels(W, U.design, U.low);
  });
  return out;
}

Volume gaussian_diffusion(const Volume& f, double T) {
  if (T < 0.0) throw ParameterError("T must be >= 0");
  if (T == 0.0) return f;
  return gaussian_blur(f, std::sqrt(2.0 * T) / f.spacing[0]);
}

}  // namespace ost
