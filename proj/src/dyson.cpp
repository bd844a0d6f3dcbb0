#include "mfl/dyson.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstddef>
#include <functional>

#include "mfl/errors.hpp"

namespace mfl {

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Apply a dense M x M matrix along one tensor axis of v (m axes, axis 0
// slowest).  Fibers along axis `ax` have stride M^(m-1-ax).
void apply_axis(std::vector<cxd>& v, int m, int M, int ax,
                const Eigen::MatrixXcd& P) {
  const std::size_t stride = ipow(static_cast<std::size_t>(M), m - 1 - ax);
  const std::size_t nouter = ipow(static_cast<std::size_t>(M), ax);
  const std::size_t block = stride * static_cast<std::size_t>(M);
  Eigen::VectorXcd fiber(M), out(M);
  for (std::size_t o = 0; o < nouter; ++o) {
    const std::size_t base = o * block;
    for (std::size_t s = 0; s < stride; ++s) {
      for (int a = 0; a < M; ++a) fiber[a] = v[base + s + stride * a];
      out.noalias() = P * fiber;
      for (int a = 0; a < M; ++a) v[base + s + stride * a] = out[a];
    }
  }
}

// Pointwise multiply by w(x_i - x_j) over a pair of axes.
void multiply_w_pair(std::vector<cxd>& v, int m, int M, int i, int j,
                     const PairPotential& w) {
  const std::size_t si = ipow(static_cast<std::size_t>(M), m - 1 - i);
  const std::size_t sj = ipow(static_cast<std::size_t>(M), m - 1 - j);
  const std::size_t n = v.size();
  for (std::size_t f = 0; f < n; ++f) {
    const int xi = static_cast<int>((f / si) % M);
    const int xj = static_cast<int>((f / sj) % M);
    int d = xi - xj;
    if (d < 0) d += M;
    v[f] *= w.w[d];
  }
}

}  // namespace

void apply_w_t(const Lattice& lat, const PairPotential& w, std::vector<cxd>& v,
               int m, int i, int j, double t, double hbar) {
  const int M = lat.M;
  if (i == j || i < 0 || j < 0 || i >= m || j >= m)
    throw ConfigError("apply_w_t: axis pair out of range");
  if (v.size() != ipow(static_cast<std::size_t>(M), m))
    throw ConfigError("apply_w_t: tensor size does not match M^m");
  if (t == 0.0) {
    multiply_w_pair(v, m, M, i, j, w);
    return;
  }
  const Eigen::MatrixXcd Pf =
      free_propagator_matrix(lat, t, hbar, Dispersion::continuum);
  const Eigen::MatrixXcd Pb =
      free_propagator_matrix(lat, -t, hbar, Dispersion::continuum);
  apply_axis(v, m, M, i, Pf);
  apply_axis(v, m, M, j, Pf);
  multiply_w_pair(v, m, M, i, j, w);
  apply_axis(v, m, M, i, Pb);
  apply_axis(v, m, M, j, Pb);
}

std::vector<cxd> tree_amplitude_apply(const Lattice& lat, const PairPotential& w,
                                      const PKernel& a, int n,
                                      const std::vector<double>& times, double hbar,
                                      const std::vector<cxd>& vin, int cap) {
  const int p = a.p;
  const int M = lat.M;
  if (n < 0 || static_cast<int>(times.size()) != n)
    throw ConfigError("tree_amplitude_apply: times must hold one entry per level");
  if (p + n > cap) throw CapError("tree_amplitude_apply: p + n exceeds the tree cap");
  for (int l = 0; l + 1 < n; ++l)
    if (times[l] + 1e-12 < times[l + 1])
      throw ConfigError("tree_amplitude_apply: times must be nonincreasing");
  const int m = p + n;
  std::vector<cxd> v = vin;
  if (v.size() != ipow(static_cast<std::size_t>(M), m))
    throw ConfigError("tree_amplitude_apply: tensor size does not match M^(p+n)");

  const std::size_t ncols = ipow(static_cast<std::size_t>(M), m - p);
  const std::size_t nrows = ipow(static_cast<std::size_t>(M), p);
  const cxd lev(0.0, 1.0 / hbar);

  // rec(l, v): apply the level-l amplitude in place.  Level 0 is the base
  // kernel on the first p axes; level l adds (i/hbar) sum_i [w_{t_l}^{i,p+l}, .].
  std::function<void(int, std::vector<cxd>&)> rec =
      [&](int l, std::vector<cxd>& u) {
        if (l == 0) {
          // Leading p axes are slowest, so u is an (M^p) x (M^(m-p)) matrix.
          Eigen::Map<Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
              um(u.data(), nrows, ncols);
          um = a.A * um;
          return;
        }
        const double tl = times[l - 1];
        const int newaxis = p + l - 1;
        // s2 = sum_i w_t^{i,new} u  (before the inner amplitude)
        std::vector<cxd> s2(u.size(), cxd(0.0, 0.0));
        {
          std::vector<cxd> tmp(u.size());
          for (int i = 0; i < newaxis; ++i) {
            tmp = u;
            apply_w_t(lat, w, tmp, m, i, newaxis, tl, hbar);
            for (std::size_t f = 0; f < u.size(); ++f) s2[f] += tmp[f];
          }
        }
        rec(l - 1, u);   // u = g_{l-1} v
        rec(l - 1, s2);  // s2 = g_{l-1} sum_i w v
        // s1 = sum_i w_t^{i,new} (g_{l-1} v)
        std::vector<cxd> s1(u.size(), cxd(0.0, 0.0));
        {
          std::vector<cxd> tmp(u.size());
          for (int i = 0; i < newaxis; ++i) {
            tmp = u;
            apply_w_t(lat, w, tmp, m, i, newaxis, tl, hbar);
            for (std::size_t f = 0; f < u.size(); ++f) s1[f] += tmp[f];
          }
        }
        for (std::size_t f = 0; f < u.size(); ++f)
          u[f] = lev * (s1[f] - s2[f]);
      };
  rec(n, v);
  return v;
}

cxd tree_expectation(const Lattice& lat, const PairPotential& w,
                     const PKernel& a, int n, const std::vector<double>& times,
                     double hbar, const Field& psi, int cap) {
  const int M = lat.M;
  const int m = a.p + n;
  if (psi.size() != M)
    throw ConfigError("tree_expectation: psi must live on the lattice");
  const std::size_t dim = ipow(static_cast<std::size_t>(M), m);
  std::vector<cxd> v(dim);
  // Product tensor psi^{(x_0)} ... psi^{(x_{m-1})}, axis 0 slowest.
  for (std::size_t f = 0; f < dim; ++f) {
    cxd val(1.0, 0.0);
    std::size_t r = f;
    for (int ax = m - 1; ax >= 0; --ax) {
      val *= psi.v[r % M];
      r /= M;
    }
    v[f] = val;
  }
  const std::vector<cxd> u = tree_amplitude_apply(lat, w, a, n, times, hbar, v, cap);
  cxd acc(0.0, 0.0);
  for (std::size_t f = 0; f < dim; ++f) acc += std::conj(v[f]) * u[f];
  const double dxm = std::pow(lat.dx, m);
  return acc * dxm;
}

SimplexQuadrature make_simplex_quadrature(int q) {
  if (q < 4) throw ConfigError("make_simplex_quadrature: need at least 4 nodes");
  // Gauss-Legendre on (0,1) via the Jacobi matrix (Golub-Welsch).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(q, q);
  for (int i = 1; i < q; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i - 1, i) = b;
    J(i, i - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  SimplexQuadrature out;
  out.q = q;
  out.nodes.resize(q);
  out.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    out.nodes[i] = 0.5 * (es.eigenvalues()[i] + 1.0);
    const double v0 = es.eigenvectors()(0, i);
    out.weights[i] = v0 * v0;  // weights on [-1,1] are 2 v0^2; halved for [0,1]
  }
  return out;
}

int k_opt(double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("k_opt: epsilon must be positive");
  const double raw = 1.0 / std::sqrt(epsilon);
  int k = static_cast<int>(std::ceil(raw - 1e-12));
  return k < 1 ? 1 : k;
}

double fixed_hbar_bound(int n, int p, double hbar, double winf, double anorm) {
  if (n < 0 || p < 1) throw ConfigError("fixed_hbar_bound: bad order");
  double comb = 1.0;  // (p+n)! / p!
  for (int i = 1; i <= n; ++i) comb *= (p + i);
  return comb * std::pow(2.0 * winf / hbar, n) * anorm;
}

double uniform_norm_bound(int n, int p, double wsig, double asig) {
  if (n < 0 || p < 1) throw ConfigError("uniform_norm_bound: bad order");
  if (n == 0) return asig;
  double comb = 1.0;
  for (int i = 1; i <= n; ++i) comb *= (p + i);
  const double delta = 1.0 / (2.0 * n);
  const double per = 2.0 / (std::exp(2.0) * delta * delta);
  return comb * std::pow(per * wsig, n) * asig;
}

DysonResult dyson_series_expectation(const Lattice& lat, const PairPotential& w,
                                     const PKernel& a, const Field& psi,
                                     double t, int k, double hbar,
                                     const SimplexQuadrature& quad, int cap,
                                     double w_sigma_norm, double a_sigma_norm) {
  if (k < 0) throw ConfigError("dyson_series_expectation: negative order");
  if (a.p + k > cap)
    throw CapError("dyson_series_expectation: p + k exceeds the tree cap");
  DysonResult res;
  res.p = a.p;
  res.k = k;
  res.hbar = hbar;
  res.t = t;
  res.epsilon = w.winf * std::abs(t);
  res.terms.assign(k + 1, 0.0);
  res.bounds_fixed.assign(k + 1, 0.0);
  res.bounds_uniform.assign(k + 1,
                            std::numeric_limits<double>::quiet_NaN());

  const PKernel a_t = heisenberg_free(a, t, hbar, Dispersion::continuum);
  res.terms[0] = hartree_expect(lat, psi, a_t).real();
  res.bounds_fixed[0] = fixed_hbar_bound(0, a.p, hbar, w.winf, a.op_norm);
  if (std::isfinite(a_sigma_norm))
    res.bounds_uniform[0] = uniform_norm_bound(0, a.p, w_sigma_norm, a_sigma_norm);

  const int q = quad.q;
  for (int n = 1; n <= k; ++n) {
    // Iterated Gauss-Legendre over the ordered simplex t >= t_1 >= ... >= t_n:
    // each level integrates (0, t_{l-1}) with nodes t_l = t_{l-1} x_j and a
    // Jacobian factor t_{l-1}.
    std::size_t nnodes = 1;
    for (int l = 0; l < n; ++l) nnodes *= static_cast<std::size_t>(q);
    std::vector<double> vals(nnodes, 0.0);
    std::vector<double> wts(nnodes, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long fi = 0; fi < static_cast<long long>(nnodes); ++fi) {
      std::size_t r = static_cast<std::size_t>(fi);
      std::vector<int> js(n);
      for (int l = n - 1; l >= 0; --l) {
        js[l] = static_cast<int>(r % q);
        r /= q;
      }
      std::vector<double> times(n);
      double upper = t;
      double wt = 1.0;
      for (int l = 0; l < n; ++l) {
        times[l] = upper * quad.nodes[js[l]];
        wt *= upper * quad.weights[js[l]];
        upper = times[l];
      }
      const cxd val =
          tree_expectation(lat, w, a_t, n, times, hbar, psi, cap);
      vals[fi] = val.real();
      wts[fi] = wt;
    }
    double term = 0.0;
    for (std::size_t fi = 0; fi < nnodes; ++fi) term += wts[fi] * vals[fi];
    res.terms[n] = term;
    res.bounds_fixed[n] = fixed_hbar_bound(n, a.p, hbar, w.winf, a.op_norm);
    if (std::isfinite(a_sigma_norm) && std::isfinite(w_sigma_norm))
      res.bounds_uniform[n] =
          uniform_norm_bound(n, a.p, w_sigma_norm, a_sigma_norm);
  }
  res.sum = 0.0;
  for (double term : res.terms) res.sum += term;
  return res;
}

namespace {

using Functional = std::function<cxd(const std::vector<cxd>&)>;

struct WirtingerGrad {
  std::vector<cxd> d_psi;   // partial against psi_x
  std::vector<cxd> d_psib;  // partial against conj(psi_x)
};

WirtingerGrad fd_gradient(const Functional& G, const std::vector<cxd>& v,
                          double h) {
  const std::size_t M = v.size();
  WirtingerGrad g;
  g.d_psi.resize(M);
  g.d_psib.resize(M);
  std::vector<cxd> u = v;
  for (std::size_t x = 0; x < M; ++x) {
    const cxd keep = u[x];
    u[x] = keep + h;
    const cxd fp = G(u);
    u[x] = keep - h;
    const cxd fm = G(u);
    u[x] = keep + cxd(0.0, h);
    const cxd gp = G(u);
    u[x] = keep - cxd(0.0, h);
    const cxd gm = G(u);
    u[x] = keep;
    const cxd dre = (fp - fm) / (2.0 * h);
    const cxd dim = (gp - gm) / (2.0 * h);
    g.d_psi[x] = 0.5 * (dre - cxd(0.0, 1.0) * dim);
    g.d_psib[x] = 0.5 * (dre + cxd(0.0, 1.0) * dim);
  }
  return g;
}

}  // namespace

cxd nested_poisson_oracle(const Lattice& lat, const PairPotential& w,
                          const PKernel& a, const Field& psi,
                          const std::vector<double>& times, double hbar,
                          double h_fd) {
  const int n = static_cast<int>(times.size());
  if (n > 2)
    throw ConfigError("nested_poisson_oracle: finite differences only support two nesting levels");
  if (psi.size() != lat.M)
    throw ConfigError("nested_poisson_oracle: psi must live on the lattice");

  Functional F = [&lat, &a](const std::vector<cxd>& v) {
    Field f;
    f.v = v;
    return hartree_expect(lat, f, a);
  };

  const cxd lev(0.0, 1.0 / hbar);
  for (int l = 1; l <= n; ++l) {
    const double s = times[l - 1];
    Functional prev = F;
    F = [&lat, &w, lev, s, hbar, h_fd, prev](const std::vector<cxd>& v) {
      // Interaction-energy side: analytic gradient of
      // W_s(v) = (1/2) sum_x rho (w * rho) dx with rho = |U0(s) v|^2.
      // U0 carries the same hbar as the conjugated pair potentials.
      Field f;
      f.v = v;
      Field phi = free_propagate(lat, f, s, hbar, Dispersion::continuum);
      std::vector<double> rho(lat.M);
      for (int x = 0; x < lat.M; ++x) rho[x] = std::norm(phi.v[x]);
      std::vector<double> veff = convolve_periodic(lat, w, rho);
      Field vphi;
      vphi.v.resize(lat.M);
      for (int x = 0; x < lat.M; ++x) vphi.v[x] = veff[x] * phi.v[x];
      Field back = free_propagate(lat, vphi, -s, hbar, Dispersion::continuum);
      std::vector<cxd> gw_psib(lat.M);  // dW_s / d conj(psi_x)
      for (int x = 0; x < lat.M; ++x) gw_psib[x] = lat.dx * back.v[x];

      WirtingerGrad gf = fd_gradient(prev, v, h_fd);
      cxd core(0.0, 0.0);
      for (int x = 0; x < lat.M; ++x) {
        const cxd gw_psi = std::conj(gw_psib[x]);  // W_s is real
        core += gw_psi * gf.d_psib[x] - gw_psib[x] * gf.d_psi[x];
      }
      core /= lat.dx;
      return lev * core;
    };
  }
  return F(psi.v);
}

}  // namespace mfl
