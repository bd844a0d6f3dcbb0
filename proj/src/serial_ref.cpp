#include "mfl/serial_ref.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstddef>

#include "mfl/errors.hpp"

namespace mfl::ref {

std::vector<double> convolve_direct(const Lattice& lat, const PairPotential& w,
                                    const std::vector<double>& rho) {
  const int M = lat.M;
  std::vector<double> out(M, 0.0);
  for (int j = 0; j < M; ++j) {
    double acc = 0.0;
    for (int d = 0; d < M; ++d) acc += w.w[d] * rho[((j - d) % M + M) % M];
    out[j] = acc * lat.dx;
  }
  return out;
}

namespace {

double dispersion_energy(const Lattice& lat, double k, double hbar, Dispersion disp) {
  if (disp == Dispersion::continuum) return 0.5 * hbar * hbar * k * k;
  const double s = std::sin(0.5 * k * lat.dx);
  return 2.0 * hbar * hbar * s * s / (lat.dx * lat.dx);
}

}  // namespace

double hartree_energy_direct(const Lattice& lat, const PairPotential& w, const Field& psi,
                             double hbar, Dispersion disp) {
  const int M = lat.M;
  double kin = 0.0;
  for (int m = 0; m < M; ++m) {
    cxd hat(0.0, 0.0);
    for (int j = 0; j < M; ++j) {
      const double ang = -lat.k[m] * lat.x(j);
      hat += psi.v[j] * cxd(std::cos(ang), std::sin(ang));
    }
    hat *= lat.dx;
    kin += dispersion_energy(lat, lat.k[m], hbar, disp) * std::norm(hat);
  }
  kin /= lat.L;
  double pot = 0.0;
  for (int x = 0; x < M; ++x)
    for (int y = 0; y < M; ++y)
      pot += std::norm(psi.v[x]) * w(x - y, M) * std::norm(psi.v[y]);
  pot *= 0.5 * lat.dx * lat.dx;
  return kin + pot;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXcd dense_free_propagator(const Lattice& lat, double t, double hbar,
                                       Dispersion disp) {
  const int M = lat.M;
  Eigen::MatrixXcd P(M, M);
  for (int x = 0; x < M; ++x)
    for (int y = 0; y < M; ++y) {
      cxd acc(0.0, 0.0);
      for (int m = 0; m < M; ++m) {
        const double ph =
            -dispersion_energy(lat, lat.k[m], hbar, disp) * t / hbar +
            lat.k[m] * (lat.x(x) - lat.x(y));
        acc += cxd(std::cos(ph), std::sin(ph));
      }
      P(x, y) = acc * (lat.dx / lat.L);
    }
  return P;
}

Eigen::MatrixXcd dense_w_t(const Lattice& lat, const PairPotential& w, double t,
                           double hbar) {
  const int M = lat.M;
  const Eigen::MatrixXcd Pf = dense_free_propagator(lat, t, hbar, Dispersion::continuum);
  const Eigen::MatrixXcd Pb = dense_free_propagator(lat, -t, hbar, Dispersion::continuum);
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(M * M, M * M);
  for (int x1 = 0; x1 < M; ++x1)
    for (int x2 = 0; x2 < M; ++x2)
      D(x1 * M + x2, x1 * M + x2) = w(x1 - x2, M);
  return kron(Pb, Pb) * D * kron(Pf, Pf);
}

Eigen::MatrixXcd dense_hamiltonian(const FockBasis& basis, const Lattice& lat,
                                   const PairPotential& w, double hbar) {
  const int M = basis.M;
  const int N = basis.N;
  const std::size_t dim = basis.dim();
  const double hop = -0.5 * hbar * hbar / (lat.dx * lat.dx);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<uint8_t> n(M);
  for (std::size_t r = 0; r < dim; ++r) {
    const uint8_t* occ = basis.row(r);
    double diag = hbar * hbar / (lat.dx * lat.dx) * N;
    double inter = 0.0;
    for (int a2 = 0; a2 < M; ++a2)
      for (int b2 = 0; b2 < M; ++b2)
        inter += w(a2 - b2, M) * occ[a2] * occ[b2];
    inter -= w(0, M) * N;
    diag += inter / (2.0 * N);
    H(r, r) += diag;
    for (int a2 = 0; a2 < M; ++a2) {
      if (occ[a2] == 0) continue;
      for (int db = -1; db <= 1; db += 2) {
        const int b2 = ((a2 + db) % M + M) % M;
        if (b2 == a2) continue;
        for (int s = 0; s < M; ++s) n[s] = occ[s];
        n[a2] -= 1;
        n[b2] += 1;
        const std::size_t r2 = basis.rank(n.data());
        H(r2, r) += hop * std::sqrt(static_cast<double>(occ[a2]) * (occ[b2] + 1.0));
      }
    }
  }
  return H;
}

Eigen::VectorXcd expm_apply(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& v,
                            double t, double hbar) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success)
    throw NumericalError("expm_apply: eigendecomposition failed");
  const Eigen::VectorXcd c = es.eigenvectors().adjoint() * v;
  Eigen::VectorXcd d(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double ph = -es.eigenvalues()[i] * t / hbar;
    d[i] = c[i] * cxd(std::cos(ph), std::sin(ph));
  }
  return es.eigenvectors() * d;
}

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

Eigen::MatrixXcd reduced_density_direct(const FockBasis& basis, const FockState& s, int p) {
  const int M = basis.M;
  const int N = basis.N;
  if (p < 1 || p > N) throw ConfigError("reduced_density_direct: need 1 <= p <= N");
  const std::size_t full = ipow(static_cast<std::size_t>(M), N);
  // Symmetrized tensor: Psi(tuple) = c_{n(tuple)} sqrt(prod n_j! / N!).
  std::vector<cxd> Psi(full);
  std::vector<uint8_t> n(M);
  const double lgN = std::lgamma(N + 1.0);
  for (std::size_t f = 0; f < full; ++f) {
    std::fill(n.begin(), n.end(), 0);
    std::size_t r = f;
    for (int ax = 0; ax < N; ++ax) {
      n[r % M] += 1;
      r /= M;
    }
    double lg = 0.0;
    for (int j = 0; j < M; ++j) lg += std::lgamma(n[j] + 1.0);
    Psi[f] = s.c[basis.rank(n.data())] * std::exp(0.5 * (lg - lgN));
  }
  const std::size_t rows = ipow(static_cast<std::size_t>(M), p);
  const std::size_t rest = ipow(static_cast<std::size_t>(M), N - p);
  // The tensor is symmetric, so which p axes are kept (and their internal
  // order) does not change the result; keep the fastest-varying block.
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(rows, rows);
  for (std::size_t X = 0; X < rows; ++X)
    for (std::size_t Y = 0; Y < rows; ++Y) {
      cxd acc(0.0, 0.0);
      for (std::size_t R = 0; R < rest; ++R)
        acc += Psi[X + rows * R] * std::conj(Psi[Y + rows * R]);
      g(X, Y) = acc;
    }
  return g;
}

WignerGrid wigner_direct(const Lattice& lat, const Field& psi, double hbar) {
  const int M = lat.M;
  WignerGrid W;
  W.g = make_phase_grid(lat, hbar);
  W.w.assign(static_cast<std::size_t>(M) * M, 0.0);
  W.im_residue = 0.0;
  const double Lxi = W.g.Lxi();
  for (int a = 0; a < M; ++a) {
    const int mu = dual_label(a, M);
    for (int b = 0; b < M; ++b) {
      const int nu = dual_label(b, M);
      cxd chi(0.0, 0.0);
      for (int j = 0; j < M; ++j) {
        const double ang = 2.0 * M_PI * mu * j / M;
        chi += std::conj(psi.v[j]) * cxd(std::cos(ang), std::sin(ang)) *
               psi.v[((j + nu) % M + M) % M];
      }
      const double tw = M_PI * mu * nu / M;
      chi *= lat.dx * cxd(std::cos(tw), std::sin(tw));
      const cxd c = std::conj(chi) / (lat.L * Lxi);
      for (int ix = 0; ix < M; ++ix)
        for (int ixi = 0; ixi < M; ++ixi) {
          const double ph = W.g.S(mu) * lat.x(ix) + W.g.Sigma(nu) * W.g.xi[ixi];
          const cxd term = c * cxd(std::cos(ph), std::sin(ph));
          W.w[static_cast<std::size_t>(ix) * M + ixi] += term.real();
          W.im_residue += std::abs(term.imag());
        }
    }
  }
  return W;
}

Symbol poisson_via_derivatives(const Symbol& a, const Symbol& b) {
  if (!same_grid(a.g, b.g))
    throw ConfigError("poisson_via_derivatives: symbols on different grids");
  const int M = a.g.M();
  const std::size_t sz = static_cast<std::size_t>(M) * M;
  std::vector<cxd> dax(sz), dbx(sz), daxi(sz), dbxi(sz);
  {
    std::vector<cxd> d1(sz), d2(sz), d3(sz), d4(sz);
    for (int ia = 0; ia < M; ++ia)
      for (int ib = 0; ib < M; ++ib) {
        const std::size_t f = static_cast<std::size_t>(ia) * M + ib;
        const cxd iS(0.0, a.g.S(dual_label(ia, M)));
        const cxd iSig(0.0, a.g.Sigma(dual_label(ib, M)));
        d1[f] = a.dual[f] * iS;
        d2[f] = b.dual[f] * iS;
        d3[f] = a.dual[f] * iSig;
        d4[f] = b.dual[f] * iSig;
      }
    dax = symbol_from_dual(a.g, d1).vals;
    dbx = symbol_from_dual(a.g, d2).vals;
    daxi = symbol_from_dual(a.g, d3).vals;
    dbxi = symbol_from_dual(a.g, d4).vals;
  }
  std::vector<cxd> vals(sz);
  for (std::size_t f = 0; f < sz; ++f)
    vals[f] = daxi[f] * dbx[f] - dax[f] * dbxi[f];
  return symbol_from_values(a.g, std::move(vals));
}

Symbol moyal_via_operators(const Symbol& a, const Symbol& b, double hbar) {
  if (!same_grid(a.g, b.g))
    throw ConfigError("moyal_via_operators: symbols on different grids");
  const PKernel qa = weyl_quantize(a, hbar);
  const PKernel qb = weyl_quantize(b, hbar);
  PKernel comm;
  comm.p = 1;
  comm.M = qa.M;
  comm.dx = qa.dx;
  comm.hermitian = false;
  comm.A = cxd(0.0, 1.0 / hbar) * (qa.A * qb.A - qb.A * qa.A);
  comm.op_norm = 0.0;
  return weyl_dequantize(comm, a.g);
}

std::vector<double> nbody_forces_direct(const Lattice& lat, const PairPotential& w,
                                        const ParticleEnsemble& e) {
  const int M = lat.M;
  const int N = e.N;
  std::vector<double> F(N, 0.0);
  for (int i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
      if (j == i) continue;
      const double d = e.x[i] - e.x[j];
      double wp = 0.0;
      for (int k = 1; k < M / 2; ++k) {
        const double kp = 2.0 * M_PI * k / lat.L;
        wp += -2.0 / lat.L * kp * w.what[k] * std::sin(kp * d);
      }
      acc += wp;
    }
    F[i] = -acc / N;
  }
  return F;
}

}  // namespace mfl::ref
