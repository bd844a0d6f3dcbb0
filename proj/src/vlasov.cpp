#include "mfl/vlasov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>

#include "mfl/errors.hpp"

namespace mfl {

namespace {

// f(x - s*h) on a periodic line, constant shift of s cells, cubic Lagrange.
// Weights depend only on the fractional part, so the map is a circular
// convolution with weights summing to 1 (mass preserved).
void gather_shift(const std::vector<double>& in, double s, std::vector<double>& out) {
  const int M = static_cast<int>(in.size());
  const double cs = std::ceil(s);
  const double theta = cs - s;  // in [0,1)
  const long ics = static_cast<long>(cs);
  const double t = theta;
  const double wm1 = -t * (t - 1.0) * (t - 2.0) / 6.0;
  const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
  const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
  for (int j = 0; j < M; ++j) {
    const long m = j - ics;
    const int i0 = static_cast<int>(((m - 1) % M + M) % M);
    const int i1 = static_cast<int>((m % M + M) % M);
    const int i2 = static_cast<int>(((m + 1) % M + M) % M);
    const int i3 = static_cast<int>(((m + 2) % M + M) % M);
    out[j] = wm1 * in[i0] + w0 * in[i1] + w1 * in[i2] + w2 * in[i3];
  }
}

// Half (or full) free-transport step in x: each xi row shifts by xi*dt.
void transport_x(PhaseDensity& f, double dt) {
  const int M = f.g.M();
  std::vector<double> line(M), out(M);
  for (int ixi = 0; ixi < M; ++ixi) {
    const double s = f.g.xi[ixi] * dt / f.g.lat.dx;
    for (int ix = 0; ix < M; ++ix) line[ix] = f.f[static_cast<std::size_t>(ix) * M + ixi];
    gather_shift(line, s, out);
    for (int ix = 0; ix < M; ++ix) f.f[static_cast<std::size_t>(ix) * M + ixi] = out[ix];
  }
}

std::vector<double> spectral_derivative(const Lattice& lat, const std::vector<double>& v) {
  const int M = lat.M;
  std::vector<cxd> c(M);
  for (int j = 0; j < M; ++j) c[j] = v[j];
  std::vector<cxd> ch = fft_forward(lat, c);
  for (int m = 0; m < M; ++m) ch[m] *= cxd(0.0, lat.k[m]);
  ch[M / 2] = 0.0;  // Nyquist has no odd partner
  std::vector<cxd> d = fft_inverse(lat, ch);
  std::vector<double> out(M);
  for (int j = 0; j < M; ++j) out[j] = d[j].real();
  return out;
}

}  // namespace

double PhaseDensity::mass() const {
  double acc = 0.0;
  for (double v : f) acc += v;
  return acc * g.lat.dx * g.dxi;
}

PhaseDensity make_phase_density(const PhaseGrid& g) {
  PhaseDensity f;
  f.g = g;
  f.f.assign(static_cast<std::size_t>(g.M()) * g.M(), 0.0);
  return f;
}

PhaseDensity phase_density_from_wigner(const WignerGrid& w) {
  PhaseDensity f;
  f.g = w.g;
  f.f.resize(w.w.size());
  for (std::size_t i = 0; i < w.w.size(); ++i) f.f[i] = std::max(w.w[i], 0.0);
  const double m = f.mass();
  if (!(m > 0.0))
    throw NumericalError("phase_density_from_wigner: no positive mass to keep");
  for (double& v : f.f) v /= m;
  return f;
}

std::vector<double> veff(const PhaseDensity& f, const PairPotential& w) {
  const int M = f.g.M();
  if (static_cast<int>(w.w.size()) != M)
    throw ConfigError("veff: potential and density live on different lattices");
  std::vector<double> rho(M, 0.0);
  for (int ix = 0; ix < M; ++ix) {
    double acc = 0.0;
    for (int ixi = 0; ixi < M; ++ixi) acc += f.f[static_cast<std::size_t>(ix) * M + ixi];
    rho[ix] = acc * f.g.dxi;
  }
  return convolve_periodic(f.g.lat, w, rho);
}

double vlasov_energy(const PhaseDensity& f, const PairPotential& w) {
  const int M = f.g.M();
  double kin = 0.0;
  std::vector<double> rho(M, 0.0);
  for (int ix = 0; ix < M; ++ix) {
    for (int ixi = 0; ixi < M; ++ixi) {
      const double v = f.f[static_cast<std::size_t>(ix) * M + ixi];
      kin += 0.5 * f.g.xi[ixi] * f.g.xi[ixi] * v;
      rho[ix] += v;
    }
    rho[ix] *= f.g.dxi;
  }
  kin *= f.g.lat.dx * f.g.dxi;
  const std::vector<double> v = convolve_periodic(f.g.lat, w, rho);
  double pot = 0.0;
  for (int ix = 0; ix < M; ++ix) pot += rho[ix] * v[ix];
  pot *= 0.5 * f.g.lat.dx;
  return kin + pot;
}

PhaseDensity vlasov_step(const PhaseDensity& f, double dt, const PairPotential& w) {
  if (!(dt > 0.0) || dt > 0.1)
    throw ConfigError("vlasov_step: dt must lie in (0, 0.1]");
  const int M = f.g.M();
  if (static_cast<int>(w.w.size()) != M)
    throw ConfigError("vlasov_step: potential and density live on different lattices");
  const double mass0 = f.mass();

  PhaseDensity out = f;
  transport_x(out, 0.5 * dt);

  const std::vector<double> v = veff(out, w);
  const std::vector<double> dv = spectral_derivative(out.g.lat, v);
  std::vector<double> line(M), shifted(M);
  for (int ix = 0; ix < M; ++ix) {
    // Characteristic xi_old = xi + dV/dx * dt; gather at index j - s with
    // s = -dV/dx * dt / dxi.
    const double s = -dv[ix] * dt / out.g.dxi;
    double* row = &out.f[static_cast<std::size_t>(ix) * M];
    for (int ixi = 0; ixi < M; ++ixi) line[ixi] = row[ixi];
    gather_shift(line, s, shifted);
    for (int ixi = 0; ixi < M; ++ixi) row[ixi] = shifted[ixi];
  }

  transport_x(out, 0.5 * dt);

  for (double& x : out.f)
    if (x < 0.0) x = 0.0;
  const double m1 = out.mass();
  if (m1 > 0.0) {
    const double scale = mass0 / m1;
    for (double& x : out.f) x *= scale;
  }

  double edge = 0.0;
  for (int ix = 0; ix < M; ++ix) {
    edge += out.f[static_cast<std::size_t>(ix) * M + 0];
    edge += out.f[static_cast<std::size_t>(ix) * M + (M - 1)];
  }
  edge *= out.g.lat.dx * out.g.dxi;
  if (edge > 1e-12 * std::max(mass0, 1e-300))
    throw NumericalError("vlasov_step: density reaches the periodic xi-box boundary");
  return out;
}

PhaseDensity vlasov_evolve(const PhaseDensity& f0, double t, double dt,
                           const PairPotential& w) {
  if (t == 0.0) return f0;
  if (!(t > 0.0) || !(dt > 0.0)) throw ConfigError("vlasov_evolve: need t > 0, dt > 0");
  const int nsteps = std::max(1, static_cast<int>(std::ceil(t / dt - 1e-12)));
  const double h = t / nsteps;
  PhaseDensity f = f0;
  for (int n = 0; n < nsteps; ++n) f = vlasov_step(f, h, w);
  return f;
}

namespace {

// w'(d) of the band-limited table interpolant, via the sine series; one
// evaluation per particle pair. The k=1 angle seeds a recurrence so the cost
// per pair is O(M) flops, not O(M) libm calls.
double pair_force_series(const std::vector<double>& coef, double c1, double s1) {
  double ck = c1, sk = s1, acc = 0.0;
  for (std::size_t k = 1; k < coef.size(); ++k) {
    acc += coef[k] * sk;
    const double cn = ck * c1 - sk * s1;
    const double sn = sk * c1 + ck * s1;
    ck = cn;
    sk = sn;
  }
  return acc;  // = -w'(d) * ... see caller for signs
}

}  // namespace

std::vector<double> nbody_forces(const Lattice& lat, const PairPotential& w,
                                 const ParticleEnsemble& e) {
  const int M = lat.M;
  const int N = e.N;
  if (static_cast<int>(e.x.size()) != N || static_cast<int>(e.xi.size()) != N)
    throw ConfigError("nbody_forces: ensemble arrays do not match N");
  // coef[k] = (2/L) k_phys what_k for k = 1..M/2-1 (Nyquist dropped), so that
  // w'(d) = -sum_k coef[k] sin(k_phys d).
  std::vector<double> coef(M / 2, 0.0);
  for (int k = 1; k < M / 2; ++k)
    coef[k] = (2.0 / lat.L) * (2.0 * M_PI * k / lat.L) * w.what[k];
  std::vector<double> F(N, 0.0);
  const double tp = 2.0 * M_PI / lat.L;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const double th = tp * (e.x[i] - e.x[j]);
      const double g = pair_force_series(coef, std::cos(th), std::sin(th));
      // w'(d) = -g, so the force on i is +g/N; reaction is bitwise opposite.
      F[i] += g / N;
      F[j] -= g / N;
    }
  }
  return F;
}

double nbody_energy(const Lattice& lat, const PairPotential& w, const ParticleEnsemble& e) {
  const int M = lat.M;
  const int N = e.N;
  double kin = 0.0;
  for (int i = 0; i < N; ++i) kin += 0.5 * e.xi[i] * e.xi[i];
  // Band-limited interpolant of the table (Nyquist dropped, like the forces):
  // w(d) = (1/L)(what_0 + 2 sum_{k>0} what_k cos(k_phys d)).
  const double tp = 2.0 * M_PI / lat.L;
  double pot = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      const double th = tp * (e.x[i] - e.x[j]);
      const double c1 = std::cos(th), s1 = std::sin(th);
      double ck = c1, sk = s1;
      double val = w.what[0];
      for (int k = 1; k < M / 2; ++k) {
        val += 2.0 * w.what[k] * ck;
        const double cn = ck * c1 - sk * s1;
        const double sn = sk * c1 + ck * s1;
        ck = cn;
        sk = sn;
      }
      pot += val / lat.L;
    }
  }
  return kin + pot / N;
}

double nbody_momentum(const ParticleEnsemble& e) {
  double acc = 0.0;
  for (double v : e.xi) acc += v;
  return acc;
}

ParticleEnsemble classical_nbody_evolve(const Lattice& lat, const PairPotential& w,
                                        const ParticleEnsemble& e, double t, double dt) {
  if (!(dt > 0.0)) throw ConfigError("classical_nbody_evolve: dt must be positive");
  ParticleEnsemble out = e;
  if (t == 0.0) return out;
  if (!(t > 0.0)) throw ConfigError("classical_nbody_evolve: t must be nonnegative");
  const int nsteps = std::max(1, static_cast<int>(std::ceil(t / dt - 1e-12)));
  const double h = t / nsteps;
  std::vector<double> F = nbody_forces(lat, w, out);
  for (int n = 0; n < nsteps; ++n) {
    for (int i = 0; i < out.N; ++i) out.xi[i] += 0.5 * h * F[i];
    for (int i = 0; i < out.N; ++i) {
      double x = out.x[i] + h * out.xi[i];
      x = std::fmod(x, lat.L);
      if (x < 0.0) x += lat.L;
      out.x[i] = x;
    }
    F = nbody_forces(lat, w, out);
    for (int i = 0; i < out.N; ++i) out.xi[i] += 0.5 * h * F[i];
  }
  out.t = e.t + t;
  return out;
}

PhaseDensity empirical_density(const PhaseGrid& g, const ParticleEnsemble& e,
                               double smoothing) {
  const int M = g.M();
  const double coarser = std::max(g.lat.dx, g.dxi);
  if (smoothing + 1e-12 < coarser)
    throw ConfigError("empirical_density: smoothing narrower than the grid");
  PhaseDensity f = make_phase_density(g);
  const double Lx = g.lat.L;
  const double Lxi = g.Lxi();
  const int wrapx = static_cast<int>(std::ceil(4.0 * smoothing / Lx)) + 1;
  const int wrapxi = static_cast<int>(std::ceil(4.0 * smoothing / Lxi)) + 1;
  std::vector<double> gx(M), gxi(M);
  const double inv2s2 = 1.0 / (2.0 * smoothing * smoothing);
  for (int i = 0; i < e.N; ++i) {
    double sgx = 0.0, sgxi = 0.0;
    for (int ix = 0; ix < M; ++ix) {
      double acc = 0.0;
      for (int n = -wrapx; n <= wrapx; ++n) {
        const double d = g.lat.x(ix) - e.x[i] + n * Lx;
        acc += std::exp(-d * d * inv2s2);
      }
      gx[ix] = acc;
      sgx += acc;
    }
    for (int ixi = 0; ixi < M; ++ixi) {
      double acc = 0.0;
      for (int n = -wrapxi; n <= wrapxi; ++n) {
        const double d = g.xi[ixi] - e.xi[i] + n * Lxi;
        acc += std::exp(-d * d * inv2s2);
      }
      gxi[ixi] = acc;
      sgxi += acc;
    }
    // Grid-normalize the factorized bump: the particle carries mass 1/N.
    const double scale = 1.0 / (sgx * g.lat.dx * sgxi * g.dxi * e.N);
    for (int ix = 0; ix < M; ++ix)
      for (int ixi = 0; ixi < M; ++ixi)
        f.f[static_cast<std::size_t>(ix) * M + ixi] += scale * gx[ix] * gxi[ixi];
  }
  return f;
}

double distribution_distance(const PhaseGrid& g, const std::vector<double>& fvals,
                             const std::vector<double>& gvals) {
  const int M = g.M();
  const std::size_t sz = static_cast<std::size_t>(M) * M;
  if (fvals.size() != sz || gvals.size() != sz)
    throw ConfigError("distribution_distance: arrays do not match the grid");
  Eigen::MatrixXcd D(M, M);
  for (int ix = 0; ix < M; ++ix)
    for (int ixi = 0; ixi < M; ++ixi)
      D(ix, ixi) = fvals[static_cast<std::size_t>(ix) * M + ixi] -
                   gvals[static_cast<std::size_t>(ix) * M + ixi];
  Eigen::MatrixXcd F(M, M);
  for (int j = 0; j < M; ++j)
    for (int a = 0; a < M; ++a) {
      const double ang = 2.0 * M_PI * j * a / M;
      F(j, a) = cxd(std::cos(ang), std::sin(ang));
    }
  // dhat(a,b) = sum_{ix,ixi} D e^{-2 pi i (a ix + b ixi)/M} dx dxi
  const Eigen::MatrixXcd dh =
      (F.adjoint() * D * F.conjugate()) * (g.lat.dx * g.dxi);
  double acc = 0.0;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      const double k = 2.0 * M_PI * dual_label(a, M) / g.lat.L;
      const double m = 2.0 * M_PI * dual_label(b, M) / g.Lxi();
      const double wgt = 1.0 / (1.0 + k * k + m * m);
      acc += wgt * wgt * std::norm(dh(a, b));
    }
  return std::sqrt(acc);
}

double distribution_distance(const PhaseDensity& f, const PhaseDensity& h) {
  if (!same_grid(f.g, h.g))
    throw ConfigError("distribution_distance: densities on different grids");
  return distribution_distance(f.g, f.f, h.f);
}

double distribution_distance(const WignerGrid& w, const PhaseDensity& f) {
  if (!same_grid(w.g, f.g))
    throw ConfigError("distribution_distance: Wigner grid does not match");
  return distribution_distance(f.g, w.w, f.f);
}

}  // namespace mfl
