#include "mfl/hartree.hpp"

#include <cmath>

namespace mfl {

namespace {

void kinetic_half(const Lattice& lat, Field& psi, double dt, double hbar, Dispersion disp) {
    psi = free_propagate(lat, psi, 0.5 * dt, hbar, disp);
}

void potential_full(const Lattice& lat, const PairPotential& w, Field& psi, double dt,
                    double hbar) {
    std::vector<double> rho(lat.M);
    for (int j = 0; j < lat.M; ++j) rho[j] = std::norm(psi.v[j]);
    std::vector<double> veff = convolve_periodic(lat, w, rho);
    for (int j = 0; j < lat.M; ++j) psi.v[j] *= std::polar(1.0, -veff[j] * dt / hbar);
}

} // namespace

HartreeState hartree_step(const Lattice& lat, const PairPotential& w, const HartreeState& s,
                          double dt, Dispersion disp) {
    if (dt == 0.0) throw ConfigError("hartree_step: dt must be nonzero");
    HartreeState out = s;
    kinetic_half(lat, out.psi, dt, s.hbar, disp);
    potential_full(lat, w, out.psi, dt, s.hbar);
    kinetic_half(lat, out.psi, dt, s.hbar, disp);
    out.t = s.t + dt;
    return out;
}

HartreeTrajectory hartree_evolve(const Lattice& lat, const PairPotential& w, const Field& psi0,
                                 double t, double dt, double hbar, int snapshot_every,
                                 Dispersion disp) {
    if (!(dt > 0.0)) throw ConfigError("hartree_evolve: dt must be positive");
    if (t < 0.0) throw ConfigError("hartree_evolve: t must be >= 0");
    if (snapshot_every < 1) throw ConfigError("hartree_evolve: snapshot_every must be >= 1");
    const int nsteps = (t == 0.0) ? 0 : std::max(1, static_cast<int>(std::lround(t / dt)));

    HartreeTrajectory traj;
    traj.dt = dt;
    HartreeState s{psi0, 0.0, hbar};
    auto record = [&](const HartreeState& st) {
        traj.times.push_back(st.t);
        traj.snapshots.push_back(st.psi);
        traj.norms.push_back(norm(lat, st.psi));
        traj.energies.push_back(hartree_energy(lat, w, st.psi, hbar, disp));
    };
    record(s);
    for (int n = 1; n <= nsteps; ++n) {
        s = hartree_step(lat, w, s, dt, disp);
        s.t = n * dt; // avoid accumulated roundoff in the clock
        if (n % snapshot_every == 0 || n == nsteps) record(s);
    }
    return traj;
}

double hartree_energy(const Lattice& lat, const PairPotential& w, const Field& psi, double hbar,
                      Dispersion disp) {
    std::vector<cxd> hat = fft_forward(lat, psi.v);
    double kin = 0.0;
    for (int j = 0; j < lat.M; ++j) {
        double E;
        if (disp == Dispersion::continuum) {
            E = 0.5 * hbar * hbar * lat.k[j] * lat.k[j];
        } else {
            double sn = std::sin(0.5 * lat.k[j] * lat.dx);
            E = 2.0 * hbar * hbar * sn * sn / (lat.dx * lat.dx);
        }
        kin += E * std::norm(hat[j]) / lat.L;
    }
    std::vector<double> rho(lat.M);
    for (int j = 0; j < lat.M; ++j) rho[j] = std::norm(psi.v[j]);
    std::vector<double> veff = convolve_periodic(lat, w, rho);
    double pot = 0.0;
    for (int j = 0; j < lat.M; ++j) pot += rho[j] * veff[j];
    pot *= 0.5 * lat.dx;
    return kin + pot;
}

Field hartree_rhs(const Lattice& lat, const PairPotential& w, const Field& psi, double hbar,
                  Dispersion disp) {
    std::vector<cxd> hat = fft_forward(lat, psi.v);
    for (int j = 0; j < lat.M; ++j) {
        double E;
        if (disp == Dispersion::continuum) {
            E = 0.5 * hbar * hbar * lat.k[j] * lat.k[j];
        } else {
            double sn = std::sin(0.5 * lat.k[j] * lat.dx);
            E = 2.0 * hbar * hbar * sn * sn / (lat.dx * lat.dx);
        }
        hat[j] *= E;
    }
    std::vector<cxd> kin = fft_inverse(lat, hat);
    std::vector<double> rho(lat.M);
    for (int j = 0; j < lat.M; ++j) rho[j] = std::norm(psi.v[j]);
    std::vector<double> veff = convolve_periodic(lat, w, rho);
    Field out = make_field(lat);
    const cxd ih = cxd(0.0, 1.0) * hbar;
    for (int j = 0; j < lat.M; ++j) out.v[j] = (kin[j] + veff[j] * psi.v[j]) / ih;
    return out;
}

} // namespace mfl
