#pragma once
#include <vector>

#include "mfl/lattice.hpp"

namespace mfl {

/// i hbar d_t psi = -(hbar^2/2) Delta psi + (w * |psi|^2) psi on the torus.
/// Strang split stepping: half kinetic, full potential phase (density frozen at
/// the substep midpoint), half kinetic. Norm is conserved exactly; the scheme
/// is time symmetric, so stepping +dt then -dt restores the state to roundoff.
struct HartreeState {
    Field psi;
    double t = 0.0;
    double hbar = 1.0;
};

struct HartreeTrajectory {
    std::vector<double> times;
    std::vector<Field> snapshots;
    std::vector<double> norms;
    std::vector<double> energies;
    double dt = 0.0;
};

HartreeState hartree_step(const Lattice& lat, const PairPotential& w, const HartreeState& s,
                          double dt, Dispersion disp = Dispersion::continuum);

/// Evolve to time t with fixed dt (the step count is round(t/dt), so the final
/// time lands within dt/2 of t); snapshots every snapshot_every steps plus the
/// initial and final states.
HartreeTrajectory hartree_evolve(const Lattice& lat, const PairPotential& w, const Field& psi0,
                                 double t, double dt, double hbar, int snapshot_every,
                                 Dispersion disp = Dispersion::continuum);

/// H(psi) = +(hbar^2/2) int |grad psi|^2 + (1/2) int int |psi(x)|^2 w(x-y) |psi(y)|^2.
double hartree_energy(const Lattice& lat, const PairPotential& w, const Field& psi, double hbar,
                      Dispersion disp = Dispersion::continuum);

/// Right-hand side (1/i hbar)(-(hbar^2/2) Delta psi + (w*|psi|^2) psi); the
/// generator-consistency test differentiates hartree_energy against this.
Field hartree_rhs(const Lattice& lat, const PairPotential& w, const Field& psi, double hbar,
                  Dispersion disp = Dispersion::continuum);

} // namespace mfl
