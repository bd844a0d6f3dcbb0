#pragma once
#include <vector>

#include "mfl/lattice.hpp"
#include "mfl/phasespace.hpp"

namespace mfl {

/// Classical phase-space density on the shared (x, xi) grid, stored like
/// WignerGrid: f[ix*M + ixi], nonnegative, mass sum f dx dxi = 1.
struct PhaseDensity {
    PhaseGrid g;
    std::vector<double> f;

    double mass() const;
};

PhaseDensity make_phase_density(const PhaseGrid& g);

/// Clip a Wigner function at zero and renormalize to unit mass.
PhaseDensity phase_density_from_wigner(const WignerGrid& w);

/// V_eff(x) = sum_y w(x-y) rho(y) dx with rho the spatial marginal of f.
/// Constant when f is x-uniform.
std::vector<double> veff(const PhaseDensity& f, const PairPotential& w);

/// sum (xi^2/2) f dx dxi + (1/2) sum rho (w*rho) dx.
double vlasov_energy(const PhaseDensity& f, const PairPotential& w);

/// One Strang-split semi-Lagrangian step: half free transport in x, full force
/// shear in xi with V_eff frozen from the mid-state, half transport again.
/// Each substep is a constant shift per grid line, interpolated with periodic
/// cubic Lagrange weights summing to one, so the scheme conserves mass;
/// interpolation negatives are clipped to zero and the mass renormalized.
/// The xi box is periodic, so the boundary rows must stay essentially empty;
/// if they carry more than 1e-12 of the mass the step throws NumericalError.
/// dt <= 0.1 keeps the splitting error in range.
PhaseDensity vlasov_step(const PhaseDensity& f, double dt, const PairPotential& w);

/// Repeated stepping to time t: round(t/dt) uniform substeps.
PhaseDensity vlasov_evolve(const PhaseDensity& f0, double t, double dt,
                           const PairPotential& w);

/// Classical particles on the torus with 1/N pair coupling.
struct ParticleEnsemble {
    int N = 0;
    std::vector<double> x;  // wrapped to [0, L)
    std::vector<double> xi;
    double t = 0.0;
};

/// F_i = -(1/N) sum_j w'(x_i - x_j), with w' the derivative of the
/// band-limited interpolant of the displacement table (Nyquist line dropped).
/// Each pair is evaluated once and applied with opposite signs, so action
/// equals reaction bitwise.
std::vector<double> nbody_forces(const Lattice& lat, const PairPotential& w,
                                 const ParticleEnsemble& e);

/// (1/2) sum xi_i^2 + (1/(2N)) sum_{i != j} w(x_i - x_j), with w evaluated
/// through the same band-limited interpolant as the forces so the leapfrog
/// drift of this quantity is O(dt^2).
double nbody_energy(const Lattice& lat, const PairPotential& w, const ParticleEnsemble& e);
double nbody_momentum(const ParticleEnsemble& e);

/// Leapfrog (kick-drift-kick) to time t with uniform substeps of size ~dt.
ParticleEnsemble classical_nbody_evolve(const Lattice& lat, const PairPotential& w,
                                        const ParticleEnsemble& e, double t, double dt);

/// Mollified empirical measure: one periodized Gaussian bump of width
/// `smoothing` (same in x and xi) per particle, each bump normalized on the
/// grid so every particle carries mass exactly 1/N. smoothing must be at
/// least the coarser grid spacing.
PhaseDensity empirical_density(const PhaseGrid& g, const ParticleEnsemble& e,
                               double smoothing);

/// Weak-norm distance metrizing distributional convergence on the phase
/// torus: l2 norm of (1 + k^2 + m^2)^{-1} (fhat - ghat) over the double
/// Fourier grid. The raw overload accepts signed arrays (Wigner functions).
double distribution_distance(const PhaseGrid& g, const std::vector<double>& fvals,
                             const std::vector<double>& gvals);
double distribution_distance(const PhaseDensity& f, const PhaseDensity& h);
double distribution_distance(const WignerGrid& w, const PhaseDensity& f);

} // namespace mfl
