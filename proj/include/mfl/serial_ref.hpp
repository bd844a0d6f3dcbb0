#pragma once
#include <Eigen/Dense>
#include <vector>

#include "mfl/fock.hpp"
#include "mfl/lattice.hpp"
#include "mfl/observables.hpp"
#include "mfl/phasespace.hpp"
#include "mfl/vlasov.hpp"

/// Slow reference implementations with independent arithmetic: direct double
/// sums, dense matrices, and per-pair loops. The fast spectral/tabulated
/// kernels are tested against these, and the benchmark target times the two
/// sides against each other.
namespace mfl::ref {

/// Displacement double sum (w * rho)_j = sum_d w_d rho_{j-d} dx.
std::vector<double> convolve_direct(const Lattice& lat, const PairPotential& w,
                                    const std::vector<double>& rho);

/// Energy functional from raw sums: DFT-by-loop kinetic term plus the
/// (1/2) sum sum |psi_x|^2 w(x-y) |psi_y|^2 dx^2 double sum.
double hartree_energy_direct(const Lattice& lat, const PairPotential& w, const Field& psi,
                             double hbar, Dispersion disp);

/// Kronecker product of dense matrices.
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Free propagator matrix from its defining sum, no FFT involved.
Eigen::MatrixXcd dense_free_propagator(const Lattice& lat, double t, double hbar,
                                       Dispersion disp);

/// Dense conjugated pair interaction on a 2-axis tensor:
/// U0(-t)^{x2} diag(w(x_1 - x_2)) U0(t)^{x2}.
Eigen::MatrixXcd dense_w_t(const Lattice& lat, const PairPotential& w, double t,
                           double hbar);

/// Dense N-boson Hamiltonian assembled from the occupation-basis matrix
/// elements one column at a time.
Eigen::MatrixXcd dense_hamiltonian(const FockBasis& basis, const Lattice& lat,
                                   const PairPotential& w, double hbar);

/// e^{-i H t / hbar} v by full Hermitian eigendecomposition.
Eigen::VectorXcd expm_apply(const Eigen::MatrixXcd& H, const Eigen::VectorXcd& v,
                            double t, double hbar);

/// p-particle reduced density by brute force: expand the Fock state into the
/// dense symmetrized M^N tensor and trace out all but the leading p axes.
Eigen::MatrixXcd reduced_density_direct(const FockBasis& basis, const FockState& s, int p);

/// Wigner transform evaluated term by term from its defining double sums.
WignerGrid wigner_direct(const Lattice& lat, const Field& psi, double hbar);

/// Poisson bracket d_xi a d_x b - d_x a d_xi b via spectral derivatives on the
/// value grid (the production bracket works on the dual side).
Symbol poisson_via_derivatives(const Symbol& a, const Symbol& b);

/// Moyal bracket through the operator route: dequantize((i/hbar)[Q(a),Q(b)]).
Symbol moyal_via_operators(const Symbol& a, const Symbol& b, double hbar);

/// Per-particle force accumulation with explicit libm sine evaluations.
std::vector<double> nbody_forces_direct(const Lattice& lat, const PairPotential& w,
                                        const ParticleEnsemble& e);

} // namespace mfl::ref
