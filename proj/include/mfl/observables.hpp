#pragma once
#include <Eigen/Dense>

#include "mfl/fock.hpp"
#include "mfl/lattice.hpp"

namespace mfl {

/// p-particle kernel as a dense M^p x M^p matrix acting on sample tensors.
/// The quadrature weight dx^p on the input side is folded into the matrix, so
/// application is a plain matvec and expectation values against sample tensors
/// need only one outer dx^p. Operator norm is cached at construction.
struct PKernel {
    int p = 1;
    int M = 0;
    double dx = 0.0;
    bool hermitian = false;
    Eigen::MatrixXcd A;
    double op_norm = 0.0;
};

PKernel make_pkernel(int p, const Lattice& lat, Eigen::MatrixXcd A);

/// Dense matrix of free_propagate: P[x,y] = (dx/L) sum_k e^{-iE_k t/hbar} e^{ik(x-y)}.
Eigen::MatrixXcd free_propagator_matrix(const Lattice& lat, double t, double hbar,
                                        Dispersion disp = Dispersion::continuum);

PKernel identity_kernel(int p, const Lattice& lat);
/// Multiplication by a(x): diagonal matrix, no dx factor (the delta kernel eats it).
PKernel multiplication_kernel(const Lattice& lat, const std::vector<double>& a);
/// Rank-1 projector onto phi: A[x,y] = phi_x conj(phi_y) dx.
PKernel projector_kernel(const Lattice& lat, const Field& phi);
/// Function of momentum g(k): A[x,y] = (dx/L) sum_k g_k e^{ik(x-y)}.
PKernel momentum_function_kernel(const Lattice& lat, const std::vector<double>& gk);
PKernel tensor_product(const PKernel& a, const PKernel& b);
/// Free Heisenberg evolution of the kernel: conjugation by the free flow on
/// every axis, a_t = U0(-t)^(p) a U0(t)^(p).
PKernel heisenberg_free(const PKernel& a, double t, double hbar,
                        Dispersion disp = Dispersion::continuum);

/// Trace-1 p-particle reduced density in the site basis. For an embedded
/// product state psi the p=1 matrix is psi psi^* dx, i.e. the same dx-absorbed
/// convention as PKernel, so expectations are plain traces.
struct ReducedDensity {
    int p = 1;
    int M = 0;
    int N = 0;
    Eigen::MatrixXcd rho;
};

/// N(N-1)...(N-p+1)/N^p.
double scaling_factor(int N, int p);

ReducedDensity reduced_density(const FockBasis& basis, const FockState& s, int p);
ReducedDensity density_from_field(const Lattice& lat, const Field& psi);

/// <Psi, A_N^{(p)} Psi> = scaling_factor(N,p) * trace(A rho^{(p)}).
cxd expect_p(const FockBasis& basis, const FockState& s, const PKernel& a);
/// <psi^(x)p, a psi^(x)p>.
cxd hartree_expect(const Lattice& lat, const Field& psi, const PKernel& a);

/// (1/2)||rho - rho'||_1 via the spectrum of the Hermitian difference.
double trace_distance(const ReducedDensity& g1, const ReducedDensity& g2);

} // namespace mfl
