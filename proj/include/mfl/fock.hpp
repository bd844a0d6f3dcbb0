#pragma once
#include <cstdint>
#include <vector>

#include "mfl/lattice.hpp"

namespace mfl {

/// Symmetric N-boson sector over M sites: occupation vectors (n_1..n_M) with
/// sum N, enumerated in ascending lexicographic order. dim = C(N+M-1, N).
/// rank() inverts the enumeration by counting lexicographic predecessors with
/// a binomial table, so no hashing is needed.
struct FockBasis {
    int N = 0;
    int M = 0;
    std::vector<uint8_t> occ;                 // dim x M, row-major
    std::vector<std::vector<uint64_t>> binom; // binom[n][k], n <= N+M

    std::size_t dim() const { return occ.size() / static_cast<std::size_t>(M); }
    const uint8_t* row(std::size_t r) const { return occ.data() + r * static_cast<std::size_t>(M); }
    std::size_t rank(const uint8_t* n) const;
};

/// Cap guards the sector size, default 2e6 states.
FockBasis enumerate_basis(int N, int M, std::size_t cap = 2000000);

struct FockState {
    std::vector<cxd> c;
    double t = 0.0;
    double hbar = 1.0;
};

double fock_norm(const FockState& s);

/// Product (coherent-per-particle) state: amplitude on occupation n is
/// sqrt(N!/prod n_j!) prod_j (psi_j sqrt(dx))^{n_j}; unit l2 norm when psi is
/// normalized.
FockState embed_product_state(const FockBasis& basis, const Lattice& lat, const Field& psi,
                              double hbar);

/// H = sum_j h0-hopping + (1/2N) sum_{a,b} w_{a-b} (n_a n_b - delta_{ab} n_a),
/// with the 3-point kinetic term: diagonal (hbar^2/dx^2) N plus hops of
/// amplitude -(hbar^2/2dx^2) sqrt(n_a (n_b + 1)) between neighbours.
/// Precomputes the hop table when the memory budget allows; matvec is
/// row-parallel and deterministic.
struct FockOp {
    const FockBasis* basis = nullptr;
    const Lattice* lat = nullptr;
    double hbar = 1.0;
    std::vector<double> diag;
    std::vector<uint32_t> hop_idx; // dim x 2M column indices (or empty)
    std::vector<double> hop_coef;  // matching amplitudes
    bool tabulated = false;
    double hop_scale = 0.0;

    void apply(const std::vector<cxd>& in, std::vector<cxd>& out) const;
};

FockOp make_fock_op(const FockBasis& basis, const Lattice& lat, const PairPotential& w,
                    double hbar);

/// One-shot matvec H|s> for tests and expectation values.
FockState apply_h(const FockBasis& basis, const Lattice& lat, const PairPotential& w,
                  const FockState& s);

/// Krylov (Lanczos) propagator e^{-iHt/hbar}. Substeps adapt to the residual
/// estimate; throws NumericalError if the substep underflows.
FockState evolve_exact(const FockBasis& basis, const Lattice& lat, const PairPotential& w,
                       const FockState& s, double t, double tol = 1e-9, int max_krylov = 40);

} // namespace mfl
