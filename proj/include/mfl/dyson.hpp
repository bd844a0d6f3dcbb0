#pragma once
#include <limits>
#include <vector>

#include "mfl/lattice.hpp"
#include "mfl/observables.hpp"

namespace mfl {

/// Tensor vectors on m lattice axes: length M^m, row-major with axis 0 slowest.

/// Conjugated pair interaction at time t acting matrix-free on axes (i,j) of an
/// m-axis tensor: flow both axes forward by t, multiply by w(x_i - x_j), flow
/// back. Matches the dense construction U0(-t) diag(w) U0(t).
void apply_w_t(const Lattice& lat, const PairPotential& w, std::vector<cxd>& v, int m, int i,
               int j, double t, double hbar);

/// Iterated-commutator amplitude applied to a (p+n)-axis tensor. Level l
/// contributes (i/hbar) sum_i [w_{t_l}^{i,p+l}, .], with t_1 >= ... >= t_n; the
/// base kernel acts on the first p axes as given (callers pass the
/// free-evolved kernel when an outer time is meant). cap limits p+n.
std::vector<cxd> tree_amplitude_apply(const Lattice& lat, const PairPotential& w,
                                      const PKernel& a, int n, const std::vector<double>& times,
                                      double hbar, const std::vector<cxd>& v, int cap = 4);

/// <psi^{(p+n)}, g^{(n;p)} psi^{(p+n)}> with dx^{p+n} quadrature.
cxd tree_expectation(const Lattice& lat, const PairPotential& w, const PKernel& a, int n,
                     const std::vector<double>& times, double hbar, const Field& psi,
                     int cap = 4);

/// Gauss-Legendre nodes/weights on [0,1]; iterated per level over the nested
/// simplex 0 <= t_n <= ... <= t_1 <= t.
struct SimplexQuadrature {
    int q = 8;
    std::vector<double> nodes;   // on (0,1)
    std::vector<double> weights; // sum = 1
};
SimplexQuadrature make_simplex_quadrature(int q);

struct DysonResult {
    int p = 1;
    int k = 0;
    double epsilon = 0.0;
    double hbar = 1.0;
    double t = 0.0;
    std::vector<double> terms;          // n = 0..k
    double sum = 0.0;
    std::vector<double> bounds_fixed;   // per order
    std::vector<double> bounds_uniform; // per order (needs sigma-norms, else NaN)
    double residual = std::numeric_limits<double>::quiet_NaN();
};

/// Truncated expansion of the Heisenberg expectation around the free flow; the
/// n-th term integrates the order-n amplitude (base kernel free-evolved to the
/// outer time) over the time simplex.
DysonResult dyson_series_expectation(const Lattice& lat, const PairPotential& w, const PKernel& a,
                                     const Field& psi, double t, int k, double hbar,
                                     const SimplexQuadrature& quad, int cap = 4,
                                     double w_sigma_norm = std::numeric_limits<double>::quiet_NaN(),
                                     double a_sigma_norm = std::numeric_limits<double>::quiet_NaN());

/// ceil(1/sqrt(eps)), at least 1.
int k_opt(double eps);

/// ((p+n)!/p!) (2 winf / hbar)^n anorm.
double fixed_hbar_bound(int n, int p, double hbar, double winf, double anorm);
/// 2^n (e^2 dn^2)^{-n} ((p+n)!/p!) wsig^n asig with dn = 1/(2n); n=0 gives asig.
double uniform_norm_bound(int n, int p, double wsig, double asig);

/// Functional-derivative side of the same expansion: n nested canonical
/// brackets of the interaction energy against the base observable functional,
/// each nesting level carrying a net factor i/hbar, evaluated by central finite
/// differences (step h_fd on Re/Im parts) for the nested functional and the
/// exact gradient for the interaction energy. n <= 2.
cxd nested_poisson_oracle(const Lattice& lat, const PairPotential& w, const PKernel& a,
                          const Field& psi, const std::vector<double>& times, double hbar,
                          double h_fd = 1e-4);

} // namespace mfl
