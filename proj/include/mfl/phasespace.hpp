#pragma once
#include <vector>

#include "mfl/lattice.hpp"
#include "mfl/observables.hpp"

namespace mfl {

/// Square (x, xi) grid: x from the lattice, xi_i = hbar * 2*pi*(i - M/2)/L in
/// ascending order. The dual grid carries S_mu = 2*pi*mu/L and
/// Sigma_nu = nu*dx/hbar; with these pairings the half-angle twists below are
/// exact rational multiples of pi and the Wigner/Weyl pair closes exactly.
struct PhaseGrid {
    Lattice lat;
    double hbar = 1.0;
    double dxi = 0.0;
    std::vector<double> xi; // ascending

    int M() const { return lat.M; }
    double Lxi() const { return dxi * lat.M; }
    double S(int mu) const { return 2.0 * M_PI * mu / lat.L; }
    double Sigma(int nu) const { return nu * lat.dx / hbar; }
};

PhaseGrid make_phase_grid(const Lattice& lat, double hbar);
bool same_grid(const PhaseGrid& a, const PhaseGrid& b);

/// signed dual label of storage index a (FFT order), and back
inline int dual_label(int a, int M) { return (a < M / 2) ? a : a - M; }
inline int dual_index(int mu, int M) { return ((mu % M) + M) % M; }

/// Phase-space function with synchronized value-side (M x M, [ix*M+ixi]) and
/// dual-side (M x M, [imu*M+inu], FFT order) representations.
struct Symbol {
    PhaseGrid g;
    std::vector<cxd> vals;
    std::vector<cxd> dual;
};

Symbol symbol_from_values(const PhaseGrid& g, std::vector<cxd> vals);
Symbol symbol_from_dual(const PhaseGrid& g, std::vector<cxd> dual);
/// Convenience: real symbol from a single dual mode c*e^{i(S x + Sigma xi)} plus
/// its conjugate mirror.
Symbol symbol_single_mode(const PhaseGrid& g, int mu, int nu, cxd c);

/// sum |c(mu,nu)| e^{sigma(|S_mu| + |Sigma_nu|)} over the dual grid.
double sigma_norm(const Symbol& s, double sigma);

/// Twisted-convolution bracket on the dual side:
/// out(s) = (2/hbar) sum ĝ(s1) ĝ'(s2) sin(hbar (s2 ^ s1)/2), s = s1 + s2,
/// with the wedge phases reduced exactly to pi*(nu2*mu1 - mu2*nu1)/M.
/// Throws if a nonnegligible output mode falls outside the dual band.
Symbol moyal_bracket(const Symbol& a, const Symbol& b, double hbar);
/// Classical limit of the same convolution (sin replaced by its argument).
Symbol poisson_bracket(const Symbol& a, const Symbol& b);

struct M1Check {
    double lhs = 0.0;
    double rhs = 0.0;
    bool ok = false;
};
/// ||{w,g}||_{sigma-delta} <= (1/(e^2 delta^2)) ||w||_sigma ||g||_sigma.
M1Check check_m1_bound(const Symbol& w, const Symbol& g, double sigma, double delta);

/// Symbol -> operator. Real symbols give Hermitian kernels; constants give the
/// identity. Rejects symbols with weight on the Nyquist dual lines (their mirror
/// mode is missing, so the half-angle twist is ambiguous there).
PKernel weyl_quantize(const Symbol& tau, double hbar);
/// Operator -> symbol; exact inverse of weyl_quantize on the guarded band.
Symbol weyl_dequantize(const PKernel& T, const PhaseGrid& g);

struct WignerGrid {
    PhaseGrid g;
    std::vector<double> w; // [ix*M + ixi]
    double im_residue = 0.0;
    double mass() const;
};

WignerGrid wigner_1p(const Lattice& lat, const Field& psi, double hbar);
WignerGrid wigner_reduced(const ReducedDensity& rho, const PhaseGrid& g);
/// sum tau * W * dx * dxi.
double wigner_pairing(const Symbol& tau, const WignerGrid& W);
/// W(x,xi) -> W(x - xi*t, xi) by spectral shift per xi row.
WignerGrid wigner_free_transport(const WignerGrid& W, double t);

} // namespace mfl
