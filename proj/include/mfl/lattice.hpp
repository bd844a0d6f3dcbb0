#pragma once
#include <complex>
#include <vector>

#include "mfl/errors.hpp"

namespace mfl {

using cxd = std::complex<double>;

/// Periodic 1D lattice: sites x_j = j*dx, j = 0..M-1, dx = L/M.
/// Wavenumbers follow FFT ordering; index j carries k = 2*pi*m/L with
/// m = j for j < M/2 and m = j-M otherwise (Nyquist at m = -M/2).
struct Lattice {
    int M = 0;
    double L = 0.0;
    double dx = 0.0;
    std::vector<double> k; // FFT-ordered wavenumbers

    double x(int j) const { return j * dx; }
};

/// M must be even and >= 4 so the wavenumber grid is symmetric; L > 0.
Lattice build_lattice(int M, double L);

/// Complex field sampled on lattice sites.
struct Field {
    std::vector<cxd> v;

    int size() const { return static_cast<int>(v.size()); }
};

Field make_field(const Lattice& lat);

/// l2 norm with dx quadrature: sqrt(sum |psi_j|^2 dx).
double norm(const Lattice& lat, const Field& psi);
void normalize(const Lattice& lat, Field& psi);
cxd inner(const Lattice& lat, const Field& a, const Field& b);

/// Forward transform carries dx, inverse carries 1/L:
///   psi_hat[m] = dx * sum_j psi_j exp(-i k_m x_j)
///   psi_j = (1/L) * sum_m psi_hat[m] exp(+i k_m x_j)
/// so Parseval reads sum_j |psi_j|^2 dx = (1/L) sum_m |psi_hat[m]|^2.
std::vector<cxd> fft_forward(const Lattice& lat, const std::vector<cxd>& in);
std::vector<cxd> fft_inverse(const Lattice& lat, const std::vector<cxd>& in);

/// Kinetic dispersion used by the free flow: continuum -(hbar^2/2) d_xx has
/// Fourier eigenvalue (hbar^2/2) k^2; the 3-point lattice Laplacian has
/// (2 hbar^2/dx^2) sin^2(k dx/2). The lattice branch matches the hopping
/// Hamiltonian of the exact N-boson module.
enum class Dispersion { continuum, lattice3pt };

/// e^{i Delta t hbar/2} psi: multiplication by exp(-i E(k) t / hbar) in
/// Fourier space, E(k) per the dispersion switch. Unitary, diagonal.
Field free_propagate(const Lattice& lat, const Field& psi, double t, double hbar,
                     Dispersion disp = Dispersion::continuum);

/// Real even pair potential sampled on displacement sites: w[d] = w(x_d),
/// circular evenness w[d] == w[M-d].
struct PairPotential {
    std::vector<double> w;
    double winf = 0.0;            // max_d |w_d|
    std::vector<double> what;     // real even Fourier coefficients, dx convention

    double operator()(int d, int M) const { return w[((d % M) + M) % M]; }
};

PairPotential make_pair_potential(const Lattice& lat, const std::vector<double>& samples);

/// Periodic convolution with dx quadrature: (w * rho)_j = sum_d w_d rho_{j-d} dx.
/// Spectral path; the direct O(M^2) sum lives in serial_ref as the cross-check.
std::vector<double> convolve_periodic(const Lattice& lat, const PairPotential& w,
                                      const std::vector<double>& rho);

/// sigma-weighted Fourier sum norm of the potential: sum_m |what_m| e^{sigma |k_m|}
/// in the coefficient convention (what_m / L), used by the uniform tree bounds.
double potential_sigma_norm(const Lattice& lat, const PairPotential& w, double sigma);

// Built-in potential families.
PairPotential cosine_potential(const Lattice& lat, double a);
PairPotential gaussian_bump_potential(const Lattice& lat, double a, double sigma);
PairPotential constant_potential(const Lattice& lat, double c);

} // namespace mfl
