#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "mfl/lattice.hpp"
#include "mfl/serial_ref.hpp"

using namespace mfl;

namespace {

Field random_field(const Lattice& lat, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Field psi = make_field(lat);
    for (auto& c : psi.v) c = cxd(nd(gen), nd(gen));
    normalize(lat, psi);
    return psi;
}

Field plane_wave(const Lattice& lat, int m) {
    Field psi = make_field(lat);
    const double k = 2.0 * M_PI * m / lat.L;
    for (int j = 0; j < lat.M; ++j) psi.v[j] = std::polar(1.0 / std::sqrt(lat.L), k * lat.x(j));
    return psi;
}

} // namespace

TEST_CASE("lattice geometry and dual grid") {
    const Lattice lat = build_lattice(8, 2.0 * M_PI);
    CHECK(lat.dx == doctest::Approx(M_PI / 4.0).epsilon(1e-15));
    CHECK(lat.x(0) == 0.0);
    CHECK(lat.x(7) == doctest::Approx(7.0 * M_PI / 4.0));
    // FFT ordering: k[0..M/2-1] ascending nonnegative, then negative modes
    CHECK(lat.k[0] == 0.0);
    CHECK(lat.k[1] == doctest::Approx(1.0));
    CHECK(lat.k[3] == doctest::Approx(3.0));
    CHECK(lat.k[4] == doctest::Approx(-4.0));
    CHECK(lat.k[7] == doctest::Approx(-1.0));
    CHECK_THROWS_AS(build_lattice(7, 1.0), ConfigError);
    CHECK_THROWS_AS(build_lattice(2, 1.0), ConfigError);
    CHECK_THROWS_AS(build_lattice(8, -1.0), ConfigError);
}

TEST_CASE("fft round trip and Parseval") {
    const Lattice lat = build_lattice(16, 5.0);
    const Field psi = random_field(lat, 11);
    const std::vector<cxd> hat = fft_forward(lat, psi.v);
    const std::vector<cxd> back = fft_inverse(lat, hat);
    for (int j = 0; j < lat.M; ++j) CHECK(std::abs(back[j] - psi.v[j]) < 1e-14);
    double s2 = 0.0;
    for (const auto& c : hat) s2 += std::norm(c);
    // sum |psi_j|^2 dx = (1/L) sum |hat_m|^2
    CHECK(s2 / lat.L == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("plane waves are free-flow eigenstates") {
    const Lattice lat = build_lattice(8, 2.0 * M_PI);
    const double t = 0.37, hbar = 0.5;
    for (const int m : {0, 1, 3, -2}) {
        const Field psi = plane_wave(lat, m);
        const double k = 2.0 * M_PI * m / lat.L;
        const double e_cont = 0.5 * hbar * hbar * k * k;
        const double e_lat = 2.0 * hbar * hbar / (lat.dx * lat.dx) *
                             std::pow(std::sin(0.5 * k * lat.dx), 2);
        const Field uc = free_propagate(lat, psi, t, hbar, Dispersion::continuum);
        const Field ul = free_propagate(lat, psi, t, hbar, Dispersion::lattice3pt);
        for (int j = 0; j < lat.M; ++j) {
            CHECK(std::abs(uc.v[j] - psi.v[j] * std::polar(1.0, -e_cont * t / hbar)) < 1e-13);
            CHECK(std::abs(ul.v[j] - psi.v[j] * std::polar(1.0, -e_lat * t / hbar)) < 1e-13);
        }
    }
}

TEST_CASE("free flow is unitary and composes") {
    const Lattice lat = build_lattice(12, 3.0);
    const Field psi = random_field(lat, 5);
    const double hbar = 0.7;
    const Field a = free_propagate(lat, free_propagate(lat, psi, 0.21, hbar), 0.34, hbar);
    const Field b = free_propagate(lat, psi, 0.55, hbar);
    for (int j = 0; j < lat.M; ++j) CHECK(std::abs(a.v[j] - b.v[j]) < 1e-13);
    CHECK(norm(lat, b) == doctest::Approx(1.0).epsilon(1e-13));
    // t then -t restores the state
    const Field c = free_propagate(lat, b, -0.55, hbar);
    for (int j = 0; j < lat.M; ++j) CHECK(std::abs(c.v[j] - psi.v[j]) < 1e-13);
}

TEST_CASE("free wave packet drifts at group velocity") {
    const Lattice lat = build_lattice(64, 2.0 * M_PI);
    const int m0 = 3;
    Field psi = make_field(lat);
    for (int j = 0; j < lat.M; ++j) {
        double g = 0.0;
        for (int n = -2; n <= 2; ++n)
            g += std::exp(-std::pow(lat.x(j) - M_PI + n * lat.L, 2) / (4.0 * 0.35 * 0.35));
        psi.v[j] = g * std::polar(1.0, 2.0 * M_PI * m0 * lat.x(j) / lat.L);
    }
    normalize(lat, psi);
    const double hbar = 1.0, t = 0.12;
    const Field ut = free_propagate(lat, psi, t, hbar, Dispersion::continuum);
    // circular centroid moves by hbar*k0*t
    auto centroid = [&](const Field& f) {
        cxd z = 0.0;
        for (int j = 0; j < lat.M; ++j) z += std::norm(f.v[j]) * std::polar(1.0, lat.x(j));
        return std::arg(z);
    };
    // arg() has its branch cut at the packet center, so wrap the difference
    const double shift = std::remainder(centroid(ut) - centroid(psi), 2.0 * M_PI);
    CHECK(shift == doctest::Approx(hbar * m0 * t).epsilon(5e-3));
}

TEST_CASE("spectral convolution matches the double sum") {
    const Lattice lat = build_lattice(10, 4.0);
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    std::vector<double> rho(lat.M);
    for (auto& r : rho) r = ud(gen);
    for (const PairPotential& w :
         {cosine_potential(lat, 1.3), gaussian_bump_potential(lat, 0.9, 0.6),
          constant_potential(lat, 0.4)}) {
        const std::vector<double> fast = convolve_periodic(lat, w, rho);
        const std::vector<double> slow = ref::convolve_direct(lat, w, rho);
        for (int j = 0; j < lat.M; ++j) CHECK(fast[j] == doctest::Approx(slow[j]).epsilon(1e-12));
    }
}

TEST_CASE("pair potential validation and symmetry") {
    const Lattice lat = build_lattice(8, 2.0);
    std::vector<double> odd(lat.M, 0.0);
    odd[1] = 1.0; // w(d) != w(-d)
    CHECK_THROWS_AS(make_pair_potential(lat, odd), ConfigError);
    const PairPotential w = gaussian_bump_potential(lat, 1.0, 0.3);
    for (int d = 0; d < lat.M; ++d) CHECK(w(d, lat.M) == doctest::Approx(w(-d, lat.M)));
    CHECK(w.winf == doctest::Approx(*std::max_element(w.w.begin(), w.w.end())));
}

TEST_CASE("sigma norm of the cosine potential") {
    // w = a cos(2 pi x / L) has coefficient a/2 on the modes k = +-2pi/L, so
    // the weighted sum is a * exp(sigma * 2pi/L).
    const Lattice lat = build_lattice(16, 2.0 * M_PI);
    const PairPotential w = cosine_potential(lat, 1.0);
    CHECK(potential_sigma_norm(lat, w, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(potential_sigma_norm(lat, w, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const PairPotential c = constant_potential(lat, 2.5);
    CHECK(potential_sigma_norm(lat, c, 3.0) == doctest::Approx(2.5).epsilon(1e-12));
}
