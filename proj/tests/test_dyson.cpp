#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "mfl/dyson.hpp"
#include "mfl/harness.hpp"
#include "mfl/hartree.hpp"
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

std::vector<cxd> random_tensor(std::size_t n, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<cxd> v(n);
    for (auto& c : v) c = cxd(nd(gen), nd(gen));
    return v;
}

PKernel random_hermitian(int p, const Lattice& lat, uint64_t seed) {
    const int D = static_cast<int>(std::pow(lat.M, p));
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXcd A(D, D);
    for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j) A(i, j) = cxd(nd(gen), nd(gen));
    A = (A + A.adjoint().eval()) / 2.0;
    return make_pkernel(p, lat, A);
}

double tensor_dist(const std::vector<cxd>& a, const std::vector<cxd>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("conjugated interaction matches the dense construction") {
    const Lattice lat = build_lattice(6, 2.0 * M_PI);
    const PairPotential w = cosine_potential(lat, 1.3);
    const double t = 0.3, hbar = 0.7;
    const std::size_t D2 = static_cast<std::size_t>(lat.M) * lat.M;
    std::vector<cxd> v = random_tensor(D2, 3);
    const Eigen::MatrixXcd W = ref::dense_w_t(lat, w, t, hbar);
    Eigen::VectorXcd ve(D2);
    for (std::size_t i = 0; i < D2; ++i) ve[i] = v[i];
    const Eigen::VectorXcd wv = W * ve;
    apply_w_t(lat, w, v, 2, 0, 1, t, hbar);
    for (std::size_t i = 0; i < D2; ++i) CHECK(std::abs(v[i] - wv[i]) < 1e-11);
}

TEST_CASE("conjugated interaction on non-adjacent axes of a wider tensor") {
    // embed a two-axis tensor into axes (0,2) of a three-axis one with a basis
    // vector on axis 1; the action must factor through the dense two-axis form
    const Lattice lat = build_lattice(4, 2.0 * M_PI);
    const PairPotential w = gaussian_bump_potential(lat, 1.0, 0.6);
    const double t = 0.22, hbar = 0.9;
    const int M = lat.M;
    std::vector<cxd> y = random_tensor(static_cast<std::size_t>(M) * M, 7);
    const int c = 2;
    std::vector<cxd> v(static_cast<std::size_t>(M) * M * M, 0.0);
    for (int x0 = 0; x0 < M; ++x0)
        for (int x2 = 0; x2 < M; ++x2) v[(x0 * M + c) * M + x2] = y[x0 * M + x2];
    apply_w_t(lat, w, v, 3, 0, 2, t, hbar);
    apply_w_t(lat, w, y, 2, 0, 1, t, hbar);
    for (int x0 = 0; x0 < M; ++x0)
        for (int x2 = 0; x2 < M; ++x2)
            CHECK(std::abs(v[(x0 * M + c) * M + x2] - y[x0 * M + x2]) < 1e-12);
}

TEST_CASE("zero time reduces to plain multiplication") {
    const Lattice lat = build_lattice(6, 3.0);
    const PairPotential w = gaussian_bump_potential(lat, 1.1, 0.5);
    std::vector<cxd> v = random_tensor(static_cast<std::size_t>(lat.M) * lat.M, 11);
    std::vector<cxd> u = v;
    apply_w_t(lat, w, v, 2, 0, 1, 0.0, 1.0);
    for (int i = 0; i < lat.M; ++i)
        for (int j = 0; j < lat.M; ++j)
            CHECK(std::abs(v[i * lat.M + j] - w(i - j, lat.M) * u[i * lat.M + j]) < 1e-12);
}

TEST_CASE("flat coupling commutes away: first-order term vanishes") {
    const Lattice lat = build_lattice(6, 2.0 * M_PI);
    const PairPotential w = constant_potential(lat, 0.9);
    const Field psi = random_field(lat, 13);
    const PKernel a = random_hermitian(1, lat, 201);
    const cxd g1 = tree_expectation(lat, w, a, 1, {0.2}, 1.0, psi);
    CHECK(std::abs(g1) < 1e-12);
}

TEST_CASE("first-order amplitude equals the dense commutator") {
    const Lattice lat = build_lattice(6, 2.0 * M_PI);
    const PairPotential w = cosine_potential(lat, 1.0);
    const double s = 0.35, hbar = 0.8;
    const PKernel a = random_hermitian(1, lat, 23);
    const std::size_t D2 = static_cast<std::size_t>(lat.M) * lat.M;
    const std::vector<cxd> v = random_tensor(D2, 29);
    const std::vector<cxd> g =
        tree_amplitude_apply(lat, w, a, 1, {s}, hbar, v);
    const Eigen::MatrixXcd W = ref::dense_w_t(lat, w, s, hbar);
    const Eigen::MatrixXcd A1 =
        ref::kron(a.A, Eigen::MatrixXcd::Identity(lat.M, lat.M));
    const Eigen::MatrixXcd G = cxd(0.0, 1.0 / hbar) * (W * A1 - A1 * W);
    Eigen::VectorXcd ve(D2);
    for (std::size_t i = 0; i < D2; ++i) ve[i] = v[i];
    const Eigen::VectorXcd ge = G * ve;
    for (std::size_t i = 0; i < D2; ++i) CHECK(std::abs(g[i] - ge[i]) < 1e-11);
}

TEST_CASE("tree terms match the functional-bracket finite differences") {
    const Lattice lat = build_lattice(6, 2.0 * M_PI);
    const PairPotential w = cosine_potential(lat, 1.0);
    const Field psi = random_field(lat, 31);
    for (const double hbar : {1.0, 0.7}) {
        const PKernel a = random_hermitian(1, lat, 301);
        const cxd tree = tree_expectation(lat, w, a, 1, {0.3}, hbar, psi);
        const cxd fd = nested_poisson_oracle(lat, w, a, psi, {0.3}, hbar);
        CHECK(std::abs(tree - fd) < 5e-4 * std::max(1.0, std::abs(tree)));
    }
    // second order, two distinct sample times
    const PKernel a = random_hermitian(1, lat, 302);
    const cxd tree2 = tree_expectation(lat, w, a, 2, {0.25, 0.1}, 1.0, psi);
    const cxd fd2 = nested_poisson_oracle(lat, w, a, psi, {0.25, 0.1}, 1.0);
    CHECK(std::abs(tree2 - fd2) < 5e-4 * std::max(1.0, std::abs(tree2)));
}

TEST_CASE("series with no interaction collapses to the free heisenberg value") {
    const Lattice lat = build_lattice(8, 2.0 * M_PI);
    const PairPotential w0 = constant_potential(lat, 0.0);
    const Field psi = random_field(lat, 37);
    const PKernel a = random_hermitian(1, lat, 303);
    const SimplexQuadrature q = make_simplex_quadrature(8);
    const DysonResult r = dyson_series_expectation(lat, w0, a, psi, 0.5, 2, 1.0, q);
    const Field ut = free_propagate(lat, psi, 0.5, 1.0);
    const double want = hartree_expect(lat, ut, a).real();
    CHECK(r.terms[0] == doctest::Approx(want).epsilon(1e-12));
    CHECK(std::abs(r.terms[1]) < 1e-12);
    CHECK(std::abs(r.terms[2]) < 1e-12);
    CHECK(r.sum == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("simplex quadrature is converged at the working order") {
    const Lattice lat = build_lattice(6, 2.0 * M_PI);
    const PairPotential w = cosine_potential(lat, 1.0);
    const Field psi = random_field(lat, 41);
    const PKernel a = random_hermitian(1, lat, 304);
    const DysonResult r8 =
        dyson_series_expectation(lat, w, a, psi, 0.4, 2, 1.0, make_simplex_quadrature(8));
    const DysonResult r16 =
        dyson_series_expectation(lat, w, a, psi, 0.4, 2, 1.0, make_simplex_quadrature(16));
    CHECK(std::abs(r8.terms[1] - r16.terms[1]) < 1e-10);
    CHECK(std::abs(r8.terms[2] - r16.terms[2]) < 1e-10);
    // weights of the reference rule integrate the simplex volume exactly
    const SimplexQuadrature q = make_simplex_quadrature(8);
    double tot = 0.0;
    for (const double wt : q.weights) tot += wt;
    CHECK(tot == doctest::Approx(1.0).epsilon(1e-13));
    CHECK_THROWS_AS(make_simplex_quadrature(0), ConfigError);
}

TEST_CASE("hermitian base kernels give real terms") {
    const Lattice lat = build_lattice(6, 2.0 * M_PI);
    const PairPotential w = gaussian_bump_potential(lat, 1.0, 0.7);
    const Field psi = random_field(lat, 43);
    const PKernel a = random_hermitian(1, lat, 305);
    const cxd g1 = tree_expectation(lat, w, a, 1, {0.3}, 1.0, psi);
    const cxd g2 = tree_expectation(lat, w, a, 2, {0.3, 0.12}, 1.0, psi);
    CHECK(std::abs(g1.imag()) < 1e-11);
    CHECK(std::abs(g2.imag()) < 1e-11);
}

TEST_CASE("truncation depth selector") {
    CHECK(k_opt(1.0) == 1);
    CHECK(k_opt(0.25) == 2);
    CHECK(k_opt(0.2) == 3);
    CHECK(k_opt(0.1) == 4);
    CHECK(k_opt(0.0625) == 4);
    CHECK(k_opt(0.05) == 5);
    CHECK(k_opt(100.0) == 1);
    CHECK_THROWS_AS(k_opt(0.0), ConfigError);
}

TEST_CASE("order bounds at pinned arguments") {
    CHECK(fixed_hbar_bound(0, 1, 1.0, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(fixed_hbar_bound(1, 1, 1.0, 1.0, 1.0) == doctest::Approx(4.0));
    CHECK(fixed_hbar_bound(3, 1, 1.0, 1.0, 1.0) == doctest::Approx(192.0));
    CHECK(fixed_hbar_bound(2, 1, 0.5, 1.0, 1.0) == doctest::Approx(96.0));
    CHECK(fixed_hbar_bound(1, 2, 1.0, 1.0, 2.0) == doctest::Approx(12.0));
    const double e2 = std::exp(2.0);
    CHECK(uniform_norm_bound(0, 1, 1.0, 1.5) == doctest::Approx(1.5));
    CHECK(uniform_norm_bound(1, 1, 1.0, 1.0) == doctest::Approx(16.0 / e2).epsilon(1e-12));
    // the uniform bound carries no 1/hbar; n=2 has dn = 1/4
    CHECK(uniform_norm_bound(2, 1, 1.0, 1.0) ==
          doctest::Approx(6144.0 / (e2 * e2)).epsilon(1e-12));
}

TEST_CASE("series terms are the coupling-strength taylor coefficients") {
    // Term n of the expansion is homogeneous of degree n in the pair coupling,
    // so scaling the potential by lambda and fitting odd/even parts of the
    // exact mean-field expectation in lambda recovers the terms one by one.
    // The mean-field runs use Richardson-extrapolated Strang steps; nothing in
    // this route touches the commutator pipeline.
    const double eps = 0.1;
    const Lattice lat = build_lattice(8, 2.0 * M_PI);
    const PairPotential w = cosine_potential(lat, 1.0);
    const double t = eps / w.winf;
    const PKernel a = observable_family("position_window", lat);
    for (const double hbar : {1.0, 0.5}) {
        const Field psi0 = initial_family("gaussian", lat, M_PI, 0.8, 0.0, hbar);
        auto meanfield = [&](double lam) {
            const PairPotential wl = cosine_potential(lat, lam);
            auto run = [&](double dt) {
                const HartreeTrajectory tr = hartree_evolve(lat, wl, psi0, t, dt, hbar, 1 << 30);
                return hartree_expect(lat, tr.snapshots.back(), a).real();
            };
            const double coarse = run(2e-4), fine = run(1e-4);
            return (4.0 * fine - coarse) / 3.0;
        };
        const double A0 = meanfield(0.0);
        const double lams[3] = {1.0, 0.75, 0.5};
        Eigen::Matrix3d Mo, Me;
        Eigen::Vector3d vo, ve;
        for (int i = 0; i < 3; ++i) {
            const double l = lams[i];
            const double Ap = meanfield(l), Am = meanfield(-l);
            vo(i) = 0.5 * (Ap - Am);
            ve(i) = 0.5 * (Ap + Am) - A0;
            Mo.row(i) << l, l * l * l, l * l * l * l * l;
            Me.row(i) << l * l, l * l * l * l, l * l * l * l * l * l;
        }
        const Eigen::Vector3d to = Mo.fullPivLu().solve(vo);
        const Eigen::Vector3d te = Me.fullPivLu().solve(ve);
        const SimplexQuadrature q = make_simplex_quadrature(8);
        const DysonResult r = dyson_series_expectation(lat, w, a, psi0, t, 3, hbar, q);
        CHECK(std::abs(r.terms[1] - to(0)) < 1e-9);
        CHECK(std::abs(r.terms[2] - te(0)) < 1e-11);
        CHECK(std::abs(r.terms[3] - to(1)) < 1e-4 * std::abs(r.terms[3]) + 1e-12);
    }
}

TEST_CASE("depth cap and argument validation") {
    const Lattice lat = build_lattice(4, 2.0 * M_PI);
    const PairPotential w = cosine_potential(lat, 1.0);
    const Field psi = random_field(lat, 47);
    const PKernel a = random_hermitian(1, lat, 306);
    const SimplexQuadrature q = make_simplex_quadrature(4);
    // p + n beyond the cap refuses to allocate the tensor
    CHECK_THROWS_AS(dyson_series_expectation(lat, w, a, psi, 0.2, 4, 1.0, q, 4), CapError);
    CHECK_THROWS_AS(tree_expectation(lat, w, a, 4, {0.2, 0.15, 0.1, 0.05}, 1.0, psi, 4),
                    CapError);
    // times must be nonincreasing
    CHECK_THROWS_AS(tree_expectation(lat, w, a, 2, {0.1, 0.2}, 1.0, psi), ConfigError);
}
