#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "mfl/observables.hpp"
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

FockState random_state(const FockBasis& basis, uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    FockState s;
    s.c.resize(basis.dim());
    for (auto& c : s.c) c = cxd(nd(gen), nd(gen));
    double n2 = 0.0;
    for (const auto& c : s.c) n2 += std::norm(c);
    for (auto& c : s.c) c /= std::sqrt(n2);
    return s;
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

} // namespace

TEST_CASE("scaling factor values") {
    CHECK(scaling_factor(4, 1) == doctest::Approx(1.0));
    CHECK(scaling_factor(4, 2) == doctest::Approx(0.75));
    CHECK(scaling_factor(8, 2) == doctest::Approx(7.0 / 8.0));
    CHECK(scaling_factor(100, 1) == doctest::Approx(1.0));
    // the factor only makes sense for p <= N
    CHECK_THROWS_AS((void)scaling_factor(2, 3), ConfigError);
}

TEST_CASE("reduced densities match the direct partial trace") {
    const Lattice lat = build_lattice(4, 2.0);
    const FockBasis basis = enumerate_basis(2, lat.M);
    const FockState s = random_state(basis, 13);
    for (const int p : {1, 2}) {
        const ReducedDensity g = reduced_density(basis, s, p);
        const Eigen::MatrixXcd direct = ref::reduced_density_direct(basis, s, p);
        REQUIRE(g.rho.rows() == direct.rows());
        for (Eigen::Index i = 0; i < direct.rows(); ++i)
            for (Eigen::Index j = 0; j < direct.cols(); ++j)
                CHECK(std::abs(g.rho(i, j) - direct(i, j)) < 1e-12);
        CHECK(std::abs(g.rho.trace() - cxd(1.0, 0.0)) < 1e-12);
    }
}

TEST_CASE("product states reduce to the pure hartree density") {
    const Lattice lat = build_lattice(4, 3.0);
    const Field psi = random_field(lat, 17);
    const FockBasis basis = enumerate_basis(3, lat.M);
    const FockState s = embed_product_state(basis, lat, psi, 1.0);
    const ReducedDensity g1 = reduced_density(basis, s, 1);
    const ReducedDensity h1 = density_from_field(lat, psi);
    for (int i = 0; i < lat.M; ++i)
        for (int j = 0; j < lat.M; ++j) CHECK(std::abs(g1.rho(i, j) - h1.rho(i, j)) < 1e-12);
    CHECK(trace_distance(g1, h1) < 1e-12);
}

TEST_CASE("trace distance on frozen two-site densities") {
    const Lattice lat = build_lattice(4, 2.0);
    Field e0 = make_field(lat), plus = make_field(lat);
    e0.v[0] = 1.0;
    plus.v[0] = plus.v[1] = 1.0;
    normalize(lat, e0);
    normalize(lat, plus);
    const ReducedDensity r0 = density_from_field(lat, e0);
    const ReducedDensity rp = density_from_field(lat, plus);
    CHECK(trace_distance(r0, r0) == doctest::Approx(0.0).epsilon(1e-14));
    // overlap |<e0,plus>|^2 = 1/2 between pure states: distance sqrt(1 - 1/2)
    CHECK(trace_distance(r0, rp) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    Field e1 = make_field(lat);
    e1.v[1] = 1.0;
    normalize(lat, e1);
    CHECK(trace_distance(r0, density_from_field(lat, e1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expectation bookkeeping: scaling, bound, linearity") {
    const Lattice lat = build_lattice(4, 2.0 * M_PI);
    const FockBasis basis = enumerate_basis(3, lat.M);
    const Field psi = random_field(lat, 29);
    const FockState s = embed_product_state(basis, lat, psi, 1.0);
    const PKernel a = random_hermitian(1, lat, 101);
    const PKernel b = random_hermitian(1, lat, 102);
    // product state: <A_N> = scaling * <psi, a psi>
    const cxd ep = expect_p(basis, s, a);
    const cxd hp = hartree_expect(lat, psi, a);
    CHECK(std::abs(ep - scaling_factor(3, 1) * hp) < 1e-12);
    CHECK(std::abs(ep.imag()) < 1e-13);
    CHECK(std::abs(ep) <= a.op_norm + 1e-12);
    // linearity in the kernel
    Eigen::MatrixXcd C = 0.3 * a.A + 0.7 * b.A;
    const PKernel c = make_pkernel(1, lat, C);
    const cxd lhs = expect_p(basis, random_state(basis, 55), c);
    const FockState rs = random_state(basis, 55);
    const cxd rhs = 0.3 * expect_p(basis, rs, a) + 0.7 * expect_p(basis, rs, b);
    CHECK(std::abs(lhs - rhs) < 1e-12);
    // two-particle version on the product state
    const PKernel ab = tensor_product(a, b);
    const cxd e2 = expect_p(basis, s, ab);
    const cxd want = scaling_factor(3, 2) * hartree_expect(lat, psi, a) *
                     hartree_expect(lat, psi, b);
    CHECK(std::abs(e2 - want) < 1e-12);
}

TEST_CASE("kernel builders act as advertised") {
    const Lattice lat = build_lattice(8, 2.0 * M_PI);
    const Field psi = random_field(lat, 37);
    // multiplication: sum a|psi|^2 dx
    std::vector<double> ax(lat.M);
    for (int j = 0; j < lat.M; ++j) ax[j] = std::cos(lat.x(j));
    const PKernel ma = multiplication_kernel(lat, ax);
    cxd want = 0.0;
    for (int j = 0; j < lat.M; ++j) want += ax[j] * std::norm(psi.v[j]) * lat.dx;
    CHECK(std::abs(hartree_expect(lat, psi, ma) - want) < 1e-12);
    CHECK(ma.op_norm == doctest::Approx(1.0).epsilon(1e-12));
    // projector: |<phi, psi>|^2
    const Field phi = random_field(lat, 38);
    const PKernel pr = projector_kernel(lat, phi);
    CHECK(std::abs(hartree_expect(lat, psi, pr) - std::norm(inner(lat, phi, psi))) < 1e-12);
    CHECK(pr.op_norm == doctest::Approx(1.0).epsilon(1e-10));
    // momentum function: plane wave picks out its own g(k)
    std::vector<double> gk(lat.M);
    for (int m = 0; m < lat.M; ++m) gk[m] = std::exp(-0.5 * lat.k[m] * lat.k[m]);
    const PKernel mk = momentum_function_kernel(lat, gk);
    Field pw = make_field(lat);
    for (int j = 0; j < lat.M; ++j) pw.v[j] = std::polar(1.0, 3.0 * lat.x(j));
    normalize(lat, pw);
    CHECK(std::abs(hartree_expect(lat, pw, mk) - cxd(gk[3], 0.0)) < 1e-12);
    // identity
    CHECK(std::abs(hartree_expect(lat, psi, identity_kernel(1, lat)) - cxd(1.0, 0.0)) < 1e-12);
}

TEST_CASE("free heisenberg conjugation moves the state instead") {
    const Lattice lat = build_lattice(8, 2.0 * M_PI);
    const Field psi = random_field(lat, 43);
    const double t = 0.45, hbar = 0.6;
    for (const Dispersion disp : {Dispersion::continuum, Dispersion::lattice3pt}) {
        const PKernel a = random_hermitian(1, lat, 71);
        const PKernel at = heisenberg_free(a, t, hbar, disp);
        const Field ut = free_propagate(lat, psi, t, hbar, disp);
        CHECK(std::abs(hartree_expect(lat, psi, at) - hartree_expect(lat, ut, a)) < 1e-11);
        CHECK(at.hermitian);
    }
    // dense propagator agrees with the serial build
    const Eigen::MatrixXcd P = free_propagator_matrix(lat, t, hbar);
    const Eigen::MatrixXcd Q = ref::dense_free_propagator(lat, t, hbar, Dispersion::continuum);
    for (int i = 0; i < lat.M; ++i)
        for (int j = 0; j < lat.M; ++j) CHECK(std::abs(P(i, j) - Q(i, j)) < 1e-13);
}
