#include "mfl/observables.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "mfl/errors.hpp"

namespace mfl {

namespace {

long ipow(int b, int e) {
    long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

double spectral_norm(const Eigen::MatrixXcd& A, bool hermitian) {
    if (hermitian) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(A);
    return svd.singularValues()(0);
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    Eigen::MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
    for (long i = 0; i < A.rows(); ++i)
        for (long j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

} // namespace

Eigen::MatrixXcd free_propagator_matrix(const Lattice& lat, double t, double hbar,
                                        Dispersion disp) {
    const int M = lat.M;
    Eigen::MatrixXcd P(M, M);
    std::vector<cxd> phase(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        const double k = lat.k[static_cast<std::size_t>(m)];
        double E;
        if (disp == Dispersion::continuum) {
            E = 0.5 * hbar * hbar * k * k;
        } else {
            const double s = std::sin(0.5 * k * lat.dx);
            E = 2.0 * hbar * hbar * s * s / (lat.dx * lat.dx);
        }
        phase[static_cast<std::size_t>(m)] = std::polar(1.0, -E * t / hbar);
    }
    for (int x = 0; x < M; ++x)
        for (int y = 0; y < M; ++y) {
            cxd acc(0.0, 0.0);
            for (int m = 0; m < M; ++m)
                acc += phase[static_cast<std::size_t>(m)] *
                       std::polar(1.0, lat.k[static_cast<std::size_t>(m)] * (lat.x(x) - lat.x(y)));
            P(x, y) = acc * (lat.dx / lat.L);
        }
    return P;
}

PKernel make_pkernel(int p, const Lattice& lat, Eigen::MatrixXcd A) {
    if (p != 1 && p != 2) throw ConfigError("kernel order p must be 1 or 2");
    const long dim = ipow(lat.M, p);
    if (A.rows() != dim || A.cols() != dim)
        throw ConfigError("kernel matrix dimension does not match M^p");
    PKernel k;
    k.p = p;
    k.M = lat.M;
    k.dx = lat.dx;
    k.A = std::move(A);
    k.hermitian = (k.A - k.A.adjoint()).cwiseAbs().maxCoeff() < 1e-12;
    k.op_norm = spectral_norm(k.A, k.hermitian);
    return k;
}

PKernel identity_kernel(int p, const Lattice& lat) {
    const long dim = ipow(lat.M, p);
    return make_pkernel(p, lat, Eigen::MatrixXcd::Identity(dim, dim));
}

PKernel multiplication_kernel(const Lattice& lat, const std::vector<double>& a) {
    if (static_cast<int>(a.size()) != lat.M) throw ConfigError("multiplier length mismatch");
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(lat.M, lat.M);
    for (int j = 0; j < lat.M; ++j) A(j, j) = a[static_cast<std::size_t>(j)];
    return make_pkernel(1, lat, std::move(A));
}

PKernel projector_kernel(const Lattice& lat, const Field& phi) {
    if (phi.size() != lat.M) throw ConfigError("projector field length mismatch");
    Eigen::Map<const Eigen::VectorXcd> v(phi.v.data(), lat.M);
    Eigen::MatrixXcd A = (v * v.adjoint()) * lat.dx;
    return make_pkernel(1, lat, std::move(A));
}

PKernel momentum_function_kernel(const Lattice& lat, const std::vector<double>& gk) {
    if (static_cast<int>(gk.size()) != lat.M) throw ConfigError("momentum multiplier length mismatch");
    const int M = lat.M;
    Eigen::MatrixXcd A(M, M);
    for (int x = 0; x < M; ++x)
        for (int y = 0; y < M; ++y) {
            cxd acc(0.0, 0.0);
            for (int m = 0; m < M; ++m)
                acc += gk[static_cast<std::size_t>(m)] *
                       std::polar(1.0, lat.k[static_cast<std::size_t>(m)] * (lat.x(x) - lat.x(y)));
            A(x, y) = acc * (lat.dx / lat.L);
        }
    return make_pkernel(1, lat, std::move(A));
}

PKernel tensor_product(const PKernel& a, const PKernel& b) {
    if (a.p != 1 || b.p != 1) throw ConfigError("tensor_product expects two p=1 kernels");
    if (a.M != b.M) throw ConfigError("tensor_product kernel size mismatch");
    PKernel k;
    k.p = 2;
    k.M = a.M;
    k.dx = a.dx;
    k.A = kron(a.A, b.A);
    k.hermitian = a.hermitian && b.hermitian;
    k.op_norm = a.op_norm * b.op_norm;
    return k;
}

PKernel heisenberg_free(const PKernel& a, double t, double hbar, Dispersion disp) {
    Lattice lat = build_lattice(a.M, a.dx * a.M);
    const Eigen::MatrixXcd Pf = free_propagator_matrix(lat, t, hbar, disp);
    const Eigen::MatrixXcd Pb = free_propagator_matrix(lat, -t, hbar, disp);
    PKernel out = a;
    if (a.p == 1) {
        out.A = Pb * a.A * Pf;
    } else {
        out.A = kron(Pb, Pb) * a.A * kron(Pf, Pf);
    }
    out.op_norm = a.op_norm; // unitary conjugation
    return out;
}

double scaling_factor(int N, int p) {
    if (p < 1) throw ConfigError("p must be >= 1");
    if (p > N) throw ConfigError("p exceeds particle number N");
    double f = 1.0;
    for (int i = 0; i < p; ++i) f *= double(N - i) / double(N);
    return f;
}

ReducedDensity reduced_density(const FockBasis& basis, const FockState& s, int p) {
    if (p != 1 && p != 2) throw ConfigError("reduced density supports p in {1,2}");
    if (p > basis.N) throw ConfigError("p exceeds particle number N");
    const int M = basis.M;
    const std::size_t D = basis.dim();
    ReducedDensity g;
    g.p = p;
    g.M = M;
    g.N = basis.N;

    if (p == 1) {
        FockBasis sub = enumerate_basis(basis.N - 1, M);
        Eigen::MatrixXcd Dm = Eigen::MatrixXcd::Zero(static_cast<long>(sub.dim()), M);
        std::vector<uint8_t> tmp(static_cast<std::size_t>(M));
        for (std::size_t r = 0; r < D; ++r) {
            const uint8_t* n = basis.row(r);
            for (int x = 0; x < M; ++x) {
                if (n[x] == 0) continue;
                std::copy(n, n + M, tmp.begin());
                tmp[static_cast<std::size_t>(x)] -= 1;
                const long idx = static_cast<long>(sub.rank(tmp.data()));
                Dm(idx, x) += std::sqrt(double(n[x])) * s.c[r];
            }
        }
        g.rho = (Dm.adjoint() * Dm).transpose() / double(basis.N);
    } else {
        FockBasis sub = enumerate_basis(basis.N - 2, M);
        Eigen::MatrixXcd Dm = Eigen::MatrixXcd::Zero(static_cast<long>(sub.dim()), long(M) * M);
        std::vector<uint8_t> tmp(static_cast<std::size_t>(M));
        for (std::size_t r = 0; r < D; ++r) {
            const uint8_t* n = basis.row(r);
            for (int x1 = 0; x1 < M; ++x1) {
                if (n[x1] == 0) continue;
                for (int x2 = 0; x2 < M; ++x2) {
                    const int occ2 = n[x2] - (x1 == x2 ? 1 : 0);
                    if (occ2 <= 0) continue;
                    std::copy(n, n + M, tmp.begin());
                    tmp[static_cast<std::size_t>(x1)] -= 1;
                    tmp[static_cast<std::size_t>(x2)] -= 1;
                    const long idx = static_cast<long>(sub.rank(tmp.data()));
                    const double amp = std::sqrt(double(n[x1]) * double(occ2));
                    Dm(idx, long(x1) * M + x2) += amp * s.c[r];
                }
            }
        }
        g.rho = (Dm.adjoint() * Dm).transpose() / (double(basis.N) * double(basis.N - 1));
    }
    return g;
}

ReducedDensity density_from_field(const Lattice& lat, const Field& psi) {
    ReducedDensity g;
    g.p = 1;
    g.M = lat.M;
    g.N = 0;
    Eigen::Map<const Eigen::VectorXcd> v(psi.v.data(), lat.M);
    g.rho = (v * v.adjoint()) * lat.dx;
    return g;
}

cxd expect_p(const FockBasis& basis, const FockState& s, const PKernel& a) {
    if (a.M != basis.M) throw ConfigError("kernel lattice does not match fock basis");
    const ReducedDensity g = reduced_density(basis, s, a.p);
    return scaling_factor(basis.N, a.p) * (a.A * g.rho).trace();
}

cxd hartree_expect(const Lattice& lat, const Field& psi, const PKernel& a) {
    if (a.M != lat.M) throw ConfigError("kernel lattice mismatch");
    Eigen::Map<const Eigen::VectorXcd> v(psi.v.data(), lat.M);
    if (a.p == 1) {
        return (v.adjoint() * (a.A * v))(0, 0) * lat.dx;
    }
    Eigen::VectorXcd v2(long(lat.M) * lat.M);
    for (int x1 = 0; x1 < lat.M; ++x1)
        for (int x2 = 0; x2 < lat.M; ++x2)
            v2(long(x1) * lat.M + x2) = psi.v[static_cast<std::size_t>(x1)] * psi.v[static_cast<std::size_t>(x2)];
    return (v2.adjoint() * (a.A * v2))(0, 0) * lat.dx * lat.dx;
}

double trace_distance(const ReducedDensity& g1, const ReducedDensity& g2) {
    if (g1.p != g2.p || g1.M != g2.M) throw ConfigError("reduced density shape mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g1.rho - g2.rho);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

} // namespace mfl
