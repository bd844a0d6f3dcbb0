#include "mfl/fock.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <cstring>
#include <functional>
#include <limits>
#include <string>

#include "mfl/errors.hpp"

namespace mfl {

namespace {

uint64_t sat_add(uint64_t a, uint64_t b) {
    uint64_t s = a + b;
    return (s < a) ? std::numeric_limits<uint64_t>::max() : s;
}

// C(r+s-1, s-1): ways to distribute r particles over s >= 0 slots.
uint64_t completions(const FockBasis& basis, int r, int s) {
    if (s == 0) return (r == 0) ? 1 : 0;
    return basis.binom[static_cast<std::size_t>(r + s - 1)][static_cast<std::size_t>(s - 1)];
}

} // namespace

std::size_t FockBasis::rank(const uint8_t* n) const {
    std::size_t r = 0;
    int rem = N;
    for (int j = 0; j < M - 1; ++j) {
        const int slots = M - 1 - j;
        for (int q = 0; q < n[j]; ++q)
            r += static_cast<std::size_t>(completions(*this, rem - q, slots));
        rem -= n[j];
    }
    return r;
}

FockBasis enumerate_basis(int N, int M, std::size_t cap) {
    // N = 0 (the vacuum sector, dim 1) is needed internally by reduced densities.
    if (N < 0) throw ConfigError("boson number must be >= 0");
    if (N > 255) throw ConfigError("boson number exceeds 255 (occupation storage)");
    if (M < 2) throw ConfigError("fock basis needs at least 2 sites");

    // Size check in log space before any allocation.
    double logdim = std::lgamma(double(N + M)) - std::lgamma(double(N + 1)) - std::lgamma(double(M));
    if (logdim > std::log(double(cap)) + 1e-9)
        throw CapError("fock sector dimension " + std::to_string(std::exp(logdim)) +
                       " exceeds cap " + std::to_string(cap));

    FockBasis b;
    b.N = N;
    b.M = M;
    const int rows = N + M;
    b.binom.assign(static_cast<std::size_t>(rows), {});
    for (int n = 0; n < rows; ++n) {
        b.binom[static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(n + 1), 1);
        for (int k = 1; k < n; ++k)
            b.binom[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] =
                sat_add(b.binom[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k - 1)],
                        b.binom[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(k)]);
    }

    const uint64_t dim = b.binom[static_cast<std::size_t>(N + M - 1)][static_cast<std::size_t>(N)];
    if (dim > cap)
        throw CapError("fock sector dimension " + std::to_string(dim) + " exceeds cap " +
                       std::to_string(cap));

    b.occ.reserve(static_cast<std::size_t>(dim) * static_cast<std::size_t>(M));
    std::vector<uint8_t> cur(static_cast<std::size_t>(M), 0);
    std::function<void(int, int)> rec = [&](int j, int rem) {
        if (j == M - 1) {
            cur[static_cast<std::size_t>(j)] = static_cast<uint8_t>(rem);
            b.occ.insert(b.occ.end(), cur.begin(), cur.end());
            return;
        }
        for (int q = 0; q <= rem; ++q) {
            cur[static_cast<std::size_t>(j)] = static_cast<uint8_t>(q);
            rec(j + 1, rem - q);
        }
    };
    rec(0, N);
    return b;
}

double fock_norm(const FockState& s) {
    double n2 = 0.0;
    for (const cxd& c : s.c) n2 += std::norm(c);
    return std::sqrt(n2);
}

FockState embed_product_state(const FockBasis& basis, const Lattice& lat, const Field& psi,
                              double hbar) {
    if (psi.size() != basis.M) throw ConfigError("field size does not match fock basis sites");
    const std::size_t D = basis.dim();
    FockState s;
    s.t = 0.0;
    s.hbar = hbar;
    s.c.assign(D, cxd(0.0, 0.0));
    const double sdx = std::sqrt(lat.dx);
    const double lgN = std::lgamma(double(basis.N + 1));
    for (std::size_t r = 0; r < D; ++r) {
        const uint8_t* n = basis.row(r);
        double lg = lgN;
        cxd prod(1.0, 0.0);
        for (int j = 0; j < basis.M; ++j) {
            lg -= std::lgamma(double(n[j] + 1));
            const cxd phi = psi.v[static_cast<std::size_t>(j)] * sdx;
            for (int q = 0; q < n[j]; ++q) prod *= phi;
        }
        s.c[r] = std::exp(0.5 * lg) * prod;
    }
    return s;
}

FockOp make_fock_op(const FockBasis& basis, const Lattice& lat, const PairPotential& w,
                    double hbar) {
    if (lat.M != basis.M) throw ConfigError("lattice size does not match fock basis sites");
    FockOp op;
    op.basis = &basis;
    op.lat = &lat;
    op.hbar = hbar;
    op.hop_scale = -hbar * hbar / (2.0 * lat.dx * lat.dx);
    const std::size_t D = basis.dim();
    const int M = basis.M;
    const double kin_diag = hbar * hbar / (lat.dx * lat.dx) * double(basis.N);

    op.diag.assign(D, 0.0);
#pragma omp parallel for schedule(static)
    for (long long rr = 0; rr < static_cast<long long>(D); ++rr) {
        const std::size_t r = static_cast<std::size_t>(rr);
        const uint8_t* n = basis.row(r);
        double v = 0.0;
        for (int a = 0; a < M; ++a) {
            if (n[a] == 0) continue;
            for (int b = 0; b < M; ++b) {
                if (n[b] == 0) continue;
                v += w(a - b, M) * double(n[a]) * double(n[b]);
            }
        }
        v -= w(0, M) * double(basis.N);
        op.diag[r] = kin_diag + v / (2.0 * double(basis.N));
    }

    // Hop table: 2M entries per row (left/right move of each site). Rows whose
    // site is empty get a zero-coefficient self-hop to keep the layout flat.
    const std::size_t entries = D * static_cast<std::size_t>(2 * M);
    if (entries <= 16000000) {
        op.tabulated = true;
        op.hop_idx.assign(entries, 0);
        op.hop_coef.assign(entries, 0.0);
#pragma omp parallel for schedule(static)
        for (long long rr = 0; rr < static_cast<long long>(D); ++rr) {
            const std::size_t r = static_cast<std::size_t>(rr);
            std::vector<uint8_t> tmp(basis.row(r), basis.row(r) + M);
            const std::size_t base = r * static_cast<std::size_t>(2 * M);
            for (int a = 0; a < M; ++a) {
                for (int d = 0; d < 2; ++d) {
                    const std::size_t slot = base + static_cast<std::size_t>(2 * a + d);
                    if (tmp[static_cast<std::size_t>(a)] == 0) {
                        op.hop_idx[slot] = static_cast<uint32_t>(r);
                        continue;
                    }
                    const int b = (a + (d == 0 ? 1 : M - 1)) % M;
                    const double na = double(tmp[static_cast<std::size_t>(a)]);
                    const double nb = double(tmp[static_cast<std::size_t>(b)]);
                    tmp[static_cast<std::size_t>(a)] -= 1;
                    tmp[static_cast<std::size_t>(b)] += 1;
                    op.hop_idx[slot] = static_cast<uint32_t>(basis.rank(tmp.data()));
                    tmp[static_cast<std::size_t>(a)] += 1;
                    tmp[static_cast<std::size_t>(b)] -= 1;
                    op.hop_coef[slot] = op.hop_scale * std::sqrt(na * (nb + 1.0));
                }
            }
        }
    }
    return op;
}

void FockOp::apply(const std::vector<cxd>& in, std::vector<cxd>& out) const {
    const std::size_t D = basis->dim();
    const int M = basis->M;
    out.resize(D);
    if (tabulated) {
#pragma omp parallel for schedule(static)
        for (long long rr = 0; rr < static_cast<long long>(D); ++rr) {
            const std::size_t r = static_cast<std::size_t>(rr);
            cxd acc = diag[r] * in[r];
            const std::size_t base = r * static_cast<std::size_t>(2 * M);
            for (int h = 0; h < 2 * M; ++h)
                acc += hop_coef[base + static_cast<std::size_t>(h)] *
                       in[hop_idx[base + static_cast<std::size_t>(h)]];
            out[r] = acc;
        }
    } else {
#pragma omp parallel for schedule(static)
        for (long long rr = 0; rr < static_cast<long long>(D); ++rr) {
            const std::size_t r = static_cast<std::size_t>(rr);
            std::vector<uint8_t> tmp(basis->row(r), basis->row(r) + M);
            cxd acc = diag[r] * in[r];
            for (int a = 0; a < M; ++a) {
                if (tmp[static_cast<std::size_t>(a)] == 0) continue;
                for (int d = 0; d < 2; ++d) {
                    const int b = (a + (d == 0 ? 1 : M - 1)) % M;
                    const double na = double(tmp[static_cast<std::size_t>(a)]);
                    const double nb = double(tmp[static_cast<std::size_t>(b)]);
                    tmp[static_cast<std::size_t>(a)] -= 1;
                    tmp[static_cast<std::size_t>(b)] += 1;
                    const std::size_t col = basis->rank(tmp.data());
                    tmp[static_cast<std::size_t>(a)] += 1;
                    tmp[static_cast<std::size_t>(b)] -= 1;
                    acc += hop_scale * std::sqrt(na * (nb + 1.0)) * in[col];
                }
            }
            out[r] = acc;
        }
    }
}

FockState apply_h(const FockBasis& basis, const Lattice& lat, const PairPotential& w,
                  const FockState& s) {
    FockOp op = make_fock_op(basis, lat, w, s.hbar);
    FockState out = s;
    op.apply(s.c, out.c);
    return out;
}

FockState evolve_exact(const FockBasis& basis, const Lattice& lat, const PairPotential& w,
                       const FockState& s, double t, double tol, int max_krylov) {
    FockState out = s;
    if (t == 0.0) return out;
    const FockOp op = make_fock_op(basis, lat, w, s.hbar);
    const std::size_t D = basis.dim();
    const int mmax = std::min<int>(max_krylov, static_cast<int>(D));
    const double dir = (t > 0.0) ? 1.0 : -1.0;
    const double ttotal = std::abs(t);
    double remaining = ttotal;

    Eigen::MatrixXcd V(D, mmax);
    std::vector<cxd> hv(D);
    const cxd I(0.0, 1.0);

    while (remaining > 1e-15 * ttotal) {
        const double vnorm0 = fock_norm(out);
        if (vnorm0 == 0.0) break;
        V.col(0) = Eigen::Map<const Eigen::VectorXcd>(out.c.data(), static_cast<long>(D)) / vnorm0;

        Eigen::VectorXd alpha(mmax), beta(mmax);
        int m = mmax;
        double bext = 0.0; // residual norm past the last kept vector
        for (int j = 0; j < mmax; ++j) {
            std::vector<cxd> vj(D);
            Eigen::Map<Eigen::VectorXcd>(vj.data(), static_cast<long>(D)) = V.col(j);
            op.apply(vj, hv);
            Eigen::Map<Eigen::VectorXcd> r(hv.data(), static_cast<long>(D));
            alpha(j) = r.dot(V.col(j)).real();
            r -= alpha(j) * V.col(j);
            if (j > 0) r -= beta(j - 1) * V.col(j - 1);
            // Two passes of full reorthogonalization keep the basis clean.
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= j; ++i) r -= V.col(i).dot(r) * V.col(i);
            const double b = r.norm();
            if (j + 1 < mmax) beta(j) = b;
            bext = b;
            if (b < 1e-13) { // invariant subspace: the small exponential is exact
                m = j + 1;
                bext = 0.0;
                break;
            }
            if (j + 1 < mmax) V.col(j + 1) = r / b;
        }

        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int j = 0; j < m; ++j) {
            T(j, j) = alpha(j);
            if (j + 1 < m) {
                T(j, j + 1) = beta(j);
                T(j + 1, j) = beta(j);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        const Eigen::VectorXd lam = es.eigenvalues();
        const Eigen::MatrixXd Q = es.eigenvectors();
        const Eigen::VectorXd q0 = Q.row(0).transpose();

        double tau = remaining;
        Eigen::VectorXcd u(m);
        while (true) {
            for (int l = 0; l < m; ++l)
                u(l) = std::exp(-I * lam(l) * (dir * tau) / s.hbar) * q0(l);
            Eigen::VectorXcd um = Q * u; // exp(-i tau T / hbar) e1
            const double err = bext * std::abs(um(m - 1)) * vnorm0;
            const double budget = tol * (tau / ttotal);
            if (err <= budget || bext == 0.0) {
                Eigen::Map<Eigen::VectorXcd>(out.c.data(), static_cast<long>(D)) =
                    V.leftCols(m) * (vnorm0 * um);
                break;
            }
            tau *= 0.5;
            if (tau < 1e-14 * ttotal)
                throw NumericalError("krylov substep underflow: residual never met tolerance");
        }
        remaining -= tau;
        out.t += dir * tau;
    }
    return out;
}

} // namespace mfl
