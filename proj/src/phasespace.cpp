#include "mfl/phasespace.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "mfl/errors.hpp"

namespace mfl {

namespace {

// Backward DFT matrix F[j,a] = e^{2 pi i j a / M}.
Eigen::MatrixXcd dft_matrix(int M) {
    Eigen::MatrixXcd F(M, M);
    for (int j = 0; j < M; ++j)
        for (int a = 0; a < M; ++a) F(j, a) = std::polar(1.0, 2.0 * M_PI * j * a / M);
    return F;
}

struct Entry {
    int mu, nu;
    cxd c;
};

std::vector<Entry> support(const Symbol& s, double tol) {
    const int M = s.g.M();
    std::vector<Entry> e;
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            const cxd c = s.dual[static_cast<std::size_t>(a) * M + b];
            if (std::abs(c) > tol) e.push_back({dual_label(a, M), dual_label(b, M), c});
        }
    return e;
}

double max_abs(const std::vector<cxd>& v) {
    double m = 0.0;
    for (const cxd& c : v) m = std::max(m, std::abs(c));
    return m;
}

// Shared core of the two brackets: dual-side convolution with a per-pair
// coefficient. kind 0 = (2/hbar) sin(pi q / M), kind 1 = classical limit
// S1*Sigma2 pairing written through the same integer q (see call sites).
Symbol bracket_conv(const Symbol& a, const Symbol& b, double hbar, bool classical) {
    if (!same_grid(a.g, b.g)) throw ConfigError("bracket operands on different grids");
    const int M = a.g.M();
    const double tol = 1e-16 * std::max(1.0, max_abs(a.dual) * max_abs(b.dual));
    const std::vector<Entry> ea = support(a, 1e-16 * std::max(1.0, max_abs(a.dual)));
    const std::vector<Entry> eb = support(b, 1e-16 * std::max(1.0, max_abs(b.dual)));
    std::vector<cxd> out(static_cast<std::size_t>(M) * M, cxd(0.0, 0.0));
    double dropped = 0.0;
    for (const Entry& p : ea)
        for (const Entry& q : eb) {
            const int mu = p.mu + q.mu;
            const int nu = p.nu + q.nu;
            // wedge: hbar (s2 ^ s1) / 2 = pi (nu2 mu1 - mu2 nu1) / M exactly
            const long w = long(q.nu) * p.mu - long(q.mu) * p.nu;
            cxd coef;
            if (classical) {
                // limit hbar -> 0 of (2/hbar) sin(...): the wedge itself,
                // Sigma2 S1 - S2 Sigma1 = (2 pi / (hbar L M)) * ... ; evaluated
                // through the physical duals to stay hbar-correct.
                coef = (a.g.Sigma(q.nu) * a.g.S(p.mu) - a.g.S(q.mu) * a.g.Sigma(p.nu)) * p.c * q.c;
            } else {
                coef = (2.0 / hbar) * std::sin(M_PI * double(w) / M) * p.c * q.c;
            }
            if (mu < -M / 2 || mu > M / 2 - 1 || nu < -M / 2 || nu > M / 2 - 1) {
                dropped = std::max(dropped, std::abs(coef));
                continue;
            }
            out[static_cast<std::size_t>(dual_index(mu, M)) * M + dual_index(nu, M)] += coef;
        }
    if (dropped > 1e-12 * std::max(1.0, max_abs(out)) && dropped > tol)
        throw NumericalError("bracket output leaves the dual band: inputs not band-limited enough");
    return symbol_from_dual(a.g, std::move(out));
}

} // namespace

PhaseGrid make_phase_grid(const Lattice& lat, double hbar) {
    if (hbar <= 0.0) throw ConfigError("hbar must be positive");
    PhaseGrid g;
    g.lat = lat;
    g.hbar = hbar;
    g.dxi = hbar * 2.0 * M_PI / lat.L;
    g.xi.resize(static_cast<std::size_t>(lat.M));
    for (int i = 0; i < lat.M; ++i) g.xi[static_cast<std::size_t>(i)] = g.dxi * (i - lat.M / 2);
    return g;
}

bool same_grid(const PhaseGrid& a, const PhaseGrid& b) {
    return a.lat.M == b.lat.M && std::abs(a.lat.L - b.lat.L) < 1e-12 &&
           std::abs(a.hbar - b.hbar) < 1e-12;
}

Symbol symbol_from_values(const PhaseGrid& g, std::vector<cxd> vals) {
    const int M = g.M();
    if (vals.size() != static_cast<std::size_t>(M) * M) throw ConfigError("symbol value size mismatch");
    Symbol s;
    s.g = g;
    s.vals = std::move(vals);
    // c(mu,nu) = (-1)^nu (1/M^2) sum vals e^{-2 pi i (mu j + nu i)/M}
    const Eigen::MatrixXcd F = dft_matrix(M);
    Eigen::Map<const Eigen::Matrix<cxd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> V(
        s.vals.data(), M, M);
    Eigen::MatrixXcd C = (F.adjoint() * V * F.conjugate()) / double(M * M);
    s.dual.resize(static_cast<std::size_t>(M) * M);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b)
            s.dual[static_cast<std::size_t>(a) * M + b] = ((b % 2 == 0) ? 1.0 : -1.0) * C(a, b);
    return s;
}

Symbol symbol_from_dual(const PhaseGrid& g, std::vector<cxd> dual) {
    const int M = g.M();
    if (dual.size() != static_cast<std::size_t>(M) * M) throw ConfigError("symbol dual size mismatch");
    Symbol s;
    s.g = g;
    s.dual = std::move(dual);
    const Eigen::MatrixXcd F = dft_matrix(M);
    Eigen::MatrixXcd C(M, M);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b)
            C(a, b) = ((b % 2 == 0) ? 1.0 : -1.0) * s.dual[static_cast<std::size_t>(a) * M + b];
    Eigen::MatrixXcd V = F * C * F.transpose();
    s.vals.resize(static_cast<std::size_t>(M) * M);
    for (int j = 0; j < M; ++j)
        for (int i = 0; i < M; ++i) s.vals[static_cast<std::size_t>(j) * M + i] = V(j, i);
    return s;
}

Symbol symbol_single_mode(const PhaseGrid& g, int mu, int nu, cxd c) {
    const int M = g.M();
    if (mu < -M / 2 || mu > M / 2 - 1 || nu < -M / 2 || nu > M / 2 - 1)
        throw ConfigError("dual mode outside the grid band");
    std::vector<cxd> dual(static_cast<std::size_t>(M) * M, cxd(0.0, 0.0));
    dual[static_cast<std::size_t>(dual_index(mu, M)) * M + dual_index(nu, M)] += c;
    if (-mu >= -M / 2 && -mu <= M / 2 - 1 && -nu >= -M / 2 && -nu <= M / 2 - 1)
        dual[static_cast<std::size_t>(dual_index(-mu, M)) * M + dual_index(-nu, M)] += std::conj(c);
    return symbol_from_dual(g, std::move(dual));
}

double sigma_norm(const Symbol& s, double sigma) {
    if (sigma < 0.0) throw ConfigError("sigma must be nonnegative");
    const int M = s.g.M();
    double acc = 0.0;
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            const double c = std::abs(s.dual[static_cast<std::size_t>(a) * M + b]);
            if (c == 0.0) continue;
            const double smod = std::abs(s.g.S(dual_label(a, M)));
            const double gmod = std::abs(s.g.Sigma(dual_label(b, M)));
            acc += c * std::exp(sigma * (smod + gmod));
        }
    return acc;
}

Symbol moyal_bracket(const Symbol& a, const Symbol& b, double hbar) {
    if (std::abs(hbar - a.g.hbar) > 1e-12) throw ConfigError("hbar does not match the symbol grid");
    return bracket_conv(a, b, hbar, false);
}

Symbol poisson_bracket(const Symbol& a, const Symbol& b) { return bracket_conv(a, b, a.g.hbar, true); }

M1Check check_m1_bound(const Symbol& w, const Symbol& g, double sigma, double delta) {
    if (!(delta > 0.0) || !(delta < sigma)) throw ConfigError("need 0 < delta < sigma");
    M1Check r;
    r.lhs = sigma_norm(moyal_bracket(w, g, w.g.hbar), sigma - delta);
    r.rhs = (1.0 / (std::exp(2.0) * delta * delta)) * sigma_norm(w, sigma) * sigma_norm(g, sigma);
    r.ok = r.lhs <= r.rhs * (1.0 + 1e-12);
    return r;
}

PKernel weyl_quantize(const Symbol& tau, double hbar) {
    if (std::abs(hbar - tau.g.hbar) > 1e-12) throw ConfigError("hbar does not match the symbol grid");
    const int M = tau.g.M();
    double total = 0.0, nyq = 0.0;
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            const double c = std::abs(tau.dual[static_cast<std::size_t>(a) * M + b]);
            total += c;
            if (a == M / 2 || b == M / 2) nyq += c;
        }
    if (nyq > 1e-12 * std::max(total, 1e-300))
        throw ConfigError("symbol carries weight on the Nyquist dual lines");

    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(M, M);
    for (int a = 0; a < M; ++a) {
        const int mu = dual_label(a, M);
        for (int b = 0; b < M; ++b) {
            const int nu = dual_label(b, M);
            const cxd c = tau.dual[static_cast<std::size_t>(a) * M + b];
            if (std::abs(c) == 0.0) continue;
            const cxd twist = std::polar(1.0, M_PI * double(mu) * double(nu) / M);
            for (int j = 0; j < M; ++j) {
                const int col = ((j + nu) % M + M) % M;
                T(j, col) += c * twist * std::polar(1.0, 2.0 * M_PI * double(mu) * j / M);
            }
        }
    }
    return make_pkernel(1, tau.g.lat, std::move(T));
}

Symbol weyl_dequantize(const PKernel& T, const PhaseGrid& g) {
    if (T.p != 1 || T.M != g.M()) throw ConfigError("dequantize expects a p=1 kernel on the grid");
    const int M = g.M();
    std::vector<cxd> dual(static_cast<std::size_t>(M) * M, cxd(0.0, 0.0));
    for (int a = 0; a < M; ++a) {
        const int mu = dual_label(a, M);
        for (int b = 0; b < M; ++b) {
            const int nu = dual_label(b, M);
            const cxd twist = std::polar(1.0, -M_PI * double(mu) * double(nu) / M);
            cxd acc(0.0, 0.0);
            for (int j = 0; j < M; ++j) {
                const int col = ((j + nu) % M + M) % M;
                acc += std::polar(1.0, -2.0 * M_PI * double(mu) * j / M) * T.A(j, col);
            }
            dual[static_cast<std::size_t>(a) * M + b] = twist * acc / double(M);
        }
    }
    return symbol_from_dual(g, std::move(dual));
}

double WignerGrid::mass() const {
    double acc = 0.0;
    for (double v : w) acc += v;
    return acc * g.lat.dx * g.dxi;
}

namespace {

WignerGrid wigner_from_chi(const PhaseGrid& g, const std::vector<cxd>& chi) {
    const int M = g.M();
    std::vector<cxd> dual(static_cast<std::size_t>(M) * M);
    const double scale = 1.0 / (g.lat.L * g.Lxi());
    for (std::size_t i = 0; i < dual.size(); ++i) dual[i] = std::conj(chi[i]) * scale;
    Symbol s = symbol_from_dual(g, std::move(dual));
    WignerGrid W;
    W.g = g;
    W.w.resize(static_cast<std::size_t>(M) * M);
    W.im_residue = 0.0;
    for (std::size_t i = 0; i < s.vals.size(); ++i) {
        W.w[i] = s.vals[i].real();
        W.im_residue = std::max(W.im_residue, std::abs(s.vals[i].imag()));
    }
    return W;
}

} // namespace

WignerGrid wigner_1p(const Lattice& lat, const Field& psi, double hbar) {
    if (psi.size() != lat.M) throw ConfigError("field size mismatch");
    const PhaseGrid g = make_phase_grid(lat, hbar);
    const int M = lat.M;
    // chi(mu,nu) = e^{i pi mu nu / M} dx sum_j conj(psi_j) e^{2 pi i mu j/M} psi_{j+nu}
    std::vector<cxd> chi(static_cast<std::size_t>(M) * M);
    for (int a = 0; a < M; ++a) {
        const int mu = dual_label(a, M);
        for (int b = 0; b < M; ++b) {
            const int nu = dual_label(b, M);
            cxd acc(0.0, 0.0);
            for (int j = 0; j < M; ++j) {
                const int jn = ((j + nu) % M + M) % M;
                acc += std::conj(psi.v[static_cast<std::size_t>(j)]) *
                       std::polar(1.0, 2.0 * M_PI * double(mu) * j / M) *
                       psi.v[static_cast<std::size_t>(jn)];
            }
            chi[static_cast<std::size_t>(a) * M + b] =
                std::polar(1.0, M_PI * double(mu) * double(nu) / M) * acc * lat.dx;
        }
    }
    return wigner_from_chi(g, chi);
}

WignerGrid wigner_reduced(const ReducedDensity& rho, const PhaseGrid& g) {
    if (rho.p != 1 || rho.M != g.M()) throw ConfigError("wigner_reduced expects p=1 density on the grid");
    const int M = g.M();
    std::vector<cxd> chi(static_cast<std::size_t>(M) * M);
    for (int a = 0; a < M; ++a) {
        const int mu = dual_label(a, M);
        for (int b = 0; b < M; ++b) {
            const int nu = dual_label(b, M);
            cxd acc(0.0, 0.0);
            for (int y = 0; y < M; ++y) {
                const int x = ((y + nu) % M + M) % M;
                acc += rho.rho(x, y) * std::polar(1.0, 2.0 * M_PI * double(mu) * y / M);
            }
            chi[static_cast<std::size_t>(a) * M + b] =
                std::polar(1.0, M_PI * double(mu) * double(nu) / M) * acc;
        }
    }
    return wigner_from_chi(g, chi);
}

double wigner_pairing(const Symbol& tau, const WignerGrid& W) {
    if (!same_grid(tau.g, W.g)) throw ConfigError("pairing operands on different grids");
    const int M = W.g.M();
    cxd acc(0.0, 0.0);
    for (std::size_t i = 0; i < W.w.size(); ++i) acc += tau.vals[i] * W.w[i];
    (void)M;
    return (acc * W.g.lat.dx * W.g.dxi).real();
}

WignerGrid wigner_free_transport(const WignerGrid& W, double t) {
    const int M = W.g.M();
    WignerGrid out = W;
    Eigen::MatrixXcd F = dft_matrix(M);
    for (int i = 0; i < M; ++i) {
        const double xi = W.g.xi[static_cast<std::size_t>(i)];
        // row spectrum, then shift x by xi*t
        Eigen::VectorXcd row(M);
        for (int j = 0; j < M; ++j) row(j) = W.w[static_cast<std::size_t>(j) * M + i];
        Eigen::VectorXcd hat = F.adjoint() * row / double(M);
        for (int a = 0; a < M; ++a) {
            const double S = W.g.S(dual_label(a, M));
            hat(a) *= std::polar(1.0, -S * xi * t);
        }
        Eigen::VectorXcd shifted = F * hat;
        for (int j = 0; j < M; ++j) out.w[static_cast<std::size_t>(j) * M + i] = shifted(j).real();
    }
    return out;
}

} // namespace mfl
