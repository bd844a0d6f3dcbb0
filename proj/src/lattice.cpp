#include "mfl/lattice.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace mfl {

Lattice build_lattice(int M, double L) {
    if (M < 4 || M % 2 != 0)
        throw ConfigError("build_lattice: M must be even and >= 4, got " + std::to_string(M));
    if (!(L > 0.0))
        throw ConfigError("build_lattice: L must be positive");
    Lattice lat;
    lat.M = M;
    lat.L = L;
    lat.dx = L / M;
    lat.k.resize(M);
    const double dk = 2.0 * M_PI / L;
    for (int j = 0; j < M; ++j) {
        int m = (j < M / 2) ? j : j - M;
        lat.k[j] = dk * m;
    }
    return lat;
}

Field make_field(const Lattice& lat) {
    Field f;
    f.v.assign(lat.M, cxd(0.0, 0.0));
    return f;
}

double norm(const Lattice& lat, const Field& psi) {
    double s = 0.0;
    for (const auto& z : psi.v) s += std::norm(z);
    return std::sqrt(s * lat.dx);
}

void normalize(const Lattice& lat, Field& psi) {
    double n = norm(lat, psi);
    if (n < 1e-300) throw NumericalError("normalize: zero field");
    for (auto& z : psi.v) z /= n;
}

cxd inner(const Lattice& lat, const Field& a, const Field& b) {
    cxd s(0.0, 0.0);
    for (int j = 0; j < lat.M; ++j) s += std::conj(a.v[j]) * b.v[j];
    return s * lat.dx;
}

namespace {

// Plans are cached per size with FFTW_UNALIGNED so they can run on any buffer.
// Plan creation is not thread safe; execution on distinct buffers is.
struct PlanCache {
    std::mutex mu;
    std::map<int, fftw_plan> fwd, bwd;

    fftw_plan get(int M, int sign) {
        std::lock_guard<std::mutex> lock(mu);
        auto& table = (sign == FFTW_FORWARD) ? fwd : bwd;
        auto it = table.find(M);
        if (it != table.end()) return it->second;
        std::vector<cxd> a(M), b(M);
        fftw_plan p = fftw_plan_dft_1d(M, reinterpret_cast<fftw_complex*>(a.data()),
                                       reinterpret_cast<fftw_complex*>(b.data()), sign,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        table[M] = p;
        return p;
    }
};

PlanCache& plans() {
    static PlanCache c;
    return c;
}

void run_plan(int M, int sign, const std::vector<cxd>& in, std::vector<cxd>& out) {
    fftw_plan p = plans().get(M, sign);
    out.resize(M);
    // fftw_execute_dft does not modify the input for out-of-place c2c plans
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cxd*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

} // namespace

std::vector<cxd> fft_forward(const Lattice& lat, const std::vector<cxd>& in) {
    std::vector<cxd> out;
    run_plan(lat.M, FFTW_FORWARD, in, out);
    for (auto& z : out) z *= lat.dx;
    return out;
}

std::vector<cxd> fft_inverse(const Lattice& lat, const std::vector<cxd>& in) {
    std::vector<cxd> out;
    run_plan(lat.M, FFTW_BACKWARD, in, out);
    for (auto& z : out) z /= lat.L;
    return out;
}

Field free_propagate(const Lattice& lat, const Field& psi, double t, double hbar,
                     Dispersion disp) {
    if (!(hbar > 0.0)) throw ConfigError("free_propagate: hbar must be positive");
    std::vector<cxd> hat = fft_forward(lat, psi.v);
    for (int j = 0; j < lat.M; ++j) {
        double E;
        if (disp == Dispersion::continuum) {
            E = 0.5 * hbar * hbar * lat.k[j] * lat.k[j];
        } else {
            double s = std::sin(0.5 * lat.k[j] * lat.dx);
            E = 2.0 * hbar * hbar * s * s / (lat.dx * lat.dx);
        }
        hat[j] *= std::polar(1.0, -E * t / hbar);
    }
    Field out;
    out.v = fft_inverse(lat, hat);
    return out;
}

PairPotential make_pair_potential(const Lattice& lat, const std::vector<double>& samples) {
    if (static_cast<int>(samples.size()) != lat.M)
        throw ConfigError("make_pair_potential: sample count != M");
    for (int d = 1; d < lat.M; ++d) {
        if (std::abs(samples[d] - samples[lat.M - d]) > 1e-12)
            throw ConfigError("make_pair_potential: potential must be even, w[d] == w[M-d]");
    }
    PairPotential w;
    w.w = samples;
    w.winf = 0.0;
    for (double v : samples) w.winf = std::max(w.winf, std::abs(v));
    std::vector<cxd> cw(lat.M);
    for (int d = 0; d < lat.M; ++d) cw[d] = samples[d];
    std::vector<cxd> hat = fft_forward(lat, cw);
    w.what.resize(lat.M);
    for (int j = 0; j < lat.M; ++j) {
        if (std::abs(hat[j].imag()) > 1e-10 * (1.0 + w.winf))
            throw NumericalError("make_pair_potential: spectrum of an even real table must be real");
        w.what[j] = hat[j].real();
    }
    return w;
}

std::vector<double> convolve_periodic(const Lattice& lat, const PairPotential& w,
                                      const std::vector<double>& rho) {
    if (static_cast<int>(rho.size()) != lat.M)
        throw ConfigError("convolve_periodic: field size != M");
    std::vector<cxd> crho(lat.M);
    for (int j = 0; j < lat.M; ++j) crho[j] = rho[j];
    std::vector<cxd> hat = fft_forward(lat, crho);
    for (int j = 0; j < lat.M; ++j) hat[j] *= w.what[j];
    std::vector<cxd> out = fft_inverse(lat, hat);
    std::vector<double> res(lat.M);
    for (int j = 0; j < lat.M; ++j) res[j] = out[j].real();
    return res;
}

double potential_sigma_norm(const Lattice& lat, const PairPotential& w, double sigma) {
    double s = 0.0;
    for (int j = 0; j < lat.M; ++j)
        s += std::abs(w.what[j]) / lat.L * std::exp(sigma * std::abs(lat.k[j]));
    return s;
}

PairPotential cosine_potential(const Lattice& lat, double a) {
    std::vector<double> s(lat.M);
    for (int j = 0; j < lat.M; ++j) s[j] = a * std::cos(2.0 * M_PI * lat.x(j) / lat.L);
    return make_pair_potential(lat, s);
}

PairPotential gaussian_bump_potential(const Lattice& lat, double a, double sigma) {
    // periodized so circular evenness holds exactly
    std::vector<double> s(lat.M, 0.0);
    for (int j = 0; j < lat.M; ++j) {
        double x = lat.x(j);
        for (int img = -6; img <= 6; ++img) {
            double d = x + img * lat.L;
            s[j] += a * std::exp(-0.5 * d * d / (sigma * sigma));
        }
    }
    return make_pair_potential(lat, s);
}

PairPotential constant_potential(const Lattice& lat, double c) {
    return make_pair_potential(lat, std::vector<double>(lat.M, c));
}

} // namespace mfl
