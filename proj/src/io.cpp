#include "mfl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mfl/errors.hpp"

namespace mfl {

namespace {

void put_bytes(std::ofstream& f, const void* p, std::size_t n) {
  f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void get_bytes(std::ifstream& f, void* p, std::size_t n) {
  f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!f) throw ConfigError("binary file truncated");
}

void put_i64(std::ofstream& f, int64_t v) { put_bytes(f, &v, 8); }
void put_f64(std::ofstream& f, double v) { put_bytes(f, &v, 8); }
int64_t get_i64(std::ifstream& f) {
  int64_t v;
  get_bytes(f, &v, 8);
  return v;
}
double get_f64(std::ifstream& f) {
  double v;
  get_bytes(f, &v, 8);
  return v;
}

std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream f(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  return f;
}

std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw ConfigError("cannot open for reading: " + path);
  return f;
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_pkernel(const std::string& path, const PKernel& a) {
  std::ofstream f = open_out(path, true);
  put_i64(f, a.p);
  put_i64(f, a.M);
  put_f64(f, a.dx);
  put_i64(f, a.hermitian ? 1 : 0);
  for (Eigen::Index r = 0; r < a.A.rows(); ++r)
    for (Eigen::Index c = 0; c < a.A.cols(); ++c) {
      put_f64(f, a.A(r, c).real());
      put_f64(f, a.A(r, c).imag());
    }
  if (!f) throw ConfigError("write failed: " + path);
}

PKernel read_pkernel(const std::string& path) {
  std::ifstream f = open_in(path, true);
  PKernel a;
  a.p = static_cast<int>(get_i64(f));
  a.M = static_cast<int>(get_i64(f));
  a.dx = get_f64(f);
  a.hermitian = get_i64(f) != 0;
  if (a.p < 1 || a.p > 2 || a.M < 2)
    throw ConfigError("kernel file header out of range: " + path);
  Eigen::Index dim = 1;
  for (int i = 0; i < a.p; ++i) dim *= a.M;
  a.A.resize(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double re = get_f64(f);
      const double im = get_f64(f);
      a.A(r, c) = cxd(re, im);
    }
  return a;
}

void write_fock_snapshot(const std::string& path, const FockBasis& basis, const Lattice& lat,
                         const FockState& s) {
  std::ofstream f = open_out(path, true);
  put_i64(f, basis.N);
  put_i64(f, basis.M);
  put_f64(f, lat.L);
  put_f64(f, s.hbar);
  put_f64(f, s.t);
  put_i64(f, static_cast<int64_t>(s.c.size()));
  for (std::size_t r = 0; r < s.c.size(); ++r) {
    put_i64(f, static_cast<int64_t>(r));
    put_f64(f, s.c[r].real());
    put_f64(f, s.c[r].imag());
  }
  if (!f) throw ConfigError("write failed: " + path);
}

FockState read_fock_snapshot(const std::string& path, const FockBasis& basis,
                             const Lattice& lat) {
  std::ifstream f = open_in(path, true);
  const int64_t N = get_i64(f);
  const int64_t M = get_i64(f);
  const double L = get_f64(f);
  if (N != basis.N || M != basis.M || std::abs(L - lat.L) > 1e-12 * lat.L)
    throw ConfigError("snapshot header does not match the basis: " + path);
  FockState s;
  s.hbar = get_f64(f);
  s.t = get_f64(f);
  const int64_t dim = get_i64(f);
  if (dim != static_cast<int64_t>(basis.dim()))
    throw ConfigError("snapshot dimension does not match the basis: " + path);
  s.c.resize(basis.dim());
  for (int64_t r = 0; r < dim; ++r) {
    const int64_t ord = get_i64(f);
    if (ord != r) throw ConfigError("snapshot rows out of order: " + path);
    const double re = get_f64(f);
    const double im = get_f64(f);
    s.c[static_cast<std::size_t>(r)] = cxd(re, im);
  }
  return s;
}

void write_hartree_trajectory(const std::string& path, const Lattice& lat,
                              const HartreeTrajectory& tr) {
  std::ofstream f = open_out(path, false);
  f << "t,site,re,im,norm,energy\n";
  for (std::size_t n = 0; n < tr.snapshots.size(); ++n)
    for (int j = 0; j < lat.M; ++j)
      f << format_g17(tr.times[n]) << ',' << j << ','
        << format_g17(tr.snapshots[n].v[j].real()) << ','
        << format_g17(tr.snapshots[n].v[j].imag()) << ','
        << format_g17(tr.norms[n]) << ',' << format_g17(tr.energies[n]) << '\n';
  if (!f) throw ConfigError("write failed: " + path);
}

void write_phase_csv(const std::string& path, const PhaseGrid& g,
                     const std::vector<double>& vals) {
  const int M = g.M();
  if (vals.size() != static_cast<std::size_t>(M) * M)
    throw ConfigError("phase grid array size mismatch");
  std::ofstream f = open_out(path, false);
  f << "x,xi,value\n";
  for (int ix = 0; ix < M; ++ix)
    for (int ixi = 0; ixi < M; ++ixi)
      f << format_g17(g.lat.x(ix)) << ',' << format_g17(g.xi[ixi]) << ','
        << format_g17(vals[static_cast<std::size_t>(ix) * M + ixi]) << '\n';
  if (!f) throw ConfigError("write failed: " + path);
}

void write_phase_binary(const std::string& path, const PhaseGrid& g,
                        const std::vector<double>& vals) {
  const int M = g.M();
  if (vals.size() != static_cast<std::size_t>(M) * M)
    throw ConfigError("phase grid array size mismatch");
  std::ofstream f = open_out(path, true);
  put_i64(f, M);
  put_f64(f, g.lat.L);
  put_f64(f, g.hbar);
  for (double v : vals) put_f64(f, v);
  if (!f) throw ConfigError("write failed: " + path);
}

std::vector<double> read_phase_binary(const std::string& path, int* M, double* L,
                                      double* hbar) {
  std::ifstream f = open_in(path, true);
  const int m = static_cast<int>(get_i64(f));
  const double l = get_f64(f);
  const double hb = get_f64(f);
  if (m < 2 || !(l > 0.0)) throw ConfigError("phase grid header out of range: " + path);
  std::vector<double> vals(static_cast<std::size_t>(m) * m);
  for (double& v : vals) v = get_f64(f);
  if (M) *M = m;
  if (L) *L = l;
  if (hbar) *hbar = hb;
  return vals;
}

void write_ensemble_csv(const std::string& path, const ParticleEnsemble& e) {
  std::ofstream f = open_out(path, false);
  f << "i,x,xi\n";
  for (int i = 0; i < e.N; ++i)
    f << i << ',' << format_g17(e.x[i]) << ',' << format_g17(e.xi[i]) << '\n';
  if (!f) throw ConfigError("write failed: " + path);
}

namespace {

// NaN marks "not computed" internally; JSON has no NaN, so emit null.
std::string json_num(double v) { return std::isfinite(v) ? format_g17(v) : "null"; }

void put_array(std::ofstream& f, const std::vector<double>& v) {
  f << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) f << ',';
    f << json_num(v[i]);
  }
  f << ']';
}

}  // namespace

void write_dyson_json(const std::string& path, const DysonResult& r) {
  std::ofstream f = open_out(path, false);
  f << "{\n";
  f << "  \"p\": " << r.p << ",\n";
  f << "  \"k\": " << r.k << ",\n";
  f << "  \"epsilon\": " << json_num(r.epsilon) << ",\n";
  f << "  \"hbar\": " << json_num(r.hbar) << ",\n";
  f << "  \"terms\": ";
  put_array(f, r.terms);
  f << ",\n  \"sum\": " << json_num(r.sum) << ",\n";
  f << "  \"bounds\": {\"fixed_hbar\": ";
  put_array(f, r.bounds_fixed);
  f << ", \"uniform\": ";
  put_array(f, r.bounds_uniform);
  f << "},\n";
  f << "  \"residual_vs_hartree\": " << json_num(r.residual) << "\n";
  f << "}\n";
  if (!f) throw ConfigError("write failed: " + path);
}

uint64_t fnv1a_file(const std::string& path) {
  std::ifstream f = open_in(path, true);
  uint64_t h = 1469598103934665603ull;
  char buf[65536];
  while (f) {
    f.read(buf, sizeof buf);
    const std::streamsize n = f.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace mfl
