#include "mfl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mfl/dyson.hpp"
#include "mfl/errors.hpp"
#include "mfl/fock.hpp"
#include "mfl/hartree.hpp"
#include "mfl/io.hpp"
#include "mfl/phasespace.hpp"
#include "mfl/version.hpp"
#include "mfl/vlasov.hpp"

namespace mfl {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile parse_config_text(const std::string& text) {
  ConfigFile cfg;
  cfg.text = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.kv.count(full))
      throw ConfigError("duplicate config key: " + full);
    cfg.kv[full] = val;
  }
  return cfg;
}

ConfigFile parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

double parse_num(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: " + v);
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("config key " + key + ": empty list entry");
    out.push_back(parse_num(key, item));
  }
  if (out.empty()) throw ConfigError("config key " + key + ": empty list");
  return out;
}

struct Fetch {
  const ConfigFile* cfg;
  std::vector<std::string> known;

  bool has(const std::string& key) {
    known.push_back(key);
    return cfg->has(key);
  }
  std::string str(const std::string& key, const std::string& dflt) {
    return has(key) ? cfg->kv.at(key) : dflt;
  }
  double num(const std::string& key, double dflt) {
    return has(key) ? parse_num(key, cfg->kv.at(key)) : dflt;
  }
  int integer(const std::string& key, int dflt) {
    if (!has(key)) return dflt;
    const double x = parse_num(key, cfg->kv.at(key));
    const int i = static_cast<int>(std::llround(x));
    if (std::abs(x - i) > 1e-9) throw ConfigError("config key " + key + ": expected an integer");
    return i;
  }
  std::vector<double> list(const std::string& key) {
    return has(key) ? parse_list(key, cfg->kv.at(key)) : std::vector<double>{};
  }
};

}  // namespace

ExperimentConfig experiment_from_config(const ConfigFile& cfg) {
  Fetch get{&cfg, {}};
  ExperimentConfig e;
  e.config_echo = cfg.text;
  if (!get.has("run.experiment"))
    throw ConfigError("config is missing run.experiment");
  e.kind = cfg.kv.at("run.experiment");
  const bool known_kind = e.kind == "meanfield_gap" || e.kind == "hbar_uniformity" ||
                          e.kind == "dyson_truncation" || e.kind == "wigner_vlasov" ||
                          e.kind == "classical_meanfield";
  if (!known_kind) throw ConfigError("unknown experiment kind: " + e.kind);

  e.t = get.num("run.t", e.t);
  e.dt = get.num("run.dt", e.dt);
  e.tol = get.num("run.tol", e.tol);
  if (get.has("run.hbar")) e.hbars = {parse_num("run.hbar", cfg.kv.at("run.hbar"))};
  if (get.has("run.hbar_list")) e.hbars = parse_list("run.hbar_list", cfg.kv.at("run.hbar_list"));
  e.seed = static_cast<uint64_t>(get.num("run.seed", 1.0));
  e.outdir = get.str("run.out", e.outdir);
  const std::string disp = get.str("run.dispersion", "continuum");
  if (disp == "continuum")
    e.disp = Dispersion::continuum;
  else if (disp == "lattice3pt")
    e.disp = Dispersion::lattice3pt;
  else
    throw ConfigError("run.dispersion must be continuum or lattice3pt");

  e.M = get.integer("lattice.M", e.M);
  e.L = get.num("lattice.L", e.L);

  e.potential = get.str("potential.family", e.potential);
  e.pot_a = get.num("potential.a", e.pot_a);
  e.pot_sigma = get.num("potential.sigma", e.pot_sigma);

  e.observable = get.str("observable.family", e.observable);

  e.initial = get.str("initial.family", e.initial);
  e.init_x0 = get.num("initial.x0", 0.5 * e.L);
  e.init_sigma = get.num("initial.sigma", e.init_sigma);
  e.init_xi0 = get.num("initial.xi0", e.init_xi0);
  e.init_sigma_xi = get.num("initial.sigma_xi", e.init_sigma_xi);

  if (get.has("sweep.N_list")) {
    for (double v : parse_list("sweep.N_list", cfg.kv.at("sweep.N_list")))
      e.Ns.push_back(static_cast<int>(std::llround(v)));
  }
  e.epsilons = get.list("sweep.epsilon_list");
  e.k = get.integer("sweep.k", 0);
  if (get.has("sweep.ensemble_list")) {
    for (double v : parse_list("sweep.ensemble_list", cfg.kv.at("sweep.ensemble_list")))
      e.ensemble_sizes.push_back(static_cast<int>(std::llround(v)));
  }
  e.nseeds = get.integer("sweep.seeds", e.nseeds);
  e.smoothing = get.num("sweep.smoothing", e.smoothing);
  e.nbody_dt = get.num("sweep.classical_dt", e.nbody_dt);

  std::vector<std::string> unknown;
  for (const auto& [key, val] : cfg.kv) {
    (void)val;
    if (std::find(get.known.begin(), get.known.end(), key) == get.known.end())
      unknown.push_back(key);
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const std::string& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
  return e;
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw ConfigError("fit_power_law: need at least 3 points");
  const std::size_t n = points.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [pn, py] : points) {
    if (!(pn > 0.0) || !(py > 0.0))
      throw ConfigError("fit_power_law: points must be positive");
    const double x = std::log(pn), y = std::log(py);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  if (std::abs(det) < 1e-14)
    throw ConfigError("fit_power_law: degenerate abscissas");
  PowerLawFit fit;
  fit.exponent = (n * sxy - sx * sy) / det;
  const double intercept = (sy - fit.exponent * sx) / n;
  fit.prefactor = std::exp(intercept);
  double ssres = 0, sstot = 0;
  const double ybar = sy / n;
  for (const auto& [pn, py] : points) {
    const double x = std::log(pn), y = std::log(py);
    const double m = intercept + fit.exponent * x;
    ssres += (y - m) * (y - m);
    sstot += (y - ybar) * (y - ybar);
  }
  fit.r2 = (ssres <= 1e-24) ? 1.0 : 1.0 - ssres / sstot;
  return fit;
}

PKernel observable_family(const std::string& name, const Lattice& lat) {
  const int M = lat.M;
  if (name == "position_window") {
    std::vector<double> g(M);
    const double s = lat.L / 6.0;
    for (int j = 0; j < M; ++j) {
      double d = lat.x(j) - 0.5 * lat.L;
      d -= lat.L * std::round(d / lat.L);
      g[j] = std::exp(-d * d / (2.0 * s * s));
    }
    return multiplication_kernel(lat, g);
  }
  if (name == "momentum_window") {
    std::vector<double> g(M);
    for (int m = 0; m < M; ++m) g[m] = std::exp(-0.5 * lat.k[m] * lat.k[m]);
    return momentum_function_kernel(lat, g);
  }
  if (name == "coherent_projector") {
    Field phi = make_field(lat);
    const double x0 = lat.L / 3.0;
    const double s = lat.L / 10.0;
    for (int j = 0; j < M; ++j) {
      double acc = 0.0;
      for (int n = -2; n <= 2; ++n) {
        const double d = lat.x(j) - x0 + n * lat.L;
        acc += std::exp(-d * d / (4.0 * s * s));
      }
      phi.v[j] = acc;
    }
    normalize(lat, phi);
    return projector_kernel(lat, phi);
  }
  if (name == "pair_product")
    return tensor_product(observable_family("position_window", lat),
                          observable_family("momentum_window", lat));
  throw ConfigError("unknown observable family: " + name);
}

Field initial_family(const std::string& name, const Lattice& lat, double x0, double sigma,
                     double xi0, double hbar) {
  Field psi = make_field(lat);
  // The momentum boost snaps to the nearest lattice mode so the phase stays
  // periodic on the torus.
  const long m0 = std::lround(xi0 * lat.L / (2.0 * M_PI * hbar));
  if (name == "gaussian") {
    if (!(sigma > 0.0)) throw ConfigError("initial gaussian: sigma must be positive");
    for (int j = 0; j < lat.M; ++j) {
      double acc = 0.0;
      for (int n = -2; n <= 2; ++n) {
        const double d = lat.x(j) - x0 + n * lat.L;
        acc += std::exp(-d * d / (4.0 * sigma * sigma));
      }
      const double ph = 2.0 * M_PI * m0 * lat.x(j) / lat.L;
      psi.v[j] = acc * cxd(std::cos(ph), std::sin(ph));
    }
  } else if (name == "uniform") {
    for (int j = 0; j < lat.M; ++j) {
      const double ph = 2.0 * M_PI * m0 * lat.x(j) / lat.L;
      psi.v[j] = cxd(std::cos(ph), std::sin(ph));
    }
  } else {
    throw ConfigError("unknown initial family: " + name);
  }
  normalize(lat, psi);
  return psi;
}

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
  uint64_t z = seed ^ (a * 0x9E3779B97F4A7C15ull) ^ (b * 0xBF58476D1CE4E5B9ull);
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

PairPotential build_potential(const ExperimentConfig& cfg, const Lattice& lat) {
  if (cfg.potential == "cosine") return cosine_potential(lat, cfg.pot_a);
  if (cfg.potential == "gaussian")
    return gaussian_bump_potential(lat, cfg.pot_a, cfg.pot_sigma);
  if (cfg.potential == "constant") return constant_potential(lat, cfg.pot_a);
  throw ConfigError("unknown potential family: " + cfg.potential);
}

struct Out {
  std::string dir;
  std::vector<std::pair<std::string, uint64_t>> files;

  std::string path(const std::string& name) const { return dir + "/" + name; }
  void add(const std::string& name) { files.emplace_back(name, fnv1a_file(path(name))); }
};

void run_meanfield_gap(const ExperimentConfig& cfg, Out& out, RunManifest& man) {
  const Lattice lat = build_lattice(cfg.M, cfg.L);
  const PairPotential w = build_potential(cfg, lat);
  const double hbar = cfg.hbars.at(0);
  const Field psi0 =
      initial_family(cfg.initial, lat, cfg.init_x0, cfg.init_sigma, cfg.init_xi0, hbar);
  if (cfg.Ns.size() < 3)
    throw ConfigError("meanfield_gap: sweep.N_list needs at least 3 entries");

  const HartreeTrajectory traj =
      hartree_evolve(lat, w, psi0, cfg.t, cfg.dt, hbar, 1 << 30, cfg.disp);
  const Field& psit = traj.snapshots.back();
  const ReducedDensity target = density_from_field(lat, psit);

  const char* names[4] = {"position_window", "momentum_window", "coherent_projector",
                          "pair_product"};
  std::vector<PKernel> obs;
  for (const char* n : names) obs.push_back(observable_family(n, lat));
  std::vector<double> href(4);
  for (int i = 0; i < 4; ++i) href[i] = hartree_expect(lat, psit, obs[i]).real();

  std::ofstream csv(out.path("gap.csv"));
  csv << "N,trace_distance,err_position_window,err_momentum_window,"
         "err_coherent_projector,err_pair_product\n";
  std::vector<std::pair<double, double>> pts;
  for (int N : cfg.Ns) {
    const FockBasis basis = enumerate_basis(N, cfg.M);
    const FockState s0 = embed_product_state(basis, lat, psi0, hbar);
    const FockState st = evolve_exact(basis, lat, w, s0, cfg.t, cfg.tol);
    const ReducedDensity g1 = reduced_density(basis, st, 1);
    const double dist = trace_distance(g1, target);
    pts.emplace_back(N, dist);
    csv << N << ',' << format_g17(dist);
    for (int i = 0; i < 4; ++i) {
      const double err = std::abs(
          expect_p(basis, st, obs[i]).real() / scaling_factor(N, obs[i].p) - href[i]);
      csv << ',' << format_g17(err);
      man.results.emplace_back("err_" + std::string(names[i]) + "_N" + std::to_string(N), err);
    }
    csv << '\n';
    man.results.emplace_back("D_N" + std::to_string(N), dist);
  }
  csv.close();
  out.add("gap.csv");
  const PowerLawFit fit = fit_power_law(pts);
  man.results.emplace_back("exponent", fit.exponent);
  man.results.emplace_back("prefactor", fit.prefactor);
  man.results.emplace_back("r2", fit.r2);
}

double hartree_reference(const Lattice& lat, const PairPotential& w, const Field& psi0,
                         double t, double dt, double hbar, const PKernel& a) {
  const HartreeTrajectory traj =
      hartree_evolve(lat, w, psi0, t, dt, hbar, 1 << 30, Dispersion::continuum);
  return hartree_expect(lat, traj.snapshots.back(), a).real();
}

void run_dyson_truncation(const ExperimentConfig& cfg, Out& out, RunManifest& man) {
  const Lattice lat = build_lattice(cfg.M, cfg.L);
  const PairPotential w = build_potential(cfg, lat);
  const double hbar = cfg.hbars.at(0);
  const Field psi0 =
      initial_family(cfg.initial, lat, cfg.init_x0, cfg.init_sigma, cfg.init_xi0, hbar);
  const PKernel a = observable_family(cfg.observable, lat);
  if (a.p != 1) throw ConfigError("dyson_truncation: needs a p = 1 observable");
  const std::vector<double> eps =
      cfg.epsilons.empty() ? std::vector<double>{0.05, 0.1, 0.2} : cfg.epsilons;
  const SimplexQuadrature quad = make_simplex_quadrature(8);
  const int depth_cap = 4;
  const double wsig = potential_sigma_norm(lat, w, 1.0);
  const double asig = sigma_norm(weyl_dequantize(a, make_phase_grid(lat, hbar)), 1.0);

  std::ofstream csv(out.path("dyson.csv"));
  csv << "epsilon,k,partial_sum,residual\n";
  int fi = 0;
  for (double epsv : eps) {
    const double t = epsv / w.winf;
    const int kmax =
        cfg.k > 0 ? cfg.k : std::min(k_opt(epsv), depth_cap - a.p);
    DysonResult res = dyson_series_expectation(lat, w, a, psi0, t, kmax, hbar, quad,
                                               depth_cap, wsig, asig);
    const double href = hartree_reference(lat, w, psi0, t, cfg.dt, hbar, a);
    double partial = res.terms[0];
    for (int k = 1; k <= kmax; ++k) {
      partial += res.terms[k];
      const double r = std::abs(partial - href);
      csv << format_g17(epsv) << ',' << k << ',' << format_g17(partial) << ','
          << format_g17(r) << '\n';
      man.results.emplace_back(
          "residual_eps" + std::to_string(fi) + "_k" + std::to_string(k), r);
    }
    res.residual = std::abs(res.sum - href);
    const std::string jname = "dyson_eps" + std::to_string(fi) + ".json";
    write_dyson_json(out.path(jname), res);
    out.add(jname);
    ++fi;
  }
  csv.close();
  out.add("dyson.csv");
}

void run_hbar_uniformity(const ExperimentConfig& cfg, Out& out, RunManifest& man) {
  const Lattice lat = build_lattice(cfg.M, cfg.L);
  const PairPotential w = build_potential(cfg, lat);
  const PKernel a = observable_family(cfg.observable, lat);
  if (a.p != 1) throw ConfigError("hbar_uniformity: needs a p = 1 observable");
  const double epsv = cfg.epsilons.empty() ? 0.1 : cfg.epsilons.at(0);
  const SimplexQuadrature quad = make_simplex_quadrature(8);
  const int depth_cap = 4;
  const int kmax = cfg.k > 0 ? cfg.k : std::min(k_opt(epsv), depth_cap - a.p);
  const double wsig = potential_sigma_norm(lat, w, 1.0);

  std::ofstream csv(out.path("uniformity.csv"));
  csv << "hbar,t,k,sum,residual\n";
  double first_res = -1.0, max_res = 0.0;
  for (double hbar : cfg.hbars) {
    // t scales with hbar so the per-order expansion strength ||w|| t / hbar
    // is the same at every point of the sweep
    const double t = epsv * hbar / w.winf;
    const Field psi0 =
        initial_family(cfg.initial, lat, cfg.init_x0, cfg.init_sigma, cfg.init_xi0, hbar);
    const double asig =
        sigma_norm(weyl_dequantize(a, make_phase_grid(lat, hbar)), 1.0);
    DysonResult res = dyson_series_expectation(lat, w, a, psi0, t, kmax, hbar, quad,
                                               depth_cap, wsig, asig);
    const double href = hartree_reference(lat, w, psi0, t, cfg.dt, hbar, a);
    res.residual = std::abs(res.sum - href);
    csv << format_g17(hbar) << ',' << format_g17(t) << ',' << kmax << ','
        << format_g17(res.sum) << ',' << format_g17(res.residual) << '\n';
    man.results.emplace_back("residual_hbar_" + format_g17(hbar), res.residual);
    if (first_res < 0.0) first_res = res.residual;
    max_res = std::max(max_res, res.residual);
  }
  csv.close();
  out.add("uniformity.csv");
  man.results.emplace_back("residual_ratio_max",
                           first_res > 0.0 ? max_res / first_res : 0.0);
}

PhaseDensity classical_blob(const PhaseGrid& g, double x0, double sx, double xi0,
                            double sxi);

void run_wigner_vlasov(const ExperimentConfig& cfg, Out& out, RunManifest& man) {
  const Lattice lat = build_lattice(cfg.M, cfg.L);
  const PairPotential w = build_potential(cfg, lat);
  std::ofstream csv(out.path("wigner_vlasov.csv"));
  csv << "hbar,distance\n";
  int fi = 0;
  for (double hbar : cfg.hbars) {
    const Field psi0 =
        initial_family(cfg.initial, lat, cfg.init_x0, cfg.init_sigma, cfg.init_xi0, hbar);
    const HartreeTrajectory traj =
        hartree_evolve(lat, w, psi0, cfg.t, cfg.dt, hbar, 1 << 30, Dispersion::continuum);
    // The Wigner transform of a gaussian is a gaussian: the matching kinetic
    // state has xi-width hbar/(2 sigma_x) around the boost snapped to the
    // lattice mode, the same snap initial_family applies.
    const PhaseGrid grid = make_phase_grid(lat, hbar);
    const double m0 = std::lround(cfg.init_xi0 * lat.L / (2.0 * M_PI * hbar));
    const double xi0 = 2.0 * M_PI * m0 * hbar / lat.L;
    const PhaseDensity f0 =
        classical_blob(grid, cfg.init_x0, cfg.init_sigma, xi0, hbar / (2.0 * cfg.init_sigma));
    const PhaseDensity ft = vlasov_evolve(f0, cfg.t, cfg.nbody_dt, w);
    const WignerGrid Wt = wigner_1p(lat, traj.snapshots.back(), hbar);
    const double d = distribution_distance(Wt, ft);
    csv << format_g17(hbar) << ',' << format_g17(d) << '\n';
    man.results.emplace_back("distance_hbar_" + format_g17(hbar), d);
    const std::string wb = "wigner_h" + std::to_string(fi) + ".bin";
    const std::string vb = "vlasov_h" + std::to_string(fi) + ".bin";
    write_phase_binary(out.path(wb), Wt.g, Wt.w);
    write_phase_binary(out.path(vb), ft.g, ft.f);
    out.add(wb);
    out.add(vb);
    ++fi;
  }
  csv.close();
  out.add("wigner_vlasov.csv");
}

PhaseDensity classical_blob(const PhaseGrid& g, double x0, double sx, double xi0,
                            double sxi) {
  PhaseDensity f = make_phase_density(g);
  const int M = g.M();
  const double Lx = g.lat.L, Lxi = g.Lxi();
  for (int ix = 0; ix < M; ++ix)
    for (int ixi = 0; ixi < M; ++ixi) {
      double gx = 0.0, gxi = 0.0;
      for (int n = -2; n <= 2; ++n) {
        const double dxv = g.lat.x(ix) - x0 + n * Lx;
        gx += std::exp(-dxv * dxv / (2.0 * sx * sx));
        const double dxiv = g.xi[ixi] - xi0 + n * Lxi;
        gxi += std::exp(-dxiv * dxiv / (2.0 * sxi * sxi));
      }
      f.f[static_cast<std::size_t>(ix) * M + ixi] = gx * gxi;
    }
  const double m = f.mass();
  for (double& v : f.f) v /= m;
  return f;
}

/// Circular convolution with the normalized sampling of the mollifier, the
/// same kernel empirical_density plants on each particle; comparing the
/// smoothed ensemble against the equally smoothed field cancels the
/// mollification bias, leaving the sampling error under test.
PhaseDensity mollify(const PhaseDensity& f, double smoothing) {
  const int M = f.g.M();
  // kernels indexed by circular offset: k[j] = periodized gaussian at j*step
  std::vector<double> kx(M), kxi(M);
  double sx = 0.0, sxi = 0.0;
  for (int j = 0; j < M; ++j) {
    double ax = 0.0, axi = 0.0;
    for (int n = -2; n <= 2; ++n) {
      double d = j * f.g.lat.dx + n * f.g.lat.L;
      ax += std::exp(-d * d / (2.0 * smoothing * smoothing));
      d = j * f.g.dxi + n * f.g.Lxi();
      axi += std::exp(-d * d / (2.0 * smoothing * smoothing));
    }
    kx[j] = ax;
    kxi[j] = axi;
    sx += ax;
    sxi += axi;
  }
  for (int j = 0; j < M; ++j) {
    kx[j] /= sx;
    kxi[j] /= sxi;
  }
  PhaseDensity outd = make_phase_density(f.g);
  // separable circular convolution, one pass per axis
  std::vector<double> tmp(static_cast<std::size_t>(M) * M, 0.0);
  for (int ixi = 0; ixi < M; ++ixi)
    for (int ix = 0; ix < M; ++ix) {
      double acc = 0.0;
      for (int d = 0; d < M; ++d)
        acc += kx[d] * f.f[static_cast<std::size_t>(((ix - d) % M + M) % M) * M + ixi];
      tmp[static_cast<std::size_t>(ix) * M + ixi] = acc;
    }
  for (int ix = 0; ix < M; ++ix)
    for (int ixi = 0; ixi < M; ++ixi) {
      double acc = 0.0;
      for (int d = 0; d < M; ++d)
        acc += kxi[d] * tmp[static_cast<std::size_t>(ix) * M + ((ixi - d) % M + M) % M];
      outd.f[static_cast<std::size_t>(ix) * M + ixi] = acc;
    }
  return outd;
}

void run_classical_meanfield(const ExperimentConfig& cfg, Out& out, RunManifest& man) {
  const Lattice lat = build_lattice(cfg.M, cfg.L);
  const PairPotential w = build_potential(cfg, lat);
  const double hbar = cfg.hbars.at(0);  // encodes the xi-box via the shared grid
  const PhaseGrid g = make_phase_grid(lat, hbar);
  if (cfg.ensemble_sizes.size() < 2)
    throw ConfigError("classical_meanfield: sweep.ensemble_list needs at least 2 entries");
  const double smoothing =
      cfg.smoothing > 0.0 ? cfg.smoothing : 2.0 * std::max(lat.dx, g.dxi);

  const PhaseDensity f0 =
      classical_blob(g, cfg.init_x0, cfg.init_sigma, cfg.init_xi0, cfg.init_sigma_xi);
  const PhaseDensity ft = vlasov_evolve(f0, cfg.t, cfg.nbody_dt, w);
  const PhaseDensity ft_smooth = mollify(ft, smoothing);

  std::ofstream csv(out.path("classical.csv"));
  csv << "N,mean_distance\n";
  for (int N : cfg.ensemble_sizes) {
    double acc = 0.0;
    for (int sd = 0; sd < cfg.nseeds; ++sd) {
      std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<uint64_t>(N),
                                   static_cast<uint64_t>(sd)));
      std::normal_distribution<double> nx(cfg.init_x0, cfg.init_sigma);
      std::normal_distribution<double> nxi(cfg.init_xi0, cfg.init_sigma_xi);
      ParticleEnsemble e;
      e.N = N;
      e.x.resize(N);
      e.xi.resize(N);
      for (int i = 0; i < N; ++i) {
        double x = std::fmod(nx(rng), lat.L);
        if (x < 0.0) x += lat.L;
        e.x[i] = x;
        e.xi[i] = nxi(rng);
      }
      const ParticleEnsemble et = classical_nbody_evolve(lat, w, e, cfg.t, cfg.nbody_dt);
      const PhaseDensity emp = empirical_density(g, et, smoothing);
      acc += distribution_distance(emp, ft_smooth);
    }
    const double mean = acc / cfg.nseeds;
    csv << N << ',' << format_g17(mean) << '\n';
    man.results.emplace_back("mean_distance_N" + std::to_string(N), mean);
  }
  csv.close();
  out.add("classical.csv");
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 16);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(cfg.outdir);
  RunManifest man;
  man.config_echo = cfg.config_echo;
  man.version = kVersion;
  Out out{cfg.outdir, {}};

  if (cfg.kind == "meanfield_gap")
    run_meanfield_gap(cfg, out, man);
  else if (cfg.kind == "dyson_truncation")
    run_dyson_truncation(cfg, out, man);
  else if (cfg.kind == "hbar_uniformity")
    run_hbar_uniformity(cfg, out, man);
  else if (cfg.kind == "wigner_vlasov")
    run_wigner_vlasov(cfg, out, man);
  else if (cfg.kind == "classical_meanfield")
    run_classical_meanfield(cfg, out, man);
  else
    throw ConfigError("unknown experiment kind: " + cfg.kind);

  man.files = out.files;
  uint64_t h = 1469598103934665603ull;
  for (const auto& [name, sum] : man.files) {
    (void)name;
    for (int b = 0; b < 8; ++b) {
      h ^= (sum >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  man.checksum = h;
  man.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(cfg.outdir + "/manifest.json", man);
  return man;
}

void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  f << "{\n";
  f << "  \"version\": \"" << json_escape(m.version) << "\",\n";
  f << "  \"config\": \"" << json_escape(m.config_echo) << "\",\n";
  f << "  \"results\": {";
  for (std::size_t i = 0; i < m.results.size(); ++i) {
    if (i) f << ", ";
    const double v = m.results[i].second;
    f << "\"" << json_escape(m.results[i].first)
      << "\": " << (std::isfinite(v) ? format_g17(v) : "null");
  }
  f << "},\n";
  f << "  \"files\": [";
  for (std::size_t i = 0; i < m.files.size(); ++i) {
    if (i) f << ", ";
    f << "{\"path\": \"" << json_escape(m.files[i].first) << "\", \"fnv1a\": \""
      << hex64(m.files[i].second) << "\"}";
  }
  f << "],\n";
  f << "  \"wall_seconds\": " << format_g17(m.wall_seconds) << ",\n";
  f << "  \"checksum\": \"" << hex64(m.checksum) << "\"\n";
  f << "}\n";
  if (!f) throw ConfigError("write failed: " + path);
}

}  // namespace mfl
