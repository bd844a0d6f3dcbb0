// Command-line front end: single-solver drivers plus the sweep orchestrator.
// Exit codes: 0 ok, 2 config error, 3 cap violation, 4 numerical failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "mfl/dyson.hpp"
#include "mfl/errors.hpp"
#include "mfl/harness.hpp"
#include "mfl/hartree.hpp"
#include "mfl/io.hpp"
#include "mfl/phasespace.hpp"
#include "mfl/version.hpp"
#include "mfl/vlasov.hpp"

namespace {

struct Global {
  std::string config;
  std::string out;
  int threads = 0;
  long long seed = -1;
};

mfl::ExperimentConfig load(const Global& g, const char* implied_kind) {
  if (g.config.empty()) throw mfl::ConfigError("--config is required");
  mfl::ConfigFile cf = mfl::parse_config_file(g.config);
  if (!cf.has("run.experiment")) cf.kv["run.experiment"] = implied_kind;
  mfl::ExperimentConfig cfg = mfl::experiment_from_config(cf);
  if (!g.out.empty()) cfg.outdir = g.out;
  if (g.seed >= 0) cfg.seed = static_cast<uint64_t>(g.seed);
  return cfg;
}

void cmd_hartree(const Global& g) {
  const mfl::ExperimentConfig cfg = load(g, "wigner_vlasov");
  const mfl::Lattice lat = mfl::build_lattice(cfg.M, cfg.L);
  const mfl::PairPotential w = [&] {
    if (cfg.potential == "cosine") return mfl::cosine_potential(lat, cfg.pot_a);
    if (cfg.potential == "gaussian")
      return mfl::gaussian_bump_potential(lat, cfg.pot_a, cfg.pot_sigma);
    if (cfg.potential == "constant") return mfl::constant_potential(lat, cfg.pot_a);
    throw mfl::ConfigError("unknown potential family: " + cfg.potential);
  }();
  const double hbar = cfg.hbars.at(0);
  const mfl::Field psi0 = mfl::initial_family(cfg.initial, lat, cfg.init_x0,
                                              cfg.init_sigma, cfg.init_xi0, hbar);
  const int every = std::max(1, static_cast<int>(std::lround(cfg.t / cfg.dt)) / 32);
  const mfl::HartreeTrajectory traj =
      mfl::hartree_evolve(lat, w, psi0, cfg.t, cfg.dt, hbar, every, cfg.disp);
  std::filesystem::create_directories(cfg.outdir);
  mfl::write_hartree_trajectory(cfg.outdir + "/hartree.csv", lat, traj);
  const double e0 = traj.energies.front(), e1 = traj.energies.back();
  std::cout << "hartree: t=" << cfg.t << " snapshots=" << traj.snapshots.size()
            << " norm=" << mfl::format_g17(traj.norms.back())
            << " energy_drift=" << mfl::format_g17(std::abs(e1 - e0)) << "\n";
}

void cmd_vlasov(const Global& g) {
  const mfl::ExperimentConfig cfg = load(g, "classical_meanfield");
  const mfl::Lattice lat = mfl::build_lattice(cfg.M, cfg.L);
  const mfl::PairPotential w = [&] {
    if (cfg.potential == "cosine") return mfl::cosine_potential(lat, cfg.pot_a);
    if (cfg.potential == "gaussian")
      return mfl::gaussian_bump_potential(lat, cfg.pot_a, cfg.pot_sigma);
    if (cfg.potential == "constant") return mfl::constant_potential(lat, cfg.pot_a);
    throw mfl::ConfigError("unknown potential family: " + cfg.potential);
  }();
  const mfl::PhaseGrid grid = mfl::make_phase_grid(lat, cfg.hbars.at(0));
  mfl::PhaseDensity f0 = mfl::make_phase_density(grid);
  for (int ix = 0; ix < grid.M(); ++ix)
    for (int ixi = 0; ixi < grid.M(); ++ixi) {
      double gx = 0.0, gxi = 0.0;
      for (int n = -2; n <= 2; ++n) {
        const double dxv = lat.x(ix) - cfg.init_x0 + n * lat.L;
        gx += std::exp(-dxv * dxv / (2.0 * cfg.init_sigma * cfg.init_sigma));
        const double dv = grid.xi[ixi] - cfg.init_xi0 + n * grid.Lxi();
        gxi += std::exp(-dv * dv / (2.0 * cfg.init_sigma_xi * cfg.init_sigma_xi));
      }
      f0.f[static_cast<std::size_t>(ix) * grid.M() + ixi] = gx * gxi;
    }
  const double m = f0.mass();
  for (double& v : f0.f) v /= m;
  const double en0 = mfl::vlasov_energy(f0, w);
  const mfl::PhaseDensity ft = mfl::vlasov_evolve(f0, cfg.t, cfg.nbody_dt, w);
  std::filesystem::create_directories(cfg.outdir);
  mfl::write_phase_csv(cfg.outdir + "/vlasov.csv", grid, ft.f);
  mfl::write_phase_binary(cfg.outdir + "/vlasov.bin", grid, ft.f);
  std::cout << "vlasov: t=" << cfg.t << " mass=" << mfl::format_g17(ft.mass())
            << " energy_drift="
            << mfl::format_g17(std::abs(mfl::vlasov_energy(ft, w) - en0)) << "\n";
}

void cmd_nbody(const Global& g) {
  const mfl::ExperimentConfig cfg = load(g, "classical_meanfield");
  const mfl::Lattice lat = mfl::build_lattice(cfg.M, cfg.L);
  const mfl::PairPotential w = [&] {
    if (cfg.potential == "cosine") return mfl::cosine_potential(lat, cfg.pot_a);
    if (cfg.potential == "gaussian")
      return mfl::gaussian_bump_potential(lat, cfg.pot_a, cfg.pot_sigma);
    if (cfg.potential == "constant") return mfl::constant_potential(lat, cfg.pot_a);
    throw mfl::ConfigError("unknown potential family: " + cfg.potential);
  }();
  const int N = cfg.ensemble_sizes.empty() ? 256 : cfg.ensemble_sizes.front();
  std::mt19937_64 rng(mfl::mix_seed(cfg.seed, static_cast<uint64_t>(N), 0));
  std::normal_distribution<double> nx(cfg.init_x0, cfg.init_sigma);
  std::normal_distribution<double> nxi(cfg.init_xi0, cfg.init_sigma_xi);
  mfl::ParticleEnsemble e;
  e.N = N;
  e.x.resize(N);
  e.xi.resize(N);
  for (int i = 0; i < N; ++i) {
    double x = std::fmod(nx(rng), lat.L);
    if (x < 0.0) x += lat.L;
    e.x[i] = x;
    e.xi[i] = nxi(rng);
  }
  const double en0 = mfl::nbody_energy(lat, w, e);
  const double p0 = mfl::nbody_momentum(e);
  const mfl::ParticleEnsemble et = mfl::classical_nbody_evolve(lat, w, e, cfg.t, cfg.nbody_dt);
  std::filesystem::create_directories(cfg.outdir);
  mfl::write_ensemble_csv(cfg.outdir + "/ensemble.csv", et);
  std::cout << "nbody: N=" << N << " t=" << cfg.t << " energy_drift="
            << mfl::format_g17(std::abs(mfl::nbody_energy(lat, w, et) - en0))
            << " momentum_drift="
            << mfl::format_g17(std::abs(mfl::nbody_momentum(et) - p0)) << "\n";
}

void cmd_dyson(const Global& g) {
  mfl::ExperimentConfig cfg = load(g, "dyson_truncation");
  cfg.kind = "dyson_truncation";
  const mfl::RunManifest man = mfl::run_experiment(cfg);
  std::cout << "dyson: wrote " << man.files.size() << " files to " << cfg.outdir << "\n";
  for (const auto& [k, v] : man.results)
    std::cout << "  " << k << " = " << mfl::format_g17(v) << "\n";
}

void cmd_moyal(const Global& g) {
  const mfl::ExperimentConfig cfg = load(g, "wigner_vlasov");
  const mfl::Lattice lat = mfl::build_lattice(cfg.M, cfg.L);
  const mfl::PhaseGrid grid = mfl::make_phase_grid(lat, cfg.hbars.at(0));
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const int trials = std::max(1, cfg.nseeds);
  const double sigma = 1.0;
  std::filesystem::create_directories(cfg.outdir);
  std::ofstream csv(cfg.outdir + "/moyal.csv");
  csv << "trial,delta,lhs,rhs,ok\n";
  int pass = 0, total = 0;
  const int band = std::min(3, grid.M() / 2 - 1);
  for (int tr = 0; tr < trials; ++tr) {
    std::vector<mfl::cxd> da(static_cast<std::size_t>(grid.M()) * grid.M(), 0.0);
    std::vector<mfl::cxd> db = da;
    for (int mu = -band; mu <= band; ++mu)
      for (int nu = -band; nu <= band; ++nu) {
        const std::size_t at = static_cast<std::size_t>(mfl::dual_index(mu, grid.M())) * grid.M() +
                               mfl::dual_index(nu, grid.M());
        da[at] = mfl::cxd(uni(rng), uni(rng));
        db[at] = mfl::cxd(uni(rng), uni(rng));
      }
    const mfl::Symbol a = mfl::symbol_from_dual(grid, da);
    const mfl::Symbol b = mfl::symbol_from_dual(grid, db);
    for (double delta : {0.25, 0.5}) {
      const mfl::M1Check chk = mfl::check_m1_bound(a, b, sigma, delta);
      csv << tr << ',' << delta << ',' << mfl::format_g17(chk.lhs) << ','
          << mfl::format_g17(chk.rhs) << ',' << (chk.ok ? 1 : 0) << '\n';
      ++total;
      if (chk.ok) ++pass;
    }
  }
  std::cout << "moyal: " << pass << "/" << total << " bound checks passed\n";
}

void cmd_sweep(const Global& g) {
  if (g.config.empty()) throw mfl::ConfigError("--config is required");
  mfl::ConfigFile cf = mfl::parse_config_file(g.config);
  mfl::ExperimentConfig cfg = mfl::experiment_from_config(cf);
  if (!g.out.empty()) cfg.outdir = g.out;
  if (g.seed >= 0) cfg.seed = static_cast<uint64_t>(g.seed);
  const mfl::RunManifest man = mfl::run_experiment(cfg);
  std::cout << "sweep " << cfg.kind << ": " << man.files.size() << " files, wall "
            << man.wall_seconds << " s, checksum " << std::hex << man.checksum
            << std::dec << "\n";
  for (const auto& [k, v] : man.results)
    std::cout << "  " << k << " = " << mfl::format_g17(v) << "\n";
}

void cmd_fit(const std::string& input, int xcol, int ycol) {
  std::ifstream f(input);
  if (!f) throw mfl::ConfigError("cannot open: " + input);
  std::vector<std::pair<double, double>> pts;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (std::max(xcol, ycol) >= static_cast<int>(cells.size())) continue;
    try {
      const double x = std::stod(cells[xcol]);
      const double y = std::stod(cells[ycol]);
      pts.emplace_back(x, y);
    } catch (const std::exception&) {
      continue;  // header or text row
    }
  }
  const mfl::PowerLawFit fit = mfl::fit_power_law(pts);
  std::cout << "exponent = " << mfl::format_g17(fit.exponent)
            << "\nprefactor = " << mfl::format_g17(fit.prefactor)
            << "\nr2 = " << mfl::format_g17(fit.r2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-field dynamics laboratory"};
  app.set_version_flag("--version", std::string(mfl::kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--config", g.config, "config file (key = value with [section] headers)");
  app.add_option("--out", g.out, "output directory override");
  app.add_option("--threads", g.threads, "OpenMP thread count (0 = library default)");
  app.add_option("--seed", g.seed, "RNG seed override");

  std::string fit_input;
  int fit_xcol = 0, fit_ycol = 1;

  CLI::App* hartree = app.add_subcommand("hartree", "one mean-field evolution, trajectory CSV");
  CLI::App* nbody = app.add_subcommand("nbody", "one classical particle run, ensemble CSV");
  CLI::App* dyson = app.add_subcommand("dyson", "tree expansion vs mean-field reference");
  CLI::App* moyal = app.add_subcommand("moyal", "deformed-bracket bound checks, CSV");
  CLI::App* vlasov = app.add_subcommand("vlasov", "one kinetic evolution, phase-space output");
  CLI::App* sweep = app.add_subcommand("sweep", "run the experiment named in the config");
  CLI::App* fit = app.add_subcommand("fit", "power-law fit of a CSV column pair");
  fit->add_option("input", fit_input, "CSV file")->required();
  fit->add_option("--xcol", fit_xcol, "abscissa column index");
  fit->add_option("--ycol", fit_ycol, "ordinate column index");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

#ifdef _OPENMP
  if (g.threads > 0) omp_set_num_threads(g.threads);
#endif

  try {
    if (hartree->parsed()) cmd_hartree(g);
    else if (nbody->parsed()) cmd_nbody(g);
    else if (dyson->parsed()) cmd_dyson(g);
    else if (moyal->parsed()) cmd_moyal(g);
    else if (vlasov->parsed()) cmd_vlasov(g);
    else if (sweep->parsed()) cmd_sweep(g);
    else if (fit->parsed()) cmd_fit(fit_input, fit_xcol, fit_ycol);
  } catch (const mfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const mfl::CapError& e) {
    std::cerr << "cap violation: " << e.what() << "\n";
    return 3;
  } catch (const mfl::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
