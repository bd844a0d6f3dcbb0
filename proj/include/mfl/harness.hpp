#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mfl/lattice.hpp"
#include "mfl/observables.hpp"

namespace mfl {

/// Flat `key = value` config with `[section]` headers and `#` comments.
/// Keys are stored as "section.key"; every key must be known to the
/// experiment builder, misspellings are errors listing the offending keys.
struct ConfigFile {
    std::map<std::string, std::string> kv;
    std::string text; // raw file contents, echoed into the manifest

    bool has(const std::string& key) const { return kv.count(key) != 0; }
};

ConfigFile parse_config_text(const std::string& text);
ConfigFile parse_config_file(const std::string& path);

struct ExperimentConfig {
    std::string kind; // meanfield_gap | hbar_uniformity | dyson_truncation |
                      // wigner_vlasov | classical_meanfield
    int M = 8;
    double L = 2.0 * M_PI;
    std::vector<double> hbars{1.0};
    std::vector<int> Ns;
    double t = 0.5;
    double dt = 1e-3;
    double tol = 1e-9;
    Dispersion disp = Dispersion::continuum;
    std::string potential = "cosine";
    double pot_a = 1.0;
    double pot_sigma = 0.5;
    std::string observable = "position_window";
    std::string initial = "gaussian";
    double init_x0 = M_PI;
    double init_sigma = 0.8;
    double init_xi0 = 0.0;
    double init_sigma_xi = 0.5;
    std::vector<double> epsilons;
    int k = 0; // 0 = choose k_opt, capped by the tree depth
    std::vector<int> ensemble_sizes;
    int nseeds = 8;
    double smoothing = 0.0; // 0 = twice the coarser grid spacing
    double nbody_dt = 0.01;
    uint64_t seed = 1;
    std::string outdir = "out";
    std::string config_echo;
};

ExperimentConfig experiment_from_config(const ConfigFile& cfg);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double r2 = 0.0;
};

/// Least squares on (log n, log y); needs >= 3 points with positive y.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& points);

struct RunManifest {
    std::string config_echo;
    std::string version;
    std::vector<std::pair<std::string, double>> results;
    std::vector<std::pair<std::string, uint64_t>> files; // path, checksum
    double wall_seconds = 0.0;
    uint64_t checksum = 0; // folded over the per-file checksums in order
};

RunManifest run_experiment(const ExperimentConfig& cfg);
void write_manifest(const std::string& path, const RunManifest& m);

/// Shipped kernel families: position_window, momentum_window,
/// coherent_projector (p=1) and pair_product (p=2).
PKernel observable_family(const std::string& name, const Lattice& lat);

/// Shipped initial states: gaussian (periodized, optionally boosted by the
/// lattice mode nearest xi0/hbar) and uniform. Normalized.
Field initial_family(const std::string& name, const Lattice& lat, double x0, double sigma,
                     double xi0, double hbar);

/// splitmix64 of seed ^ f(a, b): decorrelated per-point stream seeds.
uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b);

} // namespace mfl
