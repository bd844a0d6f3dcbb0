#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mfl/harness.hpp"

using namespace mfl;

TEST_CASE("power-law fit on clean and noisy data") {
    std::vector<std::pair<double, double>> pts;
    for (const double n : {2.0, 4.0, 8.0, 16.0, 32.0}) pts.emplace_back(n, 5.0 / n);
    const PowerLawFit f = fit_power_law(pts);
    CHECK(f.exponent == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.prefactor == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0));
    pts.clear();
    for (const double n : {1.0, 3.0, 9.0, 27.0}) pts.emplace_back(n, 3.0);
    const PowerLawFit c = fit_power_law(pts);
    CHECK(c.exponent == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.prefactor == doctest::Approx(3.0).epsilon(1e-12));
    pts.clear();
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> ud(-0.01, 0.01);
    for (int i = 1; i <= 8; ++i) {
        const double n = std::pow(2.0, i);
        pts.emplace_back(n, 2.0 / n * (1.0 + ud(gen)));
    }
    const PowerLawFit nf = fit_power_law(pts);
    CHECK(nf.exponent > -1.1);
    CHECK(nf.exponent < -0.9);
    CHECK(nf.r2 > 0.99);
    CHECK_THROWS_AS(fit_power_law({{1.0, 2.0}, {2.0, 1.0}}), ConfigError);
    CHECK_THROWS_AS(fit_power_law({{1.0, 2.0}, {2.0, -1.0}, {3.0, 1.0}}), ConfigError);
}

TEST_CASE("config parser: sections, comments, duplicates") {
    const ConfigFile cfg = parse_config_text("# leading comment\n"
                                             "[run]\n"
                                             "experiment = meanfield_gap  # trailing\n"
                                             "t = 0.25\n"
                                             "\n"
                                             "[lattice]\n"
                                             "M = 12\n"
                                             "L = 6.0\n"
                                             "[sweep]\n"
                                             "N_list = 2, 3, 4\n");
    CHECK(cfg.kv.at("run.experiment") == "meanfield_gap");
    CHECK(cfg.kv.at("run.t") == "0.25");
    CHECK(cfg.kv.at("lattice.M") == "12");
    CHECK(cfg.kv.at("sweep.N_list") == "2, 3, 4");
    CHECK_THROWS_AS(parse_config_text("[run]\nt = 1\nt = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run]\njust words\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[run\nt = 1\n"), ConfigError);
    // sectionless keys parse, but no experiment is named
    CHECK_THROWS_AS(experiment_from_config(parse_config_text("t = 1\n")), ConfigError);
}

TEST_CASE("experiment builder fills fields and names unknown keys") {
    const ConfigFile cfg = parse_config_text("[run]\n"
                                             "experiment = dyson_truncation\n"
                                             "t = 0.4\n"
                                             "hbar_list = 1.0, 0.5\n"
                                             "[lattice]\n"
                                             "M = 16\n"
                                             "L = 6.2831853\n"
                                             "[potential]\n"
                                             "family = gaussian\n"
                                             "a = 0.9\n"
                                             "sigma = 0.45\n"
                                             "[observable]\n"
                                             "family = momentum_window\n"
                                             "[initial]\n"
                                             "x0 = 3.0\n"
                                             "sigma = 0.7\n"
                                             "[sweep]\n"
                                             "epsilon_list = 0.05, 0.1\n"
                                             "k = 2\n");
    const ExperimentConfig ec = experiment_from_config(cfg);
    CHECK(ec.kind == "dyson_truncation");
    CHECK(ec.M == 16);
    CHECK(ec.t == doctest::Approx(0.4));
    REQUIRE(ec.hbars.size() == 2);
    CHECK(ec.hbars[1] == doctest::Approx(0.5));
    CHECK(ec.potential == "gaussian");
    CHECK(ec.pot_a == doctest::Approx(0.9));
    CHECK(ec.observable == "momentum_window");
    CHECK(ec.init_x0 == doctest::Approx(3.0));
    REQUIRE(ec.epsilons.size() == 2);
    CHECK(ec.k == 2);
    // a misspelled key is reported by name
    const ConfigFile bad = parse_config_text("[run]\nexperiment = meanfield_gap\n"
                                             "[observable]\nfamly = position_window\n");
    try {
        experiment_from_config(bad);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("observable.famly") != std::string::npos);
    }
    // unknown experiment kind
    CHECK_THROWS_AS(
        experiment_from_config(parse_config_text("[run]\nexperiment = banana\n")),
        ConfigError);
}

TEST_CASE("initial family: normalization and mode-snapped boost") {
    const Lattice lat = build_lattice(32, 2.0 * M_PI);
    const double hbar = 0.25;
    const Field base = initial_family("gaussian", lat, M_PI, 0.8, 0.0, hbar);
    CHECK(norm(lat, base) == doctest::Approx(1.0).epsilon(1e-12));
    // xi0 = 0.7 at hbar 0.25 snaps to lattice mode round(2.8) = 3
    const Field boosted = initial_family("gaussian", lat, M_PI, 0.8, 0.7, hbar);
    for (int j = 0; j < lat.M; ++j) {
        const cxd phase = std::polar(1.0, 3.0 * lat.x(j));
        CHECK(std::abs(boosted.v[j] - base.v[j] * phase) < 1e-12);
    }
    const Field flat = initial_family("uniform", lat, 0.0, 1.0, 0.0, hbar);
    for (int j = 0; j < lat.M; ++j)
        CHECK(std::abs(flat.v[j]) == doctest::Approx(std::abs(flat.v[0])).epsilon(1e-12));
    CHECK_THROWS_AS(initial_family("bespoke", lat, 0.0, 1.0, 0.0, 1.0), ConfigError);
}

TEST_CASE("observable family shapes") {
    const Lattice lat = build_lattice(12, 2.0 * M_PI);
    CHECK(observable_family("position_window", lat).p == 1);
    CHECK(observable_family("momentum_window", lat).p == 1);
    CHECK(observable_family("coherent_projector", lat).p == 1);
    CHECK(observable_family("pair_product", lat).p == 2);
    for (const char* name :
         {"position_window", "momentum_window", "coherent_projector", "pair_product"})
        CHECK(observable_family(name, lat).hermitian);
    CHECK_THROWS_AS(observable_family("nope", lat), ConfigError);
}

TEST_CASE("seed mixing separates streams") {
    const uint64_t a = mix_seed(1, 2, 3);
    CHECK(a != mix_seed(1, 2, 4));
    CHECK(a != mix_seed(1, 3, 3));
    CHECK(a != mix_seed(2, 2, 3));
    CHECK(a == mix_seed(1, 2, 3));
}

TEST_CASE("a small gap run produces a complete, reproducible manifest") {
    namespace fs = std::filesystem;
    ExperimentConfig ec;
    ec.kind = "meanfield_gap";
    ec.M = 8;
    ec.Ns = {2, 3, 4};
    ec.t = 0.2;
    ec.dt = 2e-3;
    ec.disp = Dispersion::lattice3pt;
    ec.config_echo = "[run]\nexperiment = meanfield_gap\n";
    const fs::path base = fs::temp_directory_path() / "mfl_harness_test";
    fs::remove_all(base);
    ec.outdir = (base / "a").string();
    const RunManifest m1 = run_experiment(ec);
    ec.outdir = (base / "b").string();
    const RunManifest m2 = run_experiment(ec);
    auto get = [](const RunManifest& m, const std::string& key) {
        for (const auto& kv : m.results)
            if (kv.first == key) return kv.second;
        return std::numeric_limits<double>::quiet_NaN();
    };
    for (const char* key : {"D_N2", "D_N3", "D_N4"}) {
        CHECK(get(m1, key) > 0.0);
        CHECK(get(m1, key) == doctest::Approx(get(m2, key)));
    }
    CHECK(get(m1, "D_N2") > get(m1, "D_N4"));
    CHECK(!m1.files.empty());
    CHECK(m1.checksum != 0);
    // identical configs give identical output bytes, independent of directory
    CHECK(m1.checksum == m2.checksum);
    CHECK(fs::exists(fs::path(ec.outdir) / "manifest.json"));
    CHECK(fs::exists(fs::path(ec.outdir) / "gap.csv"));
    fs::remove_all(base);
}
