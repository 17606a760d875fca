#include "doctest.h"

#include <cstdlib>
#include <fstream>

#include "argmaxlab/driver.hpp"
#include "argmaxlab/errors.hpp"
#include "argmaxlab/experiment.hpp"

using namespace argmaxlab;

namespace {

ordered_json strip_clock(ordered_json j) {
    j.erase("wall_clock_seconds");
    return j;
}

ExperimentConfig small_identity_config(std::uint64_t seed, std::size_t n_reps = 3000) {
    ExperimentConfig c;
    c.kind = ExperimentKind::Identity1d;
    c.process = GaussianProcessConfig{KernelSpec::brownian_motion(), DriftSpec::zero()};
    c.grid.kind = GridConfig::Kind::Uniform;
    c.grid.n = {512};
    c.grid.horizons = {1.0};
    c.replicates = n_reps;
    c.seed = seed;
    c.gates.max_abs_z = 5.0;
    return c;
}

}  // namespace

TEST_CASE("config JSON round trip is idempotent") {
    ExperimentConfig c = small_identity_config(42);
    c.refine_grid_n = {512, 1024};
    c.anchors = {{1.0}};
    c.rho = {RhoConfig{"exp-combination", 2.0, 1.0, 0.0, 1.0}};
    const ordered_json j1 = config_to_json(c);
    const ordered_json j2 = config_to_json(parse_config(j1));
    CHECK(j1 == j2);

    // levy process too
    ExperimentConfig l;
    l.kind = ExperimentKind::LevyCases;
    LevyProcessConfig lp;
    lp.triplet.drift = -0.6;
    lp.triplet.sigma = 0.5;
    lp.triplet.jump_rate = 2.0;
    lp.triplet.jump_law = ExponentialJumps{0.3};
    l.process = lp;
    l.grid.n = {256};
    const ordered_json k1 = config_to_json(l);
    CHECK(k1 == config_to_json(parse_config(k1)));
}

TEST_CASE("malformed configs carry field diagnostics") {
    ordered_json j;
    j["kind"] = "identity-1d";
    // missing process
    try {
        parse_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("process") != std::string::npos);
    }
    j["process"] = {{"type", "gaussian"}};
    try {
        parse_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("family") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("run_experiment is deterministic and thread-count independent") {
    ExperimentConfig c = small_identity_config(7, 2500);
    c.threads = 1;
    const Report a = run_experiment(c);
    c.threads = 2;
    const Report b = run_experiment(c);
    // thread count is config metadata; results must not depend on it
    ordered_json ja = strip_clock(a.to_json());
    ordered_json jb = strip_clock(b.to_json());
    ja["experiment"].erase("threads");
    jb["experiment"].erase("threads");
    CHECK(ja == jb);

    c.threads = 0;
    const Report d1 = run_experiment(c);
    const Report d2 = run_experiment(c);
    CHECK(strip_clock(d1.to_json()) == strip_clock(d2.to_json()));
}

TEST_CASE("identity-1d run produces a sane gated report") {
    const Report rep = run_experiment(small_identity_config(21, 4000));
    REQUIRE(rep.identities.size() == 1);
    CHECK(rep.identities[0].n == 4000);
    CHECK(rep.identities[0].lhs == doctest::Approx(0.5).epsilon(0.1));
    CHECK(rep.scalars.at("uniqueness_frequency") > 0.95);
    CHECK(rep.gates_passed);
    // report JSON round trip preserves the accumulators
    const Report back = report_from_json(rep.to_json());
    CHECK(back.accumulators.at("main").acc.count() == 4000);
    CHECK(strip_clock(back.to_json()) == strip_clock(rep.to_json()));
}

TEST_CASE("report-merge pools disjoint seeds and tightens the SEs") {
    const Report a = run_experiment(small_identity_config(100, 3000));
    const Report b = run_experiment(small_identity_config(200, 3000));
    const Report merged = merge_reports(a, b);
    CHECK(merged.config.replicates == 6000);
    CHECK(merged.identities[0].n == 6000);
    CHECK(merged.identities[0].lhs_se < a.identities[0].lhs_se);
    CHECK(merged.identities[0].lhs_se < b.identities[0].lhs_se);
    // pooled mean is the replicate-weighted mean
    const double pooled = 0.5 * (a.identities[0].lhs + b.identities[0].lhs);
    CHECK(merged.identities[0].lhs == doctest::Approx(pooled).epsilon(1e-12));

    // merging different experiments is rejected
    ExperimentConfig other = small_identity_config(1);
    other.grid.n = {256};
    const Report c = run_experiment(other);
    CHECK_THROWS_AS(merge_reports(a, c), ConfigError);
}

TEST_CASE("refinement table feeds the refinement gates") {
    ExperimentConfig c = small_identity_config(33, 2000);
    c.refine_grid_n = {256, 512};
    const Report rep = run_experiment(c);
    REQUIRE(rep.refinement.size() == 2);
    CHECK(rep.refinement[0][0] == 256.0);
    CHECK(rep.refinement[1][0] == 512.0);
    bool saw_gate = false;
    for (const auto& g : rep.gates)
        if (g.name.rfind("refinement_shift", 0) == 0) saw_gate = true;
    CHECK(saw_gate);
}

TEST_CASE("levy-cases experiment: pure drift up battery") {
    const ExperimentConfig c = [] {
        ExperimentConfig c;
        c.kind = ExperimentKind::LevyCases;
        LevyProcessConfig lp;
        lp.triplet.drift = 1.0;
        lp.triplet.jump_rate = 2.0;
        lp.triplet.jump_law = ExponentialJumps{0.5};
        c.process = lp;
        c.grid.n = {1024};
        c.replicates = 500;
        c.seed = 5;
        c.gates.max_abs_z = 6.0;
        c.gates.min_uniqueness = 1.0;
        return c;
    }();
    const Report rep = run_experiment(c);
    CHECK(rep.scalars.at("freq_argmax_at_end") == 1.0);
    CHECK(rep.scalars.at("freq_l_at_end") == 1.0);
    CHECK(rep.scalars.at("freq_tau_zero") == 0.0);
    CHECK(rep.scalars.at("uniqueness_frequency") == 1.0);
    CHECK(rep.gates_passed);
}

TEST_CASE("bridge-check experiment") {
    ExperimentConfig c;
    c.kind = ExperimentKind::BridgeCheck;
    c.process = GaussianProcessConfig{KernelSpec::brownian_motion(), DriftSpec::zero()};
    c.grid.n = {64};
    c.replicates = 2;
    c.anchors = {{1.0}};
    c.bridge_mc_replicates = 3000;
    c.seed = 17;
    c.gates.max_abs_z = 5.0;
    c.gates.max_residual = 1e-12;

    const Report rep = run_experiment(c);
    CHECK(rep.scalars.at("reconstruction_residual") <= 1e-12);
    CHECK(rep.scalars.at("anchored_zero_max") <= 1e-12);
    CHECK(rep.scalars.at("bridge_cov_max_abs_z") < 5.0);
    CHECK(rep.scalars.at("reconstruction_cov_max_abs_z") < 5.0);
    CHECK(rep.gates_passed);

    // non-diagonal anchors fail the hypothesis check with a message citing it
    c.anchors = {{0.5}, {1.0}};
    try {
        run_experiment(c);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("condition (1)") != std::string::npos);
    }
}

TEST_CASE("lpp-geodesic experiment") {
    ExperimentConfig c;
    c.kind = ExperimentKind::LppGeodesic;
    c.process = GaussianProcessConfig{KernelSpec::additive_bm(2), DriftSpec::zero()};
    c.grid.kind = GridConfig::Kind::Simplex;
    c.grid.simplex_dim = 2;
    c.grid.resolution = 64;
    c.replicates = 2000;
    c.seed = 23;
    c.gates.max_abs_z = 6.0;
    c.gates.min_uniqueness = 0.9;
    const Report rep = run_experiment(c);
    REQUIRE(rep.identities.size() >= 3);  // two coordinates + exchangeability
    bool saw_exchange = false;
    for (const auto& idr : rep.identities)
        if (idr.label.find("exchangeability") != std::string::npos) {
            saw_exchange = true;
            CHECK(std::abs(idr.z) < 6.0);
        }
    CHECK(saw_exchange);
    CHECK(rep.scalars.at("uniqueness_frequency") > 0.9);
    CHECK(rep.gates_passed);
}

TEST_CASE("driver respects ARGMAXLAB_THREADS and rethrows worker errors") {
    setenv("ARGMAXLAB_THREADS", "3", 1);
    CHECK(resolve_threads(0) == 3);
    CHECK(resolve_threads(5) == 5);
    unsetenv("ARGMAXLAB_THREADS");

    DriverOptions opt{100, 1, 2, 8, {}};
    CHECK_THROWS_AS(run_replicated(1, opt,
                                   []() {
                                       return [](const SeedSpec& s, std::span<double>) {
                                           if (s.replicate == 57)
                                               throw std::runtime_error("boom");
                                       };
                                   }),
                    std::runtime_error);
}

TEST_CASE("gradient-identity experiment") {
    ExperimentConfig c;
    c.kind = ExperimentKind::GradientIdentity;
    c.process = GaussianProcessConfig{KernelSpec::brownian_motion(), DriftSpec::zero()};
    c.grid.n = {512};
    c.replicates = 4000;
    c.anchors = {{1.0}};
    c.functional = "supremum";
    c.h_step = 0.05;
    c.seed = 29;
    c.gates.max_abs_z = 5.0;
    const Report rep = run_experiment(c);
    REQUIRE(rep.identities.size() == 1);
    CHECK(rep.identities[0].lhs == doctest::Approx(0.5).epsilon(0.1));
    CHECK(rep.gates_passed);
}
