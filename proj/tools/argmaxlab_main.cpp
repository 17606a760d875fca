// argmaxlab CLI: Monte Carlo verification of argmax uniqueness criteria and
// covariance identities for Levy and Gaussian processes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "argmaxlab/errors.hpp"
#include "argmaxlab/experiment.hpp"
#include "argmaxlab/sampler.hpp"

namespace fs = std::filesystem;
using namespace argmaxlab;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::optional<std::size_t> grid_n;
    std::optional<int> threads;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
    cmd->add_option("--seed", args.seed, "override the experiment seed");
    cmd->add_option("--replicates", args.replicates, "override the replicate count");
    cmd->add_option("--grid-n", args.grid_n, "override grid subintervals (or simplex resolution)");
    cmd->add_option("--threads", args.threads, "worker threads (0 = auto)");
    cmd->add_option("--out", args.out_dir, "output directory for report.json / tables.csv");
}

ExperimentConfig load_with_overrides(const CommonArgs& args) {
    ExperimentConfig config = load_config_file(args.config_path);
    if (args.seed) config.seed = *args.seed;
    if (args.replicates) config.replicates = *args.replicates;
    if (args.grid_n) {
        if (config.grid.kind == GridConfig::Kind::Simplex)
            config.grid.resolution = *args.grid_n;
        else
            for (auto& n : config.grid.n) n = *args.grid_n;
    }
    if (args.threads) config.threads = *args.threads;
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    config.validate();
    return config;
}

int run_and_emit(const ExperimentConfig& config) {
    Report report = run_experiment(config);
    const std::string out = config.out_dir.empty() ? "out" : config.out_dir;
    write_report_files(report, out);
    for (const auto& idr : report.identities) {
        std::printf("%-64s lhs=% .6f (se %.2e)  rhs=% .6f (se %.2e)  z=% .3f\n",
                    idr.label.c_str(), idr.lhs, idr.lhs_se, idr.rhs, idr.rhs_se, idr.z);
    }
    for (const auto& g : report.gates) {
        std::printf("[%s] %-52s %.6g %s %.6g\n", g.pass ? "pass" : "FAIL", g.name.c_str(), g.value,
                    g.cmp.c_str(), g.bound);
    }
    std::printf("report: %s/report.json  (N=%zu, %.2fs)\n", out.c_str(), config.replicates,
                report.wall_clock_seconds);
    return report.gates_passed ? 0 : 1;
}

void require_kind(const ExperimentConfig& config, std::initializer_list<ExperimentKind> allowed,
                  const std::string& cmd) {
    for (ExperimentKind k : allowed)
        if (config.kind == k) return;
    throw ConfigError("config: kind '" + to_string(config.kind) + "' does not match subcommand '" +
                      cmd + "'");
}

void dump_path_csv(const PathSample& path, const fs::path& file) {
    std::ofstream out(file);
    out.precision(17);
    const Grid& g = *path.grid;
    const std::size_t d = g.dim();
    if (d == 1) {
        out << "t,value\n";
    } else {
        for (std::size_t k = 1; k <= d; ++k) out << "coord_" << k << ',';
        out << "value\n";
    }
    std::vector<double> z;
    for (std::size_t i = 0; i < path.values.size(); ++i) {
        g.point_into(i, z);
        for (double x : z) out << x << ',';
        out << path.values[i] << "\n";
    }
}

void dump_jumps_csv(const PathSample& path, const fs::path& file) {
    std::ofstream out(file);
    out.precision(17);
    out << "time,size\n";
    for (const auto& j : path.jumps) out << j.time << ',' << j.size << "\n";
}

int run_simulate(const CommonArgs& args) {
    ExperimentConfig config = load_with_overrides(args);
    const auto grid = std::make_shared<const Grid>(config.grid.build());
    auto factory = make_sampler_factory(config.process, grid);
    auto sample = factory();
    const std::string out = config.out_dir.empty() ? "out" : config.out_dir;
    fs::create_directories(out);
    PathSample path;
    for (std::size_t r = 0; r < config.replicates; ++r) {
        sample(SeedSpec{config.seed, r}, path);
        dump_path_csv(path, fs::path(out) / ("path_r" + std::to_string(r) + ".csv"));
        if (!path.jumps.empty())
            dump_jumps_csv(path, fs::path(out) / ("jumps_r" + std::to_string(r) + ".csv"));
    }
    std::printf("wrote %zu path dump(s) to %s\n", config.replicates, out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"argmaxlab: argmax uniqueness and covariance-identity experiments"};
    app.require_subcommand(1);

    CommonArgs sim_args, id_args, der_args, bri_args, levy_args, lpp_args;
    auto* sim = app.add_subcommand("simulate", "sample paths and dump CSVs");
    add_common(sim, sim_args);
    auto* ident = app.add_subcommand("verify-identity", "argmax-maximum covariance identity");
    add_common(ident, id_args);
    auto* deriv = app.add_subcommand("verify-derivative", "derivative criterion for s(a)");
    add_common(deriv, der_args);
    auto* bridge = app.add_subcommand("verify-bridge", "bridge decomposition checks");
    add_common(bridge, bri_args);
    auto* levy = app.add_subcommand("levy-cases", "Levy argmax trichotomy battery");
    add_common(levy, levy_args);
    auto* lpp = app.add_subcommand("lpp-geodesic", "last-passage geodesic uniqueness");
    add_common(lpp, lpp_args);

    std::string merge_a, merge_b, merge_out;
    auto* merge = app.add_subcommand("report-merge", "pool two disjoint-seed reports");
    merge->add_option("first", merge_a, "first report.json")->required();
    merge->add_option("second", merge_b, "second report.json")->required();
    merge->add_option("--out", merge_out, "output directory")->default_val("out");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(sim_args);
        if (ident->parsed()) {
            ExperimentConfig c = load_with_overrides(id_args);
            require_kind(c, {ExperimentKind::Identity1d, ExperimentKind::IdentityNd},
                         "verify-identity");
            return run_and_emit(c);
        }
        if (deriv->parsed()) {
            ExperimentConfig c = load_with_overrides(der_args);
            require_kind(c, {ExperimentKind::Derivative}, "verify-derivative");
            return run_and_emit(c);
        }
        if (bridge->parsed()) {
            ExperimentConfig c = load_with_overrides(bri_args);
            require_kind(c, {ExperimentKind::BridgeCheck}, "verify-bridge");
            return run_and_emit(c);
        }
        if (levy->parsed()) {
            ExperimentConfig c = load_with_overrides(levy_args);
            require_kind(c, {ExperimentKind::LevyCases}, "levy-cases");
            return run_and_emit(c);
        }
        if (lpp->parsed()) {
            ExperimentConfig c = load_with_overrides(lpp_args);
            require_kind(c, {ExperimentKind::LppGeodesic}, "lpp-geodesic");
            return run_and_emit(c);
        }
        if (merge->parsed()) {
            const Report a = load_report_file(merge_a);
            const Report b = load_report_file(merge_b);
            Report pooled = merge_reports(a, b);
            write_report_files(pooled, merge_out);
            std::printf("pooled N=%zu -> %s/report.json (gates %s)\n", pooled.config.replicates,
                        merge_out.c_str(), pooled.gates_passed ? "pass" : "FAIL");
            return pooled.gates_passed ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
