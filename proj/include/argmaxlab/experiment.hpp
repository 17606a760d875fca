#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "argmaxlab/grid.hpp"
#include "argmaxlab/kernels.hpp"
#include "argmaxlab/levy.hpp"
#include "argmaxlab/mc_stats.hpp"
#include "argmaxlab/perturb.hpp"

namespace argmaxlab {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class ExperimentKind {
    Identity1d,
    IdentityNd,
    Derivative,
    LevyCases,
    BridgeCheck,
    GradientIdentity,
    LppGeodesic,
};

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& s);

struct GridConfig {
    enum class Kind { Uniform, Product, Simplex };
    Kind kind = Kind::Uniform;
    std::vector<std::size_t> n = {1024};   // subintervals per axis
    std::vector<double> horizons = {1.0};
    std::size_t simplex_dim = 1;
    std::size_t resolution = 512;

    Grid build() const;
    double min_spacing() const;
};

struct GaussianProcessConfig {
    KernelSpec kernel = KernelSpec::brownian_motion();
    DriftSpec drift = DriftSpec::zero();
};

struct LevyProcessConfig {
    LevyTriplet triplet;
};

using ProcessConfig = std::variant<GaussianProcessConfig, LevyProcessConfig>;

struct RhoConfig {
    std::string name = "identity";  // identity | exp-combination | power | affine
    double gamma = 1.0;
    double exponent = 1.0;
    double intercept = 0.0;
    double slope = 1.0;

    RhoFn build() const;
};

struct GateConfig {
    double max_abs_z = 4.0;
    double max_residual = 1e-10;
    double min_uniqueness = -1.0;  // < 0: no uniqueness gate
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Identity1d;
    ProcessConfig process = GaussianProcessConfig{};
    GridConfig grid;
    std::size_t replicates = 2;
    std::uint64_t seed = 0;
    int threads = 0;
    double tie_tol = 1e-12;
    double uniqueness_delta = 0.0;  // 0: 2 * grid spacing
    double anchor_time = 0.0;       // identity-1d; 0: grid horizon
    std::vector<std::vector<double>> anchors;
    double h_step = 0.05;
    std::vector<RhoConfig> rho = {RhoConfig{}};
    std::string functional = "supremum";
    std::vector<std::size_t> refine_grid_n;      // identity-1d refinement table
    std::size_t bridge_mc_replicates = 0;        // bridge-check conditional-law MC
    GateConfig gates;
    std::string out_dir;

    void validate() const;
};

ExperimentConfig parse_config(const ordered_json& j);
ExperimentConfig load_config_file(const std::string& path);
ordered_json config_to_json(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct GateCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    std::string cmp = "<=";
    bool pass = true;
};

struct AccumState {
    std::vector<std::string> names;
    McAccumulator acc;
};

struct Report {
    ExperimentConfig config;
    std::vector<IdentityReport> identities;
    std::map<std::string, double> scalars;
    std::vector<std::vector<double>> refinement;  // rows: grid_n, mean_z, se_z
    std::map<std::string, AccumState> accumulators;
    std::vector<GateCheck> gates;
    bool gates_passed = true;
    double wall_clock_seconds = 0.0;

    ordered_json to_json() const;
};

Report report_from_json(const ordered_json& j);
Report load_report_file(const std::string& path);

// Deterministic for a fixed config; all hypothesis checks run up front and
// configuration errors name the failed hypothesis.
Report run_experiment(const ExperimentConfig& config);

// Pools two runs of the same experiment (distinct seeds): accumulators merge,
// estimates and gates recompute at the pooled N.
Report merge_reports(const Report& a, const Report& b);

// report.json plus tables.csv rows "experiment,lhs,lhs_se,rhs,rhs_se,z,n".
void write_report_files(const Report& report, const std::string& out_dir);

// Per-replicate path/field sampler for the configured process on a grid.
SamplerFactory make_sampler_factory(const ProcessConfig& process, GridPtr grid);

}  // namespace argmaxlab
