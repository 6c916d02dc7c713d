#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowlab/analysis.hpp"

namespace flowlab
{

using Json = nlohmann::ordered_json;

/// One benchmark invocation. JSON keys are the field names.
///
/// `method` may list several methods separated by commas; each is run in
/// turn. Negative `sigma`/`delta` select the method defaults. An empty `out`
/// writes no files.
struct BenchConfig
{
    std::string benchmark = "lattice"; ///< lattice | potential | converge | project
    std::string profile = "paperlite"; ///< paperlite | paper
    std::string method = "bdm";
    int order = 4;
    double nu = 1e-5;
    double sigma = -1.0;
    double delta = -1.0;
    double dt = 1e-3;
    double tend = 10.0;
    std::string mesh = "coarse-periodic";
    std::string out = "flowlab-out";
    std::string init = "stokes-projection"; ///< stokes-projection | interpolation
    int levels = 3;             ///< meshes in a rate study, counting the base mesh
    double psi = 0.0;           ///< amplitude of the gradient field added to f
    bool dirichlet_fallback = false; ///< lattice on a non-periodic mesh with exact boundary data
    int record_every = 1;
};

/// Defaults of a benchmark under a profile. `paper` differs from `paperlite`
/// only for the lattice flow (k = 8, dt = 1e-4, T = 26; hours of runtime).
BenchConfig profile_defaults(const std::string &benchmark, const std::string &profile = "paperlite");

Json to_json(const BenchConfig &config);

/// Builds a config from JSON layers, later layers overriding earlier ones.
/// The benchmark and profile of the merged layers pick the defaults. A layer
/// holding a run manifest contributes its `config` echo. Unknown keys throw
/// ConfigError.
BenchConfig resolve_config(const std::vector<Json> &layers);

/// Throws ConfigError for out-of-range values and incompatible combinations.
void validate(const BenchConfig &config);

std::vector<MethodConfig> method_list(const BenchConfig &config);
InitialDatum parse_initial(const std::string &name);

/// Mesh of a benchmark after `refinements` uniform refinements; Scott-Vogelius
/// always runs on the Alfeld split of that mesh.
std::shared_ptr<const Mesh> bench_mesh(const std::string &id, int refinements, const MethodConfig &method);

/// Git blob hash ("blob <size>\0" prefix, SHA-1) of `content`, as hex.
std::string git_blob_hash(const std::string &content);

inline const char *const timeseries_header = "t,errL2,errH1broken,errEnergy,divL2,divLinf,kinetic,dissipation,upwind";

std::string timeseries_csv(const TimeSeries &series);

/// Output of one method of a lattice or potential run.
struct MethodRun
{
    MethodConfig method;
    std::string label; ///< e.g. bdm4
    TimeSeries series;
    Json manifest;
    std::filesystem::path csv_path;
    std::filesystem::path manifest_path;

    /// Relative L2 velocity error of the last record.
    double final_relative_error() const;
    double final_error() const;
};

struct RateRun
{
    MethodConfig method;
    std::string label;
    RateTable table;
    std::vector<double> assumption_e;     ///< per level (project only)
    std::optional<double> idempotence;    ///< |pi pi w - pi w| in L2 (project only)
    double dt = 0.0;                      ///< time step that passed the floor check (converge only)
    Json manifest;
    std::filesystem::path csv_path;
    std::filesystem::path manifest_path;
};

/// Standing-vortex lattice, f = 0 (plus the psi gradient if set).
std::vector<MethodRun> bench_lattice(const BenchConfig &config);

/// Potential flow with exact Dirichlet data on a non-periodic mesh.
std::vector<MethodRun> bench_potential(const BenchConfig &config);

/// Transient lattice errors on `levels` meshes (the base mesh and levels - 1
/// uniform refinements). Norms are the
/// energy-integral error (sum_n dt nu |||e_n|||_e^2)^{1/2} and the
/// L-infinity-in-time L2 error. The time step is halved until the
/// finest level's errors move by at most 10% under a further halving.
std::vector<RateRun> bench_converge(const BenchConfig &config);

/// Stokes projection of the lattice initial velocity on `levels` meshes, with
/// Assumption E ratios and an idempotence check on the finest one.
std::vector<RateRun> bench_project(const BenchConfig &config);

std::string rates_csv(const RateRun &run);

/// Dispatches on `config.benchmark`; returns the number of methods run.
int run_benchmark(const BenchConfig &config);

} // namespace flowlab
