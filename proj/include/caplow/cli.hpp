// Batch front door: JSON run configs, the four execution modes
// (solve | capacity | verify | uniqueness), and CSV/JSON artifact output.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "caplow/solver.hpp"

namespace caplow::cli {

// Analytic function spec used for the data function f and initial bodies.
struct FunctionSpec {
    enum class Kind { Constant, Ball, CosineSeries };
    Kind kind = Kind::Constant;
    double value = 1.0;          // constant value / ball radius
    std::vector<double> coeffs;  // c0 + c1 cos(theta) + c2 cos(2 theta) + ...
};

struct RunConfig {
    int n = 2;
    double p = 1.5;
    orlicz::PhiSpec phi = orlicz::PhiSpec::power(2.0);
    FunctionSpec f;
    FunctionSpec init{FunctionSpec::Kind::Ball, 1.0, {}};
    std::vector<FunctionSpec> uniqueness_inits;
    int grid_m = 256;
    plaplace::MeshParams mesh;
    plaplace::SolveParams solve;
    int solve_every = 1;
    double dt_max = 1e-2;
    double cfl = 0.1;
    double t_max = 50.0;
    int filter_modes = 0;
    double residual_cv_tol = 1e-2;
    std::string output_dir = "out";
    std::string mode = "solve";
    long seed = 0; // reserved; all current paths are deterministic
    std::string echo_json; // fully-defaulted config, embedded in summaries
};

// Strict parser: unknown keys are ParseError, violated invariants are
// ValidationError with the offending field named.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& json_text);

// Materialize the analytic specs on the configured grid.
geometry::DataFunction make_data(const RunConfig& config);
geometry::SupportFunction make_body(const RunConfig& config, const FunctionSpec& spec);

// Execute one mode; artifacts land in out_dir (falls back to the config's
// output.dir), human-readable progress goes to `log`.
// Exit codes: 0 success/pass, 1 solver failure, 2 config error.
int run_mode(const std::string& mode, const RunConfig& config, const std::string& out_dir,
             int threads, std::ostream& log);

} // namespace caplow::cli
