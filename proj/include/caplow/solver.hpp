// High-level Minkowski-problem entry points: run the flow to stationarity,
// verify the limit against the stationary equation on a refined mesh, and
// compare limits from multiple initial bodies for the uniqueness experiment.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caplow/flow.hpp"

namespace caplow::solver {

// Everything solve_minkowski needs besides the problem data itself.
struct Options {
    plaplace::MeshParams mesh;
    plaplace::SolveParams solve;
    int solve_every = 1;
    double dt_max = 1e-2;
    double cfl = 0.1;
    double t_max = 50.0;
    double residual_cv_tol = 1e-2;
    int filter_modes = 0;
    int verify_refine = 2; // mesh refinement factor of the re-verification solve
    int threads = 1;       // parallel runs in the uniqueness experiment
};

struct MinkowskiSolution {
    geometry::SupportFunction body;
    double tau = 0.0;
    std::vector<double> mu_p;     // density of the p-capacitary measure
    std::vector<double> gradient; // boundary gradient trace on the body
    std::vector<double> sigma;    // curvature function of the body
    std::vector<double> residual_samples;

    // verification block
    double residual_cv = 0.0;
    double capacity = 0.0;
    double phi_initial = 0.0;
    double phi_final = 0.0;
    double tau_fine = 0.0;        // tau re-measured on the refined mesh
    double residual_cv_fine = 0.0;

    flow::DiagnosticsRecord trajectory;
};

// Thrown when the flow fails to reach stationarity; carries the trajectory
// for post-mortem inspection.
class NotConvergedError : public Error {
  public:
    NotConvergedError(flow::RunStatus status, const std::string& what,
                      flow::DiagnosticsRecord trajectory)
        : Error(ErrorCode::NotConverged, what), status(status),
          trajectory(std::move(trajectory)) {}

    flow::RunStatus status;
    flow::DiagnosticsRecord trajectory;
};

MinkowskiSolution solve_minkowski(const geometry::DataFunction& f, const orlicz::PhiSpec& spec,
                                  double p, int n, const geometry::SupportFunction& init,
                                  const Options& options);

struct UniquenessResult {
    double max_pairwise_dist = 0.0; // sup-norm distance relative to mean radius
    bool condition_holds = false;   // the phi(delta s) <= delta^(p+1-n) phi(s) predicate
    std::vector<MinkowskiSolution> runs;
};

// Solves from every init after dilating each one so the conserved functional
// Phi matches the first init to 1e-10 relative (PhiMismatch otherwise).
UniquenessResult uniqueness_experiment(const geometry::DataFunction& f,
                                       const orlicz::PhiSpec& spec, double p, int n,
                                       std::span<const geometry::SupportFunction> inits,
                                       const Options& options);

// Trigonometric resampling of grid samples onto a `factor`-times finer grid
// of the same family (periodic for n=2, even-reflected midpoint for n=3).
// Exact for band-limited data; used by the fine-mesh re-verification.
std::vector<double> resample_harmonics(std::span<const double> values, int n, int factor);

} // namespace caplow::solver
