// Normalized inverse Gauss curvature flow for support functions:
//   dh/dt = f(xi) h phi(h) |grad Psi|^p sigma_{n-1} - gamma(t) h
// with gamma chosen so the functional Phi = int varphi(h)/f stays fixed while
// the p-capacity ascends. Explicit Heun stepping with CFL-limited adaptive dt,
// rejection on convexity/positivity violations, and per-step diagnostics of
// the monotone/conserved quantities.
#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "caplow/geometry.hpp"
#include "caplow/orlicz.hpp"
#include "caplow/plaplace.hpp"

namespace caplow::flow {

struct FlowConfig {
    int n = 2;
    double p = 1.5;
    orlicz::PhiSpec phi;
    geometry::DataFunction f;       // sampled on the sphere grid
    geometry::SupportFunction init; // same grid
    plaplace::MeshParams mesh;
    plaplace::SolveParams solve;
    int solve_every = 1; // p-Laplace re-solve cadence in accepted steps
    double dt_max = 1e-2;
    double cfl = 0.1;
    double t_max = 50.0;
    double residual_cv_tol = 1e-2;
    double h_blowup_factor = 1e3; // abort monitor on max h growth
    // Harmonic cutoff of the evolved shape space. The curvature term makes
    // the flow parabolic (the symbol grows like k^2), so explicit stepping at
    // dt_max is stable only for modes with dt_max * A * k^2 within Heun's
    // stability interval; 0 picks the largest stable cutoff automatically.
    int filter_modes = 0;
};

enum class RunStatus { Converged, TimeOut, Failed };
const char* to_string(RunStatus status);

struct FlowState {
    double t = 0.0;
    geometry::SupportFunction h;
    std::shared_ptr<const plaplace::PotentialSolution> potential;
    int potential_step = 0; // accepted-step stamp of the cached solve
    double gamma = 0.0;
};

struct DiagRow {
    int step = 0;
    double t = 0, dt = 0, gamma = 0, cp_energy = 0, cp_poincare = 0, phi = 0;
    double h_min = 0, h_max = 0, sigma_min = 0, sigma_max = 0, g_min = 0, g_max = 0;
    double tau_hat = 0, residual_cv = 0;
    int picard_iters = 0;
    double sp_total = 0; // monitor only; not serialized
};

struct DiagnosticsRecord {
    std::vector<DiagRow> rows;
    static const char* csv_header();
    void write_csv(std::ostream& out) const;
};

// gamma(t) = ((n-p)/(p-1)) C_p / int h/(f phi(h)), with C_p estimated by the
// Poincare formula so centred balls are discrete fixed points.
double gamma_of(const geometry::SupportFunction& h, const geometry::DataFunction& f,
                const orlicz::PhiSpec& spec, double p, std::span<const double> g,
                std::span<const double> sigma_vals);

// Pointwise flow speed f h phi(h) g^p sigma - gamma h.
std::vector<double> rhs(const geometry::SupportFunction& h, const geometry::DataFunction& f,
                        const orlicz::PhiSpec& spec, std::span<const double> g,
                        std::span<const double> sigma_vals, double gamma, double p);

// Stationarity residual samples f phi(h) g^p sigma with their sphere-measure
// weighted mean (tau_hat) and coefficient of variation.
struct ResidualStats {
    std::vector<double> samples;
    double tau_hat = 0.0;
    double cv = 0.0;
};
ResidualStats residual(const geometry::SupportFunction& h, const geometry::DataFunction& f,
                       const orlicz::PhiSpec& spec, std::span<const double> g,
                       std::span<const double> sigma_vals, double p);

// One accepted Heun step from `state` using its cached potential; gamma is
// recomputed at each stage from the stage's support function. dt adapts as
// min(dt_max, cfl*min(h)/max|rhs|) and halves on rejection; throws
// StepFailure after 20 consecutive rejections.
struct StepInfo {
    double dt = 0.0;
    int rejections = 0;
};
FlowState step(const FlowState& state, const FlowConfig& config, StepInfo* info = nullptr);

// Lemma-style diagnostic: compares (Psi_after - Psi_before)/dt against
// g * dh/dt at probe points F_i + probe_offset * xi_i. Returns the maximum
// absolute discrepancy; never gates a run.
double check_potential_evolution(const FlowState& before, const FlowState& after,
                                 double probe_offset);

struct RunResult {
    DiagnosticsRecord trajectory;
    FlowState final;
    RunStatus status = RunStatus::TimeOut;
    std::string message;
};

// Iterate until residual cv <= residual_cv_tol (Converged), t >= t_max
// (TimeOut), or failure. Emits one diagnostics row for the initial state and
// one per accepted step.
RunResult run(const FlowConfig& config);

} // namespace caplow::flow
