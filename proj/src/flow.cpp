#include "caplow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace caplow::flow {

namespace {

// Quadrature weights matching geometry::sphere_integral, used for the
// measure-weighted residual statistics.
std::vector<double> sphere_weights(int n, int m) {
    std::vector<double> w(m, 1.0);
    if (n == 3) {
        const double d = std::numbers::pi / m;
        for (int i = 0; i < m; ++i) w[i] = std::sin(d * (i + 0.5));
    }
    return w;
}

// Orthogonal projection onto spherical harmonics of degree <= k_cut:
// full Fourier modes on the periodic n=2 grid, cosine modes on the n=3
// midpoint meridian grid (even reflection at the poles).
void project_harmonics(std::vector<double>& v, int n, int m_grid, int k_cut,
                       std::vector<double>& scratch) {
    if (2 * k_cut + 1 >= m_grid) return; // nothing to truncate
    scratch.assign(m_grid, 0.0);
    if (n == 2) {
        const double step_angle = 2.0 * std::numbers::pi / m_grid;
        for (int k = 0; k <= k_cut; ++k) {
            double a = 0.0, b = 0.0;
            for (int i = 0; i < m_grid; ++i) {
                a += v[i] * std::cos(k * step_angle * i);
                b += v[i] * std::sin(k * step_angle * i);
            }
            const double scale = (k == 0 ? 1.0 : 2.0) / m_grid;
            a *= scale;
            b *= scale;
            for (int i = 0; i < m_grid; ++i)
                scratch[i] += a * std::cos(k * step_angle * i) + b * std::sin(k * step_angle * i);
        }
    } else {
        const double step_angle = std::numbers::pi / m_grid;
        for (int k = 0; k <= k_cut; ++k) {
            double a = 0.0;
            for (int i = 0; i < m_grid; ++i) a += v[i] * std::cos(k * step_angle * (i + 0.5));
            a *= (k == 0 ? 1.0 : 2.0) / m_grid;
            for (int i = 0; i < m_grid; ++i) scratch[i] += a * std::cos(k * step_angle * (i + 0.5));
        }
    }
    v.swap(scratch);
}

// Stiffness scale of the curvature term: the linearized flow acts on mode k
// like -A k^2 with A = max f h phi(h) g^p (times the meridian radius factor
// of sigma_2 for n=3).
double stiffness_scale(const geometry::SupportFunction& h, const geometry::DataFunction& f,
                       const orlicz::PhiSpec& spec, std::span<const double> g, double p) {
    const auto der = geometry::derivatives(h);
    double scale = 0.0;
    for (int i = 0; i < h.grid_size(); ++i) {
        double a = f.f[i] * h.h[i] * orlicz::phi_eval(spec, h.h[i]) * std::pow(g[i], p);
        if (h.n == 3) a *= std::abs(der.d1[i] / std::tan(h.angle(i)) + h.h[i]);
        scale = std::max(scale, a);
    }
    return scale;
}

// Largest cutoff for which dt_max * A * k^2 stays inside Heun's stability
// interval (with a safety margin), clamped to the grid's resolvable band.
int auto_filter_modes(double dt_max, double stiffness, int m_grid) {
    const int resolvable = std::max(4, (m_grid - 2) / 3);
    if (!(stiffness > 0.0) || !(dt_max > 0.0)) return resolvable;
    const int stable = static_cast<int>(std::sqrt(1.6 / (dt_max * stiffness)));
    return std::clamp(stable, 4, resolvable);
}

// Trial-state admissibility: positivity above the phi domain floor and
// discrete convexity.
bool admissible(const geometry::SupportFunction& h, double floor_value) {
    for (double v : h.h)
        if (!(v > floor_value)) return false;
    try {
        geometry::sigma(h);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NonConvex) return false;
        throw;
    }
    return true;
}

DiagRow diagnose(const FlowState& state, const FlowConfig& config, int step_index, double dt) {
    DiagRow row;
    row.step = step_index;
    row.t = state.t;
    row.dt = dt;
    const auto sig = geometry::sigma(state.h);
    const auto& g = state.potential->boundary_grad;
    row.gamma = gamma_of(state.h, config.f, config.phi, config.p, g, sig);
    row.cp_energy = state.potential->capacity_energy;
    row.cp_poincare = plaplace::capacity_poincare(state.h, g, sig, config.p);
    row.phi = geometry::functional_phi(state.h, config.f, config.phi);
    const auto stats = residual(state.h, config.f, config.phi, g, sig, config.p);
    row.tau_hat = stats.tau_hat;
    row.residual_cv = stats.cv;
    row.h_min = *std::min_element(state.h.h.begin(), state.h.h.end());
    row.h_max = *std::max_element(state.h.h.begin(), state.h.h.end());
    row.sigma_min = *std::min_element(sig.begin(), sig.end());
    row.sigma_max = *std::max_element(sig.begin(), sig.end());
    row.g_min = *std::min_element(g.begin(), g.end());
    row.g_max = *std::max_element(g.begin(), g.end());
    row.picard_iters = state.potential->iterations;
    row.sp_total = geometry::total_sp(state.h, sig, config.p);
    return row;
}

} // namespace

const char* to_string(RunStatus status) {
    switch (status) {
        case RunStatus::Converged: return "Converged";
        case RunStatus::TimeOut: return "TimeOut";
        case RunStatus::Failed: return "Failed";
    }
    return "Unknown";
}

const char* DiagnosticsRecord::csv_header() {
    return "step,t,dt,gamma,cp_energy,cp_poincare,phi,h_min,h_max,sigma_min,sigma_max,"
           "g_min,g_max,tau_hat,residual_cv,picard_iters";
}

void DiagnosticsRecord::write_csv(std::ostream& out) const {
    out << csv_header() << "\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%d,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,%.15g,"
                      "%.15g,%.15g,%.15g,%d\n",
                      r.step, r.t, r.dt, r.gamma, r.cp_energy, r.cp_poincare, r.phi, r.h_min,
                      r.h_max, r.sigma_min, r.sigma_max, r.g_min, r.g_max, r.tau_hat,
                      r.residual_cv, r.picard_iters);
        out << buf;
    }
}

double gamma_of(const geometry::SupportFunction& h, const geometry::DataFunction& f,
                const orlicz::PhiSpec& spec, double p, std::span<const double> g,
                std::span<const double> sigma_vals) {
    const double cp = plaplace::capacity_poincare(h, g, sigma_vals, p);
    std::vector<double> integrand(h.h.size());
    for (std::size_t i = 0; i < integrand.size(); ++i)
        integrand[i] = h.h[i] / (f.f[i] * orlicz::phi_eval(spec, h.h[i]));
    const double denom = geometry::sphere_integral(integrand, h.n);
    return (h.n - p) / (p - 1.0) * cp / denom;
}

std::vector<double> rhs(const geometry::SupportFunction& h, const geometry::DataFunction& f,
                        const orlicz::PhiSpec& spec, std::span<const double> g,
                        std::span<const double> sigma_vals, double gamma, double p) {
    std::vector<double> out(h.h.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = f.f[i] * h.h[i] * orlicz::phi_eval(spec, h.h[i]) * std::pow(g[i], p) *
                     sigma_vals[i] -
                 gamma * h.h[i];
    }
    return out;
}

ResidualStats residual(const geometry::SupportFunction& h, const geometry::DataFunction& f,
                       const orlicz::PhiSpec& spec, std::span<const double> g,
                       std::span<const double> sigma_vals, double p) {
    ResidualStats stats;
    const int m = h.grid_size();
    stats.samples.resize(m);
    for (int i = 0; i < m; ++i)
        stats.samples[i] =
            f.f[i] * orlicz::phi_eval(spec, h.h[i]) * std::pow(g[i], p) * sigma_vals[i];
    const auto w = sphere_weights(h.n, m);
    double wsum = 0.0, mean = 0.0;
    for (int i = 0; i < m; ++i) {
        wsum += w[i];
        mean += w[i] * stats.samples[i];
    }
    mean /= wsum;
    double var = 0.0;
    for (int i = 0; i < m; ++i) {
        const double d = stats.samples[i] - mean;
        var += w[i] * d * d;
    }
    stats.tau_hat = mean;
    stats.cv = std::sqrt(var / wsum) / mean;
    return stats;
}

FlowState step(const FlowState& state, const FlowConfig& config, StepInfo* info) {
    const auto& g = state.potential->boundary_grad;
    const auto sig = geometry::sigma(state.h);
    const int m = state.h.grid_size();
    const double gamma1 = gamma_of(state.h, config.f, config.phi, config.p, g, sig);
    auto k1 = rhs(state.h, config.f, config.phi, g, sig, gamma1, config.p);

    const double stiff = stiffness_scale(state.h, config.f, config.phi, g, config.p);
    const int k_cut = config.filter_modes > 0 ? config.filter_modes
                                              : auto_filter_modes(config.dt_max, stiff, m);
    std::vector<double> scratch;
    project_harmonics(k1, state.h.n, m, k_cut, scratch);

    double kmax = 0.0;
    for (double v : k1) kmax = std::max(kmax, std::abs(v));
    const double hmin = *std::min_element(state.h.h.begin(), state.h.h.end());
    double dt = config.dt_max;
    if (kmax > 0.0) dt = std::min(dt, config.cfl * hmin / kmax);
    if (stiff > 0.0) dt = std::min(dt, 1.6 / (stiff * k_cut * k_cut));

    const double floor_value = config.phi.domain_floor;
    for (int rejections = 0; rejections <= 20; ++rejections) {
        geometry::SupportFunction trial = state.h;
        for (std::size_t i = 0; i < trial.h.size(); ++i) trial.h[i] += dt * k1[i];
        if (admissible(trial, floor_value)) {
            const auto sig2 = geometry::sigma(trial);
            const double gamma2 = gamma_of(trial, config.f, config.phi, config.p, g, sig2);
            auto k2 = rhs(trial, config.f, config.phi, g, sig2, gamma2, config.p);
            project_harmonics(k2, state.h.n, m, k_cut, scratch);
            geometry::SupportFunction next = state.h;
            for (std::size_t i = 0; i < next.h.size(); ++i)
                next.h[i] += 0.5 * dt * (k1[i] + k2[i]);
            if (admissible(next, floor_value)) {
                FlowState out;
                out.t = state.t + dt;
                out.h = std::move(next);
                out.potential = state.potential;
                out.potential_step = state.potential_step;
                out.gamma = gamma1;
                if (info) {
                    info->dt = dt;
                    info->rejections = rejections;
                }
                return out;
            }
        }
        dt *= 0.5;
    }
    throw Error(ErrorCode::StepFailure, "20 consecutive step rejections");
}

double check_potential_evolution(const FlowState& before, const FlowState& after,
                                 double probe_offset) {
    if (!(probe_offset > 0.0))
        throw Error(ErrorCode::ProbeInsideBody, "probe offset must be positive");
    if (!before.potential || !after.potential)
        throw Error(ErrorCode::ValidationError, "both states need potentials");
    const double dt = after.t - before.t;
    if (!(dt > 0.0)) throw Error(ErrorCode::ValidationError, "states must be time-ordered");

    const auto bnd = geometry::boundary(before.h);
    const auto& g = before.potential->boundary_grad;
    double worst = 0.0;
    for (std::size_t i = 0; i < bnd.points.size(); ++i) {
        const std::array<double, 2> x{bnd.points[i][0] + probe_offset * bnd.normals[i][0],
                                      bnd.points[i][1] + probe_offset * bnd.normals[i][1]};
        const double lhs =
            (plaplace::evaluate(*after.potential, x) - plaplace::evaluate(*before.potential, x)) /
            dt;
        const double dhdt = (after.h.h[i] - before.h.h[i]) / dt;
        worst = std::max(worst, std::abs(lhs - g[i] * dhdt));
    }
    return worst;
}

RunResult run(const FlowConfig& config) {
    RunResult result;
    try {
        FlowState state;
        state.t = 0.0;
        state.h = config.init;
        state.potential = std::make_shared<plaplace::PotentialSolution>(
            plaplace::solve_body(state.h, config.p, config.mesh, config.solve));
        state.potential_step = 0;

        // Keep the evolved body inside the stable harmonic band from the
        // start; analytic inits are low-order and pass through unchanged.
        {
            const double stiff = stiffness_scale(state.h, config.f, config.phi,
                                                 state.potential->boundary_grad, config.p);
            const int k_cut = config.filter_modes > 0
                                  ? config.filter_modes
                                  : auto_filter_modes(config.dt_max, stiff, state.h.grid_size());
            std::vector<double> scratch;
            project_harmonics(state.h.h, state.h.n, state.h.grid_size(), k_cut, scratch);
        }

        const double h0_max = *std::max_element(state.h.h.begin(), state.h.h.end());
        int accepted = 0;
        auto row = diagnose(state, config, accepted, 0.0);
        state.gamma = row.gamma;
        result.trajectory.rows.push_back(row);

        while (true) {
            if (result.trajectory.rows.back().residual_cv <= config.residual_cv_tol) {
                result.status = RunStatus::Converged;
                break;
            }
            if (state.t >= config.t_max) {
                result.status = RunStatus::TimeOut;
                break;
            }
            if (result.trajectory.rows.back().h_max > config.h_blowup_factor * h0_max) {
                result.status = RunStatus::Failed;
                result.message = "monitor abort: max h exceeded " +
                                 std::to_string(config.h_blowup_factor) + " x initial";
                break;
            }
            StepInfo step_info;
            state = step(state, config, &step_info);
            ++accepted;
            if (accepted - state.potential_step >= config.solve_every) {
                state.potential = std::make_shared<plaplace::PotentialSolution>(
                    plaplace::solve_body(state.h, config.p, config.mesh, config.solve,
                                         state.potential.get()));
                state.potential_step = accepted;
            }
            row = diagnose(state, config, accepted, step_info.dt);
            state.gamma = row.gamma;
            result.trajectory.rows.push_back(row);
        }
        result.final = std::move(state);
    } catch (const Error& e) {
        result.status = RunStatus::Failed;
        result.message = e.what();
    }
    return result;
}

} // namespace caplow::flow
