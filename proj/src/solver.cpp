#include "caplow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace caplow::solver {

namespace {

constexpr double kPi = std::numbers::pi;

flow::FlowConfig make_flow_config(const geometry::DataFunction& f, const orlicz::PhiSpec& spec,
                                  double p, int n, const geometry::SupportFunction& init,
                                  const Options& options) {
    flow::FlowConfig cfg;
    cfg.n = n;
    cfg.p = p;
    cfg.phi = spec;
    cfg.f = f;
    cfg.init = init;
    cfg.mesh = options.mesh;
    cfg.solve = options.solve;
    cfg.solve_every = options.solve_every;
    cfg.dt_max = options.dt_max;
    cfg.cfl = options.cfl;
    cfg.t_max = options.t_max;
    cfg.residual_cv_tol = options.residual_cv_tol;
    cfg.filter_modes = options.filter_modes;
    return cfg;
}

double weighted_mean_radius(const geometry::SupportFunction& h) {
    std::vector<double> ones(h.h.size(), 1.0);
    return geometry::sphere_integral(h.h, h.n) / geometry::sphere_integral(ones, h.n);
}

// Dilation factor aligning Phi(c h) with the target; closed form for power
// densities, bisection otherwise.
double phi_alignment_factor(const geometry::SupportFunction& h, const geometry::DataFunction& f,
                            const orlicz::PhiSpec& spec, double target) {
    const double base = geometry::functional_phi(h, f, spec);
    if (spec.family == orlicz::PhiSpec::Family::Power)
        return std::pow(target / base, 1.0 / spec.power_exponent);
    double lo = 1e-6, hi = 1e6;
    auto phi_of = [&](double c) {
        geometry::SupportFunction scaled = h;
        for (double& v : scaled.h) v *= c;
        return geometry::functional_phi(scaled, f, spec);
    };
    if (phi_of(lo) > target || phi_of(hi) < target)
        throw Error(ErrorCode::PhiMismatch, "cannot bracket the Phi-alignment dilation");
    for (int k = 0; k < 200 && (hi - lo) > 1e-14 * hi; ++k) {
        const double mid = 0.5 * (lo + hi);
        (phi_of(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::vector<double> resample_harmonics(std::span<const double> values, int n, int factor) {
    const int m = static_cast<int>(values.size());
    const int fine = m * factor;
    std::vector<double> out(fine, 0.0);
    if (n == 2) {
        // full Fourier interpolation on the periodic grid
        const double step = 2.0 * kPi / m;
        const double step_fine = 2.0 * kPi / fine;
        const int kmax = m / 2;
        for (int k = 0; k <= kmax; ++k) {
            double a = 0.0, b = 0.0;
            for (int i = 0; i < m; ++i) {
                a += values[i] * std::cos(k * step * i);
                b += values[i] * std::sin(k * step * i);
            }
            double scale = 2.0 / m;
            if (k == 0 || 2 * k == m) scale = 1.0 / m;
            a *= scale;
            b *= scale;
            for (int j = 0; j < fine; ++j)
                out[j] += a * std::cos(k * step_fine * j) + b * std::sin(k * step_fine * j);
        }
    } else {
        // cosine interpolation on the even-reflected midpoint grid
        const double step = kPi / m;
        const double step_fine = kPi / fine;
        for (int k = 0; k < m; ++k) {
            double a = 0.0;
            for (int i = 0; i < m; ++i) a += values[i] * std::cos(k * step * (i + 0.5));
            a *= (k == 0 ? 1.0 : 2.0) / m;
            for (int j = 0; j < fine; ++j) out[j] += a * std::cos(k * step_fine * (j + 0.5));
        }
    }
    return out;
}

MinkowskiSolution solve_minkowski(const geometry::DataFunction& f, const orlicz::PhiSpec& spec,
                                  double p, int n, const geometry::SupportFunction& init,
                                  const Options& options) {
    const auto growth = orlicz::check_growth(spec);
    if (!growth.ok)
        throw Error(ErrorCode::ValidationError, "phi fails the growth condition: " + growth.report);
    if (f.f.size() != init.h.size() || f.n != n || init.n != n)
        throw Error(ErrorCode::ValidationError, "data/init grid mismatch");

    const auto cfg = make_flow_config(f, spec, p, n, init, options);
    auto result = flow::run(cfg);
    if (result.status != flow::RunStatus::Converged)
        throw NotConvergedError(result.status,
                                "flow did not reach stationarity: " +
                                    std::string(to_string(result.status)) +
                                    (result.message.empty() ? "" : " (" + result.message + ")"),
                                std::move(result.trajectory));

    MinkowskiSolution sol;
    sol.body = result.final.h;
    sol.sigma = geometry::sigma(sol.body);
    sol.gradient = result.final.potential->boundary_grad;
    sol.mu_p = plaplace::mu_p_density(sol.gradient, sol.sigma, p);
    const auto stats = flow::residual(sol.body, f, spec, sol.gradient, sol.sigma, p);
    sol.tau = stats.tau_hat;
    sol.residual_samples = stats.samples;
    sol.residual_cv = stats.cv;
    sol.capacity = plaplace::capacity_poincare(sol.body, sol.gradient, sol.sigma, p);
    sol.phi_initial = result.trajectory.rows.front().phi;
    sol.phi_final = result.trajectory.rows.back().phi;
    sol.trajectory = std::move(result.trajectory);

    // Re-check the stationary equation on a refined mesh: resample the limit
    // body and the data onto a finer grid, redo the exterior solve, and
    // re-measure tau and the residual spread.
    const int refine = std::max(1, options.verify_refine);
    geometry::SupportFunction fine_h;
    fine_h.n = n;
    fine_h.h = resample_harmonics(sol.body.h, n, refine);
    geometry::DataFunction fine_f{n, resample_harmonics(f.f, n, refine)};
    const auto fine_sol =
        plaplace::solve_body(fine_h, p, options.mesh.refined(refine), options.solve);
    const auto fine_sigma = geometry::sigma(fine_h);
    const auto fine_stats =
        flow::residual(fine_h, fine_f, spec, fine_sol.boundary_grad, fine_sigma, p);
    sol.tau_fine = fine_stats.tau_hat;
    sol.residual_cv_fine = fine_stats.cv;
    return sol;
}

UniquenessResult uniqueness_experiment(const geometry::DataFunction& f,
                                       const orlicz::PhiSpec& spec, double p, int n,
                                       std::span<const geometry::SupportFunction> inits,
                                       const Options& options) {
    if (!(p > 1.0) || !(p <= n - 1.0))
        throw Error(ErrorCode::ExponentOutOfRange,
                    "uniqueness experiment needs p in (1, n-1]; empty for n = 2");
    if (inits.size() < 2)
        throw Error(ErrorCode::ValidationError, "need at least two initial bodies");

    // Phi-align every init to the first one by dilation.
    const double target = geometry::functional_phi(inits[0], f, spec);
    std::vector<geometry::SupportFunction> aligned(inits.begin(), inits.end());
    for (auto& h : aligned) {
        const double c = phi_alignment_factor(h, f, spec, target);
        for (double& v : h.h) v *= c;
        const double got = geometry::functional_phi(h, f, spec);
        if (std::abs(got - target) > 1e-10 * std::abs(target))
            throw Error(ErrorCode::PhiMismatch,
                        "Phi alignment residual " + std::to_string(std::abs(got - target)));
    }

    UniquenessResult out;
    out.runs.resize(aligned.size());
    std::vector<std::string> failures(aligned.size());
    auto run_one = [&](std::size_t idx) {
        try {
            out.runs[idx] = solve_minkowski(f, spec, p, n, aligned[idx], options);
        } catch (const Error& e) {
            failures[idx] = e.what();
        }
    };
    if (options.threads > 1) {
        std::vector<std::thread> pool;
        pool.reserve(aligned.size());
        for (std::size_t i = 0; i < aligned.size(); ++i) pool.emplace_back(run_one, i);
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < aligned.size(); ++i) run_one(i);
    }
    for (std::size_t i = 0; i < failures.size(); ++i)
        if (!failures[i].empty())
            throw Error(ErrorCode::NotConverged, "init " + std::to_string(i) + ": " + failures[i]);

    double mean_radius = 0.0;
    for (const auto& run : out.runs) mean_radius += weighted_mean_radius(run.body);
    mean_radius /= static_cast<double>(out.runs.size());
    for (std::size_t a = 0; a < out.runs.size(); ++a) {
        for (std::size_t b = a + 1; b < out.runs.size(); ++b) {
            double dist = 0.0;
            for (std::size_t i = 0; i < out.runs[a].body.h.size(); ++i)
                dist = std::max(dist, std::abs(out.runs[a].body.h[i] - out.runs[b].body.h[i]));
            out.max_pairwise_dist = std::max(out.max_pairwise_dist, dist / mean_radius);
        }
    }

    std::vector<double> deltas(20), svals(20);
    for (int i = 0; i < 20; ++i) {
        deltas[i] = 1.0 + 3.0 * i / 19.0;
        svals[i] = 0.1 * mean_radius * std::pow(100.0, i / 19.0);
    }
    out.condition_holds = orlicz::check_uniqueness_condition(spec, p, n, deltas, svals);
    return out;
}

} // namespace caplow::solver
