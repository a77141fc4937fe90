// Acceptance suite: end-to-end checks of the solver stack against closed-form
// oracles and the flow's structural guarantees (conservation, monotonicity,
// fixed points, stationarity, uniqueness). Prints one PASS/FAIL line per
// criterion; the exit code is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "caplow/solver.hpp"

using namespace caplow;
using geometry::DataFunction;
using geometry::SupportFunction;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SupportFunction ball(int m, double radius, int n) {
    SupportFunction h;
    h.n = n;
    h.h.assign(m, radius);
    return h;
}

SupportFunction cos_body(int m, int n, double base, double eps, int k) {
    SupportFunction h;
    h.n = n;
    h.h.resize(m);
    for (int i = 0; i < m; ++i) h.h[i] = base * (1.0 + eps * std::cos(k * h.angle(i)));
    return h;
}

DataFunction cosine_data(int m, int n, double c0, double c1) {
    DataFunction f;
    f.n = n;
    f.f.resize(m);
    SupportFunction probe = ball(m, 1.0, n);
    for (int i = 0; i < m; ++i) f.f[i] = c0 + c1 * std::cos(probe.angle(i));
    return f;
}

double mean_radius(const SupportFunction& h) {
    std::vector<double> ones(h.h.size(), 1.0);
    return geometry::sphere_integral(h.h, h.n) / geometry::sphere_integral(ones, h.n);
}

struct CapacityPair {
    double energy;
    double poincare;
    std::string origin;
};
std::vector<CapacityPair> corpus_pairs; // criterion 3

struct SlackSample {
    double slack;
    std::string origin;
};
std::vector<SlackSample> corpus_slack; // criterion 11

void collect_rows(const flow::DiagnosticsRecord& record, double p, int n,
                  const std::string& origin) {
    const double factor = std::pow((p - 1.0) / (n - p), p - 1.0);
    for (const auto& row : record.rows) {
        corpus_pairs.push_back({row.cp_energy, row.cp_poincare, origin});
        corpus_slack.push_back({row.sp_total - factor * row.cp_poincare, origin});
    }
}

} // namespace

int main() {
    const plaplace::MeshParams default_mesh{}; // criterion 1 pins M=256, N_rad=64, factor 10
    const plaplace::SolveParams default_solve{};
    const int default_m = 256;

    // ------------------------------------------------------------------
    // Criteria 1-3: radial oracles at defaults and under refinement
    // ------------------------------------------------------------------
    struct RadialCase {
        int n;
        double p;
        double radius;
    };
    const std::vector<RadialCase> cases{{2, 1.5, 1.0}, {2, 1.5, 4.0}, {3, 2.0, 1.0},
                                        {3, 1.5, 1.0}};
    {
        bool cap_ok = true, grad_ok = true;
        std::string cap_text, grad_text;
        for (const auto& rc : cases) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto sol =
                plaplace::solve_body(ball(default_m, rc.radius, rc.n), rc.p, default_mesh,
                                     default_solve);
            const double elapsed = seconds_since(t0);
            const auto oracle = plaplace::radial_potential(rc.n, rc.p, rc.radius);
            const double err_e = std::abs(sol.capacity_energy / oracle.capacity() - 1.0);
            const double err_p = std::abs(sol.capacity_poincare / oracle.capacity() - 1.0);
            corpus_pairs.push_back({sol.capacity_energy, sol.capacity_poincare,
                                    "capacity case n=" + std::to_string(rc.n)});

            double err_g = 0.0;
            for (double g : sol.boundary_grad)
                err_g = std::max(err_g, std::abs(g / oracle.gradient_at_boundary() - 1.0));

            const auto fine = plaplace::solve_body(ball(2 * default_m, rc.radius, rc.n), rc.p,
                                                   default_mesh.refined(), default_solve);
            corpus_pairs.push_back({fine.capacity_energy, fine.capacity_poincare,
                                    "refined case n=" + std::to_string(rc.n)});
            double err_g_fine = 0.0;
            for (double g : fine.boundary_grad)
                err_g_fine = std::max(err_g_fine, std::abs(g / oracle.gradient_at_boundary() - 1.0));

            char buf[160];
            std::snprintf(buf, sizeof(buf), " [n=%d p=%.2g R=%g: capE %.2e capP %.2e %.1fs]",
                          rc.n, rc.p, rc.radius, err_e, err_p, elapsed);
            cap_text += buf;
            cap_ok = cap_ok && err_e <= 1.5e-2 && err_p <= 1.5e-2 && elapsed <= 30.0;

            std::snprintf(buf, sizeof(buf), " [n=%d p=%.2g R=%g: g %.2e -> %.2e ratio %.2f]",
                          rc.n, rc.p, rc.radius, err_g, err_g_fine, err_g / err_g_fine);
            grad_text += buf;
            grad_ok = grad_ok && err_g <= 2e-2 && err_g / err_g_fine >= 1.8;
        }
        report(1, cap_ok, "radial capacity oracle, both estimates within 1.5% at defaults" +
                              cap_text);
        report(2, grad_ok,
               "boundary gradient oracle within 2%, error ratio >= 1.8 under refinement" +
                   grad_text);
    }

    // ------------------------------------------------------------------
    // Criterion 4: ball fixed point over 100 steps
    // ------------------------------------------------------------------
    {
        const int m = 128;
        flow::FlowConfig cfg;
        cfg.n = 2;
        cfg.p = 1.5;
        cfg.phi = orlicz::PhiSpec::power(2.0);
        cfg.f = DataFunction{2, std::vector<double>(m, 1.0)};
        cfg.init = ball(m, 1.0, 2);
        cfg.mesh.N_rad = 64;

        flow::FlowState state;
        state.h = cfg.init;
        state.potential = std::make_shared<plaplace::PotentialSolution>(
            plaplace::solve_body(state.h, cfg.p, cfg.mesh, cfg.solve));
        double drift = 0.0;
        for (int k = 0; k < 100; ++k) {
            state = flow::step(state, cfg);
            state.potential = std::make_shared<plaplace::PotentialSolution>(plaplace::solve_body(
                state.h, cfg.p, cfg.mesh, cfg.solve, state.potential.get()));
            state.potential_step = k + 1;
            const auto sig = geometry::sigma(state.h);
            corpus_pairs.push_back(
                {state.potential->capacity_energy,
                 plaplace::capacity_poincare(state.h, state.potential->boundary_grad, sig,
                                             cfg.p),
                 "ball fixed point"});
            for (double v : state.h.h) drift = std::max(drift, std::abs(v - 1.0));
        }
        char buf[96];
        std::snprintf(buf, sizeof(buf), "ball fixed point: max |h-1| = %.2e over 100 steps",
                      drift);
        report(4, drift <= 1e-3, buf);
    }

    // ------------------------------------------------------------------
    // Criteria 5-8: the perturbed n=2 run (shared)
    // ------------------------------------------------------------------
    {
        const int m = 128;
        flow::FlowConfig cfg;
        cfg.n = 2;
        cfg.p = 1.5;
        cfg.phi = orlicz::PhiSpec::power(2.0);
        cfg.f = DataFunction{2, std::vector<double>(m, 1.0)};
        cfg.init = cos_body(m, 2, 1.0, 0.1, 2);
        cfg.mesh.N_rad = 64;
        cfg.dt_max = 1e-2;
        cfg.t_max = 50.0;

        const auto t0 = std::chrono::steady_clock::now();
        const auto run = flow::run(cfg);
        const double elapsed = seconds_since(t0);
        collect_rows(run.trajectory, cfg.p, cfg.n, "perturbed n=2 run");

        // criterion 5a: conservation along the full trajectory
        double drift = 0.0;
        const double phi0 = run.trajectory.rows.front().phi;
        for (const auto& row : run.trajectory.rows)
            drift = std::max(drift, std::abs(row.phi - phi0) / phi0);

        // criterion 5b: drift scales like dt^2 under halving. With the
        // quadratic kernel (pp = 2) the stage-wise gamma makes each stage
        // exactly Phi-neutral and the second-order drift term cancels to
        // dt^2/8 * int (k1-k2)^2 varphi''/f = O(dt^4) per step, so that run
        // superconverges (~dt^3 globally). The generic second-order drift the
        // criterion asserts exists iff varphi''' != 0; it is measured with
        // pp = 0.5 (strongly non-quadratic kernel) on the same body, data,
        // and exponent.
        auto window_drift = [&](double dt_max, double pp) {
            flow::FlowConfig wcfg = cfg;
            wcfg.phi = orlicz::PhiSpec::power(pp);
            wcfg.dt_max = dt_max;
            wcfg.t_max = 0.5;
            wcfg.residual_cv_tol = 1e-9; // don't stop early
            wcfg.filter_modes = 12;      // identical shape space for all runs
            wcfg.solve.picard_tol = 1e-12;
            const auto wrun = flow::run(wcfg);
            const double w0 = wrun.trajectory.rows.front().phi;
            collect_rows(wrun.trajectory, cfg.p, cfg.n, "dt-halving run");
            return std::abs(wrun.trajectory.rows.back().phi - w0) / w0;
        };
        const double drift_coarse = window_drift(1e-2, 0.5);
        const double drift_fine = window_drift(5e-3, 0.5);
        const double ratio = drift_coarse / drift_fine;
        const double ratio_quadratic = window_drift(1e-2, 2.0) / window_drift(5e-3, 2.0);
        {
            char buf[220];
            std::snprintf(buf, sizeof(buf),
                          "conservation: |dPhi|/Phi %.2e (<= 5e-3), halving ratio %.2f "
                          "(%.2e/%.2e); quadratic-kernel run superconverges (ratio %.1f)",
                          drift, ratio, drift_coarse, drift_fine, ratio_quadratic);
            report(5, drift <= 5e-3 && ratio >= 3.0 && ratio <= 5.0 && ratio_quadratic >= 3.0,
                   buf);
        }

        // criterion 6: capacity monotonicity per accepted step
        double worst_drop = 0.0;
        for (std::size_t k = 1; k < run.trajectory.rows.size(); ++k)
            worst_drop = std::max(
                worst_drop, (run.trajectory.rows[k - 1].cp_poincare -
                             run.trajectory.rows[k].cp_poincare));
        {
            const double bound = 1e-6 * run.trajectory.rows.front().cp_poincare;
            char buf[120];
            std::snprintf(buf, sizeof(buf),
                          "capacity monotone: worst per-step decrease %.2e (<= %.2e)",
                          worst_drop, bound);
            report(6, worst_drop <= bound, buf);
        }

        // criterion 7: converged to the conservation ball
        const double r_star = std::sqrt(1.005);
        const double mean = mean_radius(run.final.h);
        double ball_dev = 0.0;
        for (double v : run.final.h.h)
            ball_dev = std::max(ball_dev, std::abs(v - mean) / mean);
        {
            char buf[200];
            std::snprintf(buf, sizeof(buf),
                          "converged to the conserved-radius ball: status %s, R %.6f vs %.6f "
                          "(err %.2e), ball dev %.2e, %.0fs",
                          to_string(run.status), mean, r_star, std::abs(mean / r_star - 1.0),
                          ball_dev, elapsed);
            report(7,
                   run.status == flow::RunStatus::Converged &&
                       std::abs(mean / r_star - 1.0) <= 1e-2 && ball_dev <= 1e-2 &&
                       elapsed <= 600.0,
                   buf);
        }

        // criterion 8: stationary equation constant
        const double tau_expect = std::pow(r_star, -1.5);
        const double tau_got = run.trajectory.rows.back().tau_hat;
        {
            char buf[120];
            std::snprintf(buf, sizeof(buf), "stationary tau: %.6f vs %.6f (err %.2e)", tau_got,
                          tau_expect, std::abs(tau_got / tau_expect - 1.0));
            report(8, std::abs(tau_got / tau_expect - 1.0) <= 2e-2, buf);
        }
    }

    // ------------------------------------------------------------------
    // Criterion 9: asymmetric data
    // ------------------------------------------------------------------
    {
        const int m = 128;
        solver::Options opt;
        opt.mesh.N_rad = 64;
        opt.t_max = 50.0;
        const auto f = cosine_data(m, 2, 1.0, 0.2);
        bool pass = false;
        char buf[200];
        try {
            const auto sol = solver::solve_minkowski(f, orlicz::PhiSpec::power(2.0), 1.5, 2,
                                                     ball(m, 1.0, 2), opt);
            collect_rows(sol.trajectory, 1.5, 2, "asymmetric n=2 run");
            const double tau_shift = std::abs(sol.tau_fine / sol.tau - 1.0);
            double asym = 0.0;
            for (int i = 0; i < m / 2; ++i)
                asym = std::max(asym, std::abs(sol.body.h[i] - sol.body.h[i + m / 2]) /
                                          sol.body.h[i]);
            pass = sol.residual_cv <= 1e-2 && tau_shift <= 2e-2 && asym >= 1e-2;
            std::snprintf(buf, sizeof(buf),
                          "asymmetric data: cv %.2e, fine-mesh tau shift %.2e, asymmetry %.2e",
                          sol.residual_cv, tau_shift, asym);
        } catch (const Error& e) {
            std::snprintf(buf, sizeof(buf), "asymmetric data: %s", e.what());
        }
        report(9, pass, buf);
    }

    // ------------------------------------------------------------------
    // Criterion 10: uniqueness experiment in the Theorem range
    // ------------------------------------------------------------------
    {
        const int m = 96;
        solver::Options opt;
        opt.mesh.N_rad = 64;
        opt.t_max = 50.0;
        // the p=2 solves are cheap, so stop well below the leftover ripple
        // that a 1e-2 cv still allows
        opt.residual_cv_tol = 2e-3;
        const DataFunction f{3, std::vector<double>(m, 1.0)};
        const std::vector<SupportFunction> inits{cos_body(m, 3, 1.0, 0.05, 2),
                                                 cos_body(m, 3, 1.0, 0.05, 3)};
        bool pass = false;
        char buf[200];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const auto res =
                solver::uniqueness_experiment(f, orlicz::PhiSpec::power(2.0), 2.0, 3, inits, opt);
            const double elapsed = seconds_since(t0);
            for (const auto& run : res.runs) collect_rows(run.trajectory, 2.0, 3, "uniqueness run");
            pass = res.condition_holds && res.max_pairwise_dist <= 2e-2 && elapsed <= 1200.0;
            std::snprintf(buf, sizeof(buf),
                          "uniqueness: condition holds %s, sup distance %.2e (<= 2e-2), %.0fs",
                          res.condition_holds ? "yes" : "no", res.max_pairwise_dist, elapsed);
        } catch (const Error& e) {
            std::snprintf(buf, sizeof(buf), "uniqueness: %s", e.what());
        }
        report(10, pass, buf);
    }

    // ------------------------------------------------------------------
    // Criterion 3: capacity consistency across the whole corpus
    // ------------------------------------------------------------------
    {
        double worst = 0.0;
        std::string worst_origin;
        for (const auto& pair : corpus_pairs) {
            const double gap = std::abs(pair.energy - pair.poincare) /
                               std::max(pair.energy, pair.poincare);
            if (gap > worst) {
                worst = gap;
                worst_origin = pair.origin;
            }
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "capacity consistency: worst |cpE-cpP| gap %.2e over %zu solves (%s)",
                      worst, corpus_pairs.size(), worst_origin.c_str());
        report(3, worst <= 2e-2, buf);
    }

    // ------------------------------------------------------------------
    // Criterion 11: S_p inequality at every logged step
    // ------------------------------------------------------------------
    {
        double worst = 1e300;
        std::string worst_origin;
        for (const auto& sample : corpus_slack) {
            if (sample.slack < worst) {
                worst = sample.slack;
                worst_origin = sample.origin;
            }
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "S_p >= ((p-1)/(n-p))^(p-1) C_p: min slack %.2e over %zu steps (%s)",
                      worst, corpus_slack.size(), worst_origin.c_str());
        report(11, worst >= -1e-6, buf);
    }

    // ------------------------------------------------------------------
    // Criterion 12: Orlicz norm properties on 100 random vectors
    // ------------------------------------------------------------------
    {
        std::mt19937 rng(271828);
        std::uniform_real_distribution<double> val(0.0, 5.0), wgt(0.01, 2.0);
        const auto spec = orlicz::PhiSpec::power(2.0);
        bool ok = true;
        double worst_hom = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const int m = 8 + static_cast<int>(rng() % 56);
            std::vector<double> fv(m), gv(m), w(m);
            for (int i = 0; i < m; ++i) {
                fv[i] = val(rng);
                gv[i] = fv[i] + val(rng);
                w[i] = wgt(rng);
            }
            const double nf = orlicz::orlicz_norm(fv, w, spec);
            const double ng = orlicz::orlicz_norm(gv, w, spec);
            ok = ok && nf <= ng * (1.0 + 1e-9);
            for (double c : {0.5, 1.0, 3.0}) {
                std::vector<double> cf(m);
                for (int i = 0; i < m; ++i) cf[i] = c * fv[i];
                const double ncf = orlicz::orlicz_norm(cf, w, spec);
                if (nf > 0.0) {
                    const double rel = std::abs(ncf - c * nf) / (c * nf);
                    worst_hom = std::max(worst_hom, rel);
                    ok = ok && rel <= 1e-9;
                }
            }
        }
        char buf[140];
        std::snprintf(buf, sizeof(buf),
                      "Orlicz norm homogeneity/monotonicity on 100 vectors (worst hom err "
                      "%.2e)",
                      worst_hom);
        report(12, ok, buf);
    }

    std::printf("%d of 12 criteria failed\n", failures);
    return failures;
}
