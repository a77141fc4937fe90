#include "caplow/cli.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace caplow::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.contains(it.key()))
            throw Error(ErrorCode::ParseError, "unknown key '" + it.key() + "' in " + context);
}

double require_positive(double v, const std::string& name) {
    if (!(v > 0.0)) throw Error(ErrorCode::ValidationError, name + " must be positive");
    return v;
}

FunctionSpec parse_function(const json& j, bool is_init, const std::string& context) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, context + " must be an object");
    reject_unknown(j, {"type", "value", "radius", "coeffs"}, context);
    const std::string type = j.at("type").get<std::string>();
    FunctionSpec spec;
    if (!is_init && type == "constant") {
        spec.kind = FunctionSpec::Kind::Constant;
        spec.value = require_positive(j.at("value").get<double>(), context + ".value");
    } else if (is_init && type == "ball") {
        spec.kind = FunctionSpec::Kind::Ball;
        spec.value = require_positive(j.at("radius").get<double>(), context + ".radius");
    } else if (type == "cosine_series") {
        spec.kind = FunctionSpec::Kind::CosineSeries;
        spec.coeffs = j.at("coeffs").get<std::vector<double>>();
        if (spec.coeffs.empty())
            throw Error(ErrorCode::ValidationError, context + ".coeffs must be non-empty");
    } else {
        throw Error(ErrorCode::ValidationError, context + ": unsupported type '" + type + "'");
    }
    return spec;
}

json function_echo(const FunctionSpec& spec) {
    switch (spec.kind) {
        case FunctionSpec::Kind::Constant: return {{"type", "constant"}, {"value", spec.value}};
        case FunctionSpec::Kind::Ball: return {{"type", "ball"}, {"radius", spec.value}};
        case FunctionSpec::Kind::CosineSeries:
            return {{"type", "cosine_series"}, {"coeffs", spec.coeffs}};
    }
    return {};
}

json config_echo(const RunConfig& c) {
    json phi;
    if (c.phi.family == orlicz::PhiSpec::Family::Power)
        phi = {{"family", "power"}, {"pp", c.phi.power_exponent}};
    else {
        json samples = json::array();
        for (const auto& [s, v] : c.phi.samples) samples.push_back({s, v});
        phi = {{"family", "table"}, {"samples", samples}, {"domain_floor", c.phi.domain_floor}};
    }
    json echo{
        {"n", c.n},
        {"p", c.p},
        {"phi", phi},
        {"f", function_echo(c.f)},
        {"init", function_echo(c.init)},
        {"grid", {{"M", c.grid_m}}},
        {"plaplace",
         {{"R_out_factor", c.mesh.R_out_factor},
          {"N_rad", c.mesh.N_rad},
          {"grading", c.mesh.grading},
          {"eps_reg", c.solve.eps_reg},
          {"picard_tol", c.solve.picard_tol},
          {"picard_max", c.solve.picard_max},
          {"outer_bc", c.solve.outer_bc == plaplace::OuterBc::Robin ? "robin" : "dirichlet"},
          {"solve_every", c.solve_every}}},
        {"time",
         {{"dt_max", c.dt_max}, {"cfl", c.cfl}, {"t_max", c.t_max},
          {"filter_modes", c.filter_modes}}},
        {"stopping", {{"residual_cv_tol", c.residual_cv_tol}}},
        {"output", {{"dir", c.output_dir}}},
        {"mode", c.mode},
        {"seed", c.seed},
    };
    if (!c.uniqueness_inits.empty()) {
        json inits = json::array();
        for (const auto& spec : c.uniqueness_inits) inits.push_back(function_echo(spec));
        echo["inits"] = inits;
    }
    return echo;
}

RunConfig from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config root must be an object");
    reject_unknown(j,
                   {"n", "p", "phi", "f", "init", "inits", "grid", "plaplace", "time", "stopping",
                    "output", "mode", "seed"},
                   "config");
    RunConfig c;
    c.n = j.at("n").get<int>();
    if (c.n != 2 && c.n != 3)
        throw Error(ErrorCode::ValidationError, "n must be 2 or 3");
    c.p = j.at("p").get<double>();
    if (!(c.p > 1.0) || !(c.p < c.n))
        throw Error(ErrorCode::ValidationError, "p must lie in (1, n)");

    {
        const json& jp = j.at("phi");
        reject_unknown(jp, {"family", "pp", "samples", "domain_floor"}, "phi");
        const std::string family = jp.at("family").get<std::string>();
        if (family == "power") {
            c.phi = orlicz::PhiSpec::power(jp.at("pp").get<double>());
        } else if (family == "table") {
            std::vector<std::pair<double, double>> samples;
            for (const auto& row : jp.at("samples"))
                samples.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
            const double floor_value =
                jp.contains("domain_floor") ? jp.at("domain_floor").get<double>() : 1e-8;
            c.phi = orlicz::PhiSpec::table(std::move(samples),
                                           require_positive(floor_value, "phi.domain_floor"));
        } else {
            throw Error(ErrorCode::ValidationError, "phi.family must be 'power' or 'table'");
        }
        if (jp.contains("domain_floor") && family == "power")
            c.phi.domain_floor =
                require_positive(jp.at("domain_floor").get<double>(), "phi.domain_floor");
    }

    c.f = parse_function(j.at("f"), false, "f");
    c.init = parse_function(j.at("init"), true, "init");
    if (j.contains("inits"))
        for (const auto& item : j.at("inits"))
            c.uniqueness_inits.push_back(
                parse_function(item, true, "inits[" + std::to_string(c.uniqueness_inits.size()) +
                                               "]"));

    if (j.contains("grid")) {
        reject_unknown(j.at("grid"), {"M"}, "grid");
        c.grid_m = j.at("grid").at("M").get<int>();
    }
    if (j.contains("plaplace")) {
        const json& jp = j.at("plaplace");
        reject_unknown(jp,
                       {"R_out_factor", "N_rad", "grading", "eps_reg", "picard_tol", "picard_max",
                        "outer_bc", "solve_every"},
                       "plaplace");
        if (jp.contains("R_out_factor")) c.mesh.R_out_factor = jp.at("R_out_factor").get<double>();
        if (jp.contains("N_rad")) c.mesh.N_rad = jp.at("N_rad").get<int>();
        if (jp.contains("grading")) c.mesh.grading = jp.at("grading").get<double>();
        if (jp.contains("eps_reg"))
            c.solve.eps_reg = require_positive(jp.at("eps_reg").get<double>(), "plaplace.eps_reg");
        if (jp.contains("picard_tol"))
            c.solve.picard_tol =
                require_positive(jp.at("picard_tol").get<double>(), "plaplace.picard_tol");
        if (jp.contains("picard_max")) c.solve.picard_max = jp.at("picard_max").get<int>();
        if (jp.contains("outer_bc")) {
            const std::string bc = jp.at("outer_bc").get<std::string>();
            if (bc == "robin")
                c.solve.outer_bc = plaplace::OuterBc::Robin;
            else if (bc == "dirichlet")
                c.solve.outer_bc = plaplace::OuterBc::Dirichlet;
            else
                throw Error(ErrorCode::ValidationError,
                            "plaplace.outer_bc must be 'robin' or 'dirichlet'");
        }
        if (jp.contains("solve_every")) {
            c.solve_every = jp.at("solve_every").get<int>();
            if (c.solve_every < 1)
                throw Error(ErrorCode::ValidationError, "plaplace.solve_every must be >= 1");
        }
    }
    if (c.mesh.R_out_factor < 5.0)
        throw Error(ErrorCode::ValidationError, "plaplace.R_out_factor must be >= 5");
    if (c.mesh.N_rad < 32)
        throw Error(ErrorCode::ValidationError, "plaplace.N_rad must be >= 32");
    if (c.mesh.grading < 1.02 || c.mesh.grading > 1.2)
        throw Error(ErrorCode::ValidationError, "plaplace.grading must lie in [1.02, 1.2]");

    if (j.contains("time")) {
        const json& jt = j.at("time");
        reject_unknown(jt, {"dt_max", "cfl", "t_max", "filter_modes"}, "time");
        if (jt.contains("dt_max"))
            c.dt_max = require_positive(jt.at("dt_max").get<double>(), "time.dt_max");
        if (jt.contains("cfl")) c.cfl = require_positive(jt.at("cfl").get<double>(), "time.cfl");
        if (jt.contains("t_max")) {
            c.t_max = jt.at("t_max").get<double>();
            if (c.t_max < 0.0)
                throw Error(ErrorCode::ValidationError, "time.t_max must be >= 0");
        }
        if (jt.contains("filter_modes")) {
            c.filter_modes = jt.at("filter_modes").get<int>();
            if (c.filter_modes < 0)
                throw Error(ErrorCode::ValidationError, "time.filter_modes must be >= 0");
        }
    }
    if (j.contains("stopping")) {
        reject_unknown(j.at("stopping"), {"residual_cv_tol"}, "stopping");
        c.residual_cv_tol = require_positive(
            j.at("stopping").at("residual_cv_tol").get<double>(), "stopping.residual_cv_tol");
    }
    if (j.contains("output")) {
        reject_unknown(j.at("output"), {"dir"}, "output");
        c.output_dir = j.at("output").at("dir").get<std::string>();
    }
    if (j.contains("mode")) c.mode = j.at("mode").get<std::string>();
    static const std::set<std::string> kModes{"solve", "capacity", "verify", "uniqueness"};
    if (!kModes.contains(c.mode))
        throw Error(ErrorCode::ValidationError,
                    "mode must be one of solve|capacity|verify|uniqueness");
    if (j.contains("seed")) c.seed = j.at("seed").get<long>();

    const int min_m = (c.mode == "solve" || c.mode == "uniqueness") ? 64 : 16;
    if (c.grid_m < min_m)
        throw Error(ErrorCode::ValidationError,
                    "grid.M must be >= " + std::to_string(min_m) + " for mode " + c.mode);

    c.echo_json = config_echo(c).dump(2);
    return c;
}

double eval_cosine_series(const std::vector<double>& coeffs, double theta) {
    double v = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) v += coeffs[k] * std::cos(k * theta);
    return v;
}

solver::Options to_options(const RunConfig& c, int threads) {
    solver::Options opt;
    opt.mesh = c.mesh;
    opt.solve = c.solve;
    opt.solve_every = c.solve_every;
    opt.dt_max = c.dt_max;
    opt.cfl = c.cfl;
    opt.t_max = c.t_max;
    opt.residual_cv_tol = c.residual_cv_tol;
    opt.filter_modes = c.filter_modes;
    opt.threads = threads;
    return opt;
}

flow::FlowConfig to_flow_config(const RunConfig& c) {
    flow::FlowConfig cfg;
    cfg.n = c.n;
    cfg.p = c.p;
    cfg.phi = c.phi;
    cfg.f = make_data(c);
    cfg.init = make_body(c, c.init);
    cfg.mesh = c.mesh;
    cfg.solve = c.solve;
    cfg.solve_every = c.solve_every;
    cfg.dt_max = c.dt_max;
    cfg.cfl = c.cfl;
    cfg.t_max = c.t_max;
    cfg.residual_cv_tol = c.residual_cv_tol;
    cfg.filter_modes = c.filter_modes;
    return cfg;
}

void write_solution_csv(const std::filesystem::path& path, const geometry::SupportFunction& h,
                        std::span<const double> g, std::span<const double> sigma_vals,
                        std::span<const double> residual_samples) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ValidationError, "cannot open " + path.string());
    out << "theta,h,g,sigma,residual\n";
    char buf[200];
    for (int i = 0; i < h.grid_size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.15g,%.15g,%.15g,%.15g,%.15g\n", h.angle(i), h.h[i],
                      g[i], sigma_vals[i], residual_samples[i]);
        out << buf;
    }
}

int mode_solve(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log) {
    const auto cfg = to_flow_config(config);
    const auto result = flow::run(cfg);
    std::filesystem::create_directories(dir);
    {
        std::ofstream ts(dir / "flow.csv");
        result.trajectory.write_csv(ts);
    }
    json summary;
    if (!result.trajectory.rows.empty()) {
        const auto& last = result.trajectory.rows.back();
        summary["tau"] = last.tau_hat;
        summary["cp"] = last.cp_poincare;
        summary["phi"] = last.phi;
        summary["cv"] = last.residual_cv;
    }
    summary["status"] = to_string(result.status);
    if (!result.message.empty()) summary["message"] = result.message;
    summary["config_echo"] = json::parse(config.echo_json);
    std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";

    if (result.final.potential) {
        const auto sig = geometry::sigma(result.final.h);
        const auto stats = flow::residual(result.final.h, cfg.f, cfg.phi,
                                          result.final.potential->boundary_grad, sig, cfg.p);
        write_solution_csv(dir / "solution.csv", result.final.h,
                           result.final.potential->boundary_grad, sig, stats.samples);
    }
    log << "status: " << to_string(result.status);
    if (!result.message.empty()) log << " (" << result.message << ")";
    if (!result.trajectory.rows.empty()) {
        const auto& last = result.trajectory.rows.back();
        log << "  steps: " << last.step << "  t: " << last.t << "  tau: " << last.tau_hat
            << "  cv: " << last.residual_cv;
    }
    log << "\nartifacts: " << (dir / "flow.csv").string() << ", "
        << (dir / "solution.csv").string() << ", " << (dir / "summary.json").string() << "\n";
    return result.status == flow::RunStatus::Converged ? 0 : 1;
}

int mode_capacity(const RunConfig& config, const std::filesystem::path& dir, std::ostream& log) {
    const auto body = make_body(config, config.init);
    const auto sol = plaplace::solve_body(body, config.p, config.mesh, config.solve);
    const double gap = std::abs(sol.capacity_energy - sol.capacity_poincare) /
                       std::max(sol.capacity_energy, sol.capacity_poincare);
    char line[256];
    std::snprintf(line, sizeof(line),
                  "C_p (energy)   = %.10g\nC_p (Poincare) = %.10g\nrelative gap   = %.3e\n"
                  "picard iterations = %d, residual = %.3e\n",
                  sol.capacity_energy, sol.capacity_poincare, gap, sol.iterations,
                  sol.residual_norm);
    log << line;
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        plaplace::dump_csv(dir / "potential.csv", sol);
        json summary{{"cp_energy", sol.capacity_energy},
                     {"cp_poincare", sol.capacity_poincare},
                     {"relative_gap", gap},
                     {"config_echo", json::parse(config.echo_json)}};
        std::ofstream(dir / "capacity.json") << summary.dump(2) << "\n";
        log << "artifacts: " << (dir / "potential.csv").string() << ", "
            << (dir / "capacity.json").string() << "\n";
    }
    return 0;
}

int mode_verify(const RunConfig& config, std::ostream& log) {
    bool all_pass = true;
    auto report = [&](bool pass, const std::string& text) {
        all_pass = all_pass && pass;
        log << (pass ? "[PASS] " : "[FAIL] ") << text << "\n";
    };

    // radial p-harmonic profile solves the flux-form ODE
    for (const auto& [n, p] : std::vector<std::pair<int, double>>{{2, 1.5}, {3, 2.0}, {3, 1.5}}) {
        const auto pot = plaplace::radial_potential(n, p, 1.3);
        double flux0 = 0.0, worst = 0.0;
        for (int k = 0; k < 16; ++k) {
            const double r = 1.3 * (1.0 + 0.5 * k);
            const double dr = 1e-6 * r;
            const double dpsi = (pot.value(r + dr) - pot.value(r - dr)) / (2.0 * dr);
            const double flux = std::pow(std::abs(dpsi), p - 2.0) * dpsi * std::pow(r, n - 1);
            if (k == 0)
                flux0 = flux;
            else
                worst = std::max(worst, std::abs(flux / flux0 - 1.0));
        }
        char text[128];
        std::snprintf(text, sizeof(text),
                      "radial potential ODE flux constancy n=%d p=%.2g (spread %.2e)", n, p,
                      worst);
        report(worst <= 1e-7, text);
    }

    // capacity and trace oracles on balls
    for (const auto& [n, p, radius] : std::vector<std::tuple<int, double, double>>{
             {2, 1.5, 1.0}, {2, 1.5, 4.0}, {3, 2.0, 1.0}, {3, 1.5, 1.0}}) {
        geometry::SupportFunction body;
        body.n = n;
        body.h.assign(config.grid_m, radius);
        const auto sol = plaplace::solve_body(body, p, config.mesh, config.solve);
        const auto oracle = plaplace::radial_potential(n, p, radius);
        const double err_e = std::abs(sol.capacity_energy / oracle.capacity() - 1.0);
        const double err_p = std::abs(sol.capacity_poincare / oracle.capacity() - 1.0);
        double err_g = 0.0;
        for (double g : sol.boundary_grad)
            err_g = std::max(err_g, std::abs(g / oracle.gradient_at_boundary() - 1.0));
        const double gap = std::abs(sol.capacity_energy - sol.capacity_poincare) /
                           sol.capacity_energy;
        char text[196];
        std::snprintf(text, sizeof(text),
                      "ball oracle n=%d p=%.2g R=%.2g (cap errs %.2e/%.2e, trace err %.2e, "
                      "gap %.2e)",
                      n, p, radius, err_e, err_p, err_g, gap);
        report(err_e <= 1.5e-2 && err_p <= 1.5e-2 && err_g <= 2e-2 && gap <= 2e-2, text);
    }

    // balls are fixed points of the flow
    {
        geometry::SupportFunction body;
        body.n = 2;
        body.h.assign(config.grid_m, 1.0);
        const auto sig = geometry::sigma(body);
        const auto sol = plaplace::solve_body(body, 1.5, config.mesh, config.solve);
        const auto spec = orlicz::PhiSpec::power(2.0);
        const geometry::DataFunction f{2, std::vector<double>(body.h.size(), 1.0)};
        const double gamma = flow::gamma_of(body, f, spec, 1.5, sol.boundary_grad, sig);
        const auto k = flow::rhs(body, f, spec, sol.boundary_grad, sig, gamma, 1.5);
        double sup = 0.0;
        for (double v : k) sup = std::max(sup, std::abs(v));
        const double term = std::pow(sol.boundary_grad[0], 1.5);
        char text[128];
        std::snprintf(text, sizeof(text), "ball fixed point rhs sup %.2e vs term %.2e", sup,
                      term);
        report(sup <= 2e-2 * term, text);
    }

    // short perturbed run: conservation and capacity monotonicity
    {
        RunConfig micro = config;
        micro.n = 2;
        micro.p = 1.5;
        micro.phi = orlicz::PhiSpec::power(2.0);
        micro.f = FunctionSpec{FunctionSpec::Kind::Constant, 1.0, {}};
        micro.init = FunctionSpec{FunctionSpec::Kind::CosineSeries, 1.0, {1.0, 0.0, 0.1}};
        micro.t_max = 0.2;
        auto cfg = to_flow_config(micro);
        const auto result = flow::run(cfg);
        double drift = 0.0, worst_drop = 0.0;
        const double phi0 = result.trajectory.rows.front().phi;
        for (std::size_t k = 0; k < result.trajectory.rows.size(); ++k) {
            drift = std::max(drift, std::abs(result.trajectory.rows[k].phi - phi0) / phi0);
            if (k > 0)
                worst_drop = std::max(
                    worst_drop, (result.trajectory.rows[k - 1].cp_poincare -
                                 result.trajectory.rows[k].cp_poincare) /
                                    result.trajectory.rows[k - 1].cp_poincare);
        }
        char text[160];
        std::snprintf(text, sizeof(text),
                      "flow conservation |dPhi|/Phi %.2e, worst capacity drop %.2e (%zu steps)",
                      drift, worst_drop, result.trajectory.rows.size() - 1);
        report(result.status != flow::RunStatus::Failed && drift <= 5e-3 &&
                   worst_drop <= 1e-6,
               text);
    }

    // Orlicz norm properties on random vectors
    {
        std::mt19937 rng(12345);
        std::uniform_real_distribution<double> val(0.0, 5.0), wgt(0.01, 2.0);
        const auto spec = orlicz::PhiSpec::power(2.0);
        bool ok = true;
        for (int trial = 0; trial < 20 && ok; ++trial) {
            std::vector<double> fv(24), gv(24), w(24);
            for (int i = 0; i < 24; ++i) {
                fv[i] = val(rng);
                gv[i] = fv[i] + val(rng);
                w[i] = wgt(rng);
            }
            const double nf = orlicz::orlicz_norm(fv, w, spec);
            const double ng = orlicz::orlicz_norm(gv, w, spec);
            ok = ok && nf <= ng * (1.0 + 1e-9);
            for (double cc : {0.5, 3.0}) {
                std::vector<double> cf(24);
                for (int i = 0; i < 24; ++i) cf[i] = cc * fv[i];
                ok = ok && std::abs(orlicz::orlicz_norm(cf, w, spec) - cc * nf) <=
                               1e-9 * std::max(1.0, cc * nf);
            }
        }
        report(ok, "Orlicz norm homogeneity and monotonicity (20 random vectors)");
    }

    log << (all_pass ? "verify: all checks passed\n" : "verify: FAILURES present\n");
    return all_pass ? 0 : 1;
}

int mode_uniqueness(const RunConfig& config, const std::filesystem::path& dir, int threads,
                    std::ostream& log) {
    if (config.uniqueness_inits.size() < 2)
        throw Error(ErrorCode::ValidationError,
                    "uniqueness mode needs an 'inits' list with at least two bodies");
    std::vector<geometry::SupportFunction> inits;
    inits.reserve(config.uniqueness_inits.size());
    for (const auto& spec : config.uniqueness_inits) inits.push_back(make_body(config, spec));
    const auto f = make_data(config);
    const auto result =
        solver::uniqueness_experiment(f, config.phi, config.p, config.n, inits,
                                      to_options(config, threads));
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        char line[160];
        std::snprintf(line, sizeof(line),
                      "run %zu: tau = %.8g, cv = %.3e, capacity = %.8g, steps = %d\n", i,
                      result.runs[i].tau, result.runs[i].residual_cv, result.runs[i].capacity,
                      result.runs[i].trajectory.rows.back().step);
        log << line;
    }
    char tail[160];
    std::snprintf(tail, sizeof(tail),
                  "max pairwise sup-distance / mean radius = %.6e\nuniqueness condition holds: "
                  "%s\n",
                  result.max_pairwise_dist, result.condition_holds ? "yes" : "no");
    log << tail;
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        json summary{{"max_pairwise_dist", result.max_pairwise_dist},
                     {"condition_holds", result.condition_holds},
                     {"config_echo", json::parse(config.echo_json)}};
        json runs = json::array();
        for (const auto& run : result.runs)
            runs.push_back({{"tau", run.tau},
                            {"cv", run.residual_cv},
                            {"capacity", run.capacity},
                            {"phi_final", run.phi_final}});
        summary["runs"] = runs;
        std::ofstream(dir / "uniqueness.json") << summary.dump(2) << "\n";
        log << "artifacts: " << (dir / "uniqueness.json").string() << "\n";
    }
    return 0;
}

} // namespace

RunConfig parse_config_text(const std::string& json_text) {
    json parsed;
    try {
        parsed = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    try {
        return from_json(parsed);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open config " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

geometry::DataFunction make_data(const RunConfig& config) {
    geometry::DataFunction f;
    f.n = config.n;
    f.f.resize(config.grid_m);
    geometry::SupportFunction probe;
    probe.n = config.n;
    probe.h.assign(config.grid_m, 1.0);
    for (int i = 0; i < config.grid_m; ++i) {
        const double theta = probe.angle(i);
        f.f[i] = config.f.kind == FunctionSpec::Kind::Constant
                     ? config.f.value
                     : eval_cosine_series(config.f.coeffs, theta);
        if (!(f.f[i] > 0.0))
            throw Error(ErrorCode::ValidationError, "data function must be positive on the grid");
    }
    return f;
}

geometry::SupportFunction make_body(const RunConfig& config, const FunctionSpec& spec) {
    geometry::SupportFunction h;
    h.n = config.n;
    h.h.resize(config.grid_m);
    for (int i = 0; i < config.grid_m; ++i) {
        h.h[i] = spec.kind == FunctionSpec::Kind::Ball
                     ? spec.value
                     : eval_cosine_series(spec.coeffs, h.angle(i));
        if (!(h.h[i] > 0.0))
            throw Error(ErrorCode::ValidationError, "initial body must have positive support");
    }
    try {
        geometry::sigma(h);
    } catch (const Error& e) {
        throw Error(ErrorCode::ValidationError,
                    std::string("initial body is not admissible: ") + e.what());
    }
    return h;
}

int run_mode(const std::string& mode, const RunConfig& config, const std::string& out_dir,
             int threads, std::ostream& log) {
    const std::filesystem::path dir = out_dir.empty() ? config.output_dir : out_dir;
    if (mode == "solve") return mode_solve(config, dir, log);
    if (mode == "capacity") return mode_capacity(config, dir, log);
    if (mode == "verify") return mode_verify(config, log);
    if (mode == "uniqueness") return mode_uniqueness(config, dir, threads, log);
    throw Error(ErrorCode::ValidationError,
                "mode must be one of solve|capacity|verify|uniqueness");
}

} // namespace caplow::cli
