#include "hydrostab/experiments.hpp"

#include <cmath>

#include "hydrostab/field_ops.hpp"
#include "hydrostab/rng.hpp"
#include "hydrostab/svg.hpp"

namespace hydrostab {

FitResult fit_log_slope(const std::vector<DiagRow>& rows, double t_lo, double t_hi,
                        const std::function<double(const DiagRow&)>& value) {
    FitResult out;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& r : rows) {
        if (r.t < t_lo || r.t > t_hi) continue;
        const double v = value(r);
        if (!(v > 0.0) || !std::isfinite(v)) continue;
        const double x = r.t, y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++out.npoints;
    }
    if (out.npoints >= 2) {
        const double n = out.npoints;
        const double denom = n * sxx - sx * sx;
        out.slope = (n * sxy - sx * sy) / denom;
        out.intercept = (sy - out.slope * sx) / n;
    }
    return out;
}

PerturbationState eigenmode_initial_data(const SteadyState& st, const GrowthRateResult& growth,
                                         double amplitude) {
    PerturbationState s0(st.grid);
    s0.V = growth.mode_u.velocity;
    for (double& x : s0.V.u.data()) x *= amplitude;
    for (double& x : s0.V.v.data()) x *= amplitude;
    s0.rho = growth.mode_theta;
    for (double& x : s0.rho.data()) x *= amplitude;
    return s0;
}

double perturbation_h2_norm(const VectorField& u, const ScalarField& theta) {
    const double a = norm_h2(u);
    const double b = norm_h1(theta);
    return std::sqrt(a * a + b * b);
}

double lambda1_scale(const Grid& g) {
    const double pi = 3.14159265358979323846;
    return pi * pi * (1.0 / (g.length_x * g.length_x) + 1.0 / (g.length_y * g.length_y));
}

namespace {

double auto_dt(const Grid& g, double cfl_factor) {
    return cfl_factor * std::min(g.hx, g.hy) * 0.999;
}

void plot_norm_history(const std::filesystem::path& path, const std::vector<DiagRow>& rows,
                       const std::string& title) {
    PlotSeries v, rho;
    v.label = "|V| L2";
    v.color = "#1f6fb2";
    rho.label = "|rho| L2";
    rho.color = "#b2421f";
    for (const auto& r : rows) {
        v.x.push_back(r.t);
        v.y.push_back(r.l2_V);
        rho.x.push_back(r.t);
        rho.y.push_back(r.l2_rho);
    }
    PlotOptions po;
    po.title = title;
    po.xlabel = "t";
    po.ylabel = "norm";
    po.log_y = true;
    write_line_plot(path, po, {v, rho});
}

}  // namespace

// ---------------------------------------------------------------- linear growth

json LinearGrowthReport::to_json() const {
    return json{{"lambda", lambda},   {"slope", slope}, {"rel_err", rel_err},
                {"mode_ratio_dev", mode_ratio_dev}, {"pass", pass},
                {"rows", rows.size()}};
}

LinearGrowthReport experiment_linear_growth(const SteadyState& st,
                                            const GrowthRateResult& growth,
                                            const LinearGrowthConfig& cfg) {
    const Grid& g = st.grid;
    LinearGrowthReport rep;
    rep.lambda = growth.lambda;

    TimeStepperConfig tc;
    tc.scheme = Scheme::linearized;
    tc.dt = cfg.dt > 0.0 ? cfg.dt : auto_dt(g, tc.cfl_factor);
    tc.corrector_sweeps = cfg.corrector_sweeps;

    const double t_end = cfg.fit_hi / growth.lambda;
    // The linearized system is homogeneous of degree one, so the fitted
    // slope is amplitude-invariant; scale down so the CFL bound never binds.
    const double mode_max = growth.mode_u.velocity.max_abs();
    const double amp = 1.0 / (mode_max * std::exp(growth.lambda * t_end) * 4.0);

    PerturbationState s0(g);
    if (cfg.random_init) {
        Rng rng(cfg.seed);
        ScalarField psi = random_clamped_psi(g, rng, 2);
        s0.V = curl_streamfunction(psi);
        const double m = s0.V.max_abs();
        if (m > 0.0) {
            for (double& x : s0.V.u.data()) x *= amp * mode_max / m;
            for (double& x : s0.V.v.data()) x *= amp * mode_max / m;
        }
        s0.rho = density_mode(st, s0.V, growth.lambda);
    } else {
        s0 = eigenmode_initial_data(st, growth, amp);
    }

    RunOptions ro;
    ro.t_end = t_end;
    ro.cadence = cfg.cadence;
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        ro.csv_path = cfg.out_dir / "diagnostics.csv";
    }
    RunResult run_res = run(s0, st, tc, ro);
    rep.rows = run_res.rows;

    const FitResult fit = fit_log_slope(rep.rows, cfg.fit_lo / growth.lambda,
                                        cfg.fit_hi / growth.lambda,
                                        [](const DiagRow& r) { return r.l2_V; });
    rep.slope = fit.slope;
    rep.rel_err = std::abs(fit.slope - growth.lambda) / growth.lambda;
    rep.pass = cfg.random_init ? (fit.slope <= growth.lambda * (1.0 + cfg.rel_tol))
                               : (rep.rel_err <= cfg.rel_tol);

    // mode-shape preservation: rho(T)/theta0 vs e^{lambda T} where theta0 is large
    if (!cfg.random_init) {
        const double T = run_res.final_state.t;
        const double expect = amp * std::exp(growth.lambda * T);
        const double cut = 0.1 * growth.mode_theta.max_abs();
        double dev = 0.0;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                if (std::abs(growth.mode_theta.at(i, j)) <= cut) continue;
                const double ratio =
                    run_res.final_state.rho.at(i, j) / growth.mode_theta.at(i, j);
                dev = std::max(dev, std::abs(ratio - expect) / expect);
            }
        rep.mode_ratio_dev = dev;
    }

    if (!cfg.out_dir.empty()) {
        plot_norm_history(cfg.out_dir / "norms.svg", rep.rows, "linearized growth");
        emit_report(cfg.out_dir / "report.json", rep.to_json());
    }
    return rep;
}

// ---------------------------------------------------------------- Lipschitz

json LipschitzReport::to_json() const {
    return json{{"component", component}, {"tau0_1", tau0_1}, {"tau0_2", tau0_2},
                {"t_gauge", t_gauge},     {"gauge", gauge},   {"v_norm_at_t", v_norm_at_t},
                {"conclusive", conclusive}, {"pass", pass}};
}

LipschitzReport experiment_lipschitz(const SteadyState& st, const GrowthRateResult& growth,
                                     const LipschitzConfig& cfg) {
    const Grid& g = st.grid;
    LipschitzReport rep;

    const double h2 = perturbation_h2_norm(growth.mode_u.velocity, growth.mode_theta);
    rep.tau0_1 = norm_l2(growth.mode_u.velocity.u) / h2;
    rep.tau0_2 = norm_l2(growth.mode_u.velocity.v) / h2;
    rep.component = (rep.tau0_1 > rep.tau0_2) ? 1 : 2;
    const double tau0 = std::max(rep.tau0_1, rep.tau0_2);
    rep.t_gauge = std::log(2.0 * cfg.K / tau0) / growth.lambda;
    rep.gauge = cfg.K * cfg.delta * h2;

    TimeStepperConfig tc;
    tc.scheme = Scheme::nonlinear;
    tc.advection = cfg.advection;
    tc.dt = cfg.dt > 0.0 ? cfg.dt : auto_dt(g, tc.cfl_factor);
    tc.corrector_sweeps = cfg.corrector_sweeps;

    RunOptions ro;
    ro.t_end = rep.t_gauge;
    ro.cadence = cfg.cadence;
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        ro.csv_path = cfg.out_dir / "diagnostics.csv";
    }

    PerturbationState s0 = eigenmode_initial_data(st, growth, cfg.delta);
    try {
        RunResult rr = run(s0, st, tc, ro);
        rep.rows = rr.rows;
        rep.conclusive = true;
        const VectorField& V = rr.final_state.V;
        rep.v_norm_at_t = (rep.component == 1) ? norm_l2(V.u) : norm_l2(V.v);
        rep.pass = rep.v_norm_at_t > rep.gauge;
    } catch (const NumericalError& e) {
        // solver validity ended before the gauge time: inconclusive, not failure
        rep.conclusive = false;
        rep.pass = false;
    }

    if (!cfg.out_dir.empty()) {
        if (!rep.rows.empty())
            plot_norm_history(cfg.out_dir / "norms.svg", rep.rows, "Lipschitz gauge run");
        emit_report(cfg.out_dir / "report.json", rep.to_json());
    }
    return rep;
}

// ---------------------------------------------------------------- Hadamard

json HadamardReport::to_json() const {
    json runs_j = json::array();
    for (const auto& r : runs)
        runs_j.push_back(json{{"delta", r.delta},
                              {"escaped", r.escaped},
                              {"escape_time", r.escape_time},
                              {"v_l1", r.v_l1},
                              {"rho_l1", r.rho_l1},
                              {"note", r.note}});
    return json{{"epsilon", epsilon},       {"runs", runs_j},
                {"fit_slope", fit_slope},   {"inv_lambda", inv_lambda},
                {"rel_err", rel_err},       {"all_escaped", all_escaped},
                {"escape_monotone", escape_monotone}, {"config_error", config_error},
                {"pass", pass}};
}

HadamardReport experiment_hadamard(const SteadyState& st, const GrowthRateResult& growth,
                                   const HadamardConfig& cfg) {
    const Grid& g = st.grid;
    HadamardReport rep;
    rep.inv_lambda = 1.0 / growth.lambda;

    // default threshold: half the L1 norm the velocity mode has when its L2
    // amplitude reaches 10% of max rho0
    if (cfg.epsilon > 0.0) {
        rep.epsilon = cfg.epsilon;
    } else {
        const double scale = 0.1 * st.rho0.max_value() / norm_l2(growth.mode_u.velocity);
        rep.epsilon = 0.5 * scale * norm_l1(growth.mode_u.velocity);
    }

    TimeStepperConfig tc;
    tc.scheme = Scheme::nonlinear;
    tc.advection = cfg.advection;
    tc.dt = cfg.dt > 0.0 ? cfg.dt : auto_dt(g, tc.cfl_factor);
    tc.corrector_sweeps = cfg.corrector_sweeps;

    double max_v_l1_seen = 0.0;
    std::vector<std::pair<double, double>> escape_points;  // (ln(1/delta), T)

    for (std::size_t k = 0; k < cfg.deltas.size(); ++k) {
        const double delta = cfg.deltas[k];
        if (k > 0 && delta >= cfg.deltas[k - 1])
            throw DomainError("hadamard: deltas must be descending");
        HadamardRunRecord rec;
        rec.delta = delta;

        const double t_budget =
            cfg.budget_factor * (std::log(1.0 / delta) + 6.0) / growth.lambda;
        PerturbationState s0 = eigenmode_initial_data(st, growth, delta);

        RunOptions ro;
        ro.t_end = t_budget;
        ro.cadence = cfg.cadence;
        if (!cfg.out_dir.empty()) {
            std::filesystem::create_directories(cfg.out_dir);
            ro.csv_path = cfg.out_dir / ("diagnostics_delta" + std::to_string(k) + ".csv");
        }
        ro.observer = [&](const DiagRow& r) {
            max_v_l1_seen = std::max(max_v_l1_seen, r.l1_V);
            if (r.l1_V >= rep.epsilon && r.l1_rho >= rep.epsilon) {
                rec.escaped = true;
                rec.escape_time = r.t;
                rec.v_l1 = r.l1_V;
                rec.rho_l1 = r.l1_rho;
                return false;  // stop the run
            }
            return true;
        };
        try {
            RunResult rr = run(s0, st, tc, ro);
            if (!rec.escaped) {
                rec.v_l1 = rr.rows.back().l1_V;
                rec.rho_l1 = rr.rows.back().l1_rho;
                rec.note = "budget exhausted before both norms reached epsilon";
            }
        } catch (const NumericalError& e) {
            rec.note = std::string("run lost validity: ") + e.what();
        }
        if (rec.escaped) escape_points.emplace_back(std::log(1.0 / delta), rec.escape_time);
        rep.runs.push_back(rec);
    }

    rep.all_escaped = true;
    for (const auto& r : rep.runs) rep.all_escaped = rep.all_escaped && r.escaped;

    rep.escape_monotone = true;
    for (std::size_t k = 1; k < rep.runs.size(); ++k)
        if (rep.runs[k].escaped && rep.runs[k - 1].escaped &&
            rep.runs[k].escape_time < rep.runs[k - 1].escape_time - 1e-9)
            rep.escape_monotone = false;

    if (escape_points.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, y] : escape_points) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = static_cast<double>(escape_points.size());
        rep.fit_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.rel_err = std::abs(rep.fit_slope - rep.inv_lambda) * growth.lambda;
    }

    rep.config_error = !rep.all_escaped && max_v_l1_seen < rep.epsilon;
    rep.pass = rep.all_escaped && rep.escape_monotone && rep.rel_err <= cfg.slope_tol;

    if (!cfg.out_dir.empty()) {
        PlotSeries pts;
        pts.label = "T vs ln(1/delta)";
        pts.markers = true;
        for (auto [x, y] : escape_points) {
            pts.x.push_back(x);
            pts.y.push_back(y);
        }
        PlotOptions po;
        po.title = "escape time scaling";
        po.xlabel = "ln(1/delta)";
        po.ylabel = "T";
        write_line_plot(cfg.out_dir / "escape_times.svg", po, {pts});
        emit_report(cfg.out_dir / "report.json", rep.to_json());
    }
    return rep;
}

// ---------------------------------------------------------------- stability

json StabilityReport::to_json() const {
    json runs_j = json::array();
    for (const auto& r : runs)
        runs_j.push_back(json{{"mode", r.mode},
                              {"monotone", r.monotone},
                              {"worst_uptick", r.worst_uptick},
                              {"h1_initial", r.h1_initial},
                              {"h1_final", r.h1_final},
                              {"h1_ratio", r.h1_ratio},
                              {"decay_pass", r.decay_pass},
                              {"dissipation_ratio", r.dissipation_ratio},
                              {"integral_pass", r.integral_pass}});
    return json{{"classification", stability_class_name(classification)},
                {"horizon", horizon},
                {"lambda1", lambda1},
                {"runs", runs_j},
                {"pass", pass}};
}

StabilityReport experiment_stability(const SteadyState& st, const StabilityConfig& cfg) {
    const Grid& g = st.grid;
    StabilityReport rep;
    rep.classification = classify(st);
    if (rep.classification == StabilityClass::Unstable ||
        rep.classification == StabilityClass::Indeterminate)
        throw DomainError("stability experiment requires a stable state, got " +
                          stability_class_name(rep.classification));

    rep.lambda1 = lambda1_scale(g);
    rep.horizon = cfg.horizon_factor / (st.mu * rep.lambda1);

    // band-limited random small data: divergence-free velocity + density
    Rng rng(cfg.seed);
    PerturbationState s0(g);
    {
        ScalarField psi = random_lowmode_psi(g, rng, cfg.max_mode);
        s0.V = curl_streamfunction(psi);
        const double h1 = norm_h1(s0.V);
        if (h1 > 0.0) {
            const double sc = cfg.amplitude / h1;
            for (double& x : s0.V.u.data()) x *= sc;
            for (double& x : s0.V.v.data()) x *= sc;
        }
        s0.rho = random_lowmode_cell(g, rng, cfg.max_mode);
        const double l2 = norm_l2(s0.rho);
        if (l2 > 0.0)
            for (double& x : s0.rho.data())
                x *= cfg.rho_amplitude_factor * cfg.amplitude / l2;
    }

    auto one_run = [&](Scheme scheme, const std::string& name) {
        TimeStepperConfig tc;
        tc.scheme = scheme;
        tc.advection = cfg.advection;
        tc.dt = cfg.dt > 0.0 ? cfg.dt : auto_dt(g, tc.cfl_factor);
        tc.corrector_sweeps = cfg.corrector_sweeps;
        tc.projection_tol = 1e-12;

        RunOptions ro;
        ro.t_end = rep.horizon;
        ro.cadence = cfg.cadence;
        ro.lyapunov_tol = cfg.per_step_tol;
        if (!cfg.out_dir.empty()) {
            std::filesystem::create_directories(cfg.out_dir);
            ro.csv_path = cfg.out_dir / ("diagnostics_" + name + ".csv");
        }
        RunResult rr = run(s0, st, tc, ro);

        StabilityRunRecord rec;
        rec.mode = name;
        rec.monotone = rr.lyapunov_monotone;
        rec.worst_uptick = rr.lyapunov_worst_uptick;
        rec.h1_initial = rr.rows.front().h1_V;
        rec.h1_final = rr.rows.back().h1_V;
        rec.h1_ratio = rec.h1_final / rec.h1_initial;
        rec.decay_pass = rec.h1_ratio <= cfg.decay_target;
        rec.dissipation_ratio = 2.0 * st.mu * rr.grad_integral / rr.lyapunov_initial;
        rec.integral_pass = rec.dissipation_ratio <= 1.0 + 1e-3;
        if (!cfg.out_dir.empty())
            plot_norm_history(cfg.out_dir / ("norms_" + name + ".svg"), rr.rows,
                              "stable decay (" + name + ")");
        return rec;
    };

    rep.runs.push_back(one_run(Scheme::linearized, "linearized"));
    if (rep.classification == StabilityClass::NonlinearlyStable)
        rep.runs.push_back(one_run(Scheme::nonlinear, "nonlinear"));

    rep.pass = true;
    for (const auto& r : rep.runs)
        rep.pass = rep.pass && r.monotone && r.decay_pass && r.integral_pass;

    if (!cfg.out_dir.empty()) emit_report(cfg.out_dir / "report.json", rep.to_json());
    return rep;
}

}  // namespace hydrostab
