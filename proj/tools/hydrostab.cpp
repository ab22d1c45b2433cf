// hydrostab command-line tool: build steady states, evaluate Phi, solve for
// the growth rate, run perturbation simulations, and drive the experiments.
// Exit codes: 0 = success / all criteria pass, 1 = criterion failure,
// 2 = configuration error, 3 = numerical failure.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hydrostab/checkpoint.hpp"
#include "hydrostab/config.hpp"
#include "hydrostab/dense_oracle.hpp"
#include "hydrostab/experiments.hpp"
#include "hydrostab/report.hpp"
#include "hydrostab/svg.hpp"

using namespace hydrostab;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigurationError("cannot open config file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

json config_echo(const std::map<std::string, ConfigValue>& cfg) {
    json out = json::object();
    for (const auto& [k, v] : cfg) {
        if (const double* d = std::get_if<double>(&v)) out[k] = *d;
        else if (const long* n = std::get_if<long>(&v)) out[k] = *n;
        else if (const bool* b = std::get_if<bool>(&v)) out[k] = *b;
        else if (const std::string* s = std::get_if<std::string>(&v)) out[k] = *s;
        else if (const auto* l = std::get_if<std::vector<double>>(&v)) out[k] = *l;
    }
    return out;
}

std::map<std::string, ConfigValue> load_and_validate(const std::string& path,
                                                     const Schema& schema) {
    const ConfigDoc doc = ConfigDoc::parse(read_file(path));
    std::vector<ConfigIssue> issues;
    auto cfg = schema.validate(doc, issues);
    if (!issues.empty())
        throw ConfigurationError("invalid config " + path + ":\n" + format_issues(issues));
    return cfg;
}

Schema steady_schema() {
    Schema s;
    s.real("grid.length_x", 1.0, 1e-12, 1e12);
    s.real("grid.length_y", 1.0, 1e-12, 1e12);
    s.integer("grid.nx", {}, 4, 4096).required("grid.nx");
    s.integer("grid.ny", {}, 4, 4096).required("grid.ny");
    s.enumeration("potential.kind", {"uniform_gravity", "radial", "expression"},
                  std::string("uniform_gravity"));
    s.real("potential.g", 1.0);
    s.real("potential.cx", 0.5);
    s.real("potential.cy", 0.5);
    s.real("potential.strength", 1.0);
    s.string("potential.f", std::string(""));
    s.string("potential.fx", std::string(""));
    s.string("potential.fy", std::string(""));
    s.enumeration("profile.kind", {"exponential", "linear", "expression"},
                  std::string("exponential"));
    s.real("profile.rho_bar", 1.0, 1e-12, 1e12);
    s.real("profile.beta", 0.1);
    s.real("profile.a", 1.0);
    s.real("profile.b", -0.1);
    s.string("profile.r", std::string(""));
    s.string("profile.r_prime", std::string(""));
    s.real("fluid.mu", {}, 1e-12, 1e6).required("fluid.mu");
    s.real("fluid.sigma", 1e-8, 1e-300, 1e6);
    return s;
}

SteadyState build_from_config(const std::map<std::string, ConfigValue>& cfg) {
    Grid grid(cfg_real(cfg, "grid.length_x"), cfg_real(cfg, "grid.length_y"),
              static_cast<int>(cfg_int(cfg, "grid.nx")), static_cast<int>(cfg_int(cfg, "grid.ny")));
    PotentialSpec pot;
    const std::string pk = cfg_str(cfg, "potential.kind");
    if (pk == "uniform_gravity")
        pot = PotentialSpec::uniform_gravity(grid, cfg_real(cfg, "potential.g"));
    else if (pk == "radial")
        pot = PotentialSpec::radial(grid, cfg_real(cfg, "potential.cx"),
                                    cfg_real(cfg, "potential.cy"),
                                    cfg_real(cfg, "potential.strength"));
    else
        pot = PotentialSpec::from_expression(grid, cfg_str(cfg, "potential.f"),
                                             cfg_str(cfg, "potential.fx"),
                                             cfg_str(cfg, "potential.fy"));
    DensityProfile prof;
    const std::string dk = cfg_str(cfg, "profile.kind");
    if (dk == "exponential")
        prof = DensityProfile::exponential(cfg_real(cfg, "profile.rho_bar"),
                                           cfg_real(cfg, "profile.beta"));
    else if (dk == "linear")
        prof = DensityProfile::linear(cfg_real(cfg, "profile.a"), cfg_real(cfg, "profile.b"));
    else
        prof = DensityProfile::from_expression(cfg_str(cfg, "profile.r"),
                                               cfg_str(cfg, "profile.r_prime"));
    return build_steady_state(grid, pot, prof, cfg_real(cfg, "fluid.mu"),
                              cfg_real(cfg, "fluid.sigma"));
}

int cmd_steady(const std::string& config_path, const std::string& out_dir) {
    const auto cfg = load_and_validate(config_path, steady_schema());
    SteadyState st = build_from_config(cfg);
    save_state(out_dir, st);
    // extend the manifest with the config echo
    json m = load_report(std::filesystem::path(out_dir) / "state.json");
    m["config"] = config_echo(cfg);
    emit_report(std::filesystem::path(out_dir) / "state.json", m);
    std::cout << "steady state written to " << out_dir << " ("
              << stability_class_name(classify(st)) << ")\n";
    return 0;
}

int cmd_phi(const std::string& state_dir, double s_min, double s_max, int s_count,
            const std::string& out_csv, const std::string& svg_path) {
    SteadyState st = load_state(state_dir);
    std::vector<double> svals;
    for (int k = 0; k < s_count; ++k)
        svals.push_back(s_count == 1 ? s_min
                                     : s_min * std::pow(s_max / s_min,
                                                        static_cast<double>(k) / (s_count - 1)));
    PhiSweepResult sweep = phi_sweep(st, svals);
    std::ofstream os(out_csv);
    if (!os) throw ConfigurationError("cannot open output: " + out_csv);
    os << "s,phi,iterations,residual\n";
    os.precision(17);
    for (const auto& ev : sweep.evaluations)
        os << ev.s << ',' << ev.phi << ',' << ev.iterations << ',' << ev.residual << '\n';
    if (!svg_path.empty()) {
        PlotSeries series;
        series.label = "Phi(s)";
        series.markers = true;
        for (const auto& ev : sweep.evaluations) {
            series.x.push_back(ev.s);
            series.y.push_back(ev.phi);
        }
        PlotOptions po;
        po.title = "Phi sweep";
        po.xlabel = "s";
        po.ylabel = "Phi";
        write_line_plot(svg_path, po, {series});
    }
    if (!sweep.monotone_ok || !sweep.lipschitz_ok) {
        std::cerr << "solver-quality error: " << sweep.message << "\n";
        return 3;
    }
    std::cout << "wrote " << sweep.evaluations.size() << " evaluations to " << out_csv << "\n";
    return 0;
}

int cmd_lambda(const std::string& state_dir, const std::string& out_json,
               const std::string& mode_dir) {
    SteadyState st = load_state(state_dir);
    try {
        GrowthRateResult res = solve_growth_rate(st);
        json out{{"lambda", res.lambda},
                 {"fixed_point_residual", res.fixed_point_residual},
                 {"bracket", {res.bisection_interval.first, res.bisection_interval.second}},
                 {"upper_bound", res.upper_bound},
                 {"phi_evaluations", res.phi_evaluations},
                 {"eig_residual", res.eig_residual},
                 {"degeneracy_gap", res.degeneracy_gap}};
        if (!mode_dir.empty()) {
            std::filesystem::create_directories(mode_dir);
            write_checkpoint(std::filesystem::path(mode_dir) / "mode_psi.hsf", res.mode_u.psi);
            write_checkpoint(std::filesystem::path(mode_dir) / "mode_u.hsf",
                             res.mode_u.velocity.u);
            write_checkpoint(std::filesystem::path(mode_dir) / "mode_v.hsf",
                             res.mode_u.velocity.v);
            write_checkpoint(std::filesystem::path(mode_dir) / "mode_theta.hsf", res.mode_theta);
            out["mode_dir"] = mode_dir;
        }
        emit_report(out_json, out);
        std::cout << "lambda = " << res.lambda << " (residual "
                  << res.fixed_point_residual << ")\n";
        return 0;
    } catch (const NoInstability& e) {
        json out{{"lambda", nullptr}, {"no_instability", true}, {"detail", e.what()}};
        emit_report(out_json, out);
        std::cout << "no instability: " << e.what() << "\n";
        return 0;
    }
}

int cmd_simulate(const std::string& state_dir, const std::string& mode, const std::string& init,
                 double amplitude, double t_end, double dt, const std::string& out_dir,
                 int cadence, int sweeps, const std::string& advection, int checkpoint_every) {
    SteadyState st = load_state(state_dir);
    std::filesystem::create_directories(out_dir);

    TimeStepperConfig tc;
    tc.scheme = (mode == "nonlinear") ? Scheme::nonlinear : Scheme::linearized;
    tc.advection = (advection == "centered2_with_limiter") ? Advection::centered2_with_limiter
                                                           : Advection::upwind1;
    tc.dt = dt;
    tc.corrector_sweeps = sweeps;

    PerturbationState s0(st.grid);
    if (init == "eigenmode") {
        GrowthRateResult res = solve_growth_rate(st);
        s0 = eigenmode_initial_data(st, res, amplitude);
    } else if (init.rfind("file:", 0) == 0) {
        const std::filesystem::path dir = init.substr(5);
        s0.V.u = read_checkpoint(dir / "u.hsf", st.grid);
        s0.V.v = read_checkpoint(dir / "v.hsf", st.grid);
        s0.rho = read_checkpoint(dir / "rho.hsf", st.grid);
        for (double& x : s0.V.u.data()) x *= amplitude;
        for (double& x : s0.V.v.data()) x *= amplitude;
        for (double& x : s0.rho.data()) x *= amplitude;
    } else {
        throw ConfigurationError("unknown --init value: " + init);
    }

    RunOptions ro;
    ro.t_end = t_end;
    ro.cadence = cadence;
    ro.csv_path = std::filesystem::path(out_dir) / "diagnostics.csv";
    ro.checkpoint_every = checkpoint_every;
    ro.checkpoint_dir = std::filesystem::path(out_dir) / "checkpoints";
    RunResult rr = run(s0, st, tc, ro);

    json manifest{{"tool_version", kToolVersion},
                  {"created", timestamp_utc()},
                  {"state_dir", state_dir},
                  {"mode", mode},
                  {"init", init},
                  {"amplitude", amplitude},
                  {"t_end", t_end},
                  {"dt", dt},
                  {"cadence", cadence},
                  {"corrector_sweeps", sweeps},
                  {"advection", advection},
                  {"steps", rr.steps},
                  {"rows", rr.rows.size()},
                  {"diagnostics_hash", file_hash(ro.csv_path)}};
    emit_report(std::filesystem::path(out_dir) / "run.json", manifest);
    std::cout << "simulated " << rr.steps << " steps; diagnostics in " << out_dir << "\n";
    return 0;
}

Schema experiment_schema() {
    Schema s;
    s.real("experiment.fit_lo", 1.0, 0.0, 100.0);
    s.real("experiment.fit_hi", 3.0, 0.0, 100.0);
    s.real("experiment.rel_tol", 0.05, 0.0, 1.0);
    s.real("experiment.K", 2.0, 1e-6, 1e6);
    s.real("experiment.delta", 1e-4, 0.0, 1.0);
    s.real_list("experiment.deltas", std::vector<double>{1e-3, 1e-4, 1e-5});
    s.real("experiment.epsilon", -1.0);
    s.real("experiment.slope_tol", 0.10, 0.0, 1.0);
    s.real("experiment.budget_factor", 2.0, 1.0, 100.0);
    s.real("experiment.amplitude", 1e-3, 0.0, 1.0);
    s.real("experiment.horizon_factor", 50.0, 0.0, 1e6);
    s.real("experiment.decay_target", 0.1, 0.0, 1.0);
    s.real("experiment.per_step_tol", 1e-10, 0.0, 1.0);
    s.real("experiment.dt", -1.0);
    s.integer("experiment.cadence", 2L, 1, 1000000);
    s.integer("experiment.corrector_sweeps", 0L, 0, 8);
    s.integer("experiment.seed", 31337L);
    return s;
}

int cmd_experiment(const std::string& kind, const std::string& state_dir,
                   const std::string& config_path, const std::string& out_dir) {
    std::map<std::string, ConfigValue> cfg;
    if (!config_path.empty())
        cfg = load_and_validate(config_path, experiment_schema());
    else {
        std::vector<ConfigIssue> issues;
        cfg = experiment_schema().validate(ConfigDoc::parse(""), issues);
    }
    SteadyState st = load_state(state_dir);
    std::filesystem::create_directories(out_dir);

    bool pass = false;
    if (kind == "stability") {
        StabilityConfig sc;
        sc.amplitude = cfg_real(cfg, "experiment.amplitude");
        sc.horizon_factor = cfg_real(cfg, "experiment.horizon_factor");
        sc.decay_target = cfg_real(cfg, "experiment.decay_target");
        sc.per_step_tol = cfg_real(cfg, "experiment.per_step_tol");
        sc.dt = cfg_real(cfg, "experiment.dt");
        sc.cadence = static_cast<int>(cfg_int(cfg, "experiment.cadence"));
        sc.corrector_sweeps =
            std::max(2L, cfg_int(cfg, "experiment.corrector_sweeps"));
        sc.seed = static_cast<std::uint64_t>(cfg_int(cfg, "experiment.seed"));
        sc.out_dir = out_dir;
        const StabilityReport rep = experiment_stability(st, sc);
        pass = rep.pass;
        std::cout << "stability: " << (pass ? "PASS" : "FAIL") << "\n";
    } else {
        GrowthRateResult growth = solve_growth_rate(st);
        if (kind == "lineargrowth") {
            LinearGrowthConfig lc;
            lc.fit_lo = cfg_real(cfg, "experiment.fit_lo");
            lc.fit_hi = cfg_real(cfg, "experiment.fit_hi");
            lc.rel_tol = cfg_real(cfg, "experiment.rel_tol");
            lc.dt = cfg_real(cfg, "experiment.dt");
            lc.cadence = static_cast<int>(cfg_int(cfg, "experiment.cadence"));
            lc.corrector_sweeps = static_cast<int>(cfg_int(cfg, "experiment.corrector_sweeps"));
            lc.out_dir = out_dir;
            const LinearGrowthReport rep = experiment_linear_growth(st, growth, lc);
            pass = rep.pass;
            std::cout << "linear growth: slope " << rep.slope << " vs lambda " << rep.lambda
                      << " -> " << (pass ? "PASS" : "FAIL") << "\n";
        } else if (kind == "lipschitz") {
            LipschitzConfig lc;
            lc.K = cfg_real(cfg, "experiment.K");
            lc.delta = cfg_real(cfg, "experiment.delta");
            lc.dt = cfg_real(cfg, "experiment.dt");
            lc.cadence = static_cast<int>(cfg_int(cfg, "experiment.cadence"));
            lc.corrector_sweeps = static_cast<int>(cfg_int(cfg, "experiment.corrector_sweeps"));
            lc.out_dir = out_dir;
            const LipschitzReport rep = experiment_lipschitz(st, growth, lc);
            pass = rep.pass;
            std::cout << "lipschitz: |V_" << rep.component << "(t_K)| = " << rep.v_norm_at_t
                      << " vs gauge " << rep.gauge << " -> " << (pass ? "PASS" : "FAIL") << "\n";
        } else if (kind == "hadamard") {
            HadamardConfig hc;
            hc.deltas = cfg_list(cfg, "experiment.deltas");
            hc.epsilon = cfg_real(cfg, "experiment.epsilon");
            hc.slope_tol = cfg_real(cfg, "experiment.slope_tol");
            hc.budget_factor = cfg_real(cfg, "experiment.budget_factor");
            hc.dt = cfg_real(cfg, "experiment.dt");
            hc.cadence = static_cast<int>(cfg_int(cfg, "experiment.cadence"));
            hc.corrector_sweeps = static_cast<int>(cfg_int(cfg, "experiment.corrector_sweeps"));
            hc.out_dir = out_dir;
            const HadamardReport rep = experiment_hadamard(st, growth, hc);
            if (rep.config_error)
                throw ConfigurationError("epsilon unreachable on this grid; lower it");
            pass = rep.pass;
            std::cout << "hadamard: slope " << rep.fit_slope << " vs 1/lambda "
                      << rep.inv_lambda << " -> " << (pass ? "PASS" : "FAIL") << "\n";
        } else {
            throw ConfigurationError("unknown experiment kind: " + kind);
        }
    }
    return pass ? 0 : 1;
}

int cmd_verify(const std::string& state_dir) {
    // load_state re-validates every checkpoint hash against the manifest
    SteadyState st = load_state(state_dir);
    const ResidualReport r = verify_steady(st);
    std::cout << "hydro_face_max = " << r.hydro_face_max << " (scale " << r.hydro_face_scale
              << ")\n"
              << "hydro_div_rel  = " << r.hydro_div_rel << "\n"
              << "alignment_max  = " << r.alignment_max << " (scale " << r.alignment_scale
              << ")\n"
              << "classification = " << stability_class_name(classify(st)) << "\n"
              << (r.accepted ? "accepted" : "NOT accepted") << "\n";
    return r.accepted ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hydrostab: hydrostatic steady states, sharp growth rates, and "
                 "perturbation experiments for variable-density flow in a box"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int threads = 1;
    app.add_option("--seed", seed, "global seed override (experiments)");
    app.add_option("--threads", threads, "worker hint (runs are single-threaded)");

    auto* steady = app.add_subcommand("steady", "build a hydrostatic steady state");
    std::string cfg_path, out_path;
    steady->add_option("--config", cfg_path, "steady-state config file")->required();
    steady->add_option("--out", out_path, "output state directory")->required();

    auto* phi_cmd = app.add_subcommand("phi", "sweep Phi(s)");
    std::string state_dir, out_csv, svg_path;
    double s_min = 0.05, s_max = 0.8;
    int s_count = 9;
    phi_cmd->add_option("--state", state_dir)->required();
    phi_cmd->add_option("--s-min", s_min);
    phi_cmd->add_option("--s-max", s_max);
    phi_cmd->add_option("--s-count", s_count);
    phi_cmd->add_option("--out", out_csv)->required();
    phi_cmd->add_option("--svg", svg_path);

    auto* lambda_cmd = app.add_subcommand("lambda", "solve the growth-rate fixed point");
    std::string lam_state, lam_out, mode_dir;
    lambda_cmd->add_option("--state", lam_state)->required();
    lambda_cmd->add_option("--out", lam_out)->required();
    lambda_cmd->add_option("--mode-out", mode_dir);

    auto* sim = app.add_subcommand("simulate", "evolve the perturbation system");
    std::string sim_state, sim_mode = "linear", sim_init = "eigenmode", sim_out,
                sim_adv = "upwind1";
    double sim_amp = 1e-3, sim_tend = 1.0, sim_dt = 0.0;
    int sim_cadence = 4, sim_sweeps = 0, sim_ckpt = 0;
    sim->add_option("--state", sim_state)->required();
    sim->add_option("--mode", sim_mode)->check(CLI::IsMember({"linear", "nonlinear"}));
    sim->add_option("--init", sim_init, "eigenmode or file:<dir with u.hsf,v.hsf,rho.hsf>");
    sim->add_option("--amplitude", sim_amp);
    sim->add_option("--t-end", sim_tend)->required();
    sim->add_option("--dt", sim_dt)->required();
    sim->add_option("--out", sim_out)->required();
    sim->add_option("--cadence", sim_cadence);
    sim->add_option("--sweeps", sim_sweeps);
    sim->add_option("--advection", sim_adv)
        ->check(CLI::IsMember({"upwind1", "centered2_with_limiter"}));
    sim->add_option("--checkpoint-every", sim_ckpt);

    auto* exp = app.add_subcommand("experiment", "run a named experiment");
    std::string exp_kind, exp_state, exp_cfg, exp_out;
    exp->add_option("kind", exp_kind, "lineargrowth|lipschitz|hadamard|stability")->required();
    exp->add_option("--state", exp_state)->required();
    exp->add_option("--config", exp_cfg);
    exp->add_option("--out", exp_out)->required();

    auto* ver = app.add_subcommand("verify", "re-verify a stored state");
    std::string ver_state;
    ver->add_option("--state", ver_state)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*steady) return cmd_steady(cfg_path, out_path);
        if (*phi_cmd) return cmd_phi(state_dir, s_min, s_max, s_count, out_csv, svg_path);
        if (*lambda_cmd) return cmd_lambda(lam_state, lam_out, mode_dir);
        if (*sim)
            return cmd_simulate(sim_state, sim_mode == "linear" ? "linear" : "nonlinear",
                                sim_init, sim_amp, sim_tend, sim_dt, sim_out, sim_cadence,
                                sim_sweeps, sim_adv, sim_ckpt);
        if (*exp) return cmd_experiment(exp_kind, exp_state, exp_cfg, exp_out);
        if (*ver) return cmd_verify(ver_state);
    } catch (const ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const NoInstability& e) {
        std::cerr << "no instability: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
