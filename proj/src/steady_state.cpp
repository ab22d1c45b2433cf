#include "hydrostab/steady_state.hpp"

#include <cmath>

#include "hydrostab/checkpoint.hpp"
#include "hydrostab/expr.hpp"
#include "hydrostab/field_ops.hpp"
#include "hydrostab/linsolve.hpp"

namespace hydrostab {

namespace {

ScalarField sample_cells(const Grid& g, const std::function<double(double, double)>& fn) {
    ScalarField out(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            out.at(i, j) = fn(g.cell_x(i), g.cell_y(j));
    return out;
}

VectorField sample_faces(const Grid& g, const std::function<double(double, double)>& fx,
                         const std::function<double(double, double)>& fy) {
    VectorField out(g);
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            out.u.at(i, j) = fx(g.node_x(i), g.cell_y(j));
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j)
            out.v.at(i, j) = fy(g.cell_x(i), g.node_y(j));
    return out;
}

double interior_consistency(const Grid& g, const ScalarField& f, const VectorField& gf) {
    const VectorField dg = gradient(f);
    double m = 0.0;
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            m = std::max(m, std::abs(gf.u.at(i, j) - dg.u.at(i, j)));
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j)
            m = std::max(m, std::abs(gf.v.at(i, j) - dg.v.at(i, j)));
    return m;
}

void cache_cell_gradients(SteadyState& st) {
    const Grid& g = st.grid;
    st.fx_c = ScalarField(g, Placement::cell);
    st.fy_c = ScalarField(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            st.fx_c.at(i, j) = 0.5 * (st.grad_f.u.at(i, j) + st.grad_f.u.at(i + 1, j));
            st.fy_c.at(i, j) = 0.5 * (st.grad_f.v.at(i, j) + st.grad_f.v.at(i, j + 1));
        }
}

}  // namespace

PotentialSpec PotentialSpec::uniform_gravity(const Grid& g, double gravity) {
    PotentialSpec p;
    p.kind = "uniform_gravity";
    p.params["g"] = gravity;
    p.f = sample_cells(g, [&](double, double y) { return gravity * y; });
    p.grad_f = sample_faces(g, [](double, double) { return 0.0; },
                            [&](double, double) { return gravity; });
    p.consistency_residual = interior_consistency(g, p.f, p.grad_f);
    return p;
}

PotentialSpec PotentialSpec::radial(const Grid& g, double cx, double cy, double strength) {
    PotentialSpec p;
    p.kind = "radial";
    p.params["cx"] = cx;
    p.params["cy"] = cy;
    p.params["strength"] = strength;
    p.f = sample_cells(g, [&](double x, double y) {
        return 0.5 * strength * ((x - cx) * (x - cx) + (y - cy) * (y - cy));
    });
    p.grad_f = sample_faces(g, [&](double x, double) { return strength * (x - cx); },
                            [&](double, double y) { return strength * (y - cy); });
    p.consistency_residual = interior_consistency(g, p.f, p.grad_f);
    return p;
}

PotentialSpec PotentialSpec::from_expression(const Grid& g, const std::string& f_expr,
                                             const std::string& fx_expr,
                                             const std::string& fy_expr) {
    const std::vector<std::string> vars{"x", "y"};
    Expr fe = Expr::compile(f_expr, vars);
    PotentialSpec p;
    p.kind = "expression";
    p.params["f"] = f_expr;
    p.f = sample_cells(g, [&](double x, double y) { return fe.eval(x, y); });
    if (!fx_expr.empty() && !fy_expr.empty()) {
        Expr fxe = Expr::compile(fx_expr, vars);
        Expr fye = Expr::compile(fy_expr, vars);
        p.params["fx"] = fx_expr;
        p.params["fy"] = fy_expr;
        p.grad_f = sample_faces(g, [&](double x, double y) { return fxe.eval(x, y); },
                                [&](double x, double y) { return fye.eval(x, y); });
    } else {
        p.grad_f = gradient(p.f);
    }
    p.consistency_residual = interior_consistency(g, p.f, p.grad_f);
    if (!p.f.all_finite())
        throw DomainError("potential expression produced non-finite samples");
    return p;
}

PotentialSpec PotentialSpec::from_function(const Grid& g,
                                           const std::function<double(double, double)>& f,
                                           const std::function<double(double, double)>& fx,
                                           const std::function<double(double, double)>& fy) {
    PotentialSpec p;
    p.kind = "function";
    p.f = sample_cells(g, f);
    if (fx && fy)
        p.grad_f = sample_faces(g, fx, fy);
    else
        p.grad_f = gradient(p.f);
    p.consistency_residual = interior_consistency(g, p.f, p.grad_f);
    return p;
}

DensityProfile DensityProfile::exponential(double rho_bar, double beta) {
    DensityProfile d;
    d.kind = "exponential";
    d.params["rho_bar"] = rho_bar;
    d.params["beta"] = beta;
    d.r = [=](double t) { return rho_bar * std::exp(-beta * t); };
    d.r_prime = [=](double t) { return -beta * rho_bar * std::exp(-beta * t); };
    return d;
}

DensityProfile DensityProfile::linear(double a, double b) {
    DensityProfile d;
    d.kind = "linear";
    d.params["a"] = a;
    d.params["b"] = b;
    d.r = [=](double t) { return a + b * t; };
    d.r_prime = [=](double) { return b; };
    return d;
}

DensityProfile DensityProfile::from_expression(const std::string& r_expr,
                                               const std::string& r_prime_expr) {
    const std::vector<std::string> vars{"t"};
    Expr re = Expr::compile(r_expr, vars);
    Expr rpe = Expr::compile(r_prime_expr, vars);
    DensityProfile d;
    d.kind = "expression";
    d.params["r"] = r_expr;
    d.params["r_prime"] = r_prime_expr;
    d.r = [re](double t) { return re.eval(t); };
    d.r_prime = [rpe](double t) { return rpe.eval(t); };
    return d;
}

std::string stability_class_name(StabilityClass c) {
    switch (c) {
        case StabilityClass::Unstable: return "Unstable";
        case StabilityClass::LinearlyStable: return "LinearlyStable";
        case StabilityClass::NonlinearlyStable: return "NonlinearlyStable";
        case StabilityClass::Indeterminate: return "Indeterminate";
    }
    return "?";
}

ScalarField solve_hydrostatic_pressure(const Grid& g, const VectorField& F, double tol,
                                       int max_iter, int* iterations) {
    // Wall fluxes of F are the Neumann data; they cancel from both sides, so
    // the rhs uses interior fluxes only and the system is exactly compatible.
    const int n = g.nx * g.ny;
    std::vector<double> rhs(n, 0.0);
    auto cid = [&](int i, int j) { return i * g.ny + j; };
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double fe = (i + 1 <= g.nx - 1) ? F.u.at(i + 1, j) : 0.0;  // east interior face
            const double fw = (i >= 1) ? F.u.at(i, j) : 0.0;
            const double fn = (j + 1 <= g.ny - 1) ? F.v.at(i, j + 1) : 0.0;
            const double fs = (j >= 1) ? F.v.at(i, j) : 0.0;
            const double d = (fe - fw) / g.hx + (fn - fs) / g.hy;
            rhs[cid(i, j)] = -d;  // solve (-L) p = -rhs_div for SPD CG
        }

    const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);
    ApplyFn apply = [&](const std::vector<double>& x, std::vector<double>& out) {
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const double c = x[cid(i, j)];
                double s = 0.0;
                if (i > 0) s += (c - x[cid(i - 1, j)]) * ihx2;
                if (i < g.nx - 1) s += (c - x[cid(i + 1, j)]) * ihx2;
                if (j > 0) s += (c - x[cid(i, j - 1)]) * ihy2;
                if (j < g.ny - 1) s += (c - x[cid(i, j + 1)]) * ihy2;
                out[cid(i, j)] = s;  // -L p
            }
    };
    ProjectFn project = [](std::vector<double>& v) { subtract_mean(v); };

    CgOptions opt;
    opt.tol_rel = tol;
    opt.max_iter = max_iter;
    std::vector<double> x(n, 0.0);
    const CgResult res = conjugate_gradient(apply, rhs, x, opt, nullptr, &project);
    if (!res.converged)
        throw NumericalError("hydrostatic pressure solve did not converge: residual " +
                             std::to_string(res.residual) + " after " +
                             std::to_string(res.iterations) + " iterations");
    if (iterations) *iterations = res.iterations;

    ScalarField p(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) p.at(i, j) = x[cid(i, j)];
    return p;
}

namespace {

ResidualReport compute_residuals(const SteadyState& st) {
    const Grid& g = st.grid;
    ResidualReport r;

    // face-form hydrostatic residual on interior faces
    const ScalarField rho_xf = cell_to_x_face(st.rho0);
    const ScalarField rho_yf = cell_to_y_face(st.rho0);
    double scale = 0.0;
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double force = rho_xf.at(i, j) * st.grad_f.u.at(i, j);
            const double resid = (st.p0.at(i, j) - st.p0.at(i - 1, j)) / g.hx + force;
            r.hydro_face_max = std::max(r.hydro_face_max, std::abs(resid));
            scale = std::max(scale, std::abs(force));
        }
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j) {
            const double force = rho_yf.at(i, j) * st.grad_f.v.at(i, j);
            const double resid = (st.p0.at(i, j) - st.p0.at(i, j - 1)) / g.hy + force;
            r.hydro_face_max = std::max(r.hydro_face_max, std::abs(resid));
            scale = std::max(scale, std::abs(force));
        }
    r.hydro_face_scale = scale;

    // divergence-form residual (the solver contract)
    double div_max = 0.0, div_scale = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            double lp = 0.0, df = 0.0;
            if (i > 0) {
                lp += (st.p0.at(i, j) - st.p0.at(i - 1, j)) / (g.hx * g.hx) * -1.0;
                df += rho_xf.at(i, j) * st.grad_f.u.at(i, j) / g.hx * -1.0;
            }
            if (i < g.nx - 1) {
                lp += (st.p0.at(i + 1, j) - st.p0.at(i, j)) / (g.hx * g.hx);
                df += rho_xf.at(i + 1, j) * st.grad_f.u.at(i + 1, j) / g.hx;
            }
            if (j > 0) {
                lp += (st.p0.at(i, j) - st.p0.at(i, j - 1)) / (g.hy * g.hy) * -1.0;
                df += rho_yf.at(i, j) * st.grad_f.v.at(i, j) / g.hy * -1.0;
            }
            if (j < g.ny - 1) {
                lp += (st.p0.at(i, j + 1) - st.p0.at(i, j)) / (g.hy * g.hy);
                df += rho_yf.at(i, j + 1) * st.grad_f.v.at(i, j + 1) / g.hy;
            }
            div_max = std::max(div_max, std::abs(lp + df));
            div_scale = std::max(div_scale, std::abs(df));
        }
    r.hydro_div_rel = (div_scale > 0.0) ? div_max / div_scale : div_max;

    // alignment identity with discrete gradients of the stored samples
    const VectorField grho = gradient(st.rho0);
    const VectorField gf = gradient(st.f);
    double amax = 0.0, ascale = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double rx = 0.5 * (grho.u.at(i, j) + grho.u.at(i + 1, j));
            const double ry = 0.5 * (grho.v.at(i, j) + grho.v.at(i, j + 1));
            const double fx = 0.5 * (gf.u.at(i, j) + gf.u.at(i + 1, j));
            const double fy = 0.5 * (gf.v.at(i, j) + gf.v.at(i, j + 1));
            amax = std::max(amax, std::abs(ry * fx - rx * fy));
            ascale = std::max(ascale, std::sqrt((rx * rx + ry * ry) * (fx * fx + fy * fy)));
        }
    r.alignment_max = amax;
    r.alignment_scale = ascale;
    return r;
}

}  // namespace

SteadyState build_steady_state(const Grid& grid, const PotentialSpec& pot,
                               const DensityProfile& profile, double mu, double sigma,
                               const SteadyStateOptions& opts) {
    if (!(mu > 0.0)) throw DomainError("build_steady_state: mu must be positive");
    if (!(sigma > 0.0)) throw DomainError("build_steady_state: sigma must be positive");
    require_same_grid(grid, pot.f.grid(), "build_steady_state");

    SteadyState st;
    st.grid = grid;
    st.f = pot.f;
    st.grad_f = pot.grad_f;
    st.mu = mu;
    st.sigma = sigma;
    st.potential_meta = json{{"kind", pot.kind}, {"params", pot.params}};
    st.profile_meta = json{{"kind", profile.kind}, {"params", profile.params}};

    st.rho0 = ScalarField(grid, Placement::cell);
    st.h = ScalarField(grid, Placement::cell);
    double rho_min = 1e308;
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j) {
            const double t = st.f.at(i, j);
            st.rho0.at(i, j) = profile.r(t);
            st.h.at(i, j) = profile.r_prime(t);
            rho_min = std::min(rho_min, st.rho0.at(i, j));
        }
    if (!st.rho0.all_finite() || !st.h.all_finite())
        throw DomainError("density profile produced non-finite samples");
    if (!(rho_min > sigma))
        throw DomainError("density profile violates rho0 > sigma: min rho0 = " +
                          std::to_string(rho_min) + ", sigma = " + std::to_string(sigma));

    // Hydrostatic pressure: div(grad P0) = div(-rho0 grad f), Neumann walls.
    VectorField F(grid);
    const ScalarField rho_xf = cell_to_x_face(st.rho0);
    const ScalarField rho_yf = cell_to_y_face(st.rho0);
    for (int i = 0; i <= grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j)
            F.u.at(i, j) = -rho_xf.at(i, j) * st.grad_f.u.at(i, j);
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j <= grid.ny; ++j)
            F.v.at(i, j) = -rho_yf.at(i, j) * st.grad_f.v.at(i, j);
    st.p0 = solve_hydrostatic_pressure(grid, F, opts.poisson_tol, opts.poisson_max_iter);

    cache_cell_gradients(st);
    st.residuals = compute_residuals(st);
    const double tol_align = (opts.tol_align >= 0.0)
                                 ? opts.tol_align
                                 : 2.0 * (grid.hx * grid.hx + grid.hy * grid.hy) *
                                       std::max(st.residuals.alignment_scale, 1e-300);
    if (st.residuals.hydro_div_rel > opts.tol_div)
        throw NumericalError("hydrostatic divergence residual " +
                             std::to_string(st.residuals.hydro_div_rel) + " exceeds tolerance " +
                             std::to_string(opts.tol_div));
    if (st.residuals.alignment_max > tol_align)
        throw NumericalError("alignment residual " + std::to_string(st.residuals.alignment_max) +
                             " exceeds tolerance " + std::to_string(tol_align));
    st.residuals.accepted = true;
    return st;
}

SteadyState make_state_raw(const Grid& grid,
                           const std::function<double(double, double)>& f,
                           const std::function<double(double, double)>& rho0,
                           const std::function<double(double, double)>& h,
                           const std::function<double(double, double)>& fx,
                           const std::function<double(double, double)>& fy,
                           double mu, double sigma) {
    SteadyState st;
    st.grid = grid;
    st.f = sample_cells(grid, f);
    st.rho0 = sample_cells(grid, rho0);
    st.h = sample_cells(grid, h);
    st.grad_f = sample_faces(grid, fx, fy);
    st.p0 = ScalarField(grid, Placement::cell);
    st.mu = mu;
    st.sigma = sigma;
    st.potential_meta = json{{"kind", "raw"}, {"params", json::object()}};
    st.profile_meta = json{{"kind", "raw"}, {"params", json::object()}};
    if (!(st.rho0.min_value() > sigma))
        throw DomainError("raw state violates rho0 > sigma");
    cache_cell_gradients(st);
    return st;
}

StabilityClass classify(const SteadyState& state, double const_tol) {
    const double hmax = state.h.max_value();
    const double hmin = state.h.min_value();
    if (hmax > 0.0) return StabilityClass::Unstable;
    if (hmax < 0.0) {
        double mean = 0.0;
        for (double v : state.h.data()) mean += v;
        mean /= static_cast<double>(state.h.data().size());
        if ((hmax - hmin) <= const_tol * std::abs(mean)) return StabilityClass::NonlinearlyStable;
        return StabilityClass::LinearlyStable;
    }
    return StabilityClass::Indeterminate;
}

ResidualReport verify_steady(const SteadyState& state, const SteadyStateOptions& opts) {
    ResidualReport r = compute_residuals(state);
    const double tol_align = (opts.tol_align >= 0.0)
                                 ? opts.tol_align
                                 : 2.0 * (state.grid.hx * state.grid.hx +
                                          state.grid.hy * state.grid.hy) *
                                       std::max(r.alignment_scale, 1e-300);
    r.accepted = (r.hydro_div_rel <= opts.tol_div) && (r.alignment_max <= tol_align);
    return r;
}

namespace {

const char* kFieldNames[] = {"f", "rho0", "p0", "h", "gradfx", "gradfy"};

}  // namespace

void save_state(const std::filesystem::path& dir, const SteadyState& state) {
    std::filesystem::create_directories(dir);
    const ScalarField* fields[] = {&state.f, &state.rho0, &state.p0, &state.h,
                                   &state.grad_f.u, &state.grad_f.v};
    json hashes = json::object();
    for (int k = 0; k < 6; ++k) {
        const auto path = dir / (std::string(kFieldNames[k]) + ".hsf");
        write_checkpoint(path, *fields[k]);
        hashes[kFieldNames[k]] = field_hash(*fields[k]);
    }
    json m;
    m["format"] = "hydrostab-state-1";
    m["tool_version"] = kToolVersion;
    m["created"] = timestamp_utc();
    m["grid"] = {{"length_x", state.grid.length_x},
                 {"length_y", state.grid.length_y},
                 {"nx", state.grid.nx},
                 {"ny", state.grid.ny}};
    m["mu"] = state.mu;
    m["sigma"] = state.sigma;
    m["potential"] = state.potential_meta;
    m["profile"] = state.profile_meta;
    m["residuals"] = {{"hydro_face_max", state.residuals.hydro_face_max},
                      {"hydro_face_scale", state.residuals.hydro_face_scale},
                      {"hydro_div_rel", state.residuals.hydro_div_rel},
                      {"alignment_max", state.residuals.alignment_max},
                      {"alignment_scale", state.residuals.alignment_scale},
                      {"accepted", state.residuals.accepted}};
    m["classification"] = stability_class_name(classify(state));
    m["fields"] = hashes;
    emit_report(dir / "state.json", m);
}

SteadyState load_state(const std::filesystem::path& dir) {
    const json m = load_report(dir / "state.json");
    if (m.value("format", "") != "hydrostab-state-1")
        throw ConfigurationError("not a state directory: " + dir.string());
    const auto& gj = m.at("grid");
    Grid grid(gj.at("length_x").get<double>(), gj.at("length_y").get<double>(),
              gj.at("nx").get<int>(), gj.at("ny").get<int>());
    SteadyState st;
    st.grid = grid;
    st.mu = m.at("mu").get<double>();
    st.sigma = m.at("sigma").get<double>();
    st.potential_meta = m.at("potential");
    st.profile_meta = m.at("profile");

    ScalarField* fields[] = {&st.f, &st.rho0, &st.p0, &st.h, nullptr, nullptr};
    st.grad_f = VectorField(grid);
    for (int k = 0; k < 6; ++k) {
        const auto path = dir / (std::string(kFieldNames[k]) + ".hsf");
        ScalarField loaded = read_checkpoint(path, grid);
        const std::string expect = m.at("fields").at(kFieldNames[k]).get<std::string>();
        if (field_hash(loaded) != expect)
            throw ConfigurationError("checkpoint hash mismatch for " + path.string());
        if (k < 4)
            *fields[k] = std::move(loaded);
        else if (k == 4)
            st.grad_f.u = std::move(loaded);
        else
            st.grad_f.v = std::move(loaded);
    }
    const auto& rj = m.at("residuals");
    st.residuals.hydro_face_max = rj.at("hydro_face_max").get<double>();
    st.residuals.hydro_face_scale = rj.at("hydro_face_scale").get<double>();
    st.residuals.hydro_div_rel = rj.at("hydro_div_rel").get<double>();
    st.residuals.alignment_max = rj.at("alignment_max").get<double>();
    st.residuals.alignment_scale = rj.at("alignment_scale").get<double>();
    st.residuals.accepted = rj.at("accepted").get<bool>();
    cache_cell_gradients(st);
    return st;
}

}  // namespace hydrostab
