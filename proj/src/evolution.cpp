#include "hydrostab/evolution.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hydrostab/checkpoint.hpp"
#include "hydrostab/field_ops.hpp"
#include "hydrostab/forms.hpp"
#include "hydrostab/linsolve.hpp"

namespace hydrostab {

namespace {

void check_cfl(const VectorField& V, const TimeStepperConfig& cfg, const Grid& g) {
    const double vmax = V.max_abs();
    const double limit = cfg.cfl_factor * std::min(g.hx, g.hy) / std::max(1.0, vmax);
    if (cfg.dt > limit * (1.0 + 1e-12))
        throw NumericalError("CFL violation: dt = " + std::to_string(cfg.dt) +
                             " exceeds limit " + std::to_string(limit) + " at max|V| = " +
                             std::to_string(vmax));
}

// ghost-aware componentwise Laplacian entries (same stencil as vector_laplacian)
double lap_u_at(const ScalarField& u, const Grid& g, int i, int j) {
    const double c = u.at(i, j);
    const double xx = (u.at(i + 1, j) - 2.0 * c + u.at(i - 1, j)) / (g.hx * g.hx);
    const double yl = (j > 0) ? u.at(i, j - 1) : -c;
    const double yr = (j < g.ny - 1) ? u.at(i, j + 1) : -c;
    return xx + (yr - 2.0 * c + yl) / (g.hy * g.hy);
}

double lap_v_at(const ScalarField& v, const Grid& g, int i, int j) {
    const double c = v.at(i, j);
    const double yy = (v.at(i, j + 1) - 2.0 * c + v.at(i, j - 1)) / (g.hy * g.hy);
    const double xl = (i > 0) ? v.at(i - 1, j) : -c;
    const double xr = (i < g.nx - 1) ? v.at(i + 1, j) : -c;
    return yy + (xr - 2.0 * c + xl) / (g.hx * g.hx);
}

/// Solves (mass/dt) V - theta_mu * Lap V = rhs componentwise; boundary faces
/// are identity rows pinned to zero.
VectorField solve_helmholtz(const Grid& g, const ScalarField& mass_xf, const ScalarField& mass_yf,
                            double dt, double theta_mu, const VectorField& rhs,
                            const VectorField* warm, double tol, int max_iter) {
    VectorField out(g);
    const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);

    // u component
    {
        const int R = g.nx + 1, C = g.ny;
        const auto id = [&](int i, int j) { return i * C + j; };
        std::vector<double> b(static_cast<size_t>(R) * C, 0.0), x(b.size(), 0.0),
            dinv(b.size(), 1.0);
        for (int i = 1; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                b[id(i, j)] = rhs.u.at(i, j);
                if (warm) x[id(i, j)] = warm->u.at(i, j);
                double diag = mass_xf.at(i, j) / dt + theta_mu * 2.0 * ihx2;
                diag += theta_mu * ((j == 0 || j == g.ny - 1) ? 3.0 : 2.0) * ihy2;
                dinv[id(i, j)] = 1.0 / diag;
            }
        ApplyFn apply = [&](const std::vector<double>& in, std::vector<double>& outv) {
            for (int j = 0; j < g.ny; ++j) {
                outv[id(0, j)] = in[id(0, j)];
                outv[id(g.nx, j)] = in[id(g.nx, j)];
            }
            for (int i = 1; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j) {
                    const double c = in[id(i, j)];
                    const double xx = (in[id(i + 1, j)] - 2.0 * c + in[id(i - 1, j)]) * ihx2;
                    const double yl = (j > 0) ? in[id(i, j - 1)] : -c;
                    const double yr = (j < g.ny - 1) ? in[id(i, j + 1)] : -c;
                    outv[id(i, j)] = mass_xf.at(i, j) / dt * c -
                                     theta_mu * (xx + (yr - 2.0 * c + yl) * ihy2);
                }
        };
        CgOptions copt;
        copt.tol_rel = tol;
        copt.max_iter = max_iter;
        const CgResult r = conjugate_gradient(apply, b, x, copt, &dinv);
        if (!r.converged)
            throw NumericalError("implicit diffusion (u) did not converge: residual " +
                                 std::to_string(r.residual));
        for (int i = 1; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) out.u.at(i, j) = x[id(i, j)];
    }

    // v component
    {
        const int R = g.nx, C = g.ny + 1;
        const auto id = [&](int i, int j) { return i * C + j; };
        std::vector<double> b(static_cast<size_t>(R) * C, 0.0), x(b.size(), 0.0),
            dinv(b.size(), 1.0);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 1; j < g.ny; ++j) {
                b[id(i, j)] = rhs.v.at(i, j);
                if (warm) x[id(i, j)] = warm->v.at(i, j);
                double diag = mass_yf.at(i, j) / dt + theta_mu * 2.0 * ihy2;
                diag += theta_mu * ((i == 0 || i == g.nx - 1) ? 3.0 : 2.0) * ihx2;
                dinv[id(i, j)] = 1.0 / diag;
            }
        ApplyFn apply = [&](const std::vector<double>& in, std::vector<double>& outv) {
            for (int i = 0; i < g.nx; ++i) {
                outv[id(i, 0)] = in[id(i, 0)];
                outv[id(i, g.ny)] = in[id(i, g.ny)];
            }
            for (int i = 0; i < g.nx; ++i)
                for (int j = 1; j < g.ny; ++j) {
                    const double c = in[id(i, j)];
                    const double yy = (in[id(i, j + 1)] - 2.0 * c + in[id(i, j - 1)]) * ihy2;
                    const double xl = (i > 0) ? in[id(i - 1, j)] : -c;
                    const double xr = (i < g.nx - 1) ? in[id(i + 1, j)] : -c;
                    outv[id(i, j)] = mass_yf.at(i, j) / dt * c -
                                     theta_mu * (yy + (xr - 2.0 * c + xl) * ihx2);
                }
        };
        CgOptions copt;
        copt.tol_rel = tol;
        copt.max_iter = max_iter;
        const CgResult r = conjugate_gradient(apply, b, x, copt, &dinv);
        if (!r.converged)
            throw NumericalError("implicit diffusion (v) did not converge: residual " +
                                 std::to_string(r.residual));
        for (int i = 0; i < g.nx; ++i)
            for (int j = 1; j < g.ny; ++j) out.v.at(i, j) = x[id(i, j)];
    }
    return out;
}

/// Variable-coefficient projection: solves -div(coef grad P) = -div(V)/dt
/// with zero-flux walls and zero-mean gauge, then V -= dt coef grad P.
ScalarField pressure_project(const Grid& g, VectorField& V, const ScalarField& coef_xf,
                             const ScalarField& coef_yf, double dt, double tol, int max_iter,
                             const ScalarField* warm) {
    const int n = g.nx * g.ny;
    const auto id = [&](int i, int j) { return i * g.ny + j; };
    std::vector<double> b(n, 0.0), x(n, 0.0), dinv(n, 0.0);
    const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);

    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            b[id(i, j)] = -((V.u.at(i + 1, j) - V.u.at(i, j)) / g.hx +
                            (V.v.at(i, j + 1) - V.v.at(i, j)) / g.hy) /
                          dt;
            if (warm) x[id(i, j)] = warm->at(i, j);
            double diag = 0.0;
            if (i > 0) diag += coef_xf.at(i, j) * ihx2;
            if (i < g.nx - 1) diag += coef_xf.at(i + 1, j) * ihx2;
            if (j > 0) diag += coef_yf.at(i, j) * ihy2;
            if (j < g.ny - 1) diag += coef_yf.at(i, j + 1) * ihy2;
            dinv[id(i, j)] = 1.0 / diag;
        }

    ApplyFn apply = [&](const std::vector<double>& in, std::vector<double>& out) {
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const double c = in[id(i, j)];
                double s = 0.0;
                if (i > 0) s += coef_xf.at(i, j) * (c - in[id(i - 1, j)]) * ihx2;
                if (i < g.nx - 1) s += coef_xf.at(i + 1, j) * (c - in[id(i + 1, j)]) * ihx2;
                if (j > 0) s += coef_yf.at(i, j) * (c - in[id(i, j - 1)]) * ihy2;
                if (j < g.ny - 1) s += coef_yf.at(i, j + 1) * (c - in[id(i, j + 1)]) * ihy2;
                out[id(i, j)] = s;
            }
    };
    ProjectFn project = [](std::vector<double>& v) { subtract_mean(v); };
    CgOptions copt;
    copt.tol_rel = tol;
    copt.max_iter = max_iter;
    const CgResult r = conjugate_gradient(apply, b, x, copt, &dinv, &project);
    if (!r.converged)
        throw NumericalError("pressure projection did not converge: residual " +
                             std::to_string(r.residual));

    ScalarField P(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) P.at(i, j) = x[id(i, j)];

    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            V.u.at(i, j) -= dt * coef_xf.at(i, j) * (P.at(i, j) - P.at(i - 1, j)) / g.hx;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j)
            V.v.at(i, j) -= dt * coef_yf.at(i, j) * (P.at(i, j) - P.at(i, j - 1)) / g.hy;
    V.impose_no_slip();
    return P;
}

/// Conservative flux-form transport of a cell scalar. centered2_with_limiter
/// stays on the centered flux in smooth monotone regions and falls back to
/// the upwind pick where the donor-side slopes change sign.
ScalarField transport_scalar(const ScalarField& q, const VectorField& V, double dt,
                             Advection adv) {
    const Grid& g = q.grid();
    ScalarField fu(g, Placement::x_face), fv(g, Placement::y_face);

    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double u = V.u.at(i, j);
            const double qup = (u >= 0.0) ? q.at(i - 1, j) : q.at(i, j);
            double qf = qup;
            if (adv == Advection::centered2_with_limiter) {
                bool smooth = false;
                const double s_mid = q.at(i, j) - q.at(i - 1, j);
                if (u >= 0.0 && i >= 2) {
                    const double s_don = q.at(i - 1, j) - q.at(i - 2, j);
                    smooth = s_don * s_mid > 0.0;
                } else if (u < 0.0 && i + 1 < g.nx) {
                    const double s_don = q.at(i + 1, j) - q.at(i, j);
                    smooth = s_don * s_mid > 0.0;
                }
                if (smooth) qf = 0.5 * (q.at(i - 1, j) + q.at(i, j));
            }
            fu.at(i, j) = u * qf;
        }
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j) {
            const double v = V.v.at(i, j);
            const double qup = (v >= 0.0) ? q.at(i, j - 1) : q.at(i, j);
            double qf = qup;
            if (adv == Advection::centered2_with_limiter) {
                bool smooth = false;
                const double s_mid = q.at(i, j) - q.at(i, j - 1);
                if (v >= 0.0 && j >= 2) {
                    const double s_don = q.at(i, j - 1) - q.at(i, j - 2);
                    smooth = s_don * s_mid > 0.0;
                } else if (v < 0.0 && j + 1 < g.ny) {
                    const double s_don = q.at(i, j + 1) - q.at(i, j);
                    smooth = s_don * s_mid > 0.0;
                }
                if (smooth) qf = 0.5 * (q.at(i, j - 1) + q.at(i, j));
            }
            fv.at(i, j) = v * qf;
        }

    ScalarField out(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            out.at(i, j) = q.at(i, j) - dt * ((fu.at(i + 1, j) - fu.at(i, j)) / g.hx +
                                              (fv.at(i, j + 1) - fv.at(i, j)) / g.hy);
    return out;
}

/// First-order upwind (V_adv . grad) V at faces, no-slip ghosts.
VectorField advect_velocity(const VectorField& Vadv, const VectorField& V) {
    const Grid& g = V.grid();
    VectorField out(g);
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double ua = Vadv.u.at(i, j);
            const double va = 0.25 * (Vadv.v.at(i - 1, j) + Vadv.v.at(i - 1, j + 1) +
                                      Vadv.v.at(i, j) + Vadv.v.at(i, j + 1));
            const double c = V.u.at(i, j);
            const double dudx = (ua >= 0.0) ? (c - V.u.at(i - 1, j)) / g.hx
                                            : (V.u.at(i + 1, j) - c) / g.hx;
            const double ubelow = (j > 0) ? V.u.at(i, j - 1) : -c;
            const double uabove = (j < g.ny - 1) ? V.u.at(i, j + 1) : -c;
            const double dudy = (va >= 0.0) ? (c - ubelow) / g.hy : (uabove - c) / g.hy;
            out.u.at(i, j) = ua * dudx + va * dudy;
        }
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j) {
            const double va = Vadv.v.at(i, j);
            const double ua = 0.25 * (Vadv.u.at(i, j - 1) + Vadv.u.at(i + 1, j - 1) +
                                      Vadv.u.at(i, j) + Vadv.u.at(i + 1, j));
            const double c = V.v.at(i, j);
            const double dvdy = (va >= 0.0) ? (c - V.v.at(i, j - 1)) / g.hy
                                            : (V.v.at(i, j + 1) - c) / g.hy;
            const double vleft = (i > 0) ? V.v.at(i - 1, j) : -c;
            const double vright = (i < g.nx - 1) ? V.v.at(i + 1, j) : -c;
            const double dvdx = (ua >= 0.0) ? (c - vleft) / g.hx : (vright - c) / g.hx;
            out.v.at(i, j) = va * dvdy + ua * dvdx;
        }
    return out;
}

VectorField axpy_fields(const VectorField& a, double s, const VectorField& b) {
    VectorField out = a;
    for (std::size_t k = 0; k < out.u.data().size(); ++k) out.u.data()[k] += s * b.u.data()[k];
    for (std::size_t k = 0; k < out.v.data().size(); ++k) out.v.data()[k] += s * b.v.data()[k];
    return out;
}

}  // namespace

PerturbationState step_linearized(const PerturbationState& state, const SteadyState& bg,
                                  const TimeStepperConfig& cfg) {
    if (cfg.scheme != Scheme::linearized)
        throw StructuralError("step_linearized called with a non-linearized config");
    require_same_grid(state.V.grid(), bg.grid, "step_linearized");
    if (!(cfg.dt > 0.0)) throw DomainError("step_linearized: dt must be positive");
    const Grid& g = bg.grid;
    check_cfl(state.V, cfg, g);
    const double dt = cfg.dt;

    const ScalarField mass_xf = cell_to_x_face(bg.rho0);
    const ScalarField mass_yf = cell_to_y_face(bg.rho0);
    ScalarField coef_xf(g, Placement::x_face), coef_yf(g, Placement::y_face);
    for (std::size_t k = 0; k < coef_xf.data().size(); ++k)
        coef_xf.data()[k] = 1.0 / mass_xf.data()[k];
    for (std::size_t k = 0; k < coef_yf.data().size(); ++k)
        coef_yf.data()[k] = 1.0 / mass_yf.data()[k];

    PerturbationState out(g);
    out.t = state.t + dt;

    auto rho_update = [&](const VectorField& Vcoupling) {
        const ScalarField sc = advective_source(bg, Vcoupling);
        ScalarField r(g, Placement::cell);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                r.at(i, j) = state.rho.at(i, j) - dt * bg.h.at(i, j) * sc.at(i, j);
        return r;
    };

    auto momentum = [&](const ScalarField& rho_force, const VectorField& warmV,
                        const ScalarField* warmP, double theta) {
        const VectorField force = buoyancy_force(bg, rho_force);
        VectorField rhs(g);
        const VectorField lapVn = (theta < 1.0) ? vector_laplacian(state.V) : VectorField(g);
        for (int i = 1; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                rhs.u.at(i, j) = mass_xf.at(i, j) / dt * state.V.u.at(i, j) - force.u.at(i, j) +
                                 (1.0 - theta) * bg.mu * lapVn.u.at(i, j);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 1; j < g.ny; ++j)
                rhs.v.at(i, j) = mass_yf.at(i, j) / dt * state.V.v.at(i, j) - force.v.at(i, j) +
                                 (1.0 - theta) * bg.mu * lapVn.v.at(i, j);
        VectorField Vstar = solve_helmholtz(g, mass_xf, mass_yf, dt, theta * bg.mu, rhs, &warmV,
                                            cfg.diffusion_tol, cfg.max_diffusion_iter);
        ScalarField P = pressure_project(g, Vstar, coef_xf, coef_yf, dt, cfg.projection_tol,
                                         cfg.max_projection_iter, warmP);
        return std::make_pair(std::move(Vstar), std::move(P));
    };

    // predictor: explicit density, backward-Euler viscosity
    out.rho = rho_update(state.V);
    auto [V1, P1] = momentum(out.rho, state.V, &state.P, 1.0);
    out.V = std::move(V1);
    out.P = std::move(P1);

    // midpoint corrector sweeps (Crank-Nicolson couplings)
    for (int sweep = 0; sweep < cfg.corrector_sweeps; ++sweep) {
        const VectorField Vmid = axpy_fields(out.V, 1.0, state.V);  // sum; halve below
        VectorField Vhalf = Vmid;
        for (double& x : Vhalf.u.data()) x *= 0.5;
        for (double& x : Vhalf.v.data()) x *= 0.5;
        out.rho = rho_update(Vhalf);
        ScalarField rho_mid(g, Placement::cell);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                rho_mid.at(i, j) = 0.5 * (state.rho.at(i, j) + out.rho.at(i, j));
        auto [V2, P2] = momentum(rho_mid, out.V, &out.P, 0.5);
        out.V = std::move(V2);
        out.P = std::move(P2);
    }
    return out;
}

PerturbationState step_nonlinear(const PerturbationState& state, const SteadyState& bg,
                                 const TimeStepperConfig& cfg) {
    if (cfg.scheme != Scheme::nonlinear)
        throw StructuralError("step_nonlinear called with a non-nonlinear config");
    require_same_grid(state.V.grid(), bg.grid, "step_nonlinear");
    if (!(cfg.dt > 0.0)) throw DomainError("step_nonlinear: dt must be positive");
    const Grid& g = bg.grid;
    check_cfl(state.V, cfg, g);
    const double dt = cfg.dt;

    ScalarField rho_tot_n(g, Placement::cell);
    double floor = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            rho_tot_n.at(i, j) = state.rho.at(i, j) + bg.rho0.at(i, j);
            floor = std::min(floor, rho_tot_n.at(i, j));
        }
    if (!(floor >= 0.5 * bg.sigma))
        throw NumericalError("density floor breached: min(rho + rho0) = " + std::to_string(floor) +
                             " < sigma/2 = " + std::to_string(0.5 * bg.sigma));

    PerturbationState out(g);
    out.t = state.t + dt;

    auto sweep_once = [&](const VectorField& Vcoupling, const PerturbationState* prev,
                          double theta) {
        // (i) transport the total density with the coupling velocity
        const ScalarField rho_tot_new = transport_scalar(rho_tot_n, Vcoupling, dt, cfg.advection);
        ScalarField rho_new(g, Placement::cell);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                rho_new.at(i, j) = rho_tot_new.at(i, j) - bg.rho0.at(i, j);

        // (ii) momentum: midpoint mass, explicit advection, implicit diffusion
        ScalarField mass_mid(g, Placement::cell);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                mass_mid.at(i, j) = 0.5 * (rho_tot_n.at(i, j) + rho_tot_new.at(i, j));
        const ScalarField mass_xf = cell_to_x_face(mass_mid);
        const ScalarField mass_yf = cell_to_y_face(mass_mid);

        ScalarField rho_force(g, Placement::cell);
        if (theta == 1.0) {
            rho_force = rho_new;
        } else {
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j)
                    rho_force.at(i, j) = 0.5 * (state.rho.at(i, j) + rho_new.at(i, j));
        }
        const VectorField force = buoyancy_force(bg, rho_force);
        const VectorField adv = advect_velocity(Vcoupling, Vcoupling);
        const VectorField lapVn = (theta < 1.0) ? vector_laplacian(state.V) : VectorField(g);

        VectorField rhs(g);
        for (int i = 1; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                rhs.u.at(i, j) = mass_xf.at(i, j) * (state.V.u.at(i, j) / dt - adv.u.at(i, j)) -
                                 force.u.at(i, j) + (1.0 - theta) * bg.mu * lapVn.u.at(i, j);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 1; j < g.ny; ++j)
                rhs.v.at(i, j) = mass_yf.at(i, j) * (state.V.v.at(i, j) / dt - adv.v.at(i, j)) -
                                 force.v.at(i, j) + (1.0 - theta) * bg.mu * lapVn.v.at(i, j);

        const VectorField& warmV = prev ? prev->V : state.V;
        VectorField Vstar = solve_helmholtz(g, mass_xf, mass_yf, dt, theta * bg.mu, rhs, &warmV,
                                            cfg.diffusion_tol, cfg.max_diffusion_iter);

        // (iii) projection weighted by the new total density
        const ScalarField rt_xf = cell_to_x_face(rho_tot_new);
        const ScalarField rt_yf = cell_to_y_face(rho_tot_new);
        ScalarField coef_xf(g, Placement::x_face), coef_yf(g, Placement::y_face);
        for (std::size_t k = 0; k < coef_xf.data().size(); ++k)
            coef_xf.data()[k] = 1.0 / rt_xf.data()[k];
        for (std::size_t k = 0; k < coef_yf.data().size(); ++k)
            coef_yf.data()[k] = 1.0 / rt_yf.data()[k];
        ScalarField P = pressure_project(g, Vstar, coef_xf, coef_yf, dt, cfg.projection_tol,
                                         cfg.max_projection_iter, prev ? &prev->P : &state.P);

        PerturbationState result(g);
        result.t = state.t + dt;
        result.V = std::move(Vstar);
        result.rho = std::move(rho_new);
        result.P = std::move(P);
        return result;
    };

    out = sweep_once(state.V, nullptr, 1.0);
    for (int sweep = 0; sweep < cfg.corrector_sweeps; ++sweep) {
        VectorField Vhalf = axpy_fields(out.V, 1.0, state.V);
        for (double& x : Vhalf.u.data()) x *= 0.5;
        for (double& x : Vhalf.v.data()) x *= 0.5;
        out = sweep_once(Vhalf, &out, 0.5);
    }
    return out;
}

double lyapunov_functional(const PerturbationState& state, const SteadyState& bg, Scheme scheme) {
    if (bg.h.max_value() >= 0.0) return std::numeric_limits<double>::quiet_NaN();
    const Grid& g = bg.grid;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            s += state.rho.at(i, j) * state.rho.at(i, j) / (-bg.h.at(i, j)) * g.hx * g.hy;
    if (scheme == Scheme::linearized) {
        s += inner_product(state.V, state.V, &bg.rho0);
    } else {
        ScalarField rho_tot(g, Placement::cell);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                rho_tot.at(i, j) = state.rho.at(i, j) + bg.rho0.at(i, j);
        s += inner_product(state.V, state.V, &rho_tot);
    }
    return s;
}

DiagRow diagnostics(const PerturbationState& state, const SteadyState& bg, Scheme scheme,
                    double dt) {
    DiagRow d;
    d.t = state.t;
    d.l1_V = norm_l1(state.V);
    d.l2_V = norm_l2(state.V);
    d.h1_V = norm_h1(state.V);
    d.l1_rho = norm_l1(state.rho);
    d.l2_rho = norm_l2(state.rho);
    d.lyapunov = lyapunov_functional(state, bg, scheme);
    d.grad_V_sq = grad_norm_sq(state.V);
    d.max_div = divergence(state.V).max_abs();
    const Grid& g = bg.grid;
    ScalarField rho_tot(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            rho_tot.at(i, j) = state.rho.at(i, j) + bg.rho0.at(i, j);
    d.min_rho_tot = rho_tot.min_value();
    d.max_rho_tot = rho_tot.max_value();
    d.kinetic = (scheme == Scheme::linearized) ? inner_product(state.V, state.V, &bg.rho0)
                                               : inner_product(state.V, state.V, &rho_tot);
    d.dt = dt;
    return d;
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagRow>& rows) {
    std::ofstream os(path);
    if (!os) throw StructuralError("cannot open diagnostics csv: " + path.string());
    os << "t,l1_V,l2_V,h1_V,l1_rho,l2_rho,lyapunov,kinetic,grad_V_sq,max_div,min_rho_tot,"
          "max_rho_tot,dt\n";
    os.precision(17);
    for (const auto& r : rows)
        os << r.t << ',' << r.l1_V << ',' << r.l2_V << ',' << r.h1_V << ',' << r.l1_rho << ','
           << r.l2_rho << ',' << r.lyapunov << ',' << r.kinetic << ',' << r.grad_V_sq << ','
           << r.max_div << ',' << r.min_rho_tot << ',' << r.max_rho_tot << ',' << r.dt << '\n';
}

std::vector<DiagRow> read_diagnostics_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw StructuralError("cannot open diagnostics csv: " + path.string());
    std::string line;
    std::getline(is, line);  // header
    std::vector<DiagRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        DiagRow r;
        double* cols[] = {&r.t,      &r.l1_V,    &r.l2_V,      &r.h1_V,        &r.l1_rho,
                          &r.l2_rho, &r.lyapunov, &r.kinetic,  &r.grad_V_sq,   &r.max_div,
                          &r.min_rho_tot, &r.max_rho_tot, &r.dt};
        std::stringstream ss(line);
        std::string item;
        int k = 0;
        while (std::getline(ss, item, ',') && k < 13) *cols[k++] = std::strtod(item.c_str(), nullptr);
        rows.push_back(r);
    }
    return rows;
}

RunResult run(const PerturbationState& initial, const SteadyState& bg,
              const TimeStepperConfig& cfg, const RunOptions& opts) {
    if (!(cfg.dt > 0.0)) throw DomainError("run: dt must be positive");
    RunResult res;
    res.lyapunov_tolerance = opts.lyapunov_tol;

    PerturbationState cur = initial;
    const long nsteps = static_cast<long>(std::floor(opts.t_end / cfg.dt + 1e-9));
    const bool track_lyap = bg.h.max_value() < 0.0;

    DiagRow d0 = diagnostics(cur, bg, cfg.scheme, cfg.dt);
    res.rows.push_back(d0);
    if (opts.observer && !opts.observer(d0)) res.stopped_early = true;
    double lyap_prev = d0.lyapunov;
    res.lyapunov_initial = d0.lyapunov;

    auto do_checkpoint = [&](long step) {
        if (opts.checkpoint_every <= 0 || opts.checkpoint_dir.empty()) return;
        if (step % opts.checkpoint_every != 0) return;
        std::filesystem::create_directories(opts.checkpoint_dir);
        const std::string tag = "step" + std::to_string(step);
        write_checkpoint(opts.checkpoint_dir / (tag + "_u.hsf"), cur.V.u);
        write_checkpoint(opts.checkpoint_dir / (tag + "_v.hsf"), cur.V.v);
        write_checkpoint(opts.checkpoint_dir / (tag + "_rho.hsf"), cur.rho);
        write_checkpoint(opts.checkpoint_dir / (tag + "_p.hsf"), cur.P);
    };
    do_checkpoint(0);

    for (long step = 1; step <= nsteps && !res.stopped_early; ++step) {
        TimeStepperConfig step_cfg = cfg;
        if (cfg.auto_halve_dt) {
            const double vmax = cur.V.max_abs();
            double dt_eff = cfg.dt;
            while (dt_eff > cfg.cfl_factor * std::min(bg.grid.hx, bg.grid.hy) /
                               std::max(1.0, vmax) * (1.0 + 1e-12))
                dt_eff *= 0.5;
            step_cfg.dt = dt_eff;
            // substep to cover cfg.dt exactly
            const int pieces = static_cast<int>(std::lround(cfg.dt / dt_eff));
            for (int p = 0; p < pieces; ++p)
                cur = (cfg.scheme == Scheme::linearized) ? step_linearized(cur, bg, step_cfg)
                                                         : step_nonlinear(cur, bg, step_cfg);
        } else {
            cur = (cfg.scheme == Scheme::linearized) ? step_linearized(cur, bg, cfg)
                                                     : step_nonlinear(cur, bg, cfg);
        }
        ++res.steps;
        res.grad_integral += grad_norm_sq(cur.V) * cfg.dt;

        if (track_lyap) {
            const double lyap = lyapunov_functional(cur, bg, cfg.scheme);
            const double denom = std::max(std::abs(lyap_prev), 1e-300);
            const double uptick = (lyap - lyap_prev) / denom;
            res.lyapunov_worst_uptick = std::max(res.lyapunov_worst_uptick, uptick);
            if (uptick > res.lyapunov_tolerance) res.lyapunov_monotone = false;
            lyap_prev = lyap;
            res.lyapunov_final = lyap;
        }

        if (step % opts.cadence == 0) {
            const DiagRow d = diagnostics(cur, bg, cfg.scheme, cfg.dt);
            res.rows.push_back(d);
            if (opts.observer && !opts.observer(d)) res.stopped_early = true;
        }
        do_checkpoint(step);
    }

    if (!opts.csv_path.empty()) write_diagnostics_csv(opts.csv_path, res.rows);
    res.final_state = std::move(cur);
    return res;
}

}  // namespace hydrostab
