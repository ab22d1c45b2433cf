#pragma once

/// Hydrostatic steady states: density rho0 = r(f) composed with the
/// potential, h = r'(f), pressure from the discrete Neumann Poisson problem,
/// plus the instability/stability classification by the sign of h.

#include <filesystem>
#include <functional>

#include "hydrostab/grid.hpp"
#include "hydrostab/report.hpp"

namespace hydrostab {

struct PotentialSpec {
    std::string kind;  // uniform_gravity | radial | expression | function
    json params = json::object();
    ScalarField f;        // cell samples
    VectorField grad_f;   // face samples, analytic for built-in kinds
    /// max |grad_f - discrete gradient of f| over interior faces
    double consistency_residual = 0.0;

    static PotentialSpec uniform_gravity(const Grid& g, double gravity);
    static PotentialSpec radial(const Grid& g, double cx, double cy, double strength);
    static PotentialSpec from_expression(const Grid& g, const std::string& f_expr,
                                         const std::string& fx_expr = "",
                                         const std::string& fy_expr = "");
    static PotentialSpec from_function(const Grid& g,
                                       const std::function<double(double, double)>& f,
                                       const std::function<double(double, double)>& fx = {},
                                       const std::function<double(double, double)>& fy = {});
};

struct DensityProfile {
    std::string kind;
    json params = json::object();
    std::function<double(double)> r;
    std::function<double(double)> r_prime;

    /// r(t) = rho_bar * exp(-beta t)
    static DensityProfile exponential(double rho_bar, double beta);
    /// r(t) = a + b t
    static DensityProfile linear(double a, double b);
    static DensityProfile from_expression(const std::string& r_expr,
                                          const std::string& r_prime_expr);
};

enum class StabilityClass { Unstable, LinearlyStable, NonlinearlyStable, Indeterminate };

std::string stability_class_name(StabilityClass c);

struct ResidualReport {
    /// max |grad P0 + rho0 grad f| over interior faces (O(h^2) truncation).
    double hydro_face_max = 0.0;
    double hydro_face_scale = 0.0;
    /// max |div grad P0 - div(-rho0 grad f)| over cells / scale (solver quality).
    double hydro_div_rel = 0.0;
    /// max |(d_y rho0, -d_x rho0) . (d_x f, d_y f)| over cells, discrete gradients.
    double alignment_max = 0.0;
    double alignment_scale = 0.0;
    bool accepted = false;
};

struct SteadyStateOptions {
    double tol_div = 1e-8;       // enforced on the divergence-form residual
    double tol_align = -1.0;     // < 0: auto, 2*(hx^2+hy^2)*scale
    double poisson_tol = 1e-12;
    int poisson_max_iter = 50000;
};

struct SteadyState {
    Grid grid;
    ScalarField f, rho0, p0, h;  // cell fields
    VectorField grad_f;
    ScalarField fx_c, fy_c;      // grad_f averaged to cell centers
    double mu = 1.0;
    double sigma = 1e-8;
    json potential_meta = json::object();
    json profile_meta = json::object();
    ResidualReport residuals;
};

SteadyState build_steady_state(const Grid& grid, const PotentialSpec& pot,
                               const DensityProfile& profile, double mu, double sigma,
                               const SteadyStateOptions& opts = {});

/// Test-fixture constructor: samples arbitrary field functions without the
/// profile machinery or the pressure solve. No consistency between rho0 and
/// h*grad f is assumed or checked.
SteadyState make_state_raw(const Grid& grid,
                           const std::function<double(double, double)>& f,
                           const std::function<double(double, double)>& rho0,
                           const std::function<double(double, double)>& h,
                           const std::function<double(double, double)>& fx,
                           const std::function<double(double, double)>& fy,
                           double mu, double sigma);

StabilityClass classify(const SteadyState& state, double const_tol = 1e-10);

ResidualReport verify_steady(const SteadyState& state, const SteadyStateOptions& opts = {});

void save_state(const std::filesystem::path& dir, const SteadyState& state);
SteadyState load_state(const std::filesystem::path& dir);

/// Solves div(grad p) = div(F) on cells with Neumann data matching F's wall
/// fluxes, zero-mean gauge. Shared by the steady-state builder and tests.
ScalarField solve_hydrostatic_pressure(const Grid& g, const VectorField& F, double tol,
                                       int max_iter, int* iterations = nullptr);

}  // namespace hydrostab
