#pragma once

/// Time integration of the linearized and nonlinear perturbation systems on
/// a hydrostatic background: explicit density update / transport, implicit
/// viscosity, variable-coefficient pressure projection, no-slip walls.
///
/// corrector_sweeps = 0 gives the plain splitting (first order in time);
/// each corrector sweep re-evaluates the couplings at the time midpoint
/// (Picard toward the implicit midpoint rule), which makes the discrete
/// energy exchange between rho and V cancel exactly and is required for the
/// per-step Lyapunov monotonicity checks at tight tolerance.

#include <filesystem>
#include <functional>

#include "hydrostab/steady_state.hpp"

namespace hydrostab {

enum class Scheme { linearized, nonlinear };
enum class Advection { upwind1, centered2_with_limiter };

struct TimeStepperConfig {
    double dt = 0.0;
    Scheme scheme = Scheme::linearized;
    Advection advection = Advection::upwind1;
    double projection_tol = 1e-10;
    int max_projection_iter = 20000;
    double diffusion_tol = 1e-12;
    int max_diffusion_iter = 20000;
    int corrector_sweeps = 0;
    double cfl_factor = 0.4;
    bool auto_halve_dt = false;
};

struct PerturbationState {
    double t = 0.0;
    VectorField V;
    ScalarField rho;  // cell
    ScalarField P;    // cell, zero-mean gauge

    PerturbationState() = default;
    explicit PerturbationState(const Grid& g)
        : V(g), rho(g, Placement::cell), P(g, Placement::cell) {}
};

PerturbationState step_linearized(const PerturbationState& state, const SteadyState& bg,
                                  const TimeStepperConfig& cfg);

PerturbationState step_nonlinear(const PerturbationState& state, const SteadyState& bg,
                                 const TimeStepperConfig& cfg);

/// One diagnostics sample.
struct DiagRow {
    double t = 0.0;
    double l1_V = 0.0, l2_V = 0.0, h1_V = 0.0;
    double l1_rho = 0.0, l2_rho = 0.0;
    double lyapunov = 0.0;  // NaN when h >= 0 somewhere
    double kinetic = 0.0;   // density-weighted |V|^2 integral
    double grad_V_sq = 0.0;
    double max_div = 0.0;
    double min_rho_tot = 0.0, max_rho_tot = 0.0;
    double dt = 0.0;
};

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagRow>& rows);
std::vector<DiagRow> read_diagnostics_csv(const std::filesystem::path& path);

struct RunOptions {
    double t_end = 0.0;
    int cadence = 1;  // sample every `cadence` steps (plus the initial state)
    std::filesystem::path csv_path;                 // empty: no CSV
    std::function<bool(const DiagRow&)> observer;   // return false to stop early
    int checkpoint_every = 0;                       // steps; 0 = never
    std::filesystem::path checkpoint_dir;
    double lyapunov_tol = 1e-10;  // per-step relative monotonicity tolerance
};

struct RunResult {
    PerturbationState final_state;
    std::vector<DiagRow> rows;
    int steps = 0;
    bool stopped_early = false;
    /// Per-step Lyapunov bookkeeping (valid when h < 0 everywhere).
    bool lyapunov_monotone = true;
    double lyapunov_worst_uptick = 0.0;  // max positive relative per-step change
    double lyapunov_tolerance = 1e-10;
    double lyapunov_initial = 0.0;
    double lyapunov_final = 0.0;
    /// sum over steps of |grad V|^2 dt (for the dissipation-integral check)
    double grad_integral = 0.0;
};

RunResult run(const PerturbationState& initial, const SteadyState& bg,
              const TimeStepperConfig& cfg, const RunOptions& opts);

/// The stable-case quadratic functional: int [rho^2/(-h) + w |V|^2] with
/// w = rho0 (linearized) or rho + rho0 (nonlinear). NaN if max(h) >= 0.
double lyapunov_functional(const PerturbationState& state, const SteadyState& bg, Scheme scheme);

DiagRow diagnostics(const PerturbationState& state, const SteadyState& bg, Scheme scheme,
                    double dt);

}  // namespace hydrostab
