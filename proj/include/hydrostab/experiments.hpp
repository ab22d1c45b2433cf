#pragma once

/// Desk-scale, falsifiable experiments for the instability/stability
/// statements: linear growth-rate match, Lipschitz gauge breach, Hadamard
/// escape-time scaling, and stable-case energy decay.

#include "hydrostab/evolution.hpp"
#include "hydrostab/variational.hpp"

namespace hydrostab {

/// Least-squares slope of log(value) over t in [t_lo, t_hi].
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    int npoints = 0;
};
FitResult fit_log_slope(const std::vector<DiagRow>& rows, double t_lo, double t_hi,
                        const std::function<double(const DiagRow&)>& value);

/// Initial data (V, rho) = amplitude * (u0, theta0).
PerturbationState eigenmode_initial_data(const SteadyState& st, const GrowthRateResult& growth,
                                         double amplitude);

/// Combined perturbation norm sqrt(|u|_H2^2 + |theta|_H1^2).
double perturbation_h2_norm(const VectorField& u, const ScalarField& theta);

/// pi^2 (1/Lx^2 + 1/Ly^2): the gravest Dirichlet mode scale of the domain.
double lambda1_scale(const Grid& g);

// ---------------------------------------------------------------- linear growth

struct LinearGrowthConfig {
    double fit_lo = 1.0;   // window in units of 1/lambda
    double fit_hi = 3.0;
    double rel_tol = 0.05;
    double dt = -1.0;      // < 0: cfl_factor * min(hx,hy)
    int cadence = 2;
    int corrector_sweeps = 1;
    bool random_init = false;  // random divergence-free data instead of the mode
    std::uint64_t seed = 20240901;
    std::filesystem::path out_dir;
};

struct LinearGrowthReport {
    double lambda = 0.0;
    double slope = 0.0;
    double rel_err = 0.0;
    bool pass = false;
    /// max deviation of rho(t)/theta0 from e^{lambda t} where |theta0| is large
    double mode_ratio_dev = 0.0;
    std::vector<DiagRow> rows;
    json to_json() const;
};

LinearGrowthReport experiment_linear_growth(const SteadyState& st,
                                            const GrowthRateResult& growth,
                                            const LinearGrowthConfig& cfg);

// ---------------------------------------------------------------- Lipschitz

struct LipschitzConfig {
    double K = 2.0;
    double delta = 1e-4;
    double dt = -1.0;
    int cadence = 2;
    int corrector_sweeps = 0;
    Advection advection = Advection::upwind1;
    std::filesystem::path out_dir;
};

struct LipschitzReport {
    int component = 2;  // 1 or 2, the larger-tau0 velocity component
    double tau0_1 = 0.0, tau0_2 = 0.0;
    double t_gauge = 0.0;   // (1/lambda) ln(2K/tau0)
    double gauge = 0.0;     // K * |(u0^delta, theta0^delta)|_{H2}
    double v_norm_at_t = 0.0;
    bool conclusive = false;
    bool pass = false;
    std::vector<DiagRow> rows;
    json to_json() const;
};

LipschitzReport experiment_lipschitz(const SteadyState& st, const GrowthRateResult& growth,
                                     const LipschitzConfig& cfg);

// ---------------------------------------------------------------- Hadamard

struct HadamardConfig {
    std::vector<double> deltas{1e-3, 1e-4, 1e-5};
    double epsilon = -1.0;  // < 0: auto from the mode shape
    double slope_tol = 0.10;
    double budget_factor = 2.0;
    double dt = -1.0;
    int cadence = 2;
    int corrector_sweeps = 0;
    Advection advection = Advection::upwind1;
    std::filesystem::path out_dir;
};

struct HadamardRunRecord {
    double delta = 0.0;
    bool escaped = false;
    double escape_time = 0.0;
    double v_l1 = 0.0, rho_l1 = 0.0;  // at escape (or at the end of budget)
    std::string note;
};

struct HadamardReport {
    double epsilon = 0.0;
    std::vector<HadamardRunRecord> runs;
    double fit_slope = 0.0;
    double inv_lambda = 0.0;
    double rel_err = 0.0;
    bool all_escaped = false;
    bool escape_monotone = false;
    bool config_error = false;
    bool pass = false;
    json to_json() const;
};

HadamardReport experiment_hadamard(const SteadyState& st, const GrowthRateResult& growth,
                                   const HadamardConfig& cfg);

// ---------------------------------------------------------------- stability

struct StabilityConfig {
    double amplitude = 1e-3;
    double horizon_factor = 50.0;  // t_end = factor / (mu * lambda1_scale)
    double decay_target = 0.1;
    double per_step_tol = 1e-10;
    double dt = -1.0;
    int cadence = 8;
    int corrector_sweeps = 2;
    // Initial data is band-limited random (the stability theorem assumes
    // H2 x H1 data; rough data leaves a quasi-static velocity floor slaved
    // to pancake-shaped density modes that relax at rate ~ g^2 kx^2/(mu k^4)).
    int max_mode = 3;
    double rho_amplitude_factor = 0.2;  // |rho(0)|_L2 relative to |V(0)|_H1
    Advection advection = Advection::centered2_with_limiter;
    std::uint64_t seed = 31337;
    std::filesystem::path out_dir;
};

struct StabilityRunRecord {
    std::string mode;  // "linearized" | "nonlinear"
    bool monotone = false;
    double worst_uptick = 0.0;
    double h1_initial = 0.0, h1_final = 0.0, h1_ratio = 0.0;
    bool decay_pass = false;
    double dissipation_ratio = 0.0;  // 2 mu int |grad V|^2 / F(0)
    bool integral_pass = false;
};

struct StabilityReport {
    StabilityClass classification = StabilityClass::Indeterminate;
    double horizon = 0.0;
    double lambda1 = 0.0;
    std::vector<StabilityRunRecord> runs;
    bool pass = false;
    json to_json() const;
};

StabilityReport experiment_stability(const SteadyState& st, const StabilityConfig& cfg);

}  // namespace hydrostab
