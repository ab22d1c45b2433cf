#pragma once

/// The modified variational method: Phi(s) as the top eigenvalue of the
/// generalized symmetric pencil A(s) psi = alpha M psi in clamped
/// streamfunction variables, and the growth rate as the unique fixed point
/// Lambda^2 = Phi(Lambda) located by bracketed bisection with secant steps.

#include <optional>

#include "hydrostab/forms.hpp"

namespace hydrostab {

struct EigOptions {
    double eig_tol = 1e-10;  // relative eigen-residual
    int max_iter = 10000;
    std::uint64_t seed = 0x5eedbeefcafe1234ull;
};

struct PhiEvaluation {
    double s = 0.0;
    double phi = 0.0;
    TrialField maximizer;
    int iterations = 0;
    double residual = 0.0;
    double degeneracy_gap = 0.0;  // alpha1 - alpha2 estimate
    double upper_bound = 0.0;     // signed cell max of (h/rho0)|grad f|^2
};

struct PhiSweepResult {
    std::vector<PhiEvaluation> evaluations;
    bool monotone_ok = true;
    bool lipschitz_ok = true;
    double lipschitz_constant = 0.0;  // M~ from the computed values
    std::string message;
};

struct GrowthRateResult {
    double lambda = 0.0;
    TrialField mode_u;
    ScalarField mode_theta;  // cell
    double fixed_point_residual = 0.0;
    std::pair<double, double> bisection_interval{0.0, 0.0};
    double upper_bound = 0.0;
    int phi_evaluations = 0;
    double eig_residual = 0.0;
    double degeneracy_gap = 0.0;
};

struct GrowthRateOptions {
    double bracket_lo = 1e-6;
    double bracket_hi = -1.0;  // < 0: sqrt(max(upper_bound,0)) + 1
    double fp_tol = -1.0;      // < 0: 1e-8 * Lambda^2
    int max_bisection = 200;
    EigOptions eig;
};

/// Caches the assembled forms so sweeps and the bisection reuse them, and
/// warm-starts each eigensolve from the previous maximizer.
class VariationalSolver {
  public:
    explicit VariationalSolver(const SteadyState& st);

    PhiEvaluation phi(double s, const EigOptions& opts = {});
    const AssembledForms& forms() const { return forms_; }
    const SteadyState& state() const { return state_; }
    void reset_warm_start() { has_warm_ = false; }

  private:
    const SteadyState& state_;
    AssembledForms forms_;
    Eigen::VectorXd warm_;
    bool has_warm_ = false;
};

PhiEvaluation phi(const SteadyState& st, double s, const EigOptions& opts = {});

PhiSweepResult phi_sweep(const SteadyState& st, const std::vector<double>& s_values,
                         const EigOptions& opts = {});

GrowthRateResult solve_growth_rate(const SteadyState& st, const GrowthRateOptions& opts = {});

struct RayleighCheckReport {
    int trials = 0;
    int violations = 0;
    double min_slack = 0.0;   // over random fields, J-normalized
    double mode_slack = 0.0;  // at u0 (equality case)
    double tolerance = 0.0;
};

RayleighCheckReport rayleigh_inequality_check(const SteadyState& st,
                                              const GrowthRateResult& result, int trials,
                                              std::uint64_t seed, double tolerance = 1e-8);

/// theta0 = -(u . grad rho0)/lambda with grad rho0 = h grad f at cell centers.
ScalarField density_mode(const SteadyState& st, const VectorField& u, double lambda);

}  // namespace hydrostab
