#pragma once

/// Brute-force dense authority for small instances: dense assembly of the
/// variational pencil with a direct symmetric generalized eigensolve, a
/// fine-scan growth-rate locator, and a dense direct-solve replica of one
/// linearized time step. Only constructible when the free streamfunction
/// DOF count is at most 4096.

#include <Eigen/Dense>

#include "hydrostab/evolution.hpp"
#include "hydrostab/forms.hpp"

namespace hydrostab {

class DenseOracle {
  public:
    static constexpr int kMaxNodes = 4096;

    explicit DenseOracle(const SteadyState& st);

    /// Top eigenvalue of A(s) psi = alpha M psi by dense eigensolve.
    double phi(double s) const;

    /// Maximizer of the s-problem as a J-normalized trial field.
    TrialField phi_mode(double s) const;

    /// Locates the positive fixed point lambda^2 = phi(lambda) by bisection,
    /// then certifies it with a local scan of H at the given step width.
    double lambda_scan(double scan_step = 1e-6) const;

    /// One linearized predictor step with dense direct solves; the numerical
    /// authority for step_linearized with corrector_sweeps = 0.
    PerturbationState linstep(const PerturbationState& state, double dt) const;

    const AssembledForms& forms() const { return forms_; }
    double upper_bound() const { return forms_.upper_bound; }

  private:
    const SteadyState& state_;
    AssembledForms forms_;
    Eigen::MatrixXd M_;
};

}  // namespace hydrostab
