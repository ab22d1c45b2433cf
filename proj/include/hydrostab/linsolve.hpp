#pragma once

/// Conjugate-gradient solver for the SPD systems in the toolkit (implicit
/// diffusion, variable-coefficient pressure Poisson, hydrostatic pressure).
/// Reductions run in fixed order; results are deterministic.

#include <functional>
#include <vector>

namespace hydrostab {

struct CgOptions {
    double tol_rel = 1e-10;
    double tol_abs = 0.0;
    int max_iter = 10000;
};

struct CgResult {
    int iterations = 0;
    double residual = 0.0;  // final |r|_2
    bool converged = false;
};

using ApplyFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;
using ProjectFn = std::function<void(std::vector<double>&)>;

/// Solves A x = b. `project`, when given, is applied to b, to x, and to every
/// residual update (used to remove the constant nullspace of the Neumann
/// pressure operator). `inv_diag` enables Jacobi preconditioning.
CgResult conjugate_gradient(const ApplyFn& apply, const std::vector<double>& b,
                            std::vector<double>& x, const CgOptions& opt,
                            const std::vector<double>* inv_diag = nullptr,
                            const ProjectFn* project = nullptr);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
void subtract_mean(std::vector<double>& v);

}  // namespace hydrostab
