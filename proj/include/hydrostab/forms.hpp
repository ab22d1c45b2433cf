#pragma once

/// Quadratic forms of the variational problem over the divergence-free
/// trial space, both as direct field evaluations and as sparse matrices in
/// clamped-streamfunction variables:
///   E1(u) = |grad u|^2 with no-slip wall ghost differences (summation-by-
///           parts pair of the stepper's vector Laplacian),
///   E2(u) = sum_cells h ((u . grad f)_c)^2,
///   J(u)  = sum_faces rho0_face |u|^2,
///   E(u,s) = -s mu E1(u) + E2(u).

#include <Eigen/Sparse>

#include "hydrostab/field_ops.hpp"
#include "hydrostab/steady_state.hpp"

namespace hydrostab {

using SpMat = Eigen::SparseMatrix<double>;

struct EnergyForms {
    double e1 = 0.0;
    double e2 = 0.0;
    double j = 0.0;
    double e = 0.0;
};

double e1_form(const VectorField& u);
double e2_form(const SteadyState& st, const VectorField& u);
double j_form(const SteadyState& st, const VectorField& u);
EnergyForms energy_forms(const SteadyState& st, const VectorField& u, double s);

/// (V . grad f) at cell centers, the density-equation coupling term.
ScalarField advective_source(const SteadyState& st, const VectorField& V);

/// Face force adjoint to advective_source: <force, w> = sum_c rho (w.grad f)_c.
/// Wall-normal faces carry zero (no-slip rows are never forced).
VectorField buoyancy_force(const SteadyState& st, const ScalarField& rho_cell);

struct TrialField {
    ScalarField psi;       // node, clamped
    VectorField velocity;  // curl of psi
    double j_value = 0.0;
    bool normalized = false;
};

TrialField make_trial_field(const SteadyState& st, ScalarField psi, bool normalize = false);

/// Free streamfunction DOFs: nodes with i in [2, nx-2], j in [2, ny-2]
/// (the clamped two-ring boundary is eliminated).
struct PsiIndexMap {
    Grid grid;
    int ni = 0, nj = 0;

    explicit PsiIndexMap(const Grid& g)
        : grid(g), ni(g.nx - 3), nj(g.ny - 3) {}
    int size() const { return ni * nj; }
    int index(int i, int j) const { return (i - 2) * nj + (j - 2); }
};

struct AssembledForms {
    PsiIndexMap map;
    SpMat K;  // E1
    SpMat G;  // E2
    SpMat M;  // J
    double upper_bound = 0.0;      // signed max of (h/rho0)|grad f|^2 over cells
    double upper_bound_abs = 0.0;  // max |h/rho0| |grad f|^2

    SpMat a_matrix(double s, double mu) const;
};

AssembledForms assemble_forms(const SteadyState& st);

ScalarField psi_from_vector(const PsiIndexMap& map, const Eigen::VectorXd& x);
Eigen::VectorXd vector_from_psi(const PsiIndexMap& map, const ScalarField& psi);

}  // namespace hydrostab
