#pragma once

/// Second-order staggered finite-difference operators and quadrature.
///
/// Conventions fixed for bit-reproducibility:
///  - divergence, gradients, Laplacians use the standard MAC stencils;
///  - no-slip velocity uses reflecting ghosts (ghost = -interior);
///  - cell scalars use homogeneous Neumann ghosts (ghost = interior);
///  - quadrature is the midpoint rule, with half weights on the wall rows of
///    face fields and trapezoid weights on node fields so that constants
///    integrate to the domain area exactly;
///  - all reductions run in a fixed row-major order.

#include "hydrostab/grid.hpp"

namespace hydrostab {

/// Staggered divergence: (u_{i+1,j}-u_{i,j})/hx + (v_{i,j+1}-v_{i,j})/hy per cell.
ScalarField divergence(const VectorField& vf);

/// Velocity of a node streamfunction: u = d(psi)/dy, v = -d(psi)/dx on faces.
/// psi must be clamped: zero on the two outermost node rings (value and
/// one-sided normal difference both vanish on the boundary).
VectorField curl_streamfunction(const ScalarField& psi);

/// True iff the two outermost node rings are exactly zero.
bool is_clamped(const ScalarField& psi);

/// Zero the two outermost node rings in place.
void clamp_boundary(ScalarField& psi);

/// Gradient of a cell or node scalar, returned on faces.
VectorField gradient(const ScalarField& sf);

/// Five-point Laplacian of a cell scalar (Neumann ghosts) or node scalar
/// (interior nodes only; boundary rows are left zero).
ScalarField laplacian(const ScalarField& sf);

/// Componentwise vector Laplacian with no-slip ghosts; boundary faces stay 0.
VectorField vector_laplacian(const VectorField& vf);

/// Quadrature weight of one sample of a field with the stated placement.
double quadrature_weight(const Grid& g, Placement p, int i, int j);

/// Midpoint-rule inner product sum w * a * b * (quadrature weight); the
/// optional weight is cell-centered and is averaged onto faces/nodes.
double inner_product(const ScalarField& a, const ScalarField& b,
                     const ScalarField* weight = nullptr);
double inner_product(const VectorField& a, const VectorField& b,
                     const ScalarField* weight = nullptr);

/// Interpolations between placements (arithmetic averaging).
ScalarField cell_to_x_face(const ScalarField& c);
ScalarField cell_to_y_face(const ScalarField& c);
/// Cell-centered samples of a face vector field (averages the two faces).
void vector_at_cells(const VectorField& vf, ScalarField& uc, ScalarField& vc);

/// Norms used by diagnostics and experiments.
double norm_l1(const ScalarField& f);
double norm_l2(const ScalarField& f);
double norm_l1(const VectorField& f);
double norm_l2(const VectorField& f);
/// H^1-seminorm squared of a no-slip velocity field; summation-by-parts
/// compatible with vector_laplacian (includes the wall ghost differences).
double grad_norm_sq(const VectorField& f);
double norm_h1(const VectorField& f);
/// Discrete H^2 norm (value + first + second differences, one-sided at walls)
/// of a velocity field, and H^1 norm of a cell scalar, for the combined
/// perturbation norm sqrt(|u|_H2^2 + |theta|_H1^2).
double norm_h2(const VectorField& f);
double norm_h1(const ScalarField& f);

}  // namespace hydrostab
