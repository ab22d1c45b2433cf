#include "hydrostab/field_ops.hpp"

#include <cmath>

namespace hydrostab {

ScalarField divergence(const VectorField& vf) {
    require_same_grid(vf.u.grid(), vf.v.grid(), "divergence");
    require_placement(vf.u, Placement::x_face, "divergence");
    require_placement(vf.v, Placement::y_face, "divergence");
    const Grid& g = vf.grid();
    ScalarField out(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            out.at(i, j) = (vf.u.at(i + 1, j) - vf.u.at(i, j)) / g.hx +
                           (vf.v.at(i, j + 1) - vf.v.at(i, j)) / g.hy;
    return out;
}

bool is_clamped(const ScalarField& psi) {
    if (psi.placement() != Placement::node) return false;
    const Grid& g = psi.grid();
    for (int i = 0; i <= g.nx; ++i) {
        if (psi.at(i, 0) != 0.0 || psi.at(i, 1) != 0.0) return false;
        if (psi.at(i, g.ny) != 0.0 || psi.at(i, g.ny - 1) != 0.0) return false;
    }
    for (int j = 0; j <= g.ny; ++j) {
        if (psi.at(0, j) != 0.0 || psi.at(1, j) != 0.0) return false;
        if (psi.at(g.nx, j) != 0.0 || psi.at(g.nx - 1, j) != 0.0) return false;
    }
    return true;
}

void clamp_boundary(ScalarField& psi) {
    require_placement(psi, Placement::node, "clamp_boundary");
    const Grid& g = psi.grid();
    for (int i = 0; i <= g.nx; ++i) {
        psi.at(i, 0) = psi.at(i, 1) = 0.0;
        psi.at(i, g.ny) = psi.at(i, g.ny - 1) = 0.0;
    }
    for (int j = 0; j <= g.ny; ++j) {
        psi.at(0, j) = psi.at(1, j) = 0.0;
        psi.at(g.nx, j) = psi.at(g.nx - 1, j) = 0.0;
    }
}

VectorField curl_streamfunction(const ScalarField& psi) {
    require_placement(psi, Placement::node, "curl_streamfunction");
    if (!is_clamped(psi))
        throw StructuralError("curl_streamfunction: psi is not clamped at the boundary");
    const Grid& g = psi.grid();
    VectorField out(g);
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            out.u.at(i, j) = (psi.at(i, j + 1) - psi.at(i, j)) / g.hy;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j)
            out.v.at(i, j) = -(psi.at(i + 1, j) - psi.at(i, j)) / g.hx;
    return out;
}

VectorField gradient(const ScalarField& sf) {
    const Grid& g = sf.grid();
    VectorField out(g);
    if (sf.placement() == Placement::cell) {
        for (int i = 1; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                out.u.at(i, j) = (sf.at(i, j) - sf.at(i - 1, j)) / g.hx;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 1; j < g.ny; ++j)
                out.v.at(i, j) = (sf.at(i, j) - sf.at(i, j - 1)) / g.hy;
        // Neumann ghosts leave the wall-face entries at zero.
        return out;
    }
    if (sf.placement() == Placement::node) {
        // Averaged centered differences, one-sided at walls; exact for linears.
        for (int i = 0; i <= g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                double da, db;
                if (i == 0) {
                    da = (sf.at(1, j) - sf.at(0, j)) / g.hx;
                    db = (sf.at(1, j + 1) - sf.at(0, j + 1)) / g.hx;
                } else if (i == g.nx) {
                    da = (sf.at(g.nx, j) - sf.at(g.nx - 1, j)) / g.hx;
                    db = (sf.at(g.nx, j + 1) - sf.at(g.nx - 1, j + 1)) / g.hx;
                } else {
                    da = (sf.at(i + 1, j) - sf.at(i - 1, j)) / (2.0 * g.hx);
                    db = (sf.at(i + 1, j + 1) - sf.at(i - 1, j + 1)) / (2.0 * g.hx);
                }
                out.u.at(i, j) = 0.5 * (da + db);
            }
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j <= g.ny; ++j) {
                double da, db;
                if (j == 0) {
                    da = (sf.at(i, 1) - sf.at(i, 0)) / g.hy;
                    db = (sf.at(i + 1, 1) - sf.at(i + 1, 0)) / g.hy;
                } else if (j == g.ny) {
                    da = (sf.at(i, g.ny) - sf.at(i, g.ny - 1)) / g.hy;
                    db = (sf.at(i + 1, g.ny) - sf.at(i + 1, g.ny - 1)) / g.hy;
                } else {
                    da = (sf.at(i, j + 1) - sf.at(i, j - 1)) / (2.0 * g.hy);
                    db = (sf.at(i + 1, j + 1) - sf.at(i + 1, j - 1)) / (2.0 * g.hy);
                }
                out.v.at(i, j) = 0.5 * (da + db);
            }
        return out;
    }
    throw StructuralError("gradient: unsupported placement " + placement_name(sf.placement()));
}

ScalarField laplacian(const ScalarField& sf) {
    const Grid& g = sf.grid();
    const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);
    if (sf.placement() == Placement::cell) {
        ScalarField out(g, Placement::cell);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const double c = sf.at(i, j);
                const double xl = (i > 0) ? sf.at(i - 1, j) : c;
                const double xr = (i < g.nx - 1) ? sf.at(i + 1, j) : c;
                const double yl = (j > 0) ? sf.at(i, j - 1) : c;
                const double yr = (j < g.ny - 1) ? sf.at(i, j + 1) : c;
                out.at(i, j) = (xr - 2.0 * c + xl) * ihx2 + (yr - 2.0 * c + yl) * ihy2;
            }
        return out;
    }
    if (sf.placement() == Placement::node) {
        ScalarField out(g, Placement::node);
        for (int i = 1; i < g.nx; ++i)
            for (int j = 1; j < g.ny; ++j)
                out.at(i, j) = (sf.at(i + 1, j) - 2.0 * sf.at(i, j) + sf.at(i - 1, j)) * ihx2 +
                               (sf.at(i, j + 1) - 2.0 * sf.at(i, j) + sf.at(i, j - 1)) * ihy2;
        return out;
    }
    throw StructuralError("laplacian: unsupported placement " + placement_name(sf.placement()));
}

VectorField vector_laplacian(const VectorField& vf) {
    const Grid& g = vf.grid();
    VectorField out(g);
    const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double c = vf.u.at(i, j);
            const double xx = (vf.u.at(i + 1, j) - 2.0 * c + vf.u.at(i - 1, j)) * ihx2;
            // no-slip walls at j ends: ghost = -interior
            const double yl = (j > 0) ? vf.u.at(i, j - 1) : -c;
            const double yr = (j < g.ny - 1) ? vf.u.at(i, j + 1) : -c;
            out.u.at(i, j) = xx + (yr - 2.0 * c + yl) * ihy2;
        }
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j) {
            const double c = vf.v.at(i, j);
            const double yy = (vf.v.at(i, j + 1) - 2.0 * c + vf.v.at(i, j - 1)) * ihy2;
            const double xl = (i > 0) ? vf.v.at(i - 1, j) : -c;
            const double xr = (i < g.nx - 1) ? vf.v.at(i + 1, j) : -c;
            out.v.at(i, j) = yy + (xr - 2.0 * c + xl) * ihx2;
        }
    return out;
}

double quadrature_weight(const Grid& g, Placement p, int i, int j) {
    const double a = g.hx * g.hy;
    switch (p) {
        case Placement::cell: return a;
        case Placement::x_face: return (i == 0 || i == g.nx) ? 0.5 * a : a;
        case Placement::y_face: return (j == 0 || j == g.ny) ? 0.5 * a : a;
        case Placement::node: {
            double w = 1.0;
            if (i == 0 || i == g.nx) w *= 0.5;
            if (j == 0 || j == g.ny) w *= 0.5;
            return w * a;
        }
    }
    return a;
}

namespace {

double weight_at(const ScalarField* w, Placement p, const Grid& g, int i, int j) {
    if (!w) return 1.0;
    switch (p) {
        case Placement::cell: return w->at(i, j);
        case Placement::x_face: {
            if (i == 0) return w->at(0, j);
            if (i == g.nx) return w->at(g.nx - 1, j);
            return 0.5 * (w->at(i - 1, j) + w->at(i, j));
        }
        case Placement::y_face: {
            if (j == 0) return w->at(i, 0);
            if (j == g.ny) return w->at(i, g.ny - 1);
            return 0.5 * (w->at(i, j - 1) + w->at(i, j));
        }
        case Placement::node: {
            const int i0 = (i > 0) ? i - 1 : 0, i1 = (i < g.nx) ? i : g.nx - 1;
            const int j0 = (j > 0) ? j - 1 : 0, j1 = (j < g.ny) ? j : g.ny - 1;
            return 0.25 * (w->at(i0, j0) + w->at(i0, j1) + w->at(i1, j0) + w->at(i1, j1));
        }
    }
    return 1.0;
}

}  // namespace

double inner_product(const ScalarField& a, const ScalarField& b, const ScalarField* weight) {
    require_same_grid(a.grid(), b.grid(), "inner_product");
    if (a.placement() != b.placement())
        throw StructuralError("inner_product: placement mismatch");
    if (weight) require_placement(*weight, Placement::cell, "inner_product weight");
    const Grid& g = a.grid();
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            s += weight_at(weight, a.placement(), g, i, j) * a.at(i, j) * b.at(i, j) *
                 quadrature_weight(g, a.placement(), i, j);
    return s;
}

double inner_product(const VectorField& a, const VectorField& b, const ScalarField* weight) {
    return inner_product(a.u, b.u, weight) + inner_product(a.v, b.v, weight);
}

ScalarField cell_to_x_face(const ScalarField& c) {
    require_placement(c, Placement::cell, "cell_to_x_face");
    const Grid& g = c.grid();
    ScalarField out(g, Placement::x_face);
    for (int j = 0; j < g.ny; ++j) {
        out.at(0, j) = c.at(0, j);
        out.at(g.nx, j) = c.at(g.nx - 1, j);
        for (int i = 1; i < g.nx; ++i) out.at(i, j) = 0.5 * (c.at(i - 1, j) + c.at(i, j));
    }
    return out;
}

ScalarField cell_to_y_face(const ScalarField& c) {
    require_placement(c, Placement::cell, "cell_to_y_face");
    const Grid& g = c.grid();
    ScalarField out(g, Placement::y_face);
    for (int i = 0; i < g.nx; ++i) {
        out.at(i, 0) = c.at(i, 0);
        out.at(i, g.ny) = c.at(i, g.ny - 1);
        for (int j = 1; j < g.ny; ++j) out.at(i, j) = 0.5 * (c.at(i, j - 1) + c.at(i, j));
    }
    return out;
}

void vector_at_cells(const VectorField& vf, ScalarField& uc, ScalarField& vc) {
    const Grid& g = vf.grid();
    uc = ScalarField(g, Placement::cell);
    vc = ScalarField(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            uc.at(i, j) = 0.5 * (vf.u.at(i, j) + vf.u.at(i + 1, j));
            vc.at(i, j) = 0.5 * (vf.v.at(i, j) + vf.v.at(i, j + 1));
        }
}

double norm_l1(const ScalarField& f) {
    const Grid& g = f.grid();
    double s = 0.0;
    for (int i = 0; i < f.rows(); ++i)
        for (int j = 0; j < f.cols(); ++j)
            s += std::abs(f.at(i, j)) * quadrature_weight(g, f.placement(), i, j);
    return s;
}

double norm_l2(const ScalarField& f) { return std::sqrt(inner_product(f, f)); }

double norm_l1(const VectorField& f) { return norm_l1(f.u) + norm_l1(f.v); }

double norm_l2(const VectorField& f) { return std::sqrt(inner_product(f, f)); }

double grad_norm_sq(const VectorField& f) {
    const Grid& g = f.grid();
    const double a = g.hx * g.hy;
    double s = 0.0;
    // du/dx at cells
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double d = (f.u.at(i + 1, j) - f.u.at(i, j)) / g.hx;
            s += d * d * a;
        }
    // du/dy at node rows; wall rows carry the no-slip ghost difference 2u/hy
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j) {
            double d;
            if (j == 0)
                d = 2.0 * f.u.at(i, 0) / g.hy;
            else if (j == g.ny)
                d = -2.0 * f.u.at(i, g.ny - 1) / g.hy;
            else
                d = (f.u.at(i, j) - f.u.at(i, j - 1)) / g.hy;
            s += d * d * a;
        }
    // dv/dy at cells
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double d = (f.v.at(i, j + 1) - f.v.at(i, j)) / g.hy;
            s += d * d * a;
        }
    // dv/dx at node columns
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j) {
            double d;
            if (i == 0)
                d = 2.0 * f.v.at(0, j) / g.hx;
            else if (i == g.nx)
                d = -2.0 * f.v.at(g.nx - 1, j) / g.hx;
            else
                d = (f.v.at(i, j) - f.v.at(i - 1, j)) / g.hx;
            s += d * d * a;
        }
    return s;
}

double norm_h1(const VectorField& f) {
    return std::sqrt(inner_product(f, f) + grad_norm_sq(f));
}

namespace {

// Sum of squared k-th differences along both axes, one-sided rows included.
double diff_sq_sum(const ScalarField& f, int order) {
    const Grid& g = f.grid();
    const double a = g.hx * g.hy;
    double s = 0.0;
    const int R = f.rows(), C = f.cols();
    if (order == 1) {
        for (int i = 0; i + 1 < R; ++i)
            for (int j = 0; j < C; ++j) {
                const double d = (f.at(i + 1, j) - f.at(i, j)) / g.hx;
                s += d * d * a;
            }
        for (int i = 0; i < R; ++i)
            for (int j = 0; j + 1 < C; ++j) {
                const double d = (f.at(i, j + 1) - f.at(i, j)) / g.hy;
                s += d * d * a;
            }
    } else {
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < C; ++j) {
                const int ic = std::min(std::max(i, 1), R - 2);
                const double dxx =
                    (f.at(ic + 1, j) - 2.0 * f.at(ic, j) + f.at(ic - 1, j)) / (g.hx * g.hx);
                const int jc = std::min(std::max(j, 1), C - 2);
                const double dyy =
                    (f.at(i, jc + 1) - 2.0 * f.at(i, jc) + f.at(i, jc - 1)) / (g.hy * g.hy);
                s += (dxx * dxx + dyy * dyy) * a;
            }
    }
    return s;
}

}  // namespace

double norm_h2(const VectorField& f) {
    double s = inner_product(f, f);
    s += diff_sq_sum(f.u, 1) + diff_sq_sum(f.v, 1);
    s += diff_sq_sum(f.u, 2) + diff_sq_sum(f.v, 2);
    return std::sqrt(s);
}

double norm_h1(const ScalarField& f) {
    return std::sqrt(inner_product(f, f) + diff_sq_sum(f, 1));
}

}  // namespace hydrostab
