#include "hydrostab/grid.hpp"

#include <cmath>
#include <limits>

namespace hydrostab {

std::string placement_name(Placement p) {
    switch (p) {
        case Placement::cell: return "cell";
        case Placement::node: return "node";
        case Placement::x_face: return "x_face";
        case Placement::y_face: return "y_face";
    }
    return "?";
}

Grid::Grid(double lx, double ly, int nx_, int ny_, long cell_cap)
    : length_x(lx), length_y(ly), nx(nx_), ny(ny_) {
    if (!(lx > 0.0) || !(ly > 0.0))
        throw StructuralError("grid: domain lengths must be positive");
    if (nx < 4 || ny < 4)
        throw StructuralError("grid: nx and ny must be >= 4");
    if (static_cast<long>(nx) * ny > cell_cap)
        throw StructuralError("grid: cell count " + std::to_string(static_cast<long>(nx) * ny) +
                              " exceeds cap " + std::to_string(cell_cap));
    hx = length_x / nx;
    hy = length_y / ny;
}

int Grid::rows(Placement p) const {
    switch (p) {
        case Placement::cell: return nx;
        case Placement::node: return nx + 1;
        case Placement::x_face: return nx + 1;
        case Placement::y_face: return nx;
    }
    return 0;
}

int Grid::cols(Placement p) const {
    switch (p) {
        case Placement::cell: return ny;
        case Placement::node: return ny + 1;
        case Placement::x_face: return ny;
        case Placement::y_face: return ny + 1;
    }
    return 0;
}

ScalarField::ScalarField(const Grid& g, Placement p, double init)
    : grid_(g), placement_(p), rows_(g.rows(p)), cols_(g.cols(p)),
      values_(static_cast<size_t>(rows_) * cols_, init) {}

bool ScalarField::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double ScalarField::min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::min(m, v);
    return m;
}

double ScalarField::max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : values_) m = std::max(m, v);
    return m;
}

void ScalarField::fill(double v) {
    for (double& x : values_) x = v;
}

double VectorField::max_abs() const {
    return std::max(u.max_abs(), v.max_abs());
}

void VectorField::impose_no_slip() {
    const Grid& g = u.grid();
    for (int j = 0; j < g.ny; ++j) {
        u.at(0, j) = 0.0;
        u.at(g.nx, j) = 0.0;
    }
    for (int i = 0; i < g.nx; ++i) {
        v.at(i, 0) = 0.0;
        v.at(i, g.ny) = 0.0;
    }
}

bool VectorField::boundary_faces_zero(double tol) const {
    const Grid& g = u.grid();
    for (int j = 0; j < g.ny; ++j)
        if (std::abs(u.at(0, j)) > tol || std::abs(u.at(g.nx, j)) > tol) return false;
    for (int i = 0; i < g.nx; ++i)
        if (std::abs(v.at(i, 0)) > tol || std::abs(v.at(i, g.ny)) > tol) return false;
    return true;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (a != b)
        throw StructuralError(std::string(what) + ": fields live on different grids");
}

void require_placement(const ScalarField& f, Placement p, const char* what) {
    if (f.placement() != p)
        throw StructuralError(std::string(what) + ": expected " + placement_name(p) +
                              " field, got " + placement_name(f.placement()));
}

}  // namespace hydrostab
