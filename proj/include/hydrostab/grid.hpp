#pragma once

/// Rectangular MAC-staggered grid and the scalar/vector fields living on it.
///
/// Layout on [0,Lx] x [0,Ly] with nx*ny cells:
///   cell scalars  at ((i+1/2)hx, (j+1/2)hy), shape nx     x ny
///   nodes         at (i hx, j hy),           shape (nx+1) x (ny+1)
///   u (x-faces)   at (i hx, (j+1/2)hy),      shape (nx+1) x ny
///   v (y-faces)   at ((i+1/2)hx, j hy),      shape nx     x (ny+1)
/// Storage is row-major with i (the x index) as the slow dimension.

#include <cstdint>
#include <string>
#include <vector>

#include "hydrostab/errors.hpp"

namespace hydrostab {

enum class Placement : std::uint32_t { cell = 0, node = 1, x_face = 2, y_face = 3 };

std::string placement_name(Placement p);

struct Grid {
    double length_x = 1.0;
    double length_y = 1.0;
    int nx = 4;
    int ny = 4;
    double hx = 0.25;
    double hy = 0.25;

    static constexpr long kDefaultCellCap = 1'048'576;

    Grid() = default;
    Grid(double lx, double ly, int nx_, int ny_, long cell_cap = kDefaultCellCap);

    bool operator==(const Grid& o) const {
        return length_x == o.length_x && length_y == o.length_y && nx == o.nx && ny == o.ny;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

    int rows(Placement p) const;
    int cols(Placement p) const;

    double cell_x(int i) const { return (i + 0.5) * hx; }
    double cell_y(int j) const { return (j + 0.5) * hy; }
    double node_x(int i) const { return i * hx; }
    double node_y(int j) const { return j * hy; }
    double cell_area() const { return hx * hy; }
};

class ScalarField {
  public:
    ScalarField() = default;
    ScalarField(const Grid& g, Placement p, double init = 0.0);

    double& at(int i, int j) { return values_[static_cast<size_t>(i) * cols_ + j]; }
    double at(int i, int j) const { return values_[static_cast<size_t>(i) * cols_ + j]; }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Placement placement() const { return placement_; }
    const Grid& grid() const { return grid_; }

    std::vector<double>& data() { return values_; }
    const std::vector<double>& data() const { return values_; }

    bool all_finite() const;
    double max_abs() const;
    double min_value() const;
    double max_value() const;

    void fill(double v);

  private:
    Grid grid_;
    Placement placement_ = Placement::cell;
    int rows_ = 0, cols_ = 0;
    std::vector<double> values_;
};

struct VectorField {
    ScalarField u;  // x_face
    ScalarField v;  // y_face

    VectorField() = default;
    explicit VectorField(const Grid& g)
        : u(g, Placement::x_face), v(g, Placement::y_face) {}

    const Grid& grid() const { return u.grid(); }
    double max_abs() const;
    /// Zero out the wall-normal boundary faces (no-slip normal component).
    void impose_no_slip();
    bool boundary_faces_zero(double tol = 0.0) const;
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);
void require_placement(const ScalarField& f, Placement p, const char* what);

}  // namespace hydrostab
