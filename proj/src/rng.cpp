#include "hydrostab/rng.hpp"

#include "hydrostab/field_ops.hpp"

namespace hydrostab {

namespace {

void jacobi_smooth(ScalarField& f, int passes, bool keep_clamp) {
    const int R = f.rows(), C = f.cols();
    for (int p = 0; p < passes; ++p) {
        ScalarField old = f;
        for (int i = 1; i + 1 < R; ++i)
            for (int j = 1; j + 1 < C; ++j)
                f.at(i, j) = 0.2 * (old.at(i, j) + old.at(i - 1, j) + old.at(i + 1, j) +
                                    old.at(i, j - 1) + old.at(i, j + 1));
        if (keep_clamp) clamp_boundary(f);
    }
}

}  // namespace

ScalarField random_clamped_psi(const Grid& g, Rng& rng, int smooth_passes) {
    ScalarField psi(g, Placement::node);
    for (int i = 2; i <= g.nx - 2; ++i)
        for (int j = 2; j <= g.ny - 2; ++j)
            psi.at(i, j) = rng.uniform(-1.0, 1.0);
    clamp_boundary(psi);
    jacobi_smooth(psi, smooth_passes, true);
    return psi;
}

ScalarField random_smooth_cell(const Grid& g, Rng& rng, int smooth_passes) {
    ScalarField f(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            f.at(i, j) = rng.uniform(-1.0, 1.0);
    jacobi_smooth(f, smooth_passes, false);
    return f;
}

ScalarField random_lowmode_psi(const Grid& g, Rng& rng, int max_mode) {
    const double pi = 3.14159265358979323846;
    std::vector<double> coef(static_cast<size_t>(max_mode) * max_mode);
    for (double& c : coef) c = rng.uniform(-1.0, 1.0);
    ScalarField psi(g, Placement::node);
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j) {
            const double x = g.node_x(i) / g.length_x, y = g.node_y(j) / g.length_y;
            const double ex = std::sin(pi * x), ey = std::sin(pi * y);
            double s = 0.0;
            for (int m = 1; m <= max_mode; ++m)
                for (int n = 1; n <= max_mode; ++n)
                    s += coef[(m - 1) * max_mode + (n - 1)] * std::sin(m * pi * x) *
                         std::sin(n * pi * y);
            psi.at(i, j) = s * ex * ex * ey * ey;
        }
    clamp_boundary(psi);
    return psi;
}

ScalarField random_lowmode_cell(const Grid& g, Rng& rng, int max_mode) {
    const double pi = 3.14159265358979323846;
    const int nm = max_mode + 1;
    std::vector<double> coef(static_cast<size_t>(nm) * nm);
    for (double& c : coef) c = rng.uniform(-1.0, 1.0);
    coef[0] = 0.0;  // drop the constant mode
    ScalarField f(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double x = g.cell_x(i) / g.length_x, y = g.cell_y(j) / g.length_y;
            double s = 0.0;
            for (int m = 0; m <= max_mode; ++m)
                for (int n = 0; n <= max_mode; ++n)
                    s += coef[m * nm + n] * std::cos(m * pi * x) * std::cos(n * pi * y);
            f.at(i, j) = s;
        }
    return f;
}

}  // namespace hydrostab
