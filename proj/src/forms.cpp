#include "hydrostab/forms.hpp"

#include <cmath>
#include <vector>

namespace hydrostab {

double e1_form(const VectorField& u) { return grad_norm_sq(u); }

double e2_form(const SteadyState& st, const VectorField& u) {
    require_same_grid(st.grid, u.grid(), "e2_form");
    const Grid& g = st.grid;
    double s = 0.0;
    const double a = g.hx * g.hy;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double uc = 0.5 * (u.u.at(i, j) + u.u.at(i + 1, j));
            const double vc = 0.5 * (u.v.at(i, j) + u.v.at(i, j + 1));
            const double d = uc * st.fx_c.at(i, j) + vc * st.fy_c.at(i, j);
            s += st.h.at(i, j) * d * d * a;
        }
    return s;
}

double j_form(const SteadyState& st, const VectorField& u) {
    require_same_grid(st.grid, u.grid(), "j_form");
    return inner_product(u, u, &st.rho0);
}

EnergyForms energy_forms(const SteadyState& st, const VectorField& u, double s) {
    EnergyForms f;
    f.e1 = e1_form(u);
    f.e2 = e2_form(st, u);
    f.j = j_form(st, u);
    f.e = -s * st.mu * f.e1 + f.e2;
    return f;
}

ScalarField advective_source(const SteadyState& st, const VectorField& V) {
    const Grid& g = st.grid;
    ScalarField out(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double uc = 0.5 * (V.u.at(i, j) + V.u.at(i + 1, j));
            const double vc = 0.5 * (V.v.at(i, j) + V.v.at(i, j + 1));
            out.at(i, j) = uc * st.fx_c.at(i, j) + vc * st.fy_c.at(i, j);
        }
    return out;
}

VectorField buoyancy_force(const SteadyState& st, const ScalarField& rho_cell) {
    const Grid& g = st.grid;
    VectorField out(g);
    // cell values rho * grad f averaged back onto interior faces
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            out.u.at(i, j) = 0.5 * (rho_cell.at(i - 1, j) * st.fx_c.at(i - 1, j) +
                                    rho_cell.at(i, j) * st.fx_c.at(i, j));
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j)
            out.v.at(i, j) = 0.5 * (rho_cell.at(i, j - 1) * st.fy_c.at(i, j - 1) +
                                    rho_cell.at(i, j) * st.fy_c.at(i, j));
    return out;
}

TrialField make_trial_field(const SteadyState& st, ScalarField psi, bool normalize) {
    TrialField t;
    t.velocity = curl_streamfunction(psi);
    t.psi = std::move(psi);
    t.j_value = j_form(st, t.velocity);
    if (normalize) {
        if (!(t.j_value > 0.0))
            throw DomainError("cannot normalize a trial field with J(u) = 0");
        const double scale = 1.0 / std::sqrt(t.j_value);
        for (double& v : t.psi.data()) v *= scale;
        for (double& v : t.velocity.u.data()) v *= scale;
        for (double& v : t.velocity.v.data()) v *= scale;
        t.j_value = j_form(st, t.velocity);
        t.normalized = true;
    }
    return t;
}

SpMat AssembledForms::a_matrix(double s, double mu) const {
    return SpMat((-(s * mu)) * K + G);
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Sparse curl from free psi DOFs to the stacked face vector [u; v].
SpMat build_curl(const PsiIndexMap& map, int nu) {
    const Grid& g = map.grid;
    const int nv = g.nx * (g.ny + 1);
    auto uid = [&](int i, int j) { return i * g.ny + j; };
    auto vid = [&](int i, int j) { return nu + i * (g.ny + 1) + j; };
    std::vector<Triplet> trip;
    trip.reserve(static_cast<size_t>(map.size()) * 4);
    for (int i = 2; i <= g.nx - 2; ++i)
        for (int j = 2; j <= g.ny - 2; ++j) {
            const int col = map.index(i, j);
            trip.emplace_back(uid(i, j - 1), col, 1.0 / g.hy);
            trip.emplace_back(uid(i, j), col, -1.0 / g.hy);
            trip.emplace_back(vid(i - 1, j), col, -1.0 / g.hx);
            trip.emplace_back(vid(i, j), col, 1.0 / g.hx);
        }
    SpMat C(nu + nv, map.size());
    C.setFromTriplets(trip.begin(), trip.end());
    return C;
}

}  // namespace

AssembledForms assemble_forms(const SteadyState& st) {
    const Grid& g = st.grid;
    PsiIndexMap map(g);
    if (map.size() <= 0)
        throw StructuralError("assemble_forms: grid too small for clamped trial space");
    const int nu = (g.nx + 1) * g.ny;
    const int nv = g.nx * (g.ny + 1);
    const int nf = nu + nv;
    auto uid = [&](int i, int j) { return i * g.ny + j; };
    auto vid = [&](int i, int j) { return nu + i * (g.ny + 1) + j; };
    const double area = g.hx * g.hy;

    const SpMat C = build_curl(map, nu);

    AssembledForms out{map, SpMat(), SpMat(), SpMat(), 0.0, 0.0};

    // K: one row per difference sample; wall rows carry the no-slip ghosts.
    {
        std::vector<Triplet> rows;
        int row = 0;
        auto add1 = [&](int col, double v) { rows.emplace_back(row++, col, v); };
        auto add2 = [&](int ca, double va, int cb, double vb) {
            rows.emplace_back(row, ca, va);
            rows.emplace_back(row, cb, vb);
            ++row;
        };
        for (int i = 0; i < g.nx; ++i)  // du/dx at cells
            for (int j = 0; j < g.ny; ++j)
                add2(uid(i + 1, j), 1.0 / g.hx, uid(i, j), -1.0 / g.hx);
        for (int i = 0; i <= g.nx; ++i)  // du/dy at node lines
            for (int j = 0; j <= g.ny; ++j) {
                if (j == 0)
                    add1(uid(i, 0), 2.0 / g.hy);
                else if (j == g.ny)
                    add1(uid(i, g.ny - 1), -2.0 / g.hy);
                else
                    add2(uid(i, j), 1.0 / g.hy, uid(i, j - 1), -1.0 / g.hy);
            }
        for (int i = 0; i < g.nx; ++i)  // dv/dy at cells
            for (int j = 0; j < g.ny; ++j)
                add2(vid(i, j + 1), 1.0 / g.hy, vid(i, j), -1.0 / g.hy);
        for (int i = 0; i <= g.nx; ++i)  // dv/dx at node lines
            for (int j = 0; j <= g.ny; ++j) {
                if (i == 0)
                    add1(vid(0, j), 2.0 / g.hx);
                else if (i == g.nx)
                    add1(vid(g.nx - 1, j), -2.0 / g.hx);
                else
                    add2(vid(i, j), 1.0 / g.hx, vid(i - 1, j), -1.0 / g.hx);
            }
        SpMat D(row, nf);
        D.setFromTriplets(rows.begin(), rows.end());
        const SpMat DC = D * C;
        out.K = SpMat(DC.transpose()) * SpMat(area * DC);
    }

    // M: diagonal face weights rho0_face * quadrature weight.
    {
        const ScalarField rho_xf = cell_to_x_face(st.rho0);
        const ScalarField rho_yf = cell_to_y_face(st.rho0);
        Eigen::VectorXd wm(nf);
        for (int i = 0; i <= g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                wm[uid(i, j)] = rho_xf.at(i, j) * quadrature_weight(g, Placement::x_face, i, j);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j <= g.ny; ++j)
                wm[vid(i, j)] = rho_yf.at(i, j) * quadrature_weight(g, Placement::y_face, i, j);
        const SpMat WC = SpMat(wm.asDiagonal()) * C;
        out.M = SpMat(C.transpose()) * WC;
    }

    // G: (u . grad f) sampled at cells, weighted by h * cell area.
    {
        std::vector<Triplet> lc;
        lc.reserve(static_cast<size_t>(g.nx) * g.ny * 4);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const int r = i * g.ny + j;
                lc.emplace_back(r, uid(i, j), 0.5 * st.fx_c.at(i, j));
                lc.emplace_back(r, uid(i + 1, j), 0.5 * st.fx_c.at(i, j));
                lc.emplace_back(r, vid(i, j), 0.5 * st.fy_c.at(i, j));
                lc.emplace_back(r, vid(i, j + 1), 0.5 * st.fy_c.at(i, j));
            }
        SpMat L(g.nx * g.ny, nf);
        L.setFromTriplets(lc.begin(), lc.end());
        const SpMat LC = L * C;
        Eigen::VectorXd wh(g.nx * g.ny);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) wh[i * g.ny + j] = st.h.at(i, j) * area;
        out.G = SpMat(LC.transpose()) * SpMat(SpMat(wh.asDiagonal()) * LC);
    }

    double ub = -1e308, uba = 0.0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double gf2 =
                st.fx_c.at(i, j) * st.fx_c.at(i, j) + st.fy_c.at(i, j) * st.fy_c.at(i, j);
            const double q = st.h.at(i, j) / st.rho0.at(i, j) * gf2;
            ub = std::max(ub, q);
            uba = std::max(uba, std::abs(q));
        }
    out.upper_bound = ub;
    out.upper_bound_abs = uba;

    out.K.makeCompressed();
    out.G.makeCompressed();
    out.M.makeCompressed();
    return out;
}

ScalarField psi_from_vector(const PsiIndexMap& map, const Eigen::VectorXd& x) {
    ScalarField psi(map.grid, Placement::node);
    for (int i = 2; i <= map.grid.nx - 2; ++i)
        for (int j = 2; j <= map.grid.ny - 2; ++j)
            psi.at(i, j) = x[map.index(i, j)];
    return psi;
}

Eigen::VectorXd vector_from_psi(const PsiIndexMap& map, const ScalarField& psi) {
    Eigen::VectorXd x(map.size());
    for (int i = 2; i <= map.grid.nx - 2; ++i)
        for (int j = 2; j <= map.grid.ny - 2; ++j)
            x[map.index(i, j)] = psi.at(i, j);
    return x;
}

}  // namespace hydrostab
