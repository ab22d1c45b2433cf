#include "hydrostab/dense_oracle.hpp"

#include <cmath>

#include "hydrostab/field_ops.hpp"

namespace hydrostab {

DenseOracle::DenseOracle(const SteadyState& st) : state_(st), forms_(assemble_forms(st)) {
    if (forms_.map.size() > kMaxNodes)
        throw StructuralError("dense oracle refused: " + std::to_string(forms_.map.size()) +
                              " free nodes exceed the cap of " + std::to_string(kMaxNodes));
    M_ = Eigen::MatrixXd(forms_.M);
}

double DenseOracle::phi(double s) const {
    if (!(s > 0.0)) throw DomainError("oracle phi: s must be positive");
    const Eigen::MatrixXd A(forms_.a_matrix(s, state_.mu));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M_);
    if (es.info() != Eigen::Success) throw NumericalError("dense generalized eigensolve failed");
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

TrialField DenseOracle::phi_mode(double s) const {
    const Eigen::MatrixXd A(forms_.a_matrix(s, state_.mu));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M_);
    if (es.info() != Eigen::Success) throw NumericalError("dense generalized eigensolve failed");
    const Eigen::VectorXd x = es.eigenvectors().col(es.eigenvalues().size() - 1);
    return make_trial_field(state_, psi_from_vector(forms_.map, x), true);
}

double DenseOracle::lambda_scan(double scan_step) const {
    const double ub = forms_.upper_bound;
    if (!(ub > 0.0)) throw NoInstability("oracle: no instability, upper bound <= 0");
    auto H = [&](double lam) { return lam * lam - phi(lam); };

    double lo = 1e-6, hi = std::sqrt(ub) + 1.0;
    double hlo = H(lo);
    int guard = 0;
    while (hlo >= 0.0 && guard++ < 60) {
        if (phi(lo) <= 0.0) throw NoInstability("oracle: Phi <= 0 at small s");
        lo *= 0.5;
        hlo = H(lo);
    }
    double hhi = H(hi);
    guard = 0;
    while (hhi <= 0.0 && guard++ < 60) {
        hi *= 2.0;
        hhi = H(hi);
    }
    while (hi - lo > 0.25 * scan_step) {
        const double mid = 0.5 * (lo + hi);
        if (H(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    // certify the sign change with a local scan at the requested step
    double a = std::max(scan_step, lo - 50.0 * scan_step);
    double prev = H(a);
    for (int k = 1; k <= 120; ++k) {
        const double b = a + scan_step;
        const double hb = H(b);
        if (prev < 0.0 && hb >= 0.0) return a + 0.5 * scan_step;
        prev = hb;
        a = b;
    }
    return 0.5 * (lo + hi);
}

PerturbationState DenseOracle::linstep(const PerturbationState& state, double dt) const {
    const Grid& g = state_.grid;
    PerturbationState out(g);
    out.t = state.t + dt;

    // density update (identical arithmetic to the iterative path)
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double uc = 0.5 * (state.V.u.at(i, j) + state.V.u.at(i + 1, j));
            const double vc = 0.5 * (state.V.v.at(i, j) + state.V.v.at(i, j + 1));
            const double sc = uc * state_.fx_c.at(i, j) + vc * state_.fy_c.at(i, j);
            out.rho.at(i, j) = state.rho.at(i, j) - dt * state_.h.at(i, j) * sc;
        }

    const ScalarField mass_xf = cell_to_x_face(state_.rho0);
    const ScalarField mass_yf = cell_to_y_face(state_.rho0);
    const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);

    // dense Helmholtz for u on interior x-faces
    VectorField vstar(g);
    {
        const int ni = (g.nx - 1) * g.ny;
        auto id = [&](int i, int j) { return (i - 1) * g.ny + j; };
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ni, ni);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(ni);
        for (int i = 1; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const int r = id(i, j);
                double diag = mass_xf.at(i, j) / dt + state_.mu * 2.0 * ihx2;
                diag += state_.mu * ((j == 0 || j == g.ny - 1) ? 3.0 : 2.0) * ihy2;
                A(r, r) = diag;
                if (i > 1) A(r, id(i - 1, j)) = -state_.mu * ihx2;
                if (i < g.nx - 1) A(r, id(i + 1, j)) = -state_.mu * ihx2;
                if (j > 0) A(r, id(i, j - 1)) = -state_.mu * ihy2;
                if (j < g.ny - 1) A(r, id(i, j + 1)) = -state_.mu * ihy2;
                const double fxc_l = state_.fx_c.at(i - 1, j), fxc_r = state_.fx_c.at(i, j);
                const double force =
                    0.5 * (out.rho.at(i - 1, j) * fxc_l + out.rho.at(i, j) * fxc_r);
                b(r) = mass_xf.at(i, j) / dt * state.V.u.at(i, j) - force;
            }
        const Eigen::VectorXd x = A.ldlt().solve(b);
        for (int i = 1; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) vstar.u.at(i, j) = x(id(i, j));
    }
    // dense Helmholtz for v on interior y-faces
    {
        const int ni = g.nx * (g.ny - 1);
        auto id = [&](int i, int j) { return i * (g.ny - 1) + (j - 1); };
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ni, ni);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(ni);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 1; j < g.ny; ++j) {
                const int r = id(i, j);
                double diag = mass_yf.at(i, j) / dt + state_.mu * 2.0 * ihy2;
                diag += state_.mu * ((i == 0 || i == g.nx - 1) ? 3.0 : 2.0) * ihx2;
                A(r, r) = diag;
                if (j > 1) A(r, id(i, j - 1)) = -state_.mu * ihy2;
                if (j < g.ny - 1) A(r, id(i, j + 1)) = -state_.mu * ihy2;
                if (i > 0) A(r, id(i - 1, j)) = -state_.mu * ihx2;
                if (i < g.nx - 1) A(r, id(i + 1, j)) = -state_.mu * ihx2;
                const double force = 0.5 * (out.rho.at(i, j - 1) * state_.fy_c.at(i, j - 1) +
                                            out.rho.at(i, j) * state_.fy_c.at(i, j));
                b(r) = mass_yf.at(i, j) / dt * state.V.v.at(i, j) - force;
            }
        const Eigen::VectorXd x = A.ldlt().solve(b);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 1; j < g.ny; ++j) vstar.v.at(i, j) = x(id(i, j));
    }

    // dense weighted Poisson projection, rank-one shift handles the nullspace
    {
        const int n = g.nx * g.ny;
        auto id = [&](int i, int j) { return i * g.ny + j; };
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
        Eigen::VectorXd b(n);
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const int r = id(i, j);
                double diag = 0.0;
                if (i > 0) {
                    const double c = 1.0 / mass_xf.at(i, j) * ihx2;
                    diag += c;
                    L(r, id(i - 1, j)) -= c;
                }
                if (i < g.nx - 1) {
                    const double c = 1.0 / mass_xf.at(i + 1, j) * ihx2;
                    diag += c;
                    L(r, id(i + 1, j)) -= c;
                }
                if (j > 0) {
                    const double c = 1.0 / mass_yf.at(i, j) * ihy2;
                    diag += c;
                    L(r, id(i, j - 1)) -= c;
                }
                if (j < g.ny - 1) {
                    const double c = 1.0 / mass_yf.at(i, j + 1) * ihy2;
                    diag += c;
                    L(r, id(i, j + 1)) -= c;
                }
                L(r, r) += diag;
                b(r) = -((vstar.u.at(i + 1, j) - vstar.u.at(i, j)) / g.hx +
                         (vstar.v.at(i, j + 1) - vstar.v.at(i, j)) / g.hy) /
                       dt;
            }
        const double shift = L.trace() / n;
        L += Eigen::MatrixXd::Constant(n, n, shift / n);
        Eigen::VectorXd p = L.ldlt().solve(b);
        p.array() -= p.mean();
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) out.P.at(i, j) = p(id(i, j));
        for (int i = 1; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                vstar.u.at(i, j) -=
                    dt / mass_xf.at(i, j) * (out.P.at(i, j) - out.P.at(i - 1, j)) / g.hx;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 1; j < g.ny; ++j)
                vstar.v.at(i, j) -=
                    dt / mass_yf.at(i, j) * (out.P.at(i, j) - out.P.at(i, j - 1)) / g.hy;
        vstar.impose_no_slip();
    }
    out.V = std::move(vstar);
    return out;
}

}  // namespace hydrostab
