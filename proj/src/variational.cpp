#include "hydrostab/variational.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <cstdio>
#include <cstdlib>
#include <cmath>

#include "hydrostab/rng.hpp"

namespace hydrostab {

namespace {

struct EigenPair {
    double alpha = 0.0;
    Eigen::VectorXd x;
    int iterations = 0;
    double residual = 0.0;
    double gap = 0.0;
};

double rayleigh(const SpMat& A, const SpMat& M, const Eigen::VectorXd& x) {
    return x.dot(A * x) / x.dot(M * x);
}

double rel_residual(const SpMat& A, const SpMat& M, const Eigen::VectorXd& x, double alpha) {
    const Eigen::VectorXd ax = A * x;
    const Eigen::VectorXd mx = M * x;
    const double denom = ax.norm() + std::abs(alpha) * mx.norm() + 1e-300;
    return (ax - alpha * mx).norm() / denom;
}

Eigen::VectorXd seed_vector(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd x(n);
    for (int k = 0; k < n; ++k) x[k] = rng.uniform(-1.0, 1.0);
    return x;
}

/// Top eigenpair of A x = alpha M x (M SPD) by block shifted inverse
/// iteration with Rayleigh-Ritz extraction. sigma0 must exceed the top
/// eigenvalue. The block absorbs eigenvalue-curve crossings (a single warm
/// vector can lock onto a lower branch); a Cholesky certificate slightly
/// above the accepted value guards against a missed higher branch, and a
/// shift-pinching bisection (factorization succeeds iff sigma is above the
/// top eigenvalue) accelerates clustered spectra.
EigenPair top_eigenpair(const SpMat& A, const SpMat& M, double sigma0, const EigOptions& opt,
                        const Eigen::VectorXd* warm) {
    const int n = static_cast<int>(A.rows());
    const int B = std::min(4, n);
    EigenPair out;

    Eigen::SimplicialLLT<SpMat> llt;
    auto factor = [&](double s) {
        llt.compute(SpMat(s * M - A));
        return llt.info() == Eigen::Success;
    };

    double sigma = sigma0;
    for (int tries = 0; !factor(sigma); ++tries) {
        if (tries > 60) throw NumericalError("eigensolver: cannot factor shifted pencil");
        sigma = 2.0 * std::abs(sigma) + 1.0;
    }

    Eigen::MatrixXd X(n, B);
    for (int c = 0; c < B; ++c) X.col(c) = seed_vector(n, opt.seed + 7919 * c);
    if (warm && warm->size() == n) X.col(0) = *warm;

    auto m_orthonormalize = [&](Eigen::MatrixXd& Y) {
        for (int c = 0; c < Y.cols(); ++c) {
            Eigen::VectorXd my;
            for (int pass = 0; pass < 2; ++pass) {
                for (int p = 0; p < c; ++p) {
                    my = M * Y.col(p);
                    Y.col(c) -= Y.col(p) * Y.col(c).dot(my);
                }
            }
            const double nrm = std::sqrt(Y.col(c).dot(M * Y.col(c)));
            if (nrm > 1e-150)
                Y.col(c) /= nrm;
            else
                Y.col(c) = seed_vector(n, opt.seed ^ (0xabcdefull + c));
        }
    };

    double alpha = 0.0, resid = 1.0, prev_resid = 1.0;
    Eigen::VectorXd x;
    int stall = 0;

    for (int it = 1; it <= opt.max_iter; ++it) {
        Eigen::MatrixXd Y(n, B);
        for (int c = 0; c < B; ++c) Y.col(c) = llt.solve(M * X.col(c));
        m_orthonormalize(Y);
        // Rayleigh-Ritz in the block
        Eigen::MatrixXd S(B, B);
        for (int c = 0; c < B; ++c)
            for (int r = 0; r <= c; ++r) {
                S(r, c) = Y.col(r).dot(A * Y.col(c));
                S(c, r) = S(r, c);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
        X = Y * es.eigenvectors();
        alpha = es.eigenvalues()(B - 1);  // ascending order: last is the top
        out.gap = (B >= 2) ? alpha - es.eigenvalues()(B - 2) : 0.0;
        x = X.col(B - 1);
        prev_resid = resid;
        resid = rel_residual(A, M, x, alpha);
        out.iterations = it;

        if (resid <= opt.eig_tol) {
            // tripwire: certify no eigenvalue sits noticeably above alpha
            const double margin = std::max(1e-6 * (1.0 + std::abs(alpha)), 100.0 * resid);
            Eigen::SimplicialLLT<SpMat> cert;
            cert.compute(SpMat((alpha + margin) * M - A));
            if (cert.info() == Eigen::Success) break;
            // a higher branch exists: reseed the trailing column and continue
            X.col(0) = seed_vector(n, opt.seed + 104729 * it);
            resid = 1.0;
        }

        stall = (resid > 0.5 * prev_resid) ? stall + 1 : 0;
        if (stall >= 4 && sigma - alpha > 1e-12 * (1.0 + std::abs(alpha))) {
            // pinch the shift toward the top eigenvalue: success <=> above it
            double lo = alpha, hi = sigma;
            for (int k = 0; k < 8; ++k) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (factor(mid))
                    hi = mid;
                else
                    lo = mid;
            }
            sigma = hi;
            if (!factor(sigma))
                throw NumericalError("eigensolver: lost factorization while pinching");
            stall = 0;
        }
    }

    if (resid > opt.eig_tol)
        throw NumericalError("eigensolver did not converge: residual " + std::to_string(resid) +
                             " after " + std::to_string(out.iterations) + " iterations");

    out.alpha = alpha;
    out.x = std::move(x);
    out.residual = resid;
    return out;
}

}  // namespace

VariationalSolver::VariationalSolver(const SteadyState& st)
    : state_(st), forms_(assemble_forms(st)) {}

PhiEvaluation VariationalSolver::phi(double s, const EigOptions& opts) {
    if (!(s > 0.0)) throw DomainError("phi: s must be positive");
    const SpMat A = forms_.a_matrix(s, state_.mu);
    const double sigma0 = std::max(forms_.upper_bound, 0.0) + 1.0;
    const EigenPair pair =
        top_eigenpair(A, forms_.M, sigma0, opts, has_warm_ ? &warm_ : nullptr);
    warm_ = pair.x;
    has_warm_ = true;

    PhiEvaluation ev;
    ev.s = s;
    ev.phi = pair.alpha;
    ev.iterations = pair.iterations;
    ev.residual = pair.residual;
    ev.degeneracy_gap = pair.gap;
    ev.upper_bound = forms_.upper_bound;
    // M-normalized eigenvector already has J = 1 up to quadrature rounding
    ScalarField psi = psi_from_vector(forms_.map, pair.x);
    ev.maximizer = make_trial_field(state_, std::move(psi), true);
    return ev;
}

PhiEvaluation phi(const SteadyState& st, double s, const EigOptions& opts) {
    VariationalSolver solver(st);
    return solver.phi(s, opts);
}

PhiSweepResult phi_sweep(const SteadyState& st, const std::vector<double>& s_values,
                         const EigOptions& opts) {
    for (std::size_t k = 0; k < s_values.size(); ++k) {
        if (!(s_values[k] > 0.0)) throw DomainError("phi_sweep: s values must be positive");
        if (k > 0 && !(s_values[k] > s_values[k - 1]))
            throw DomainError("phi_sweep: s values must be ascending");
    }
    VariationalSolver solver(st);
    PhiSweepResult out;
    for (double s : s_values) out.evaluations.push_back(solver.phi(s, opts));

    double max_abs_phi = 0.0;
    for (const auto& ev : out.evaluations) max_abs_phi = std::max(max_abs_phi, std::abs(ev.phi));
    out.lipschitz_constant = max_abs_phi + solver.forms().upper_bound_abs;

    for (std::size_t k = 1; k < out.evaluations.size(); ++k) {
        const auto& a = out.evaluations[k - 1];
        const auto& b = out.evaluations[k];
        const double mono_tol = 1e-9 * (1.0 + std::abs(a.phi));
        if (a.phi < b.phi - mono_tol) {
            out.monotone_ok = false;
            out.message += "monotonicity violated between s=" + std::to_string(a.s) + " and s=" +
                           std::to_string(b.s) + "; ";
        }
        const double bound = out.lipschitz_constant * (b.s - a.s) / a.s;
        const double lip_tol = 1e-9 * (1.0 + std::abs(a.phi));
        if (a.phi - b.phi > bound + lip_tol) {
            out.lipschitz_ok = false;
            out.message += "Lipschitz bound violated between s=" + std::to_string(a.s) +
                           " and s=" + std::to_string(b.s) + "; ";
        }
    }
    return out;
}

ScalarField density_mode(const SteadyState& st, const VectorField& u, double lambda) {
    const ScalarField sc = advective_source(st, u);
    ScalarField theta(st.grid, Placement::cell);
    for (int i = 0; i < st.grid.nx; ++i)
        for (int j = 0; j < st.grid.ny; ++j)
            theta.at(i, j) = -st.h.at(i, j) * sc.at(i, j) / lambda;
    return theta;
}

GrowthRateResult solve_growth_rate(const SteadyState& st, const GrowthRateOptions& opts) {
    VariationalSolver solver(st);
    const double ub = solver.forms().upper_bound;
    if (!(ub > 0.0))
        throw NoInstability("no instability: (h/rho0)|grad f|^2 <= 0 everywhere, Phi(s) < 0");

    int evals = 0;
    auto H = [&](double s) {
        ++evals;
        auto ev = solver.phi(s, opts.eig);
        if (std::getenv("HYDROSTAB_TRACE_BISECT"))
            std::fprintf(stderr, "  [bisect] s=%.12f phi=%.12e H=%.3e iters=%d resid=%.1e\n",
                         s, ev.phi, s * s - ev.phi, ev.iterations, ev.residual);
        return std::make_pair(ev, 0.0);
    };

    double lo = opts.bracket_lo > 0.0 ? opts.bracket_lo : 1e-6;
    double hi = opts.bracket_hi > 0.0 ? opts.bracket_hi : std::sqrt(ub) + 1.0;

    PhiEvaluation ev_lo = H(lo).first;
    double h_lo = lo * lo - ev_lo.phi;
    int expand = 0;
    while (h_lo >= 0.0 && expand < 60) {
        if (ev_lo.phi <= 0.0)
            throw NoInstability("no instability: Phi(" + std::to_string(lo) +
                                ") = " + std::to_string(ev_lo.phi) + " <= 0");
        lo *= 0.5;
        ev_lo = H(lo).first;
        h_lo = lo * lo - ev_lo.phi;
        ++expand;
    }
    if (h_lo >= 0.0)
        throw NumericalError("growth-rate bracketing failed: H(lo) >= 0 after expansion");

    PhiEvaluation ev_hi = H(hi).first;
    double h_hi = hi * hi - ev_hi.phi;
    expand = 0;
    while (h_hi <= 0.0 && expand < 60) {
        hi *= 2.0;
        ev_hi = H(hi).first;
        h_hi = hi * hi - ev_hi.phi;
        ++expand;
    }
    if (h_hi <= 0.0)
        throw NumericalError("growth-rate bracketing failed: H(hi) <= 0 after expansion");

    double a = lo, ha = h_lo;
    double b = hi, hb = h_hi;
    PhiEvaluation best = (std::abs(ha) < std::abs(hb)) ? ev_lo : ev_hi;
    double best_s = (std::abs(ha) < std::abs(hb)) ? a : b;
    double best_h = (std::abs(ha) < std::abs(hb)) ? ha : hb;

    // secant steps with a forced bisection whenever the bracket stalls
    bool force_bisect = false;
    for (int it = 0; it < opts.max_bisection; ++it) {
        const double fp_tol_eff =
            (opts.fp_tol > 0.0) ? opts.fp_tol : 1e-8 * std::max(best_s * best_s, 1e-30);
        if (std::abs(best_h) <= fp_tol_eff) break;
        const double width_before = b - a;
        double c = b - hb * (b - a) / (hb - ha);  // secant
        const double margin = 0.01 * (b - a);
        if (force_bisect || !(c > a + margin && c < b - margin)) c = 0.5 * (a + b);
        const PhiEvaluation ev = H(c).first;
        const double hc = c * c - ev.phi;
        if (std::abs(hc) < std::abs(best_h)) {
            best = ev;
            best_s = c;
            best_h = hc;
        }
        if (hc < 0.0) {
            a = c;
            ha = hc;
        } else {
            b = c;
            hb = hc;
        }
        force_bisect = (b - a) > 0.45 * width_before;
        if (b - a < 1e-15 * std::max(1.0, b)) break;
    }

    GrowthRateResult res;
    res.lambda = best_s;
    res.fixed_point_residual = std::abs(best_h);
    res.bisection_interval = {a, b};
    res.upper_bound = ub;
    res.phi_evaluations = evals;
    res.eig_residual = best.residual;
    res.degeneracy_gap = best.degeneracy_gap;
    res.mode_u = best.maximizer;
    res.mode_theta = density_mode(st, res.mode_u.velocity, res.lambda);

    const double fp_tol_eff =
        (opts.fp_tol > 0.0) ? opts.fp_tol : 1e-8 * std::max(res.lambda * res.lambda, 1e-30);
    if (res.fixed_point_residual > fp_tol_eff)
        throw NumericalError("fixed-point residual " + std::to_string(res.fixed_point_residual) +
                             " above tolerance after bisection");
    return res;
}

RayleighCheckReport rayleigh_inequality_check(const SteadyState& st,
                                              const GrowthRateResult& result, int trials,
                                              std::uint64_t seed, double tolerance) {
    RayleighCheckReport rep;
    rep.trials = trials;
    rep.tolerance = tolerance;
    const double lam = result.lambda;

    auto slack_of = [&](const VectorField& u) {
        const EnergyForms f = energy_forms(st, u, lam);
        return lam * lam * f.j + lam * st.mu * f.e1 - f.e2;
    };

    rep.mode_slack = slack_of(result.mode_u.velocity);
    rep.min_slack = 1e308;
    Rng rng(seed);
    for (int k = 0; k < trials; ++k) {
        ScalarField psi = random_clamped_psi(st.grid, rng, 1 + (k % 3));
        TrialField t = make_trial_field(st, std::move(psi), true);
        const double s = slack_of(t.velocity);
        rep.min_slack = std::min(rep.min_slack, s);
        if (s < -tolerance) ++rep.violations;
    }
    return rep;
}

}  // namespace hydrostab
