#include "hydrostab/linsolve.hpp"

#include <cmath>

namespace hydrostab {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void subtract_mean(std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    const double m = s / static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

CgResult conjugate_gradient(const ApplyFn& apply, const std::vector<double>& b_in,
                            std::vector<double>& x, const CgOptions& opt,
                            const std::vector<double>* inv_diag, const ProjectFn* project) {
    const std::size_t n = b_in.size();
    std::vector<double> b = b_in;
    if (project) (*project)(b);
    if (x.size() != n) x.assign(n, 0.0);
    if (project) (*project)(x);

    std::vector<double> r(n), z(n), p(n), Ap(n);
    apply(x, Ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - Ap[k];
    if (project) (*project)(r);

    const double bnorm = norm2(b);
    const double stop = std::max(opt.tol_rel * bnorm, opt.tol_abs);

    auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (inv_diag)
            for (std::size_t k = 0; k < n; ++k) out[k] = in[k] * (*inv_diag)[k];
        else
            out = in;
    };

    CgResult res;
    double rnorm = norm2(r);
    if (rnorm <= stop || bnorm == 0.0) {
        res.converged = true;
        res.residual = rnorm;
        return res;
    }

    precond(r, z);
    if (project) (*project)(z);
    p = z;
    double rz = dot(r, z);

    for (int it = 1; it <= opt.max_iter; ++it) {
        apply(p, Ap);
        if (project) (*project)(Ap);
        const double pAp = dot(p, Ap);
        if (pAp <= 0.0) {
            // loss of positive definiteness (should not happen for our operators)
            res.iterations = it;
            res.residual = rnorm;
            return res;
        }
        const double alpha = rz / pAp;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * Ap[k];
        }
        if (project) (*project)(r);
        rnorm = norm2(r);
        res.iterations = it;
        if (rnorm <= stop) {
            res.converged = true;
            break;
        }
        precond(r, z);
        if (project) (*project)(z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    res.residual = rnorm;
    if (project) (*project)(x);
    return res;
}

}  // namespace hydrostab
