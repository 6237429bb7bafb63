#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "exclab/kernels.hpp"

// Matrix-free conjugate gradients in a weighted L^2 metric, with an
// orthogonal projector applied every iteration so the Krylov space stays in
// the constraint subspace (measurability + mean-zero + sector support).  The
// operator must be self-adjoint and positive definite on the projected
// subspace.

namespace exclab {

struct CGReport {
    bool converged = false;
    std::size_t iterations = 0;
    double rel_residual = 0.0;
};

// apply: (const std::vector<double>& in, std::vector<double>& out)
// proj:  (std::vector<double>& inout)
template <class ApplyFn, class ProjFn>
CGReport cg_solve(const std::vector<double>& metric_w, ApplyFn&& apply, ProjFn&& proj,
                  std::vector<double> b, std::vector<double>& x, double rel_tol = 1e-10,
                  std::size_t iter_cap_factor = 10) {
    const auto& K = kernels::active();
    const std::size_t n = b.size();
    auto wdot = [&](const std::vector<double>& u, const std::vector<double>& v) {
        return K.wdot(metric_w.data(), u.data(), v.data(), n);
    };

    proj(b);
    const double bnorm = std::sqrt(std::max(0.0, wdot(b, b)));
    x.assign(n, 0.0);
    CGReport rep;
    if (bnorm == 0.0) {
        rep.converged = true;
        return rep;
    }

    std::vector<double> r = b;
    std::vector<double> p = r;
    std::vector<double> Ap(n);
    double rs = wdot(r, r);
    const std::size_t cap = iter_cap_factor * n;

    for (std::size_t it = 0; it < cap; ++it) {
        apply(p, Ap);
        proj(Ap);
        const double pAp = wdot(p, Ap);
        if (!(pAp > 0.0)) break;  // operator not PD along p: give up, report residual
        const double alpha = rs / pAp;
        K.axpy(alpha, p.data(), x.data(), n);
        K.axpy(-alpha, Ap.data(), r.data(), n);
        proj(r);
        const double rs_new = wdot(r, r);
        rep.iterations = it + 1;
        if (std::sqrt(std::max(0.0, rs_new)) <= rel_tol * bnorm) {
            rep.converged = true;
            rep.rel_residual = std::sqrt(std::max(0.0, rs_new)) / bnorm;
            return rep;
        }
        const double beta = rs_new / rs;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        rs = rs_new;
    }
    rep.rel_residual = std::sqrt(std::max(0.0, rs)) / bnorm;
    return rep;
}

}  // namespace exclab
