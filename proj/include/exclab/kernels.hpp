#pragma once

#include <cstddef>
#include <cstdint>

// Hot-loop kernels shared by the exact solvers (weighted reductions over
// enumerated configuration spaces, CG vector ops, exchange/permutation
// applications).  A scalar reference implementation is always available;
// wider variants (AVX2) are compiled separately and selected at runtime
// after a CPU feature check.  All variants must agree to floating-point
// round-off (they may reassociate sums), which is enforced by tests.

namespace exclab::kernels {

struct FnTable {
    const char* name;

    // sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);

    // sum_i w[i] * x[i]
    double (*wsum)(const double* w, const double* x, std::size_t n);

    // sum_i w[i] * x[i] * y[i]
    double (*wdot)(const double* w, const double* x, const double* y, std::size_t n);

    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);

    // sum_i w[i] * (u[s[i]] - u[i]) * (v[s[i]] - v[i])
    // where s is an involutive permutation (an exchange/swap table).
    double (*swap_diff_quad)(const double* w, const double* u, const double* v,
                             const std::uint32_t* s, std::size_t n);

    // y[i] += c[i] * (x[i] - x[s[i]])   (generator application for one bond)
    void (*swap_apply)(const double* c, const double* x, const std::uint32_t* s,
                       double* y, std::size_t n);
};

// Table selected at startup (honours the EXCLAB_KERNELS environment variable:
// "scalar" or "avx2").
const FnTable& active();

const FnTable& scalar_table();
const FnTable* avx2_table();  // nullptr when unsupported by build or CPU

// Test hook: force a specific table ("scalar"/"avx2"); returns false if the
// requested table is unavailable.
bool force(const char* name);

}  // namespace exclab::kernels
