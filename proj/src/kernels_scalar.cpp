#include "exclab/kernels.hpp"

namespace exclab::kernels {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double wsum_scalar(const double* w, const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i];
    return acc;
}

double wdot_scalar(const double* w, const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * y[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double swap_diff_quad_scalar(const double* w, const double* u, const double* v,
                             const std::uint32_t* s, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t j = s[i];
        acc += w[i] * (u[j] - u[i]) * (v[j] - v[i]);
    }
    return acc;
}

void swap_apply_scalar(const double* c, const double* x, const std::uint32_t* s,
                       double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += c[i] * (x[i] - x[s[i]]);
}

}  // namespace

const FnTable& scalar_table() {
    static const FnTable table{
        "scalar",         dot_scalar,  wsum_scalar, wdot_scalar,
        axpy_scalar,      swap_diff_quad_scalar,    swap_apply_scalar,
    };
    return table;
}

}  // namespace exclab::kernels
