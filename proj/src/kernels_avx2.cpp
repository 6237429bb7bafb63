// AVX2 + FMA kernel variants.  This translation unit is the only one compiled
// with -mavx2; it must not be entered unless the CPU reports AVX2 support
// (see kernels_dispatch.cpp).  Gathers are used for the swap-permutation
// kernels: exchange tables are arbitrary involutions of the index range.

#include "exclab/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace exclab::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double tail = 0.0;
    for (; i < n; ++i) tail += x[i] * y[i];
    return hsum(acc) + tail;
}

double wsum_avx2(const double* w, const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i), acc);
    double tail = 0.0;
    for (; i < n; ++i) tail += w[i] * x[i];
    return hsum(acc) + tail;
}

double wdot_avx2(const double* w, const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), xy, acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += w[i] * x[i] * y[i];
    return hsum(acc) + tail;
}

// No FMA here: the element-wise kernels stay bit-identical to the scalar
// variants, so iterative solves produce the same trajectory whichever table
// is active.  Only the reductions (which reassociate anyway) may fuse.
void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d ax = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), ax));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double swap_diff_quad_avx2(const double* w, const double* u, const double* v,
                           const std::uint32_t* s, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m128i idx =
            _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + i));
        __m256d du = _mm256_sub_pd(_mm256_i32gather_pd(u, idx, 8), _mm256_loadu_pd(u + i));
        __m256d dv = _mm256_sub_pd(_mm256_i32gather_pd(v, idx, 8), _mm256_loadu_pd(v + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(du, dv), acc);
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const std::uint32_t j = s[i];
        tail += w[i] * (u[j] - u[i]) * (v[j] - v[i]);
    }
    return hsum(acc) + tail;
}

void swap_apply_avx2(const double* c, const double* x, const std::uint32_t* s,
                     double* y, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m128i idx =
            _mm_loadu_si128(reinterpret_cast<const __m128i*>(s + i));
        __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_i32gather_pd(x, idx, 8));
        __m256d cdx = _mm256_mul_pd(_mm256_loadu_pd(c + i), dx);
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), cdx));
    }
    for (; i < n; ++i) y[i] += c[i] * (x[i] - x[s[i]]);
}

}  // namespace

const FnTable* avx2_table() {
    static const FnTable table{
        "avx2",     dot_avx2,  wsum_avx2, wdot_avx2,
        axpy_avx2,  swap_diff_quad_avx2,  swap_apply_avx2,
    };
    return &table;
}

}  // namespace exclab::kernels

#else

namespace exclab::kernels {
const FnTable* avx2_table() { return nullptr; }
}  // namespace exclab::kernels

#endif
