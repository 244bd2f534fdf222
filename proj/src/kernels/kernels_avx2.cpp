#include "confspec/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace confspec::kernels::detail {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
    }
    for (; i + 4 <= n; i += 4) a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double weighted_dot(const double* w, const double* x, const double* y, std::size_t n) {
    __m256d a0 = _mm256_setzero_pd();
    __m256d a1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(x + i + 4));
        a0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(y + i), a0);
        a1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(y + i + 4), a1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
        a0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(y + i), a0);
    }
    double s = hsum(_mm256_add_pd(a0, a1));
    for (; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

void hadamard(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void sub_scaled_hadamard(double theta, const double* m, const double* x, double* y,
                         std::size_t n) {
    const __m256d vt = _mm256_set1_pd(theta);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(vt, _mm256_loadu_pd(m + i));
        _mm256_storeu_pd(y + i, _mm256_fnmadd_pd(p, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] -= theta * m[i] * x[i];
}

void csr_matvec(const CsrView& a, const double* x, double* y) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        const std::int32_t begin = a.offsets[r];
        const std::int32_t end = a.offsets[r + 1];
        __m256d acc = _mm256_setzero_pd();
        std::int32_t k = begin;
        for (; k + 4 <= end; k += 4) {
            __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.columns + k));
            __m256d xv = _mm256_i32gather_pd(x, idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.values + k), xv, acc);
        }
        double s = hsum(acc);
        for (; k < end; ++k) s += a.values[k] * x[a.columns[k]];
        y[r] = s;
    }
}

void csr_row_sums(const CsrView& a, double* out) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        const std::int32_t begin = a.offsets[r];
        const std::int32_t end = a.offsets[r + 1];
        __m256d acc = _mm256_setzero_pd();
        std::int32_t k = begin;
        for (; k + 4 <= end; k += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a.values + k));
        double s = hsum(acc);
        for (; k < end; ++k) s += a.values[k];
        out[r] = s;
    }
}

void log_density_gradient(double weight, double theta, const double* x, double* accum,
                          std::size_t n) {
    const double c = weight * theta;
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        // c - c x^2
        __m256d term = _mm256_fnmadd_pd(_mm256_mul_pd(vc, xv), xv, vc);
        _mm256_storeu_pd(accum + i, _mm256_add_pd(_mm256_loadu_pd(accum + i), term));
    }
    for (; i < n; ++i) accum[i] += c * (1.0 - x[i] * x[i]);
}

double max_abs(const double* x, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
    for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
    return r;
}

}  // namespace

KernelTable make_avx2_table() {
    return KernelTable{dot,        weighted_dot,       axpy,
                       hadamard,   sub_scaled_hadamard, csr_matvec,
                       csr_row_sums, log_density_gradient, max_abs};
}

}  // namespace confspec::kernels::detail
