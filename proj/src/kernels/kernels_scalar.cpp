#include "confspec/kernels.hpp"

#include <cmath>

namespace confspec::kernels::detail {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double weighted_dot(const double* w, const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * y[i];
    return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void hadamard(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void sub_scaled_hadamard(double theta, const double* m, const double* x, double* y,
                         std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] -= theta * m[i] * x[i];
}

void csr_matvec(const CsrView& a, const double* x, double* y) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        double s = 0.0;
        for (std::int32_t k = a.offsets[r]; k < a.offsets[r + 1]; ++k) s += a.values[k] * x[a.columns[k]];
        y[r] = s;
    }
}

void csr_row_sums(const CsrView& a, double* out) {
    for (std::size_t r = 0; r < a.rows; ++r) {
        double s = 0.0;
        for (std::int32_t k = a.offsets[r]; k < a.offsets[r + 1]; ++k) s += a.values[k];
        out[r] = s;
    }
}

void log_density_gradient(double weight, double theta, const double* x, double* accum,
                          std::size_t n) {
    const double c = weight * theta;
    for (std::size_t i = 0; i < n; ++i) accum[i] += c * (1.0 - x[i] * x[i]);
}

double max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
    return m;
}

}  // namespace

KernelTable make_scalar_table() {
    return KernelTable{dot,        weighted_dot,       axpy,
                       hadamard,   sub_scaled_hadamard, csr_matvec,
                       csr_row_sums, log_density_gradient, max_abs};
}

}  // namespace confspec::kernels::detail
