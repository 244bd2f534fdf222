#pragma once

// Data-parallel inner loops used by assembly, the eigensolver and the
// optimizer. Every kernel has a scalar reference version; an AVX2/FMA variant
// is selected at runtime when the CPU supports it. Set CONFSPEC_ISA=scalar in
// the environment to force the reference path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace confspec::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Compressed sparse row view; for a symmetric matrix the CSC arrays of an
/// Eigen column-major matrix can be used unchanged.
struct CsrView {
    std::size_t rows = 0;
    const std::int32_t* offsets = nullptr;  // rows + 1 entries
    const std::int32_t* columns = nullptr;
    const double* values = nullptr;
};

struct KernelTable {
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum_i w_i x_i y_i
    double (*weighted_dot)(const double* w, const double* x, const double* y, std::size_t n);
    // y += a x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // out_i = a_i b_i
    void (*hadamard)(const double* a, const double* b, double* out, std::size_t n);
    // y -= theta * m_i * x_i
    void (*sub_scaled_hadamard)(double theta, const double* m, const double* x, double* y,
                                std::size_t n);
    // y = A x
    void (*csr_matvec)(const CsrView& a, const double* x, double* y);
    // out_i = sum_j A_ij
    void (*csr_row_sums)(const CsrView& a, double* out);
    // accum_i += weight * theta * (1 - x_i^2); Riesz form of the normalized
    // eigenvalue derivative with respect to log-density
    void (*log_density_gradient)(double weight, double theta, const double* x, double* accum,
                                 std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
};

const KernelTable& table(Isa isa);
/// Best ISA supported by this CPU and build, honouring CONFSPEC_ISA.
Isa active_isa();
bool isa_available(Isa isa);
const KernelTable& active();

// Span front ends over the active table.
double dot(std::span<const double> x, std::span<const double> y);
double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out);
void sub_scaled_hadamard(double theta, std::span<const double> m, std::span<const double> x,
                         std::span<double> y);
void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y);
void csr_row_sums(const CsrView& a, std::span<double> out);
void log_density_gradient(double weight, double theta, std::span<const double> x,
                          std::span<double> accum);
double max_abs(std::span<const double> x);

namespace detail {
KernelTable make_scalar_table();
#if defined(CONFSPEC_HAVE_AVX2)
KernelTable make_avx2_table();
#endif
}  // namespace detail

}  // namespace confspec::kernels
