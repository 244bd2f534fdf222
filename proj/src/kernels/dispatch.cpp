#include "confspec/kernels.hpp"

#include <cassert>
#include <cstdlib>
#include <string>

namespace confspec::kernels {

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
#if defined(CONFSPEC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    static const KernelTable scalar = detail::make_scalar_table();
#if defined(CONFSPEC_HAVE_AVX2)
    static const KernelTable avx2 = detail::make_avx2_table();
    if (isa == Isa::avx2 && isa_available(Isa::avx2)) return avx2;
#endif
    (void)isa;
    return scalar;
}

Isa active_isa() {
    static const Isa selected = [] {
        if (const char* forced = std::getenv("CONFSPEC_ISA")) {
            if (std::string(forced) == "scalar") return Isa::scalar;
        }
        return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
    }();
    return selected;
}

const KernelTable& active() {
    static const KernelTable& t = table(active_isa());
    return t;
}

double dot(std::span<const double> x, std::span<const double> y) {
    assert(x.size() == y.size());
    return active().dot(x.data(), y.data(), x.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> x,
                    std::span<const double> y) {
    assert(w.size() == x.size() && x.size() == y.size());
    return active().weighted_dot(w.data(), x.data(), y.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    active().axpy(a, x.data(), y.data(), x.size());
}

void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    assert(a.size() == b.size() && b.size() == out.size());
    active().hadamard(a.data(), b.data(), out.data(), out.size());
}

void sub_scaled_hadamard(double theta, std::span<const double> m, std::span<const double> x,
                         std::span<double> y) {
    assert(m.size() == x.size() && x.size() == y.size());
    active().sub_scaled_hadamard(theta, m.data(), x.data(), y.data(), y.size());
}

void csr_matvec(const CsrView& a, std::span<const double> x, std::span<double> y) {
    assert(x.size() == a.rows && y.size() == a.rows);
    active().csr_matvec(a, x.data(), y.data());
}

void csr_row_sums(const CsrView& a, std::span<double> out) {
    assert(out.size() == a.rows);
    active().csr_row_sums(a, out.data());
}

void log_density_gradient(double weight, double theta, std::span<const double> x,
                          std::span<double> accum) {
    assert(x.size() == accum.size());
    active().log_density_gradient(weight, theta, x.data(), accum.data(), x.size());
}

double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

}  // namespace confspec::kernels
