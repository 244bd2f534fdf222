#include "confspec/constructions.hpp"
#include "confspec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace confspec::constructions {

std::vector<double> union_spectrum_oracle(const std::vector<double>& a, const std::vector<double>& b,
                                          int count) {
    if (count < 0) throw ValidationError("union oracle count must be >= 0");
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    std::sort(out.begin(), out.end());
    if (static_cast<int>(out.size()) > count + 1) out.resize(count + 1);
    return out;
}

std::vector<double> union_spectrum_oracle(const SpectrumReport& a, const SpectrumReport& b, int count) {
    return union_spectrum_oracle(a.eigenvalues, b.eigenvalues, count);
}

std::vector<double> dirichlet_segment_spectrum(double length, int count) {
    if (!(length > 0.0) || !std::isfinite(length)) throw ValidationError("segment length must be positive");
    if (count < 0) throw ValidationError("segment eigenvalue count must be >= 0");
    std::vector<double> out(count);
    for (int m = 1; m <= count; ++m) {
        const double w = m * std::numbers::pi / length;
        out[m - 1] = w * w;
    }
    return out;
}

}  // namespace confspec::constructions
