#include "confspec/bounds.hpp"

#include "confspec/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace confspec::bounds {
namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt_int(long long v) { return std::to_string(v); }

// Splits "name/a/b" into parts.
std::vector<std::string> split_id(const std::string& id) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : id) {
        if (c == '/') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

int parse_int(const std::string& s, const std::string& id) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("bound id '" + id + "': '" + s + "' is not an integer");
    }
}

}  // namespace

std::uint64_t factorial(int n) {
    if (n < 0 || n > 20) throw ValidationError("factorial argument " + std::to_string(n) + " outside [0, 20]");
    std::uint64_t r = 1;
    for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
    return r;
}

double omega_n(int n) {
    if (n < 1) throw ValidationError("omega_n needs n >= 1, got " + std::to_string(n));
    const double h = 0.5 * (n + 1);
    return 2.0 * std::pow(kPi, h) / std::tgamma(h);
}

double corollary1_bound(int n, int k) {
    if (n < 2 || k < 0) throw ValidationError("corollary1_bound needs n >= 2 and k >= 0");
    if (n == 2) return 8.0 * kPi * k;  // exact form avoids pow round-off
    return n * std::pow(omega_n(n), 2.0 / n) * std::pow(static_cast<double>(k), 2.0 / n);
}

double gap_bound(int n) {
    if (n < 2) throw ValidationError("gap_bound needs n >= 2");
    return std::pow(static_cast<double>(n), 0.5 * n) * omega_n(n);
}

double sphere_normalized_eigenvalue(int k) {
    if (k < 0) throw ValidationError("sphere eigenvalue index must be >= 0");
    int l = static_cast<int>(std::sqrt(static_cast<double>(k)));
    while (static_cast<long long>(l + 1) * (l + 1) <= k) ++l;
    while (static_cast<long long>(l) * l > k) --l;
    return 4.0 * kPi * l * (l + 1);
}

double yang_yau_bound(int genus) {
    if (genus < 0) throw ValidationError("genus must be >= 0");
    return 8.0 * kPi * ((genus + 3) / 2);
}

TrendFit korevaar_trend(const std::vector<std::pair<int, double>>& values) {
    if (values.size() < 3)
        throw ValidationError("korevaar_trend needs at least 3 points, got " + std::to_string(values.size()));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [k, v] : values) {
        if (k < 1 || !(v > 0.0)) throw ValidationError("korevaar_trend needs k >= 1 and positive values");
        const double x = std::log(static_cast<double>(k));
        const double y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(values.size());
    const double denom = n * sxx - sx * sx;
    if (!(denom > 0.0)) throw ValidationError("korevaar_trend needs at least two distinct k");
    TrendFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (const auto& [k, v] : values) {
        const double r = std::log(v) - (fit.intercept + fit.slope * std::log(static_cast<double>(k)));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

double symmetric_space_lambda1c(SymmetricSpace space, int p) {
    switch (space) {
        case SymmetricSpace::sphere:
            if (p < 2) throw ValidationError("S^n needs n >= 2");
            return corollary1_bound(p, 1);
        case SymmetricSpace::real_projective:
            if (p < 2) throw ValidationError("RP^n needs n >= 2");
            return std::pow(2.0, (p - 2.0) / p) * (p + 1) * std::pow(omega_n(p), 2.0 / p);
        case SymmetricSpace::complex_projective:
            if (p < 1 || p > 20) throw ValidationError("CP^d needs 1 <= d <= 20");
            return 4.0 * kPi * (p + 1) * std::pow(static_cast<double>(factorial(p)), -1.0 / p);
        case SymmetricSpace::quaternionic_projective:
            if (p < 1 || 2 * p + 1 > 20) throw ValidationError("HP^d needs 1 <= d <= 9");
            return 8.0 * kPi * (p + 1) * std::pow(static_cast<double>(factorial(2 * p + 1)), -1.0 / (2 * p));
        case SymmetricSpace::cayley_plane:
            return 48.0 * kPi * std::pow(6.0 / static_cast<double>(factorial(11)), 1.0 / 8.0);
    }
    throw ValidationError("unknown symmetric space");
}

double symmetric_space_lambda1c(const std::string& name) {
    if (name == "CaP2" || name == "CaP^2") return symmetric_space_lambda1c(SymmetricSpace::cayley_plane, 2);
    const auto caret = name.find('^');
    if (caret == std::string::npos) throw ValidationError("unknown symmetric space '" + name + "'");
    const std::string head = name.substr(0, caret);
    const int p = parse_int(name.substr(caret + 1), name);
    if (head == "S") return symmetric_space_lambda1c(SymmetricSpace::sphere, p);
    if (head == "RP") return symmetric_space_lambda1c(SymmetricSpace::real_projective, p);
    if (head == "CP") return symmetric_space_lambda1c(SymmetricSpace::complex_projective, p);
    if (head == "HP") return symmetric_space_lambda1c(SymmetricSpace::quaternionic_projective, p);
    throw ValidationError("unknown symmetric space '" + name + "'");
}

BoundEntry bound_entry(const std::string& id) {
    const auto parts = split_id(id);
    const std::string& head = parts[0];
    auto arg = [&](std::size_t i) {
        if (parts.size() <= i) throw ValidationError("bound id '" + id + "' is missing an argument");
        return parse_int(parts[i], id);
    };
    auto expect_args = [&](std::size_t count) {
        if (parts.size() != count + 1)
            throw ValidationError("bound id '" + id + "' expects " + std::to_string(count) + " argument(s)");
    };

    if (head == "hersch") {
        expect_args(0);
        return {id, "8*pi", 8.0 * kPi, "round sphere maximizes lambda_1"};
    }
    if (head == "nadirashvili") {
        expect_args(0);
        return {id, "8*pi^2/sqrt(3)", 8.0 * kPi * kPi / std::sqrt(3.0), "equilateral flat torus"};
    }
    if (head == "square_torus") {
        expect_args(0);
        return {id, "4*pi^2", 4.0 * kPi * kPi, "square flat torus, multiplicity 4"};
    }
    if (head == "sphere_lambda2c") {
        expect_args(0);
        return {id, "16*pi", 16.0 * kPi,
                "k = 2 conformal value of the round sphere, equal to the 8*pi*k lower bound at k = 2"};
    }
    if (head == "omega") {
        expect_args(1);
        const int n = arg(1);
        return {id, "2*pi^(" + fmt_int(n + 1) + "/2)/Gamma(" + fmt_int(n + 1) + "/2)", omega_n(n),
                "volume of the unit " + fmt_int(n) + "-sphere"};
    }
    if (head == "corollary1") {
        expect_args(2);
        const int n = arg(1), k = arg(2);
        const std::string expr = n == 2 ? "8*pi*" + fmt_int(k)
                                        : fmt_int(n) + "*omega_" + fmt_int(n) + "^(2/" + fmt_int(n) + ")*" +
                                              fmt_int(k) + "^(2/" + fmt_int(n) + ")";
        return {id, expr, corollary1_bound(n, k), "lower bound for the k-th conformal eigenvalue"};
    }
    if (head == "gap") {
        expect_args(1);
        const int n = arg(1);
        return {id, fmt_int(n) + "^(" + fmt_int(n) + "/2)*omega_" + fmt_int(n), gap_bound(n),
                "lower bound on consecutive conformal eigenvalue gap (power n/2)"};
    }
    if (head == "sphere") {
        expect_args(1);
        const int k = arg(1);
        return {id, "4*pi*floor(sqrt(" + fmt_int(k) + "))*(floor(sqrt(" + fmt_int(k) + "))+1)",
                sphere_normalized_eigenvalue(k), "area-normalized round sphere eigenvalue"};
    }
    if (head == "yang_yau") {
        expect_args(1);
        const int g = arg(1);
        return {id, "8*pi*floor((" + fmt_int(g) + "+3)/2)", yang_yau_bound(g), "upper bound on lambda_1 in genus"};
    }
    if (head == "lambda1c") {
        expect_args(1);
        const std::string& name = parts[1];
        std::string expr;
        std::string note;
        if (name == "CaP2" || name == "CaP^2") {
            expr = "48*pi*(6/11!)^(1/8)";
            note = "lambda_1 = 48 times volume^(1/8), volume 6*pi^8/11!";
        } else {
            const auto caret = name.find('^');
            const std::string h = caret == std::string::npos ? name : name.substr(0, caret);
            const std::string p = caret == std::string::npos ? "" : name.substr(caret + 1);
            if (h == "S") expr = p + "*omega_" + p + "^(2/" + p + ")";
            else if (h == "RP") expr = "2^((" + p + "-2)/" + p + ")*(" + p + "+1)*omega_" + p + "^(2/" + p + ")";
            else if (h == "CP") expr = "4*pi*(" + p + "+1)*(" + p + "!)^(-1/" + p + ")";
            else if (h == "HP") expr = "8*pi*(" + p + "+1)*((2*" + p + "+1)!)^(-1/(2*" + p + "))";
        }
        return {id, expr, symmetric_space_lambda1c(name), note};
    }
    throw ValidationError("unknown bound id '" + id + "'");
}

std::vector<BoundEntry> bound_table() {
    std::vector<std::string> ids = {"hersch", "nadirashvili", "square_torus", "sphere_lambda2c"};
    for (int n = 1; n <= 6; ++n) ids.push_back("omega/" + std::to_string(n));
    for (int k = 0; k <= 8; ++k) ids.push_back("corollary1/2/" + std::to_string(k));
    for (int n = 3; n <= 6; ++n) ids.push_back("corollary1/" + std::to_string(n) + "/1");
    for (int n = 2; n <= 6; ++n) ids.push_back("gap/" + std::to_string(n));
    for (int k = 0; k <= 9; ++k) ids.push_back("sphere/" + std::to_string(k));
    for (int g = 0; g <= 4; ++g) ids.push_back("yang_yau/" + std::to_string(g));
    for (int n = 2; n <= 6; ++n) ids.push_back("lambda1c/S^" + std::to_string(n));
    for (int n = 2; n <= 6; ++n) ids.push_back("lambda1c/RP^" + std::to_string(n));
    for (int d = 1; d <= 4; ++d) ids.push_back("lambda1c/CP^" + std::to_string(d));
    for (int d = 1; d <= 4; ++d) ids.push_back("lambda1c/HP^" + std::to_string(d));
    ids.push_back("lambda1c/CaP2");
    std::vector<BoundEntry> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(bound_entry(id));
    return out;
}

}  // namespace confspec::bounds
