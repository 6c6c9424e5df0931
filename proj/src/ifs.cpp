#include "fractalgen/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fractalgen {

std::pair<double, double> singular_values(const std::array<double, 4>& a) {
    for (double v : a) {
        if (!std::isfinite(v)) throw DomainError("singular_values: non-finite matrix entry");
    }
    // Eigenvalues of A^T A from its trace and determinant. det(A^T A) is
    // det(A)^2, so the discriminant is nonnegative in exact arithmetic.
    const double t = a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3];
    const double d = det2(a);
    const double disc = std::max(0.0, t * t - 4.0 * d * d);
    const double root = std::sqrt(disc);
    const double hi = 0.5 * (t + root);
    const double lo = std::max(0.0, 0.5 * (t - root));
    return {std::sqrt(hi), std::sqrt(lo)};
}

double sigma_max(const std::array<double, 4>& a) { return singular_values(a).first; }

std::array<double, 4> compose_from_svd(const SvdParams& p) {
    const double ct = std::cos(p.theta), st = std::sin(p.theta);
    const double cp = std::cos(p.phi), sp = std::sin(p.phi);
    // R_theta * diag(s1, s2)
    const double m00 = ct * p.sigma1, m01 = -st * p.sigma2;
    const double m10 = st * p.sigma1, m11 = ct * p.sigma2;
    // ... * R_phi, then column signs from diag(d1, d2).
    const double d1 = static_cast<double>(p.d1), d2 = static_cast<double>(p.d2);
    return {
        (m00 * cp + m01 * sp) * d1, (-m00 * sp + m01 * cp) * d2,
        (m10 * cp + m11 * sp) * d1, (-m10 * sp + m11 * cp) * d2,
    };
}

double sigma_factor(const IfsCode& code) {
    double total = 0.0;
    for (const auto& m : code.maps) {
        auto [s1, s2] = singular_values(m.a);
        total += s1 + 2.0 * s2;
    }
    return total;
}

bool is_contractive(const IfsCode& code, double tol) {
    for (const auto& m : code.maps) {
        if (sigma_max(m.a) > 1.0 + tol) return false;
    }
    return true;
}

double average_contractivity(const IfsCode& code) {
    double result = 1.0;
    for (size_t i = 0; i < code.maps.size(); ++i) {
        const double p = code.probs[i];
        if (p == 0.0) continue;  // s^0 = 1
        const double s = sigma_max(code.maps[i].a);
        if (s == 0.0) return 0.0;
        result *= std::pow(s, p);
    }
    return result;
}

std::vector<double> determinant_probabilities(const std::vector<AffineMap>& maps) {
    if (maps.size() < 2) throw DomainError("determinant_probabilities: need at least 2 maps");
    std::vector<double> probs(maps.size());
    double total = 0.0;
    bool any_significant = false;
    for (size_t i = 0; i < maps.size(); ++i) {
        probs[i] = std::abs(det2(maps[i].a));
        if (probs[i] >= 1e-12) any_significant = true;
        total += probs[i];
    }
    if (!any_significant) {
        std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(maps.size()));
        return probs;
    }
    for (double& p : probs) p /= total;
    return probs;
}

bool code_is_valid(const IfsCode& code, double tol) {
    if (code.maps.size() < 2 || code.probs.size() != code.maps.size()) return false;
    double sum = 0.0;
    for (double p : code.probs) {
        if (!(p >= 0.0)) return false;
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) return false;
    for (const auto& m : code.maps) {
        for (double v : m.a)
            if (!std::isfinite(v)) return false;
        for (double v : m.b)
            if (!std::isfinite(v)) return false;
        if (sigma_max(m.a) > 1.0 + tol) return false;
    }
    return true;
}

}  // namespace fractalgen
