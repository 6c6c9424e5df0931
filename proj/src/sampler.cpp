#include "fractalgen/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fractalgen/ifs.hpp"

namespace fractalgen {

namespace {

// Exact arithmetic keeps every interval nonempty; floating-point slop may
// invert lo/hi by an ulp. Collapse those to the midpoint, treat anything
// larger as a logic error. Always consumes one draw.
double draw_interval(Rng& rng, double lo, double hi) {
    if (lo > hi) {
        if (lo - hi > 1e-12) throw std::logic_error("sample_svs: interval inverted beyond slop");
        const double mid = 0.5 * (lo + hi);
        rng.next_u64();
        return mid;
    }
    return rng.uniform(lo, hi);
}

}  // namespace

SvArray sample_svs(int n, double alpha, Rng& rng) {
    if (n < 2) throw DomainError("sample_svs: n must be >= 2");
    if (!(alpha >= 0.0 && alpha <= 3.0 * n))
        throw DomainError("sample_svs: alpha outside [0, 3n]");

    SvArray svs(static_cast<size_t>(n));
    // b_l assumes every remaining row is maxed out (contributes 3); b_u is
    // the weighted sum still to be placed.
    double b_l = alpha - 3.0 * n + 3.0;
    double b_u = alpha;
    for (int k = 0; k + 1 < n; ++k) {
        const double s1 = draw_interval(rng, std::max(0.0, b_l / 3.0), std::min(1.0, b_u));
        b_l -= s1;
        b_u -= s1;
        const double s2 = draw_interval(rng, std::max(0.0, b_l / 2.0), std::min(s1, b_u / 2.0));
        b_l += -2.0 * s2 + 3.0;
        b_u -= 2.0 * s2;
        svs[k] = {s1, s2};
    }
    // Last row: sample sigma2, then sigma1 is forced so the sum lands on
    // alpha. Both bounds use b_u.
    double s2 = draw_interval(rng, std::max(0.0, 0.5 * (b_u - 1.0)), b_u / 3.0);
    double s1 = b_u - 2.0 * s2;
    // Rounding can push the forced value past a bound by an ulp; clamp within
    // slop only.
    if (s1 > 1.0) {
        if (s1 - 1.0 > 1e-12) throw std::logic_error("sample_svs: forced sigma1 > 1 beyond slop");
        s1 = 1.0;
    }
    if (s1 < s2) {
        if (s2 - s1 > 1e-12) throw std::logic_error("sample_svs: forced sigma1 < sigma2 beyond slop");
        s1 = s2;
    }
    if (s2 < 0.0) s2 = 0.0;
    svs[static_cast<size_t>(n) - 1] = {s1, s2};
    return svs;
}

IfsCode sample_system(int n, double b_bound, Rng& rng) {
    if (n < 2) throw DomainError("sample_system: n must be >= 2");
    if (!(b_bound > 0.0)) throw DomainError("sample_system: b_bound must be positive");

    const double alpha = rng.uniform(0.5 * (5.0 + n), 0.5 * (6.0 + n));
    const SvArray svs = sample_svs(n, alpha, rng);

    IfsCode code;
    code.maps.resize(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        SvdParams p;
        p.theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
        p.phi = rng.uniform(-std::numbers::pi, std::numbers::pi);
        p.d1 = rng.sign();
        p.d2 = rng.sign();
        p.sigma1 = svs[static_cast<size_t>(k)][0];
        p.sigma2 = svs[static_cast<size_t>(k)][1];
        const double bx = rng.uniform(-b_bound, b_bound);
        const double by = rng.uniform(-b_bound, b_bound);
        code.maps[static_cast<size_t>(k)].a = compose_from_svd(p);
        code.maps[static_cast<size_t>(k)].b = {bx, by};
    }
    code.probs = determinant_probabilities(code.maps);
    return code;
}

int sample_system_size(const std::vector<int>& sizes, Rng& rng) {
    if (sizes.empty()) throw DomainError("sample_system_size: empty size set");
    return sizes[rng.uniform_int(sizes.size())];
}

IfsCode augment_scale_with(const IfsCode& code, size_t index, double gamma) {
    if (index >= code.maps.size()) throw DomainError("augment_scale: index out of range");
    IfsCode out = code;
    const double smax = sigma_max(code.maps[index].a);
    if (smax > 0.0) gamma = std::min(gamma, 1.0 / smax);
    auto& m = out.maps[index];
    for (double& v : m.a) v *= gamma;
    for (double& v : m.b) v *= gamma;
    out.probs = determinant_probabilities(out.maps);
    return out;
}

IfsCode augment_scale(const IfsCode& code, Rng& rng) {
    if (code.maps.empty()) throw DomainError("augment_scale: empty code");
    const size_t index = rng.uniform_int(code.maps.size());
    const double gamma = rng.uniform(0.8, 1.1);
    return augment_scale_with(code, index, gamma);
}

IfsCode naive_sample_system(int n, Rng& rng) {
    if (n < 2) throw DomainError("naive_sample_system: n must be >= 2");
    IfsCode code;
    code.maps.resize(static_cast<size_t>(n));
    for (auto& m : code.maps) {
        for (double& v : m.a) v = rng.uniform(-1.0, 1.0);
        for (double& v : m.b) v = rng.uniform(-1.0, 1.0);
    }
    code.probs = determinant_probabilities(code.maps);
    return code;
}

}  // namespace fractalgen
