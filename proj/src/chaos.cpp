#include "fractalgen/chaos.hpp"

#include <algorithm>
#include <cmath>

namespace fractalgen {

PointSet iterate(const IfsCode& code, int k, Rng& rng, std::array<double, 2> x0,
                 int burn_in, double divergence_radius) {
    if (k < 1) throw DomainError("iterate: k must be >= 1");
    if (code.maps.empty() || code.probs.size() != code.maps.size())
        throw DomainError("iterate: malformed code");

    const size_t n = code.maps.size();
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        acc += code.probs[i];
        cdf[i] = acc;
    }

    const double guard = divergence_radius * divergence_radius;
    double x = x0[0], y = x0[1];

    PointSet points;
    points.xs.resize(static_cast<size_t>(k) + 1);
    points.ys.resize(static_cast<size_t>(k) + 1);
    double* out_x = points.xs.data();
    double* out_y = points.ys.data();

    // Trajectory x_0..x_{burn_in+k}; points x_{burn_in}.. are recorded, so
    // the result always holds k+1 points.
    if (burn_in == 0) {
        *out_x++ = x;
        *out_y++ = y;
    }
    const int total = burn_in + k;
    const double* cdf_data = cdf.data();
    for (int t = 1; t <= total; ++t) {
        const double u = rng.next_double() * acc;
        // Branchless scan; equivalent to advancing while u >= cdf[i].
        size_t i = 0;
        for (size_t j = 0; j + 1 < n; ++j) i += u >= cdf_data[j] ? 1 : 0;
        const auto& m = code.maps[i];
        const double nx = m.a[0] * x + m.a[1] * y + m.b[0];
        const double ny = m.a[2] * x + m.a[3] * y + m.b[1];
        x = nx;
        y = ny;
        if (!(x * x + y * y <= guard))
            throw DivergenceError("iterate: trajectory escaped guard radius (non-contractive code?)");
        if (t >= burn_in) {
            *out_x++ = x;
            *out_y++ = y;
        }
    }
    return points;
}

Region bounding_region(const PointSet& points, double pad_fraction) {
    if (points.size() == 0) throw DomainError("bounding_region: empty point set");
    Region r;
    r.x_min = *std::min_element(points.xs.begin(), points.xs.end());
    r.x_max = *std::max_element(points.xs.begin(), points.xs.end());
    r.y_min = *std::min_element(points.ys.begin(), points.ys.end());
    r.y_max = *std::max_element(points.ys.begin(), points.ys.end());
    const double px = pad_fraction * r.width();
    const double py = pad_fraction * r.height();
    r.x_min -= px;
    r.x_max += px;
    r.y_min -= py;
    r.y_max += py;
    return r;
}

Region jitter_region_with(const Region& region, double s, double tx, double ty) {
    const double cx = 0.5 * (region.x_min + region.x_max);
    const double cy = 0.5 * (region.y_min + region.y_max);
    const double hw = 0.5 * region.width() * s;
    const double hh = 0.5 * region.height() * s;
    return Region{cx - hw + tx, cx + hw + tx, cy - hh + ty, cy + hh + ty};
}

Region jitter_region(const Region& region, Rng& rng, double scale_min, double scale_max) {
    if (region.width() < 0.0 || region.height() < 0.0)
        throw DomainError("jitter_region: invalid region");
    const double s = rng.uniform(scale_min, scale_max);
    // After scaling about the center the original box has (s-1)*extent/2 of
    // slack per side; any translation within that slack keeps containment.
    const double slack_x = 0.5 * (s - 1.0) * region.width();
    const double slack_y = 0.5 * (s - 1.0) * region.height();
    const double tx = rng.uniform(-slack_x, slack_x);
    const double ty = rng.uniform(-slack_y, slack_y);
    return jitter_region_with(region, s, tx, ty);
}

}  // namespace fractalgen
