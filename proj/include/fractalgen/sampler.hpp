#pragma once

#include "fractalgen/rng.hpp"
#include "fractalgen/types.hpp"

namespace fractalgen {

// N rows of (sigma1, sigma2) with 0 <= sigma2 <= sigma1 <= 1 per row and a
// prescribed weighted sum  sum (sigma1 + 2 sigma2).
using SvArray = std::vector<std::array<double, 2>>;

// Samples singular values so the weighted sum hits `alpha` exactly, one
// value at a time with running feasibility bounds. Draw contract: two draws
// per row for rows 1..N-1, one draw for the final row (2N-1 total).
// Throws DomainError unless n >= 2 and 0 <= alpha <= 3n.
SvArray sample_svs(int n, double alpha, Rng& rng);

// Samples a full contractive system of n maps. Draw contract, in order:
// alpha (1 draw), sample_svs (2n-1 draws), then per map theta, phi, d1, d2,
// b_x, b_y (6 draws each). The target weighted singular-value sum is drawn
// from U((5+n)/2, (6+n)/2); translations are bounded by |b| <= b_bound.
// Selection probabilities are determinant-proportional.
IfsCode sample_system(int n, double b_bound, Rng& rng);

// Uniform draw from a configured set of system sizes. One draw.
int sample_system_size(const std::vector<int>& sizes, Rng& rng);

inline const std::vector<int>& default_system_sizes() {
    static const std::vector<int> sizes{2, 3, 4};
    return sizes;
}

// Scales one uniformly chosen transform (A_k, b_k) by gamma ~ U(0.8, 1.1),
// clamped so sigma_max(gamma A_k) stays <= 1, and recomputes selection
// probabilities. Draw contract: map index, then gamma (2 draws).
IfsCode augment_scale(const IfsCode& code, Rng& rng);

// Deterministic core of augment_scale with explicit choices.
IfsCode augment_scale_with(const IfsCode& code, size_t index, double gamma);

// Unconstrained baseline: all six parameters of every map i.i.d. U(-1, 1),
// determinant-proportional probabilities, no contractivity enforcement.
// Draw contract: per map a00, a01, a10, a11, b_x, b_y. Study use only.
IfsCode naive_sample_system(int n, Rng& rng);

}  // namespace fractalgen
