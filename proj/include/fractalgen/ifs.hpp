#pragma once

#include <utility>

#include "fractalgen/types.hpp"

namespace fractalgen {

inline constexpr double kContractTol = 1e-9;

// Closed-form singular values of a 2x2 matrix, descending. Uses the two
// invariants trace(A^T A) and det(A^T A); tiny negative radicands from
// rounding are clamped to zero. Throws DomainError on non-finite entries.
std::pair<double, double> singular_values(const std::array<double, 4>& a);

double sigma_max(const std::array<double, 4>& a);

inline double det2(const std::array<double, 4>& a) { return a[0] * a[3] - a[1] * a[2]; }

// A = R_theta * diag(sigma1, sigma2) * R_phi * diag(d1, d2).
std::array<double, 4> compose_from_svd(const SvdParams& p);

// Weighted singular-value sum  sum_i (sigma_i1 + 2 sigma_i2)  over all maps.
double sigma_factor(const IfsCode& code);

// True iff every map satisfies sigma_max <= 1 + tol.
bool is_contractive(const IfsCode& code, double tol = kContractTol);

// Weighted geometric mean  prod_i s_i^{p_i}  with s_i = sigma_max(A_i).
// The system is average-contractive iff the result is < 1. A zero s_i with
// positive weight contributes factor 0.
double average_contractivity(const IfsCode& code);

// p_i = |det A_i| / sum_j |det A_j|. Falls back to uniform when every
// determinant magnitude is below 1e-12.
std::vector<double> determinant_probabilities(const std::vector<AffineMap>& maps);

// Full validity predicate used by the codec: N >= 2, finite entries,
// nonnegative probs summing to 1 within 1e-9, all maps contractive.
bool code_is_valid(const IfsCode& code, double tol = kContractTol);

}  // namespace fractalgen
