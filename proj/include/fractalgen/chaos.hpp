#pragma once

#include "fractalgen/rng.hpp"
#include "fractalgen/types.hpp"

namespace fractalgen {

// Random-iteration sampling of the attractor. Runs `burn_in` discarded
// warm-up steps from x0, then records k further iterates plus the point the
// recording phase starts from (k + 1 points total). Map selection consumes
// one draw per step. Throws DivergenceError as soon as ||x|| exceeds
// `divergence_radius`; throws DomainError for k <= 0.
PointSet iterate(const IfsCode& code, int k, Rng& rng,
                 std::array<double, 2> x0 = {0.0, 0.0}, int burn_in = 20,
                 double divergence_radius = 1e8);

// Tight min/max box around the points, each side expanded by pad_fraction
// of the extent. Throws DomainError on an empty set.
Region bounding_region(const PointSet& points, double pad_fraction = 0.025);

// Random scale s ~ U(scale_min, scale_max) about the region center plus a
// translation keeping the original box inside the result, so the rendered
// fractal shrinks and shifts within the frame. Draw contract: s, tx, ty.
Region jitter_region(const Region& region, Rng& rng, double scale_min = 1.0,
                     double scale_max = 1.5);

// Deterministic core of jitter_region with explicit choices.
Region jitter_region_with(const Region& region, double s, double tx, double ty);

}  // namespace fractalgen
