#pragma once

#include <cstdint>

#include "fractalgen/cache.hpp"
#include "fractalgen/render.hpp"
#include "fractalgen/rng.hpp"
#include "fractalgen/types.hpp"

namespace fractalgen {

// Multi-hot presence label: bits[c] == 1 iff class c was placed, even when
// the placement ended up fully occluded or fully off-canvas. Visibility is
// recorded per placement so consumers can filter.
struct MultiLabel {
    std::vector<uint8_t> bits;  // length C, values 0/1

    int popcount() const;
    std::vector<uint32_t> class_ids() const;  // set bits, ascending
};

struct PlacementRecord {
    uint32_t class_id = 0;
    double scale = 1.0;
    int offset_x = 0;  // top-left, may be negative or beyond the canvas
    int offset_y = 0;
    bool flip_h = false;
    bool flip_v = false;
    int hue = 0;
    uint64_t visible_pixels = 0;  // after occlusion by later placements
};

struct MultiImage {
    RgbImage image;
    MultiLabel label;
    std::vector<PlacementRecord> placements;
};

inline constexpr double kInstanceScaleMin = 0.5;
inline constexpr double kInstanceScaleMax = 1.5;

// Sprite after colorization and nearest-neighbor rescale.
struct ScaledSprite {
    int side = 0;
    std::vector<uint8_t> rgb;  // HWC
    Mask mask;
};

ScaledSprite scale_sprite(const RgbImage& img, const Mask& mask, double scale);

// Paints masked pixels at (offset_x, offset_y), clipping to the canvas.
// owner[i] is set to instance for every painted pixel, which is what makes
// occlusion accounting exact: a pixel belongs to the last instance that
// painted it.
void paste_sprite(RgbImage& canvas, const ScaledSprite& sprite, int offset_x, int offset_y,
                  std::vector<int32_t>& owner, int32_t instance);

// Composes n ~ U{1..n_max} fractals over a cached background. Draw order,
// fixed per instance: class slot, cache entry within class, horizontal flip,
// vertical flip, hue, saturation, value, scale, x offset, y offset; before
// the instance loop: n, background index. Later placements occlude earlier
// ones. Offsets are uniform over [-side/4, side - 3*sprite/4] per axis, so
// placements may hang off the canvas.
MultiImage compose_multi(const CacheSnapshot& snap, int canvas_side, int n_max, Rng& rng);
MultiImage compose_multi(RenderCache& cache, int canvas_side, int n_max, Rng& rng);

// Dense 0/1 target vector for training consumers. Errors on an empty label.
std::vector<float> labels_to_targets(const MultiLabel& label);
MultiLabel targets_to_label(const std::vector<float>& targets);

// C-bit little-endian bitset, LSB-first within each byte, padded to a whole
// byte. The batch stream's on-wire label layout.
std::vector<uint8_t> pack_label_bits(const MultiLabel& label);
MultiLabel unpack_label_bits(const std::vector<uint8_t>& bytes, uint32_t num_classes);

}  // namespace fractalgen
