#pragma once

#include "fractalgen/rng.hpp"
#include "fractalgen/types.hpp"

namespace fractalgen {

enum class RasterMode { kBinary, kDensity };

// Splats every point into a side x side grid over `region`. Point (x, y)
// lands on pixel (col, row) = floor((x - x_min) / width * side) clamped to
// [0, side-1], same for y; a degenerate axis maps to the center. With a
// patch, each set bit increments the corresponding neighbor, out-of-bounds
// bits clipped. Density mode accumulates counts, binary mode yields {0,1}.
// Throws DomainError for side < 8.
GrayImage rasterize(const PointSet& points, const Region& region, int side,
                    const Patch3x3* patch, RasterMode mode);

// Scales to [0, 1] by dividing by the max; an all-zero image is unchanged.
GrayImage normalize_density(const GrayImage& img);

struct Colorized {
    RgbImage image;
    Mask mask;  // 1 where the input density was > 0
};

// Hue per pixel is (h + round(255 * gray)) mod 256 on a 256-step wheel;
// saturation and value are global. Standard 6-sector HSV -> RGB with hue
// scaled by 360/256. gray must be normalized to [0, 1].
Colorized colorize(const GrayImage& gray, int h, double s, double v);

// The 256-entry table colorize indexes with round(255 * gray): entry g is
// the RGB of hue (h + g) mod 256 at the given saturation and value.
std::array<std::array<uint8_t, 3>, 256> hue_lut(int h, double s, double v);

// Midpoint-displacement texture. size must be 2^k + 1. Corners seeded
// U(0, 1); each subdivision level displaces by U(-amp, amp) with amp
// starting at 1 and multiplied by gamma per level; output is min-max
// normalized to [0, 1]. Draw contract: 4 corner draws, then per level the
// diamond pass then the square pass, each row-major.
GrayImage diamond_square(int size, double gamma, Rng& rng);

// Diamond-square texture colorized like a fractal: gamma ~ U(0.4, 0.8),
// then h ~ U{0..255}, s ~ U(0.3, 1), v ~ U(0.5, 1). The texture is
// generated at the smallest 2^k + 1 >= side and cropped top-left.
RgbImage render_background(int side, Rng& rng);

// fg where mask is set, bg elsewhere. Throws DomainError on size mismatch.
RgbImage composite(const RgbImage& fg, const Mask& mask, const RgbImage& bg);

RgbImage flip_horizontal(const RgbImage& img);
RgbImage flip_vertical(const RgbImage& img);
RgbImage rotate90(const RgbImage& img, int quarter_turns);

// Separable Gaussian blur, kernel truncated at 2*sigma, clamp-to-edge.
// sigma below 1e-6 is the identity.
RgbImage gaussian_blur(const RgbImage& img, double sigma);

// Grayscale stage of the single-instance pipeline: iterate, bound, jitter,
// splat with a per-image random patch, normalize. Draw contract: iterate
// draws, jitter (3), patch (one draw per attempt, redrawn while all-zero).
GrayImage render_gray(const IfsCode& code, const RenderConfig& cfg, Rng& rng);

// Color stage: colorize over a fresh random background with random flips
// and a 90-degree rotation; optionally a final Gaussian blur. Draw
// contract: h, s, v, background draws, hflip, vflip, rotation, blur sigma.
RgbImage finalize_color(const GrayImage& gray, const RenderConfig& cfg, Rng& rng,
                        bool with_blur = true);

// Full single-instance image: render_gray then finalize_color.
RgbImage render_single(const IfsCode& code, const RenderConfig& cfg, Rng& rng);

}  // namespace fractalgen
