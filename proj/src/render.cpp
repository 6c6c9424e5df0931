#include "fractalgen/render.hpp"

#include <algorithm>
#include <cmath>

#include "fractalgen/chaos.hpp"

namespace fractalgen {

namespace {

inline int map_axis(double v, double lo, double extent, int side) {
    if (extent <= 0.0) return side / 2;
    int p = static_cast<int>((v - lo) / extent * side);
    return std::clamp(p, 0, side - 1);
}

// 6-sector HSV -> RGB for a 256-step hue wheel, 8-bit output.
std::array<uint8_t, 3> hsv_to_rgb(int hue_step, double s, double v) {
    const double hp = static_cast<double>(hue_step & 255) * (6.0 / 256.0);
    const int sector = static_cast<int>(hp);
    const double f = hp - sector;
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    double r, g, b;
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    auto to8 = [](double c) {
        return static_cast<uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
    };
    return {to8(r), to8(g), to8(b)};
}

int next_pow2_plus1(int side) {
    int size = 3;
    while (size < side) size = (size - 1) * 2 + 1;
    return size;
}

}  // namespace

GrayImage rasterize(const PointSet& points, const Region& region, int side,
                    const Patch3x3* patch, RasterMode mode) {
    if (side < 8) throw DomainError("rasterize: side must be >= 8");
    GrayImage img(side);
    const double w = region.width(), h = region.height();
    const size_t count = points.size();
    if (patch == nullptr || patch->bits == (1u << 4)) {
        for (size_t i = 0; i < count; ++i) {
            const int col = map_axis(points.xs[i], region.x_min, w, side);
            const int row = map_axis(points.ys[i], region.y_min, h, side);
            img.at(row, col) += 1.0f;
        }
    } else {
        // Hoist the set bits into an offset list; a cell is hit at most once
        // per point, so enumeration order does not change the counts.
        const uint16_t bits = patch->bits & 0x1FF;
        int n_offs = 0;
        int dr[9], dc[9], lin[9];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                if ((bits >> (r * 3 + c)) & 1) {
                    dr[n_offs] = r - 1;
                    dc[n_offs] = c - 1;
                    lin[n_offs] = (r - 1) * side + (c - 1);
                    ++n_offs;
                }
        float* data = img.data.data();
        for (size_t i = 0; i < count; ++i) {
            const int col = map_axis(points.xs[i], region.x_min, w, side);
            const int row = map_axis(points.ys[i], region.y_min, h, side);
            if (row >= 1 && row < side - 1 && col >= 1 && col < side - 1) {
                const int base = row * side + col;
                for (int k = 0; k < n_offs; ++k) data[base + lin[k]] += 1.0f;
            } else {
                for (int k = 0; k < n_offs; ++k) {
                    const int rr = row + dr[k];
                    const int cc = col + dc[k];
                    if (rr >= 0 && rr < side && cc >= 0 && cc < side)
                        data[rr * side + cc] += 1.0f;
                }
            }
        }
    }
    if (mode == RasterMode::kBinary) {
        for (float& v : img.data) v = v >= 1.0f ? 1.0f : 0.0f;
    }
    return img;
}

GrayImage normalize_density(const GrayImage& img) {
    GrayImage out = img;
    const float max = *std::max_element(out.data.begin(), out.data.end());
    if (max > 0.0f) {
        for (float& v : out.data) v /= max;
    }
    return out;
}

std::array<std::array<uint8_t, 3>, 256> hue_lut(int h, double s, double v) {
    if (!(s >= 0.0 && s <= 1.0) || !(v >= 0.0 && v <= 1.0))
        throw DomainError("hue_lut: saturation and value must be in [0, 1]");
    std::array<std::array<uint8_t, 3>, 256> lut;
    for (int g = 0; g < 256; ++g) lut[g] = hsv_to_rgb(h + g, s, v);
    return lut;
}

Colorized colorize(const GrayImage& gray, int h, double s, double v) {
    // The hue offset round(255 * g) only takes 256 values, so the whole
    // conversion collapses to a lookup table per (h, s, v).
    const std::array<std::array<uint8_t, 3>, 256> lut = hue_lut(h, s, v);

    Colorized out;
    out.image = RgbImage(gray.side);
    out.mask.assign(gray.data.size(), 0);
    for (size_t i = 0; i < gray.data.size(); ++i) {
        const float g = gray.data[i];
        const int step = static_cast<int>(std::lround(std::clamp(g, 0.0f, 1.0f) * 255.0f));
        const auto& rgb = lut[static_cast<size_t>(step)];
        out.image.data[i * 3 + 0] = rgb[0];
        out.image.data[i * 3 + 1] = rgb[1];
        out.image.data[i * 3 + 2] = rgb[2];
        out.mask[i] = g > 0.0f ? 1 : 0;
    }
    return out;
}

GrayImage diamond_square(int size, double gamma, Rng& rng) {
    if (size < 3 || ((size - 1) & (size - 2)) != 0)
        throw DomainError("diamond_square: size must be 2^k + 1");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw DomainError("diamond_square: gamma must be in (0, 1)");

    GrayImage img(size);
    const int last = size - 1;
    img.at(0, 0) = static_cast<float>(rng.next_double());
    img.at(0, last) = static_cast<float>(rng.next_double());
    img.at(last, 0) = static_cast<float>(rng.next_double());
    img.at(last, last) = static_cast<float>(rng.next_double());

    double amp = 1.0;
    for (int step = last; step >= 2; step /= 2) {
        const int half = step / 2;
        // diamond: centers of squares
        for (int r = half; r < size; r += step) {
            for (int c = half; c < size; c += step) {
                const double avg = 0.25 * (img.at(r - half, c - half) + img.at(r - half, c + half) +
                                           img.at(r + half, c - half) + img.at(r + half, c + half));
                img.at(r, c) = static_cast<float>(avg + rng.uniform(-amp, amp));
            }
        }
        // square: edge midpoints, averaging the 3 or 4 diamond neighbors
        for (int r = 0; r < size; r += half) {
            for (int c = (r / half) % 2 == 0 ? half : 0; c < size; c += step) {
                double sum = 0.0;
                int cnt = 0;
                if (r - half >= 0) { sum += img.at(r - half, c); ++cnt; }
                if (r + half < size) { sum += img.at(r + half, c); ++cnt; }
                if (c - half >= 0) { sum += img.at(r, c - half); ++cnt; }
                if (c + half < size) { sum += img.at(r, c + half); ++cnt; }
                img.at(r, c) = static_cast<float>(sum / cnt + rng.uniform(-amp, amp));
            }
        }
        amp *= gamma;
    }

    const auto [lo_it, hi_it] = std::minmax_element(img.data.begin(), img.data.end());
    const float lo = *lo_it, range = *hi_it - *lo_it;
    if (range > 0.0f) {
        for (float& v : img.data) v = (v - lo) / range;
    }
    return img;
}

RgbImage render_background(int side, Rng& rng) {
    if (side < 8) throw DomainError("render_background: side must be >= 8");
    const double gamma = rng.uniform(0.4, 0.8);
    const GrayImage texture = diamond_square(next_pow2_plus1(side), gamma, rng);
    const int h = static_cast<int>(rng.uniform_int(256));
    const double s = rng.uniform(0.3, 1.0);
    const double v = rng.uniform(0.5, 1.0);
    const std::array<std::array<uint8_t, 3>, 256> lut = hue_lut(h, s, v);

    RgbImage out(side);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const float g = texture.at(r, c);
            const int step = static_cast<int>(std::lround(std::clamp(g, 0.0f, 1.0f) * 255.0f));
            const auto& rgb = lut[static_cast<size_t>(step)];
            uint8_t* px = out.px(r, c);
            px[0] = rgb[0];
            px[1] = rgb[1];
            px[2] = rgb[2];
        }
    }
    return out;
}

RgbImage composite(const RgbImage& fg, const Mask& mask, const RgbImage& bg) {
    if (fg.side != bg.side || mask.size() != fg.data.size() / 3)
        throw DomainError("composite: dimension mismatch");
    RgbImage out = bg;
    for (size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) {
            out.data[i * 3 + 0] = fg.data[i * 3 + 0];
            out.data[i * 3 + 1] = fg.data[i * 3 + 1];
            out.data[i * 3 + 2] = fg.data[i * 3 + 2];
        }
    }
    return out;
}

RgbImage flip_horizontal(const RgbImage& img) {
    RgbImage out(img.side);
    for (int r = 0; r < img.side; ++r)
        for (int c = 0; c < img.side; ++c)
            std::copy_n(img.px(r, img.side - 1 - c), 3, out.px(r, c));
    return out;
}

RgbImage flip_vertical(const RgbImage& img) {
    RgbImage out(img.side);
    for (int r = 0; r < img.side; ++r)
        for (int c = 0; c < img.side; ++c)
            std::copy_n(img.px(img.side - 1 - r, c), 3, out.px(r, c));
    return out;
}

RgbImage rotate90(const RgbImage& img, int quarter_turns) {
    const int q = ((quarter_turns % 4) + 4) % 4;
    if (q == 0) return img;
    RgbImage out(img.side);
    const int last = img.side - 1;
    for (int r = 0; r < img.side; ++r) {
        for (int c = 0; c < img.side; ++c) {
            int sr, sc;  // source pixel for out(r, c), counterclockwise turns
            switch (q) {
                case 1: sr = c; sc = last - r; break;
                case 2: sr = last - r; sc = last - c; break;
                default: sr = last - c; sc = r; break;
            }
            std::copy_n(img.px(sr, sc), 3, out.px(r, c));
        }
    }
    return out;
}

RgbImage gaussian_blur(const RgbImage& img, double sigma) {
    if (sigma < 1e-6) return img;
    const int radius = static_cast<int>(std::ceil(2.0 * sigma));
    std::vector<double> kernel(static_cast<size_t>(radius) * 2 + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[static_cast<size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += kernel[static_cast<size_t>(i + radius)];
    }
    for (double& w : kernel) w /= sum;

    const int side = img.side;
    auto clampi = [side](int v) { return std::clamp(v, 0, side - 1); };

    std::vector<float> tmp(static_cast<size_t>(side) * side * 3);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            double acc[3] = {0, 0, 0};
            for (int i = -radius; i <= radius; ++i) {
                const uint8_t* px = img.px(r, clampi(c + i));
                const double w = kernel[static_cast<size_t>(i + radius)];
                acc[0] += w * px[0];
                acc[1] += w * px[1];
                acc[2] += w * px[2];
            }
            float* t = &tmp[(static_cast<size_t>(r) * side + c) * 3];
            t[0] = static_cast<float>(acc[0]);
            t[1] = static_cast<float>(acc[1]);
            t[2] = static_cast<float>(acc[2]);
        }
    }
    RgbImage out(side);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            double acc[3] = {0, 0, 0};
            for (int i = -radius; i <= radius; ++i) {
                const float* t = &tmp[(static_cast<size_t>(clampi(r + i)) * side + c) * 3];
                const double w = kernel[static_cast<size_t>(i + radius)];
                acc[0] += w * t[0];
                acc[1] += w * t[1];
                acc[2] += w * t[2];
            }
            uint8_t* px = out.px(r, c);
            px[0] = static_cast<uint8_t>(std::lround(std::clamp(acc[0], 0.0, 255.0)));
            px[1] = static_cast<uint8_t>(std::lround(std::clamp(acc[1], 0.0, 255.0)));
            px[2] = static_cast<uint8_t>(std::lround(std::clamp(acc[2], 0.0, 255.0)));
        }
    }
    return out;
}

GrayImage render_gray(const IfsCode& code, const RenderConfig& cfg, Rng& rng) {
    const PointSet points = iterate(code, cfg.iterations, rng, {0.0, 0.0}, cfg.burn_in,
                                    cfg.divergence_radius);
    const Region tight = bounding_region(points, cfg.pad_fraction);
    const Region region = jitter_region(tight, rng, cfg.region_scale_min, cfg.region_scale_max);
    // One patch per image. The all-zero patch would label an empty image,
    // so it is redrawn (one draw per attempt).
    Patch3x3 patch;
    do {
        patch.bits = static_cast<uint16_t>(rng.uniform_int(512));
    } while (patch.bits == 0);
    const GrayImage density = rasterize(points, region, cfg.side, &patch, RasterMode::kDensity);
    return normalize_density(density);
}

RgbImage finalize_color(const GrayImage& gray, const RenderConfig& cfg, Rng& rng,
                        bool with_blur) {
    const int h = static_cast<int>(rng.uniform_int(256));
    const double s = rng.uniform(0.3, 1.0);
    const double v = rng.uniform(0.5, 1.0);
    const Colorized fg = colorize(gray, h, s, v);
    const RgbImage bg = render_background(gray.side, rng);
    RgbImage img = composite(fg.image, fg.mask, bg);
    if (rng.coin()) img = flip_horizontal(img);
    if (rng.coin()) img = flip_vertical(img);
    img = rotate90(img, static_cast<int>(rng.uniform_int(4)));
    if (with_blur) {
        const double sigma = rng.uniform(0.0, cfg.blur_sigma_max);
        img = gaussian_blur(img, sigma);
    }
    return img;
}

RgbImage render_single(const IfsCode& code, const RenderConfig& cfg, Rng& rng) {
    const GrayImage gray = render_gray(code, cfg, rng);
    return finalize_color(gray, cfg, rng, true);
}

}  // namespace fractalgen
