#include "fractalgen/multi_instance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fractalgen {

int MultiLabel::popcount() const {
    return static_cast<int>(std::count(bits.begin(), bits.end(), uint8_t{1}));
}

std::vector<uint32_t> MultiLabel::class_ids() const {
    std::vector<uint32_t> ids;
    for (uint32_t c = 0; c < bits.size(); ++c)
        if (bits[c]) ids.push_back(c);
    return ids;
}

ScaledSprite scale_sprite(const RgbImage& img, const Mask& mask, double scale) {
    if (img.side <= 0) throw DomainError("empty sprite");
    if (mask.size() != static_cast<size_t>(img.side) * img.side)
        throw DomainError("mask size does not match sprite");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be positive");

    ScaledSprite out;
    out.side = std::max(1, static_cast<int>(std::lround(img.side * scale)));
    out.rgb.resize(static_cast<size_t>(out.side) * out.side * 3);
    out.mask.resize(static_cast<size_t>(out.side) * out.side);
    for (int r = 0; r < out.side; ++r) {
        int sr = std::min(img.side - 1,
                          static_cast<int>((r + 0.5) * img.side / out.side));
        for (int c = 0; c < out.side; ++c) {
            int sc = std::min(img.side - 1,
                              static_cast<int>((c + 0.5) * img.side / out.side));
            size_t di = (static_cast<size_t>(r) * out.side + c);
            size_t si = (static_cast<size_t>(sr) * img.side + sc);
            out.rgb[di * 3 + 0] = img.data[si * 3 + 0];
            out.rgb[di * 3 + 1] = img.data[si * 3 + 1];
            out.rgb[di * 3 + 2] = img.data[si * 3 + 2];
            out.mask[di] = mask[si];
        }
    }
    return out;
}

void paste_sprite(RgbImage& canvas, const ScaledSprite& sprite, int offset_x, int offset_y,
                  std::vector<int32_t>& owner, int32_t instance) {
    if (owner.size() != static_cast<size_t>(canvas.side) * canvas.side)
        throw DomainError("owner map size does not match canvas");
    int r0 = std::max(0, -offset_y);
    int r1 = std::min(sprite.side, canvas.side - offset_y);
    int c0 = std::max(0, -offset_x);
    int c1 = std::min(sprite.side, canvas.side - offset_x);
    for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
            size_t si = static_cast<size_t>(r) * sprite.side + c;
            if (!sprite.mask[si]) continue;
            size_t di = static_cast<size_t>(r + offset_y) * canvas.side + (c + offset_x);
            canvas.data[di * 3 + 0] = sprite.rgb[si * 3 + 0];
            canvas.data[di * 3 + 1] = sprite.rgb[si * 3 + 1];
            canvas.data[di * 3 + 2] = sprite.rgb[si * 3 + 2];
            owner[di] = instance;
        }
    }
}

MultiImage compose_multi(const CacheSnapshot& snap, int canvas_side, int n_max, Rng& rng) {
    if (canvas_side < 8) throw DomainError("canvas side too small");
    if (n_max < 1) throw DomainError("n_max must be at least 1");
    if (snap.distinct_classes() < static_cast<size_t>(n_max))
        throw NotReadyError("cache holds fewer distinct classes than n_max; warm the cache");
    if (snap.backgrounds.empty())
        throw NotReadyError("cache holds no backgrounds; warm the cache");

    int n = 1 + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(n_max)));
    const RgbImage& bg =
        *snap.backgrounds[rng.uniform_int(snap.backgrounds.size())];
    if (bg.side != canvas_side)
        throw DomainError("cached background side does not match canvas side");

    MultiImage out;
    out.image = bg;
    out.label.bits.assign(snap.num_classes, 0);
    std::vector<int32_t> owner(static_cast<size_t>(canvas_side) * canvas_side, -1);

    // Partial Fisher-Yates over distinct-class slots gives n distinct classes.
    std::vector<uint32_t> slots(snap.distinct_classes());
    std::iota(slots.begin(), slots.end(), 0u);

    for (int j = 0; j < n; ++j) {
        size_t pick = j + rng.uniform_int(slots.size() - j);
        std::swap(slots[j], slots[pick]);
        uint32_t slot = slots[j];
        const auto& bucket = snap.class_buckets[slot];
        const SpriteEntry& entry = *snap.entries[bucket[rng.uniform_int(bucket.size())]];

        PlacementRecord rec;
        rec.class_id = entry.class_id;
        rec.flip_h = rng.coin();
        rec.flip_v = rng.coin();
        rec.hue = static_cast<int>(rng.uniform_int(256));
        double sat = rng.uniform(0.3, 1.0);
        double val = rng.uniform(0.5, 1.0);
        rec.scale = rng.uniform(kInstanceScaleMin, kInstanceScaleMax);

        // Fused flip + colorize + nearest-neighbor scale + paste: the flips
        // and the scale are index maps, so only the visible clipped region
        // is ever touched. Pixel values match the staged
        // flip -> colorize -> scale_sprite -> paste_sprite pipeline exactly.
        const GrayImage& sprite = entry.sprite;
        const int src_side = sprite.side;
        const int scaled_side =
            std::max(1, static_cast<int>(std::lround(src_side * rec.scale)));

        double lo = -0.25 * canvas_side;
        double hi = canvas_side - 0.75 * scaled_side;
        rec.offset_x = static_cast<int>(std::lround(rng.uniform(lo, hi)));
        rec.offset_y = static_cast<int>(std::lround(rng.uniform(lo, hi)));

        const auto lut = hue_lut(rec.hue, sat, val);
        const int r0 = std::max(0, -rec.offset_y);
        const int r1 = std::min(scaled_side, canvas_side - rec.offset_y);
        const int c0 = std::max(0, -rec.offset_x);
        const int c1 = std::min(scaled_side, canvas_side - rec.offset_x);
        for (int r = r0; r < r1; ++r) {
            int sr = std::min(src_side - 1,
                              static_cast<int>((r + 0.5) * src_side / scaled_side));
            if (rec.flip_v) sr = src_side - 1 - sr;
            const float* srow = sprite.data.data() + static_cast<size_t>(sr) * src_side;
            const size_t drow = static_cast<size_t>(r + rec.offset_y) * canvas_side;
            for (int c = c0; c < c1; ++c) {
                int sc = std::min(src_side - 1,
                                  static_cast<int>((c + 0.5) * src_side / scaled_side));
                if (rec.flip_h) sc = src_side - 1 - sc;
                const float g = srow[sc];
                if (!(g > 0.0f)) continue;
                const int step =
                    static_cast<int>(std::lround(std::clamp(g, 0.0f, 1.0f) * 255.0f));
                const auto& rgb = lut[static_cast<size_t>(step)];
                const size_t di = drow + static_cast<size_t>(c + rec.offset_x);
                out.image.data[di * 3 + 0] = rgb[0];
                out.image.data[di * 3 + 1] = rgb[1];
                out.image.data[di * 3 + 2] = rgb[2];
                owner[di] = j;
            }
        }
        out.label.bits[entry.class_id] = 1;
        out.placements.push_back(rec);
    }

    for (int32_t id : owner)
        if (id >= 0) ++out.placements[static_cast<size_t>(id)].visible_pixels;
    return out;
}

MultiImage compose_multi(RenderCache& cache, int canvas_side, int n_max, Rng& rng) {
    return compose_multi(*cache.snapshot(), canvas_side, n_max, rng);
}

std::vector<float> labels_to_targets(const MultiLabel& label) {
    if (label.popcount() < 1) throw DomainError("label must have at least one class set");
    std::vector<float> targets(label.bits.size());
    for (size_t i = 0; i < label.bits.size(); ++i) targets[i] = label.bits[i] ? 1.0f : 0.0f;
    return targets;
}

MultiLabel targets_to_label(const std::vector<float>& targets) {
    MultiLabel label;
    label.bits.resize(targets.size());
    for (size_t i = 0; i < targets.size(); ++i) label.bits[i] = targets[i] > 0.5f ? 1 : 0;
    if (label.popcount() < 1) throw DomainError("targets must mark at least one class");
    return label;
}

std::vector<uint8_t> pack_label_bits(const MultiLabel& label) {
    std::vector<uint8_t> bytes((label.bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < label.bits.size(); ++i)
        if (label.bits[i]) bytes[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    return bytes;
}

MultiLabel unpack_label_bits(const std::vector<uint8_t>& bytes, uint32_t num_classes) {
    if (bytes.size() != (static_cast<size_t>(num_classes) + 7) / 8)
        throw DomainError("bitset length does not match class count");
    MultiLabel label;
    label.bits.resize(num_classes);
    for (uint32_t i = 0; i < num_classes; ++i)
        label.bits[i] = (bytes[i / 8] >> (i % 8)) & 1u;
    return label;
}

}  // namespace fractalgen
