#pragma once

#include <cstdint>
#include <iosfwd>

#include "fractalgen/cache.hpp"
#include "fractalgen/multi_instance.hpp"
#include "fractalgen/rng.hpp"
#include "fractalgen/thread_pool.hpp"
#include "fractalgen/types.hpp"

namespace fractalgen {

struct BatchRequest {
    enum class Mode : uint8_t { kMulticlass = 0, kMultiInstance = 1 };
    Mode mode = Mode::kMulticlass;
    uint32_t batch_size = 32;  // must be even in multiclass mode
    int side = 256;
    uint64_t cursor = 0;  // global index of the batch's first image
};

struct Batch {
    BatchRequest::Mode mode = BatchRequest::Mode::kMulticlass;
    uint32_t side = 0;
    uint32_t num_classes = 0;
    std::vector<uint8_t> images;           // batch * side * side * 3, HWC
    std::vector<uint32_t> class_labels;    // multiclass
    std::vector<MultiLabel> multi_labels;  // multi-instance

    uint32_t count() const {
        return static_cast<uint32_t>(mode == BatchRequest::Mode::kMulticlass
                                         ? class_labels.size()
                                         : multi_labels.size());
    }
    const uint8_t* image(uint32_t i) const {
        return images.data() + static_cast<size_t>(i) * side * side * 3;
    }
};

struct StreamStats {
    uint64_t images_emitted = 0;
    uint64_t fresh_renders = 0;    // full fractal renders (chaos game + raster)
    uint64_t cache_draws = 0;      // images built from a cached sprite
    uint64_t cache_refreshes = 0;  // multi-instance sprite+background refresh events
};

// Fills the sprite ring (at the request's working resolution: full side for
// multiclass, sprite_side for multi-instance) and the background ring.
// Entry i covers class i mod C, so min(capacity, C) distinct classes are
// guaranteed. No-op when both rings are already full. Content is derived
// from rng's next output, independent of pool size or scheduling.
void warm_cache(const DatasetSpec& spec, RenderCache& cache, const BatchRequest& req, Rng& rng,
                ThreadPool* pool = nullptr);

// Half the batch is rendered fresh (then replaces the oldest cache entries),
// half re-dresses cached sprites: new hue, flips, rotation, fresh background,
// blur. Image i of the batch depends only on (master_seed, cursor + i) and
// the cache snapshot taken at batch start, so output bytes do not depend on
// worker count.
Batch next_batch_multiclass(const DatasetSpec& spec, RenderCache& cache, const BatchRequest& req,
                            ThreadPool* pool = nullptr, StreamStats* stats = nullptr);

// Every refresh_period images (counted by global index), one fresh sprite
// and one fresh background enter the cache; each image is compose_multi over
// the snapshot current at its index. Refresh content depends only on
// (master_seed, image index), so refreshes are precomputed in parallel and
// applied in order.
Batch next_batch_multiinstance(const DatasetSpec& spec, RenderCache& cache,
                               const BatchRequest& req, ThreadPool* pool = nullptr,
                               StreamStats* stats = nullptr);

// Batch stream framing, little-endian: magic "FBAT", u32 version=1,
// u32 batch, u32 side, u8 channels=3, u8 mode, u16 reserved=0, raw HWC u8
// images, then labels (mode 0: u32 class ids; mode 1: per-image C-bit
// little-endian bitset padded to a byte). Mode-1 frames need the class
// count from the dataset manifest to be read back.
inline constexpr uint32_t kBatchFormatVersion = 1;

void write_batch(std::ostream& out, const Batch& batch);
Batch read_batch(std::istream& in, uint32_t num_classes);

}  // namespace fractalgen
