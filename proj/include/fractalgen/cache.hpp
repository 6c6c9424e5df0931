#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>

#include "fractalgen/types.hpp"

namespace fractalgen {

struct SpriteEntry {
    uint32_t class_id = 0;
    GrayImage sprite;  // normalized density, cache resolution
};

// Immutable view over the cache contents. Entries are shared, so a snapshot
// is a handful of pointer copies; sprites are never mutated after insertion.
// Readers compose against a snapshot while the maintainer keeps inserting;
// an entry can therefore never be served and evicted in the same step.
struct CacheSnapshot {
    std::vector<std::shared_ptr<const SpriteEntry>> entries;
    std::vector<std::shared_ptr<const RgbImage>> backgrounds;
    uint32_t num_classes = 0;
    uint64_t generation = 0;

    // Distinct class ids present, with the entry indices holding each class.
    std::vector<uint32_t> class_ids;
    std::vector<std::vector<uint32_t>> class_buckets;

    size_t distinct_classes() const { return class_ids.size(); }
};

// FIFO ring of grayscale sprites plus a smaller ring of rendered
// backgrounds. Thread-safe; readers take snapshots, a maintainer inserts.
class RenderCache {
public:
    RenderCache(size_t capacity, size_t background_capacity, uint32_t num_classes);
    explicit RenderCache(const StreamConfig& cfg, uint32_t num_classes)
        : RenderCache(static_cast<size_t>(cfg.cache_capacity),
                      static_cast<size_t>(cfg.background_capacity), num_classes) {}

    void insert_sprite(uint32_t class_id, GrayImage sprite);
    void insert_background(RgbImage background);

    size_t size() const;
    size_t background_count() const;
    size_t capacity() const { return capacity_; }
    size_t background_capacity() const { return background_capacity_; }
    uint32_t num_classes() const { return num_classes_; }
    uint64_t generation() const;
    size_t distinct_classes() const;

    // Rebuilds the published view only if an insert happened since the last
    // call; otherwise returns the cached one.
    std::shared_ptr<const CacheSnapshot> snapshot() const;

private:
    std::shared_ptr<const CacheSnapshot> build_snapshot_locked() const;

    size_t capacity_;
    size_t background_capacity_;
    uint32_t num_classes_;

    mutable std::mutex mu_;
    std::deque<std::shared_ptr<const SpriteEntry>> sprites_;
    std::deque<std::shared_ptr<const RgbImage>> backgrounds_;
    uint64_t generation_ = 0;
    mutable std::shared_ptr<const CacheSnapshot> published_;
    mutable bool dirty_ = true;
};

}  // namespace fractalgen
