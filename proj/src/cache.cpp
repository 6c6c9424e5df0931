#include "fractalgen/cache.hpp"

#include <algorithm>

namespace fractalgen {

RenderCache::RenderCache(size_t capacity, size_t background_capacity, uint32_t num_classes)
    : capacity_(capacity), background_capacity_(background_capacity), num_classes_(num_classes) {
    if (capacity == 0 || background_capacity == 0)
        throw DomainError("cache capacities must be positive");
}

void RenderCache::insert_sprite(uint32_t class_id, GrayImage sprite) {
    if (class_id >= num_classes_) throw DomainError("sprite class id out of range");
    auto entry = std::make_shared<SpriteEntry>();
    entry->class_id = class_id;
    entry->sprite = std::move(sprite);
    std::lock_guard<std::mutex> lock(mu_);
    sprites_.push_back(std::move(entry));
    if (sprites_.size() > capacity_) sprites_.pop_front();
    ++generation_;
    dirty_ = true;
}

void RenderCache::insert_background(RgbImage background) {
    auto bg = std::make_shared<RgbImage>(std::move(background));
    std::lock_guard<std::mutex> lock(mu_);
    backgrounds_.push_back(std::move(bg));
    if (backgrounds_.size() > background_capacity_) backgrounds_.pop_front();
    ++generation_;
    dirty_ = true;
}

size_t RenderCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return sprites_.size();
}

size_t RenderCache::background_count() const {
    std::lock_guard<std::mutex> lock(mu_);
    return backgrounds_.size();
}

uint64_t RenderCache::generation() const {
    std::lock_guard<std::mutex> lock(mu_);
    return generation_;
}

size_t RenderCache::distinct_classes() const { return snapshot()->distinct_classes(); }

std::shared_ptr<const CacheSnapshot> RenderCache::snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (dirty_ || !published_) {
        published_ = build_snapshot_locked();
        dirty_ = false;
    }
    return published_;
}

std::shared_ptr<const CacheSnapshot> RenderCache::build_snapshot_locked() const {
    auto snap = std::make_shared<CacheSnapshot>();
    snap->entries.assign(sprites_.begin(), sprites_.end());
    snap->backgrounds.assign(backgrounds_.begin(), backgrounds_.end());
    snap->num_classes = num_classes_;
    snap->generation = generation_;

    // Bucket entry indices by class, buckets ordered by first appearance.
    std::vector<int32_t> slot_of_class(num_classes_, -1);
    for (uint32_t i = 0; i < snap->entries.size(); ++i) {
        uint32_t cls = snap->entries[i]->class_id;
        int32_t slot = slot_of_class[cls];
        if (slot < 0) {
            slot = static_cast<int32_t>(snap->class_ids.size());
            slot_of_class[cls] = slot;
            snap->class_ids.push_back(cls);
            snap->class_buckets.emplace_back();
        }
        snap->class_buckets[static_cast<size_t>(slot)].push_back(i);
    }
    return snap;
}

}  // namespace fractalgen
