#include <set>
#include <sstream>

#include "doctest.h"
#include "fractalgen/sampler.hpp"
#include "fractalgen/stream.hpp"

using namespace fractalgen;

namespace {

DatasetSpec small_spec(uint32_t classes, int side, int iterations) {
    DatasetSpec spec;
    spec.master_seed = 0xC0FFEE;
    spec.render.side = side;
    spec.render.sprite_side = side / 2;
    spec.render.iterations = iterations;
    Rng rng(1);
    for (uint32_t c = 0; c < classes; ++c)
        spec.classes.push_back({sample_system(2 + static_cast<int>(rng.uniform_int(3)), 1.0, rng)});
    return spec;
}

BatchRequest multiclass_req(uint32_t batch, int side, uint64_t cursor = 0) {
    BatchRequest req;
    req.mode = BatchRequest::Mode::kMulticlass;
    req.batch_size = batch;
    req.side = side;
    req.cursor = cursor;
    return req;
}

BatchRequest multiinstance_req(uint32_t batch, int side, uint64_t cursor = 0) {
    BatchRequest req;
    req.mode = BatchRequest::Mode::kMultiInstance;
    req.batch_size = batch;
    req.side = side;
    req.cursor = cursor;
    return req;
}

}  // namespace

TEST_CASE("cache ring evicts FIFO and snapshots bucket by class") {
    RenderCache cache(4, 2, 100);
    for (uint32_t i = 0; i < 6; ++i) cache.insert_sprite(i % 3, GrayImage(8));
    CHECK(cache.size() == 4);
    auto snap = cache.snapshot();
    // entries 2,3,4,5 survive: classes 2,0,1,2
    REQUIRE(snap->entries.size() == 4);
    CHECK(snap->entries[0]->class_id == 2);
    CHECK(snap->entries[3]->class_id == 2);
    CHECK(snap->distinct_classes() == 3);

    size_t bucketed = 0;
    for (const auto& bucket : snap->class_buckets) bucketed += bucket.size();
    CHECK(bucketed == 4);
}

TEST_CASE("snapshots are immutable views") {
    RenderCache cache(2, 1, 10);
    cache.insert_sprite(0, GrayImage(4));
    auto before = cache.snapshot();
    cache.insert_sprite(1, GrayImage(4));
    cache.insert_sprite(2, GrayImage(4));
    auto after = cache.snapshot();
    CHECK(before->entries.size() == 1);
    CHECK(after->entries.size() == 2);
    CHECK(before->entries[0]->class_id == 0);
    CHECK(after->entries[0]->class_id == 1);
    CHECK(before->generation < after->generation);
}

TEST_CASE("warm fills both rings with guaranteed class coverage") {
    DatasetSpec spec = small_spec(10, 32, 2000);
    RenderCache cache(16, 4, 10);
    ThreadPool pool(4);
    Rng rng(spec.master_seed);
    warm_cache(spec, cache, multiinstance_req(8, 32), rng, &pool);

    CHECK(cache.size() == 16);
    CHECK(cache.background_count() == 4);
    auto snap = cache.snapshot();
    CHECK(snap->distinct_classes() == 10);  // min(capacity, C)
    for (const auto& e : snap->entries) CHECK(e->sprite.side == 16);  // sprite_side
    for (const auto& b : snap->backgrounds) CHECK(b->side == 32);

    // warming a full cache is a no-op
    uint64_t gen = cache.generation();
    Rng rng2(99);
    warm_cache(spec, cache, multiinstance_req(8, 32), rng2, &pool);
    CHECK(cache.generation() == gen);
}

TEST_CASE("warm content does not depend on the pool") {
    DatasetSpec spec = small_spec(5, 24, 1000);
    RenderCache serial(6, 2, 5), pooled(6, 2, 5);
    Rng r1(7), r2(7);
    ThreadPool pool(8);
    warm_cache(spec, serial, multiinstance_req(4, 24), r1, nullptr);
    warm_cache(spec, pooled, multiinstance_req(4, 24), r2, &pool);
    auto a = serial.snapshot(), b = pooled.snapshot();
    REQUIRE(a->entries.size() == b->entries.size());
    for (size_t i = 0; i < a->entries.size(); ++i) {
        CHECK(a->entries[i]->class_id == b->entries[i]->class_id);
        CHECK(a->entries[i]->sprite.data == b->entries[i]->sprite.data);
    }
    REQUIRE(a->backgrounds.size() == b->backgrounds.size());
    for (size_t i = 0; i < a->backgrounds.size(); ++i)
        CHECK(a->backgrounds[i]->data == b->backgrounds[i]->data);
}

TEST_CASE("multiclass batches split half fresh, half cached") {
    DatasetSpec spec = small_spec(6, 32, 2000);
    RenderCache cache(8, 2, 6);
    Rng rng(spec.master_seed);
    warm_cache(spec, cache, multiclass_req(8, 32), rng, nullptr);

    StreamStats stats;
    Batch batch = next_batch_multiclass(spec, cache, multiclass_req(8, 32), nullptr, &stats);
    CHECK(batch.count() == 8);
    CHECK(batch.side == 32);
    CHECK(batch.images.size() == 8u * 32 * 32 * 3);
    CHECK(stats.fresh_renders == 4);
    CHECK(stats.cache_draws == 4);
    CHECK(stats.images_emitted == 8);
    for (uint32_t id : batch.class_labels) CHECK(id < 6);
}

TEST_CASE("multiclass fresh renders replace the oldest cache entries") {
    DatasetSpec spec = small_spec(6, 24, 1000);
    RenderCache cache(8, 2, 6);
    Rng rng(3);
    warm_cache(spec, cache, multiclass_req(8, 24), rng, nullptr);

    auto before = cache.snapshot();
    next_batch_multiclass(spec, cache, multiclass_req(8, 24));
    auto after = cache.snapshot();
    REQUIRE(after->entries.size() == 8);
    // oldest 4 evicted: entries 4..7 of the old snapshot slide to the front
    for (int i = 0; i < 4; ++i)
        CHECK(after->entries[i].get() == before->entries[i + 4].get());
}

TEST_CASE("multiclass rejects odd batches and cold caches") {
    DatasetSpec spec = small_spec(4, 24, 500);
    RenderCache cache(8, 2, 4);
    CHECK_THROWS_AS(next_batch_multiclass(spec, cache, multiclass_req(7, 24)), DomainError);
    CHECK_THROWS_AS(next_batch_multiclass(spec, cache, multiclass_req(8, 24)), NotReadyError);
}

TEST_CASE("multiclass batches are deterministic and pool-independent") {
    DatasetSpec spec = small_spec(5, 24, 1000);
    ThreadPool pool(8);

    auto run = [&](ThreadPool* p) {
        RenderCache cache(6, 2, 5);
        Rng rng(11);
        warm_cache(spec, cache, multiclass_req(4, 24), rng, p);
        Batch b0 = next_batch_multiclass(spec, cache, multiclass_req(4, 24, 0), p);
        Batch b1 = next_batch_multiclass(spec, cache, multiclass_req(4, 24, 4), p);
        b0.images.insert(b0.images.end(), b1.images.begin(), b1.images.end());
        b0.class_labels.insert(b0.class_labels.end(), b1.class_labels.begin(),
                               b1.class_labels.end());
        return b0;
    };
    Batch serial = run(nullptr);
    Batch pooled = run(&pool);
    CHECK(serial.images == pooled.images);
    CHECK(serial.class_labels == pooled.class_labels);
}

TEST_CASE("distinct cursors give distinct batches") {
    DatasetSpec spec = small_spec(5, 24, 1000);
    RenderCache cache(6, 2, 5);
    Rng rng(13);
    warm_cache(spec, cache, multiclass_req(4, 24), rng, nullptr);
    Batch a = next_batch_multiclass(spec, cache, multiclass_req(4, 24, 0));
    Batch b = next_batch_multiclass(spec, cache, multiclass_req(4, 24, 100));
    CHECK(a.images != b.images);
}

TEST_CASE("multi-instance refresh cadence is exact") {
    DatasetSpec spec = small_spec(8, 32, 1000);
    spec.stream.refresh_period = 2;
    RenderCache cache(12, 3, 8);
    Rng rng(17);
    warm_cache(spec, cache, multiinstance_req(10, 32), rng, nullptr);

    StreamStats stats;
    next_batch_multiinstance(spec, cache, multiinstance_req(10, 32, 0), nullptr, &stats);
    CHECK(stats.images_emitted == 10);
    CHECK(stats.cache_refreshes == 5);  // indices 0,2,4,6,8
    CHECK(stats.fresh_renders == 5);

    // continuing from cursor 10: indices 10..19 refresh at 10,12,...,18
    next_batch_multiinstance(spec, cache, multiinstance_req(10, 32, 10), nullptr, &stats);
    CHECK(stats.cache_refreshes == 10);

    // odd cursor window 21..25 refreshes at 22, 24
    StreamStats odd;
    next_batch_multiinstance(spec, cache, multiinstance_req(5, 32, 21), nullptr, &odd);
    CHECK(odd.cache_refreshes == 2);
}

TEST_CASE("multi-instance labels are valid multi-hot vectors") {
    DatasetSpec spec = small_spec(8, 32, 1000);
    RenderCache cache(12, 3, 8);
    Rng rng(19);
    warm_cache(spec, cache, multiinstance_req(16, 32), rng, nullptr);

    Batch batch = next_batch_multiinstance(spec, cache, multiinstance_req(16, 32));
    REQUIRE(batch.multi_labels.size() == 16);
    for (const MultiLabel& label : batch.multi_labels) {
        CHECK(label.bits.size() == 8);
        int pop = label.popcount();
        CHECK(pop >= 1);
        CHECK(pop <= spec.stream.max_instances);
    }
}

TEST_CASE("multi-instance batches are deterministic and pool-independent") {
    DatasetSpec spec = small_spec(8, 32, 800);
    ThreadPool pool(8);

    auto run = [&](ThreadPool* p) {
        RenderCache cache(10, 3, 8);
        Rng rng(23);
        warm_cache(spec, cache, multiinstance_req(12, 32), rng, p);
        return next_batch_multiinstance(spec, cache, multiinstance_req(12, 32), p);
    };
    Batch serial = run(nullptr);
    Batch pooled = run(&pool);
    CHECK(serial.images == pooled.images);
    REQUIRE(serial.multi_labels.size() == pooled.multi_labels.size());
    for (size_t i = 0; i < serial.multi_labels.size(); ++i)
        CHECK(serial.multi_labels[i].bits == pooled.multi_labels[i].bits);
}

TEST_CASE("multi-instance requires a warm cache") {
    DatasetSpec spec = small_spec(8, 32, 500);
    RenderCache cache(10, 3, 8);
    CHECK_THROWS_AS(next_batch_multiinstance(spec, cache, multiinstance_req(4, 32)),
                    NotReadyError);
}

TEST_CASE("batch frames round-trip through the wire format") {
    DatasetSpec spec = small_spec(6, 24, 800);
    RenderCache cache(8, 2, 6);
    Rng rng(29);
    warm_cache(spec, cache, multiinstance_req(6, 24), rng, nullptr);

    SUBCASE("multiclass ids") {
        RenderCache mc(8, 2, 6);
        Rng r2(31);
        warm_cache(spec, mc, multiclass_req(6, 24), r2, nullptr);
        Batch batch = next_batch_multiclass(spec, mc, multiclass_req(6, 24));
        std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
        write_batch(buf, batch);
        Batch back = read_batch(buf, batch.num_classes);
        CHECK(back.images == batch.images);
        CHECK(back.class_labels == batch.class_labels);
        CHECK(back.side == batch.side);
    }
    SUBCASE("multi-instance bitsets") {
        Batch batch = next_batch_multiinstance(spec, cache, multiinstance_req(5, 24));
        std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
        write_batch(buf, batch);
        Batch back = read_batch(buf, batch.num_classes);
        CHECK(back.images == batch.images);
        REQUIRE(back.multi_labels.size() == batch.multi_labels.size());
        for (size_t i = 0; i < back.multi_labels.size(); ++i)
            CHECK(back.multi_labels[i].bits == batch.multi_labels[i].bits);
    }
    SUBCASE("corrupt magic rejected") {
        std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
        buf << "JUNKJUNKJUNK";
        CHECK_THROWS_AS(read_batch(buf, 6), CorruptFileError);
    }
}
