#include "fractalgen/stream.hpp"

#include <cstring>
#include <istream>
#include <ostream>

#include "fractalgen/render.hpp"

namespace fractalgen {

namespace {

void validate_spec(const DatasetSpec& spec, const RenderCache& cache) {
    if (spec.classes.empty()) throw DomainError("dataset has no classes");
    if (cache.num_classes() != spec.classes.size())
        throw DomainError("cache class count does not match dataset");
    for (const auto& group : spec.classes)
        if (group.empty()) throw DomainError("dataset has an empty class group");
}

struct FreshRender {
    uint32_t class_id = 0;
    GrayImage gray;
    Rng rng{0};  // positioned right after the grayscale render
};

// Renders one sprite with deterministic divergence retry: attempt a derives
// a fresh stream and redraws the code, so a rare diverging code (possible
// with externally supplied parameter files) cannot wedge generation.
FreshRender render_fresh(const DatasetSpec& spec, const RenderConfig& cfg, uint64_t stream_seed,
                         int64_t forced_class) {
    for (uint64_t attempt = 0;; ++attempt) {
        Rng r(derive_seed(stream_seed, attempt));
        uint32_t cls = forced_class >= 0
                           ? static_cast<uint32_t>(forced_class)
                           : static_cast<uint32_t>(r.uniform_int(spec.classes.size()));
        const auto& group = spec.classes[cls];
        const IfsCode& code = group[r.uniform_int(group.size())];
        try {
            GrayImage gray = render_gray(code, cfg, r);
            return {cls, std::move(gray), r};
        } catch (const DivergenceError&) {
            if (attempt >= 32) throw;
        }
    }
}

void run_indexed(ThreadPool* pool, size_t count, const std::function<void(size_t)>& body) {
    if (pool) {
        pool->parallel_for(count, body);
    } else {
        for (size_t i = 0; i < count; ++i) body(i);
    }
}

void copy_image(Batch& batch, uint32_t i, const RgbImage& img) {
    size_t stride = static_cast<size_t>(batch.side) * batch.side * 3;
    std::memcpy(batch.images.data() + i * stride, img.data.data(), stride);
}

void put_u32le(std::ostream& out, uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                 static_cast<char>(v >> 24)};
    out.write(b, 4);
}

uint32_t get_u32le(std::istream& in) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw CorruptFileError("batch stream truncated");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void warm_cache(const DatasetSpec& spec, RenderCache& cache, const BatchRequest& req, Rng& rng,
                ThreadPool* pool) {
    validate_spec(spec, cache);
    if (cache.size() == cache.capacity() &&
        cache.background_count() == cache.background_capacity())
        return;

    uint64_t base = rng.next_u64();
    uint64_t sprite_base = derive_seed(base, kWarmSprite);
    uint64_t bg_base = derive_seed(base, kWarmBackground);

    RenderConfig cfg = spec.render;
    cfg.side = req.mode == BatchRequest::Mode::kMultiInstance ? spec.render.sprite_side : req.side;

    size_t n_sprites = cache.capacity();
    size_t n_bg = cache.background_capacity();
    uint32_t num_classes = static_cast<uint32_t>(spec.classes.size());

    std::vector<FreshRender> sprites(n_sprites);
    std::vector<RgbImage> backgrounds(n_bg);
    run_indexed(pool, n_sprites + n_bg, [&](size_t i) {
        if (i < n_sprites) {
            uint32_t cls = static_cast<uint32_t>(i % num_classes);
            sprites[i] = render_fresh(spec, cfg, derive_seed(sprite_base, i), cls);
        } else {
            size_t j = i - n_sprites;
            Rng r(derive_seed(bg_base, j));
            backgrounds[j] = render_background(req.side, r);
        }
    });

    for (auto& s : sprites) cache.insert_sprite(s.class_id, std::move(s.gray));
    for (auto& b : backgrounds) cache.insert_background(std::move(b));
}

Batch next_batch_multiclass(const DatasetSpec& spec, RenderCache& cache, const BatchRequest& req,
                            ThreadPool* pool, StreamStats* stats) {
    if (req.mode != BatchRequest::Mode::kMulticlass)
        throw DomainError("request mode is not multiclass");
    if (req.batch_size == 0 || req.batch_size % 2 != 0)
        throw DomainError("multiclass batch size must be positive and even");
    validate_spec(spec, cache);

    uint32_t half = req.batch_size / 2;
    auto snap = cache.snapshot();
    if (snap->entries.size() < half)
        throw NotReadyError("cache too cold for this batch size; run warm_cache first");

    RenderConfig cfg = spec.render;
    cfg.side = req.side;
    uint64_t image_base = derive_seed(spec.master_seed, kStreamImage);

    Batch batch;
    batch.mode = req.mode;
    batch.side = static_cast<uint32_t>(req.side);
    batch.num_classes = static_cast<uint32_t>(spec.classes.size());
    batch.images.resize(static_cast<size_t>(req.batch_size) * req.side * req.side * 3);
    batch.class_labels.resize(req.batch_size);

    std::vector<FreshRender> fresh(half);
    run_indexed(pool, req.batch_size, [&](size_t i) {
        uint64_t seed = derive_seed(image_base, req.cursor + i);
        if (i < half) {
            FreshRender fr = render_fresh(spec, cfg, seed, -1);
            RgbImage img = finalize_color(fr.gray, cfg, fr.rng);
            copy_image(batch, static_cast<uint32_t>(i), img);
            batch.class_labels[i] = fr.class_id;
            fresh[i] = std::move(fr);
        } else {
            Rng r(seed);
            const SpriteEntry& entry = *snap->entries[r.uniform_int(snap->entries.size())];
            if (entry.sprite.side != req.side)
                throw DomainError("cached sprite side does not match request side");
            RgbImage img = finalize_color(entry.sprite, cfg, r);
            copy_image(batch, static_cast<uint32_t>(i), img);
            batch.class_labels[i] = entry.class_id;
        }
    });

    // Fresh renders evict the oldest entries only after the whole batch was
    // served from the starting snapshot.
    for (auto& fr : fresh) cache.insert_sprite(fr.class_id, std::move(fr.gray));

    if (stats) {
        stats->images_emitted += req.batch_size;
        stats->fresh_renders += half;
        stats->cache_draws += half;
    }
    return batch;
}

Batch next_batch_multiinstance(const DatasetSpec& spec, RenderCache& cache,
                               const BatchRequest& req, ThreadPool* pool, StreamStats* stats) {
    if (req.mode != BatchRequest::Mode::kMultiInstance)
        throw DomainError("request mode is not multi-instance");
    if (req.batch_size == 0) throw DomainError("batch size must be positive");
    validate_spec(spec, cache);
    int k_p = spec.stream.refresh_period;
    int n_max = spec.stream.max_instances;
    if (k_p < 1) throw DomainError("refresh period must be at least 1");
    if (n_max < 1) throw DomainError("max instances must be at least 1");

    {
        auto snap = cache.snapshot();
        if (snap->distinct_classes() < static_cast<size_t>(n_max) || snap->backgrounds.empty())
            throw NotReadyError("cache too cold for composition; run warm_cache first");
    }

    RenderConfig sprite_cfg = spec.render;
    sprite_cfg.side = spec.render.sprite_side;
    uint64_t refresh_base = derive_seed(spec.master_seed, kRefresh);
    uint64_t image_base = derive_seed(spec.master_seed, kStreamImage);

    // Refresh payloads depend only on (seed, image index): render them all in
    // parallel, then apply in index order.
    std::vector<uint64_t> refresh_at;
    for (uint64_t g = req.cursor; g < req.cursor + req.batch_size; ++g)
        if (g % static_cast<uint64_t>(k_p) == 0) refresh_at.push_back(g);

    struct Refresh {
        FreshRender sprite;
        RgbImage background;
    };
    std::vector<Refresh> refreshes(refresh_at.size());
    run_indexed(pool, refresh_at.size(), [&](size_t i) {
        uint64_t seed = derive_seed(refresh_base, refresh_at[i]);
        refreshes[i].sprite = render_fresh(spec, sprite_cfg, seed, -1);
        refreshes[i].background = render_background(req.side, refreshes[i].sprite.rng);
    });

    std::vector<std::shared_ptr<const CacheSnapshot>> snap_of(req.batch_size);
    {
        auto current = cache.snapshot();
        size_t r = 0;
        for (uint32_t i = 0; i < req.batch_size; ++i) {
            uint64_t g = req.cursor + i;
            if (r < refresh_at.size() && refresh_at[r] == g) {
                cache.insert_sprite(refreshes[r].sprite.class_id,
                                    std::move(refreshes[r].sprite.gray));
                cache.insert_background(std::move(refreshes[r].background));
                current = cache.snapshot();
                ++r;
            }
            snap_of[i] = current;
        }
    }

    Batch batch;
    batch.mode = req.mode;
    batch.side = static_cast<uint32_t>(req.side);
    batch.num_classes = static_cast<uint32_t>(spec.classes.size());
    batch.images.resize(static_cast<size_t>(req.batch_size) * req.side * req.side * 3);
    batch.multi_labels.resize(req.batch_size);

    std::vector<uint32_t> placed(req.batch_size, 0);
    run_indexed(pool, req.batch_size, [&](size_t i) {
        Rng r(derive_seed(image_base, req.cursor + i));
        MultiImage mi = compose_multi(*snap_of[i], req.side, n_max, r);
        copy_image(batch, static_cast<uint32_t>(i), mi.image);
        batch.multi_labels[i] = std::move(mi.label);
        placed[i] = static_cast<uint32_t>(mi.placements.size());
    });

    if (stats) {
        stats->images_emitted += req.batch_size;
        stats->fresh_renders += refresh_at.size();
        stats->cache_refreshes += refresh_at.size();
        for (uint32_t n : placed) stats->cache_draws += n;
    }
    return batch;
}

void write_batch(std::ostream& out, const Batch& batch) {
    uint32_t count = batch.count();
    if (batch.images.size() != static_cast<size_t>(count) * batch.side * batch.side * 3)
        throw DomainError("batch image buffer size mismatch");
    out.write("FBAT", 4);
    put_u32le(out, kBatchFormatVersion);
    put_u32le(out, count);
    put_u32le(out, batch.side);
    char meta[4] = {3, static_cast<char>(batch.mode), 0, 0};
    out.write(meta, 4);
    out.write(reinterpret_cast<const char*>(batch.images.data()),
              static_cast<std::streamsize>(batch.images.size()));
    if (batch.mode == BatchRequest::Mode::kMulticlass) {
        for (uint32_t id : batch.class_labels) put_u32le(out, id);
    } else {
        for (const MultiLabel& label : batch.multi_labels) {
            if (label.bits.size() != batch.num_classes)
                throw DomainError("label width does not match class count");
            std::vector<uint8_t> bits = pack_label_bits(label);
            out.write(reinterpret_cast<const char*>(bits.data()),
                      static_cast<std::streamsize>(bits.size()));
        }
    }
    if (!out) throw IoError("batch write failed");
}

Batch read_batch(std::istream& in, uint32_t num_classes) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FBAT", 4) != 0)
        throw CorruptFileError("bad batch stream magic");
    if (get_u32le(in) != kBatchFormatVersion)
        throw CorruptFileError("unsupported batch stream version");
    uint32_t count = get_u32le(in);
    uint32_t side = get_u32le(in);
    char meta[4];
    in.read(meta, 4);
    if (!in) throw CorruptFileError("batch stream truncated");
    if (meta[0] != 3) throw CorruptFileError("unsupported channel count");
    if (meta[1] != 0 && meta[1] != 1) throw CorruptFileError("unknown batch mode");

    Batch batch;
    batch.mode = static_cast<BatchRequest::Mode>(meta[1]);
    batch.side = side;
    batch.num_classes = num_classes;
    batch.images.resize(static_cast<size_t>(count) * side * side * 3);
    in.read(reinterpret_cast<char*>(batch.images.data()),
            static_cast<std::streamsize>(batch.images.size()));
    if (!in) throw CorruptFileError("batch stream truncated");
    if (batch.mode == BatchRequest::Mode::kMulticlass) {
        batch.class_labels.resize(count);
        for (uint32_t i = 0; i < count; ++i) batch.class_labels[i] = get_u32le(in);
    } else {
        size_t label_bytes = (static_cast<size_t>(num_classes) + 7) / 8;
        std::vector<uint8_t> buf(label_bytes);
        batch.multi_labels.reserve(count);
        for (uint32_t i = 0; i < count; ++i) {
            in.read(reinterpret_cast<char*>(buf.data()),
                    static_cast<std::streamsize>(label_bytes));
            if (!in) throw CorruptFileError("batch stream truncated");
            batch.multi_labels.push_back(unpack_label_bits(buf, num_classes));
        }
    }
    return batch;
}

}  // namespace fractalgen
