#pragma once

#include <cstdint>
#include <stdexcept>

namespace fractalgen {

// Counter-based splittable generator (SplitMix64, Steele/Lea/Flood 2014).
// The byte-level draw contract below is part of the dataset file format:
// datasets are defined by (seed, config), so consumers regenerating images
// must observe identical streams.
//
//   state_{t+1} = state_t + 0x9E3779B97F4A7C15
//   output_t    = mix(state_{t+1})        (the murmur-style finalizer below)
//
// Every sampling call documented as "one draw" consumes exactly one 64-bit
// output, whether or not the target interval is degenerate.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution. One draw.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi). One draw. lo == hi returns lo.
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n). One draw (multiply-shift reduction; the
    // O(n/2^64) bias is far below anything our statistics can see).
    uint64_t uniform_int(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool coin() { return uniform_int(2) != 0; }

    int sign() { return coin() ? 1 : -1; }

    uint64_t state() const { return state_; }

private:
    uint64_t state_;
};

// Substream derivation. Streams for parallel work are keyed by purpose and
// index so results do not depend on scheduling:
//
//   child_seed = mix64(parent_seed ^ (key + 0x9E3779B97F4A7C15) * 0xC2B2AE3D27D4EB4F)
//
// where mix64 is the SplitMix64 finalizer. Chain derive_seed calls to build
// a path, e.g. derive_seed(derive_seed(master, kStreamImage), image_index).
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t parent, uint64_t key) {
    return mix64(parent ^ ((key + 0x9E3779B97F4A7C15ull) * 0xC2B2AE3D27D4EB4Full));
}

// Stream-purpose keys. Values are frozen; changing them changes every
// dataset regenerated from a manifest.
enum StreamKey : uint64_t {
    kSampleSystem = 1,  // dataset sampling, per (class, code) flat index
    kRenderImage = 2,   // single-image rendering, per image index
    kWarmSprite = 3,    // cache warm-up sprites, per slot
    kWarmBackground = 4,
    kRefresh = 5,       // steady-state cache refreshes, per refresh index
    kStreamImage = 6,   // streamed images, per global image index
    kAugment = 7,       // parameter augmentation, per (class, code) index
};

}  // namespace fractalgen
