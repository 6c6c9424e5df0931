#pragma once

#include <cstdint>
#include <string>

#include "fractalgen/rng.hpp"
#include "fractalgen/thread_pool.hpp"
#include "fractalgen/types.hpp"

namespace fractalgen {

struct StudyRow {
    int n_maps = 0;
    uint64_t trials = 0;
    double frac_sigma_gt1 = 0.0;      // systems with any sigma_max(A_k) > 1
    double frac_avg_violation = 0.0;  // systems with prod s_k^{p_k} >= 1
};

struct StudyReport {
    std::vector<StudyRow> rows;
    std::string to_csv() const;
};

// Draws `trials` unconstrained systems (entries U(-1,1)) per map count and
// reports how often they break the two contractivity conditions. Map counts
// run in parallel on independent sub-streams derived from rng's next output,
// so the report does not depend on pool size.
StudyReport naive_sampling_study(const std::vector<int>& n_range, uint64_t trials, Rng& rng,
                                 ThreadPool* pool = nullptr);

struct Histogram {
    std::vector<uint64_t> counts;  // equal-width bins over [min_value, max_value]
    double min_value = 0.0;
    double max_value = 0.0;
    uint64_t total = 0;
    std::string to_csv() const;
};

// Histogram of per-system weighted singular-value sums. At least 10^3
// values are required for the fractions to mean anything.
Histogram sigma_factor_histogram(const std::vector<IfsCode>& codes, int bins);
Histogram sampled_sigma_factor_histogram(int n_maps, uint64_t count, int bins, Rng& rng);

struct BenchRow {
    std::string stage;
    uint64_t calls = 0;
    double mean_us = 0.0;
    double std_us = 0.0;
};

struct BenchConfig {
    uint64_t min_calls = 1000;  // per stage
    int side = 256;
    int iterations = 100000;
    std::vector<int> n_range = {2, 3, 4, 5, 6, 7, 8};
    uint64_t seed = 0x66726163;
};

struct BenchReport {
    std::string hardware;
    std::vector<BenchRow> rows;
    std::string to_csv() const;
    const BenchRow* find(const std::string& stage) const;
};

// Times each pipeline stage single-threaded after warm-up. Sub-microsecond
// stages are measured in blocks sized so one block spans at least ~20us;
// mean and std are over block averages and the clock cost shows up in the
// noop row. Stages: noop, sample_svs/sample_system per N, iterate,
// rasterize, colorize, background, render_single.
BenchReport bench_pipeline(const BenchConfig& cfg);

}  // namespace fractalgen
