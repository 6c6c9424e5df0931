#include "fractalgen/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "fractalgen/chaos.hpp"
#include "fractalgen/ifs.hpp"
#include "fractalgen/render.hpp"
#include "fractalgen/sampler.hpp"

namespace fractalgen {

std::string StudyReport::to_csv() const {
    std::ostringstream out;
    out << "n_maps,trials,frac_sigma_gt1,frac_avg_violation\n";
    for (const StudyRow& r : rows) {
        char line[128];
        std::snprintf(line, sizeof(line), "%d,%llu,%.6f,%.6f\n", r.n_maps,
                      static_cast<unsigned long long>(r.trials), r.frac_sigma_gt1,
                      r.frac_avg_violation);
        out << line;
    }
    return out.str();
}

StudyReport naive_sampling_study(const std::vector<int>& n_range, uint64_t trials, Rng& rng,
                                 ThreadPool* pool) {
    if (n_range.empty()) throw DomainError("empty map-count range");
    for (int n : n_range)
        if (n < 2) throw DomainError("map count must be at least 2");
    if (trials == 0) throw DomainError("trials must be positive");

    uint64_t base = rng.next_u64();
    StudyReport report;
    report.rows.resize(n_range.size());

    auto run_one = [&](size_t i) {
        int n = n_range[i];
        Rng r(derive_seed(base, static_cast<uint64_t>(n)));
        uint64_t sigma_gt1 = 0;
        uint64_t avg_violation = 0;
        for (uint64_t t = 0; t < trials; ++t) {
            IfsCode code = naive_sample_system(n, r);
            bool any_expanding = false;
            for (const AffineMap& m : code.maps)
                if (sigma_max(m.a) > 1.0) {
                    any_expanding = true;
                    break;
                }
            if (any_expanding) ++sigma_gt1;
            if (average_contractivity(code) >= 1.0) ++avg_violation;
        }
        report.rows[i] = {n, trials, static_cast<double>(sigma_gt1) / trials,
                          static_cast<double>(avg_violation) / trials};
    };

    if (pool) {
        pool->parallel_for(n_range.size(), run_one);
    } else {
        for (size_t i = 0; i < n_range.size(); ++i) run_one(i);
    }
    return report;
}

std::string Histogram::to_csv() const {
    std::ostringstream out;
    char head[128];
    std::snprintf(head, sizeof(head), "# min=%.6f max=%.6f total=%llu\n", min_value, max_value,
                  static_cast<unsigned long long>(total));
    out << head << "bin_lo,bin_hi,count\n";
    double width = counts.empty() ? 0.0 : (max_value - min_value) / counts.size();
    for (size_t i = 0; i < counts.size(); ++i) {
        char line[128];
        std::snprintf(line, sizeof(line), "%.6f,%.6f,%llu\n", min_value + width * i,
                      min_value + width * (i + 1), static_cast<unsigned long long>(counts[i]));
        out << line;
    }
    return out.str();
}

namespace {

Histogram histogram_of(const std::vector<double>& values, int bins) {
    if (bins < 1) throw DomainError("bin count must be positive");
    if (values.size() < 1000) throw DomainError("need at least 1000 values for a histogram");
    Histogram h;
    h.counts.assign(static_cast<size_t>(bins), 0);
    h.total = values.size();
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    h.min_value = *lo_it;
    h.max_value = *hi_it;
    double width = h.max_value - h.min_value;
    for (double v : values) {
        size_t b = width > 0.0
                       ? std::min(static_cast<size_t>(bins - 1),
                                  static_cast<size_t>((v - h.min_value) / width * bins))
                       : 0;
        ++h.counts[b];
    }
    return h;
}

}  // namespace

Histogram sigma_factor_histogram(const std::vector<IfsCode>& codes, int bins) {
    std::vector<double> values;
    values.reserve(codes.size());
    for (const IfsCode& code : codes) values.push_back(sigma_factor(code));
    return histogram_of(values, bins);
}

Histogram sampled_sigma_factor_histogram(int n_maps, uint64_t count, int bins, Rng& rng) {
    std::vector<double> values;
    values.reserve(count);
    for (uint64_t i = 0; i < count; ++i) values.push_back(sigma_factor(sample_system(n_maps, 1.0, rng)));
    return histogram_of(values, bins);
}

std::string BenchReport::to_csv() const {
    std::ostringstream out;
    out << "# hardware: " << hardware << "\n";
    out << "stage,calls,mean_us,std_us\n";
    for (const BenchRow& r : rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%s,%llu,%.4f,%.4f\n", r.stage.c_str(),
                      static_cast<unsigned long long>(r.calls), r.mean_us, r.std_us);
        out << line;
    }
    return out.str();
}

const BenchRow* BenchReport::find(const std::string& stage) const {
    for (const BenchRow& r : rows)
        if (r.stage == stage) return &r;
    return nullptr;
}

namespace {

std::string cpu_model() {
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    std::string model = "unknown cpu";
    while (std::getline(in, line)) {
        if (line.rfind("model name", 0) == 0) {
            size_t colon = line.find(':');
            if (colon != std::string::npos) {
                model = line.substr(colon + 1);
                size_t start = model.find_first_not_of(' ');
                if (start != std::string::npos) model = model.substr(start);
            }
            break;
        }
    }
    return model + ", " + std::to_string(std::thread::hardware_concurrency()) + " hw threads";
}

using Clock = std::chrono::steady_clock;

BenchRow time_stage(const std::string& name, uint64_t min_calls,
                    const std::function<void()>& fn) {
    for (int i = 0; i < 3; ++i) fn();  // warm-up

    auto t0 = Clock::now();
    fn();
    double est_us =
        std::chrono::duration<double, std::micro>(Clock::now() - t0).count();

    uint64_t block = est_us >= 20.0
                         ? 1
                         : std::min<uint64_t>(min_calls,
                                              static_cast<uint64_t>(20.0 / std::max(est_us, 1e-4)) + 1);
    uint64_t n_blocks = std::max<uint64_t>(5, (min_calls + block - 1) / block);

    std::vector<double> samples;
    samples.reserve(n_blocks);
    for (uint64_t bi = 0; bi < n_blocks; ++bi) {
        auto start = Clock::now();
        for (uint64_t j = 0; j < block; ++j) fn();
        double us = std::chrono::duration<double, std::micro>(Clock::now() - start).count();
        samples.push_back(us / block);
    }
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= samples.size();
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= (samples.size() - 1);

    BenchRow row;
    row.stage = name;
    row.calls = block * n_blocks;
    row.mean_us = mean;
    row.std_us = std::sqrt(var);
    return row;
}

}  // namespace

BenchReport bench_pipeline(const BenchConfig& cfg) {
    if (cfg.min_calls < 5) throw DomainError("need at least 5 calls per stage");
    BenchReport report;
    report.hardware = cpu_model();

    Rng rng(cfg.seed);
    report.rows.push_back(time_stage("noop", cfg.min_calls, [] {}));

    for (int n : cfg.n_range) {
        double alpha = 0.5 * (5 + n) + 0.25;
        report.rows.push_back(time_stage("sample_svs_n" + std::to_string(n), cfg.min_calls,
                                         [&, n, alpha] { sample_svs(n, alpha, rng); }));
        report.rows.push_back(time_stage("sample_system_n" + std::to_string(n), cfg.min_calls,
                                         [&, n] { sample_system(n, 1.0, rng); }));
    }

    Rng setup(cfg.seed ^ 0x5e77);
    IfsCode code = sample_system(3, 1.0, setup);
    report.rows.push_back(
        time_stage("iterate_" + std::to_string(cfg.iterations), std::max<uint64_t>(20, cfg.min_calls / 50),
                   [&] { iterate(code, cfg.iterations, rng); }));

    PointSet points = iterate(code, cfg.iterations, setup);
    Region region = bounding_region(points);
    Patch3x3 patch;
    patch.bits = 0x1ff;  // full 3x3 splat, the heaviest case
    report.rows.push_back(
        time_stage("rasterize_" + std::to_string(cfg.side), std::max<uint64_t>(20, cfg.min_calls / 50),
                   [&] { rasterize(points, region, cfg.side, &patch, RasterMode::kDensity); }));

    GrayImage gray = normalize_density(rasterize(points, region, cfg.side, &patch, RasterMode::kDensity));
    report.rows.push_back(
        time_stage("colorize_" + std::to_string(cfg.side), std::max<uint64_t>(20, cfg.min_calls / 50),
                   [&] { colorize(gray, static_cast<int>(rng.uniform_int(256)), 0.8, 0.9); }));

    report.rows.push_back(
        time_stage("background_" + std::to_string(cfg.side), std::max<uint64_t>(20, cfg.min_calls / 50),
                   [&] { render_background(cfg.side, rng); }));

    RenderConfig rc;
    rc.side = cfg.side;
    rc.iterations = cfg.iterations;
    report.rows.push_back(
        time_stage("render_single_" + std::to_string(cfg.side), std::max<uint64_t>(20, cfg.min_calls / 50),
                   [&] { render_single(code, rc, rng); }));

    return report;
}

}  // namespace fractalgen
