// fractalgen: sample contractive IFS codes, render fractal images, stream
// training batches, and run the validation/benchmark reports.
//
// Exit codes: 0 success, 1 runtime failure (I/O, bad data, divergence),
// 2 usage error. Every subcommand is deterministic under --seed.

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "fractalgen/codec.hpp"
#include "fractalgen/ifs.hpp"
#include "fractalgen/render.hpp"
#include "fractalgen/sampler.hpp"
#include "fractalgen/stream.hpp"
#include "fractalgen/validate.hpp"

namespace fg = fractalgen;

namespace {

// ---------------------------------------------------------------- sinks ---

// Minimal write-only streambuf over a file descriptor (TCP sockets).
class FdStreamBuf : public std::streambuf {
public:
    explicit FdStreamBuf(int fd) : fd_(fd) {}
    ~FdStreamBuf() override {
        if (fd_ >= 0) ::close(fd_);
    }

protected:
    int_type overflow(int_type ch) override {
        if (ch == traits_type::eof()) return 0;
        const char c = static_cast<char>(ch);
        return xsputn(&c, 1) == 1 ? ch : traits_type::eof();
    }
    std::streamsize xsputn(const char* data, std::streamsize count) override {
        std::streamsize sent = 0;
        while (sent < count) {
            const ssize_t n = ::write(fd_, data + sent, static_cast<size_t>(count - sent));
            if (n <= 0) return sent;
            sent += n;
        }
        return sent;
    }

private:
    int fd_;
};

int connect_tcp(const std::string& host, const std::string& port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr)
        throw fg::IoError("stream: cannot resolve " + host + ":" + port);
    int fd = -1;
    for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
        fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw fg::IoError("stream: cannot connect to " + host + ":" + port);
    return fd;
}

struct Sink {
    std::unique_ptr<std::ofstream> file;
    std::unique_ptr<FdStreamBuf> buf;
    std::unique_ptr<std::ostream> socket_stream;
    std::ostream* out = nullptr;
};

// "-" -> stdout, "tcp://host:port" -> socket, anything else -> file path.
Sink open_sink(const std::string& spec) {
    Sink s;
    if (spec == "-") {
        s.out = &std::cout;
        return s;
    }
    if (spec.rfind("tcp://", 0) == 0) {
        const std::string addr = spec.substr(6);
        const size_t colon = addr.rfind(':');
        if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size())
            throw fg::DomainError("stream: sink must be tcp://host:port");
        const int fd = connect_tcp(addr.substr(0, colon), addr.substr(colon + 1));
        s.buf = std::make_unique<FdStreamBuf>(fd);
        s.socket_stream = std::make_unique<std::ostream>(s.buf.get());
        s.out = s.socket_stream.get();
        return s;
    }
    s.file = std::make_unique<std::ofstream>(spec, std::ios::binary);
    if (!*s.file) throw fg::IoError("stream: cannot open sink " + spec);
    s.out = s.file.get();
    return s;
}

std::ostream& report_stream(const std::string& out_path, std::ofstream& holder) {
    if (out_path == "-") return std::cout;
    holder.open(out_path);
    if (!holder) throw fg::IoError("cannot open " + out_path);
    return holder;
}

// ---------------------------------------------------------- subcommands ---

struct SampleOpts {
    uint64_t seed = 0;
    uint32_t classes = 1000;
    uint32_t codes_per_class = 1;
    uint32_t augment = 0;
    double b_bound = 1.0;
    std::vector<int> n_set = fg::default_system_sizes();
    std::string out = "codes.fifs";
    fg::RenderConfig render;
    fg::StreamConfig stream;
};

int run_sample(const SampleOpts& o) {
    fg::DatasetSpec spec;
    spec.master_seed = o.seed;
    spec.render = o.render;
    spec.stream = o.stream;
    spec.classes.resize(o.classes);

    // Code (c, j) and its augmentations each draw from their own substream
    // keyed by the flat code index, so class count and augment count can be
    // changed without disturbing other codes.
    uint64_t flat = 0;
    for (uint32_t c = 0; c < o.classes; ++c) {
        std::vector<fg::IfsCode>& group = spec.classes[c];
        group.reserve(static_cast<size_t>(o.codes_per_class) * (1 + o.augment));
        for (uint32_t j = 0; j < o.codes_per_class; ++j, ++flat) {
            fg::Rng rng(fg::derive_seed(fg::derive_seed(o.seed, fg::kSampleSystem), flat));
            const int n = fg::sample_system_size(o.n_set, rng);
            fg::IfsCode code = fg::sample_system(n, o.b_bound, rng);
            group.push_back(code);
            fg::Rng aug(fg::derive_seed(fg::derive_seed(o.seed, fg::kAugment), flat));
            for (uint32_t k = 0; k < o.augment; ++k) group.push_back(fg::augment_scale(code, aug));
        }
    }

    std::ofstream out(o.out, std::ios::binary);
    if (!out) throw fg::IoError("sample: cannot open " + o.out);
    fg::CodesEncoder enc(out, o.classes);
    for (const auto& group : spec.classes) enc.add_group(group);
    enc.finish();
    out.flush();
    if (!out) throw fg::IoError("sample: write failed for " + o.out);

    const std::string manifest_path = o.out + ".json";
    const std::string manifest = fg::write_manifest(spec, enc.crc());
    fg::write_file(manifest_path, manifest.data(), manifest.size());

    std::cout << "wrote " << o.out << " (" << enc.bytes_written() << " bytes, " << o.classes
              << " classes, group size " << o.codes_per_class * (1 + o.augment) << ", crc32 0x"
              << std::hex << enc.crc() << std::dec << ")\n"
              << "wrote " << manifest_path << "\n";
    return 0;
}

struct RenderOpts {
    uint64_t seed = 0;
    uint64_t index = 0;
    std::string codes;
    std::string out = "render.png";
    bool grayscale = false;
    bool no_background = false;
    fg::RenderConfig cfg;
};

fg::RgbImage gray_to_rgb(const fg::GrayImage& g) {
    fg::RgbImage img(g.side);
    for (size_t i = 0; i < g.data.size(); ++i) {
        const float v = std::min(1.0f, std::max(0.0f, g.data[i]));
        const auto byte = static_cast<uint8_t>(std::lround(v * 255.0f));
        img.data[i * 3 + 0] = byte;
        img.data[i * 3 + 1] = byte;
        img.data[i * 3 + 2] = byte;
    }
    return img;
}

int run_render(const RenderOpts& o) {
    const fg::DecodeResult decoded = fg::decode_codes(fg::read_file(o.codes));
    for (const fg::CodeViolation& v : decoded.violations)
        std::cerr << "warning: code " << v.code_index << " of class " << v.class_id
                  << " is not contractive (sigma_max " << v.sigma_max << ")\n";

    const fg::IfsCode* code = nullptr;
    uint64_t remaining = o.index;
    for (const auto& group : decoded.spec.classes) {
        if (remaining < group.size()) {
            code = &group[remaining];
            break;
        }
        remaining -= group.size();
    }
    if (code == nullptr) throw fg::DomainError("render: --index is past the end of the file");

    fg::Rng rng(fg::derive_seed(fg::derive_seed(o.seed, fg::kRenderImage), o.index));
    fg::RgbImage img(1);
    if (o.grayscale) {
        img = gray_to_rgb(fg::render_gray(*code, o.cfg, rng));
    } else if (o.no_background) {
        // finalize_color's draw order with the background stage removed:
        // the fractal is composited over black.
        const fg::GrayImage gray = fg::render_gray(*code, o.cfg, rng);
        const int h = static_cast<int>(rng.uniform_int(256));
        const double s = rng.uniform(0.3, 1.0);
        const double v = rng.uniform(0.5, 1.0);
        const fg::Colorized fgnd = fg::colorize(gray, h, s, v);
        img = fg::composite(fgnd.image, fgnd.mask, fg::RgbImage(gray.side));
        if (rng.coin()) img = fg::flip_horizontal(img);
        if (rng.coin()) img = fg::flip_vertical(img);
        img = fg::rotate90(img, static_cast<int>(rng.uniform_int(4)));
        img = fg::gaussian_blur(img, rng.uniform(0.0, o.cfg.blur_sigma_max));
    } else {
        img = fg::render_single(*code, o.cfg, rng);
    }
    fg::write_png(img, o.out);
    std::cout << "wrote " << o.out << " (" << img.side << "x" << img.side << ")\n";
    return 0;
}

struct StreamOpts {
    uint64_t seed = 0;
    std::string codes;
    std::string mode = "multiclass";
    std::string sink = "-";
    uint32_t batch = 32;
    uint32_t count = 10;
    int side = 256;
    int workers = 0;
    fg::StreamConfig stream;
    int sprite_side = 128;
    int iterations = 100000;
};

int run_stream(const StreamOpts& o) {
    const fg::DecodeResult decoded = fg::decode_codes(fg::read_file(o.codes));
    fg::DatasetSpec spec = decoded.spec;
    spec.master_seed = o.seed;
    spec.stream = o.stream;
    spec.render.side = o.side;
    spec.render.sprite_side = o.sprite_side;
    spec.render.iterations = o.iterations;

    fg::BatchRequest req;
    req.mode = o.mode == "multiclass" ? fg::BatchRequest::Mode::kMulticlass
                                      : fg::BatchRequest::Mode::kMultiInstance;
    req.batch_size = o.batch;
    req.side = o.side;
    req.cursor = 0;

    const int workers =
        o.workers > 0 ? o.workers : static_cast<int>(std::thread::hardware_concurrency());
    fg::ThreadPool pool(static_cast<size_t>(std::max(1, workers)));

    fg::RenderCache cache(spec.stream, static_cast<uint32_t>(spec.num_classes()));
    fg::Rng warm_rng(spec.master_seed);
    fg::warm_cache(spec, cache, req, warm_rng, &pool);

    Sink sink = open_sink(o.sink);
    fg::StreamStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    for (uint32_t b = 0; b < o.count; ++b) {
        const fg::Batch batch =
            req.mode == fg::BatchRequest::Mode::kMulticlass
                ? fg::next_batch_multiclass(spec, cache, req, &pool, &stats)
                : fg::next_batch_multiinstance(spec, cache, req, &pool, &stats);
        fg::write_batch(*sink.out, batch);
        if (!*sink.out)
            throw fg::IoError("stream: sink failed after " + std::to_string(b) +
                              " complete batches (output is partial)");
        req.cursor += req.batch_size;
    }
    sink.out->flush();
    if (!*sink.out) throw fg::IoError("stream: sink failed at flush (output is partial)");
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

    // One machine-parseable line on stderr (stdout may carry the stream).
    std::fprintf(stderr, "throughput images=%llu batches=%u seconds=%.3f images_per_s=%.1f\n",
                 static_cast<unsigned long long>(stats.images_emitted), o.count, dt.count(),
                 static_cast<double>(stats.images_emitted) / std::max(dt.count(), 1e-9));
    return 0;
}

struct ValidateOpts {
    uint64_t seed = 0;
    std::string report = "study";
    uint64_t trials = 100000;
    int n_min = 2;
    int n_max = 8;
    int maps = 2;
    int bins = 64;
    uint64_t samples = 100000;
    int workers = 0;
    std::string out = "-";
};

int run_validate(const ValidateOpts& o) {
    std::ofstream holder;
    std::ostream& out = report_stream(o.out, holder);
    fg::Rng rng(o.seed);
    if (o.report == "study") {
        if (o.n_min < 2 || o.n_max < o.n_min)
            throw fg::DomainError("validate: need 2 <= n-min <= n-max");
        std::vector<int> n_range;
        for (int n = o.n_min; n <= o.n_max; ++n) n_range.push_back(n);
        const int workers =
            o.workers > 0 ? o.workers : static_cast<int>(std::thread::hardware_concurrency());
        fg::ThreadPool pool(static_cast<size_t>(std::max(1, workers)));
        out << fg::naive_sampling_study(n_range, o.trials, rng, &pool).to_csv();
    } else {
        out << fg::sampled_sigma_factor_histogram(o.maps, o.samples, o.bins, rng).to_csv();
    }
    out.flush();
    if (!out) throw fg::IoError("validate: write failed");
    return 0;
}

struct BenchOpts {
    uint64_t min_calls = 1000;
    int side = 256;
    int iterations = 100000;
    std::string out = "-";
};

int run_bench(const BenchOpts& o) {
    std::ofstream holder;
    std::ostream& out = report_stream(o.out, holder);
    fg::BenchConfig cfg;
    cfg.min_calls = o.min_calls;
    cfg.side = o.side;
    cfg.iterations = o.iterations;
    out << fg::bench_pipeline(cfg).to_csv();
    out.flush();
    if (!out) throw fg::IoError("bench: write failed");
    return 0;
}

void add_render_flags(CLI::App* cmd, fg::RenderConfig& cfg) {
    cmd->add_option("--side", cfg.side, "Output image side in pixels")->capture_default_str();
    cmd->add_option("--iterations", cfg.iterations, "Chaos-game points per image")
        ->capture_default_str();
    cmd->add_option("--region-scale-min", cfg.region_scale_min, "Lower bound of region jitter")
        ->capture_default_str();
    cmd->add_option("--region-scale-max", cfg.region_scale_max, "Upper bound of region jitter")
        ->capture_default_str();
    cmd->add_option("--blur-max", cfg.blur_sigma_max, "Upper bound of the final blur sigma")
        ->capture_default_str();
}

void add_stream_flags(CLI::App* cmd, fg::StreamConfig& cfg) {
    cmd->add_option("--cache", cfg.cache_capacity, "Sprite cache capacity")
        ->capture_default_str();
    cmd->add_option("--bg-cache", cfg.background_capacity, "Background cache capacity")
        ->capture_default_str();
    cmd->add_option("--refresh-period", cfg.refresh_period,
                    "Multi-instance images per cache refresh")
        ->capture_default_str();
    cmd->add_option("--max-instances", cfg.max_instances, "Max fractals per multi-instance image")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fractalgen: labeled fractal image dataset generator"};
    app.require_subcommand(1);

    SampleOpts so;
    CLI::App* sample = app.add_subcommand("sample", "Sample IFS codes into a codes file");
    sample->add_option("--seed", so.seed, "Master seed; all randomness flows from it")
        ->capture_default_str();
    sample->add_option("--classes", so.classes, "Number of classes")->capture_default_str();
    sample->add_option("--codes-per-class", so.codes_per_class, "Codes sampled per class")
        ->capture_default_str();
    sample->add_option("--n-set", so.n_set, "System sizes drawn uniformly (comma separated)")
        ->delimiter(',')
        ->capture_default_str();
    sample
        ->add_option("--augment", so.augment,
                     "Scale augmentations per code (group size becomes 1 + this)")
        ->capture_default_str();
    sample->add_option("--b-bound", so.b_bound, "Translation bound |b| <= b-bound")
        ->capture_default_str();
    sample->add_option("--out", so.out, "Codes file path; manifest goes to <out>.json")
        ->capture_default_str();
    add_render_flags(sample, so.render);
    sample->add_option("--sprite-side", so.render.sprite_side, "Multi-instance sprite side")
        ->capture_default_str();
    add_stream_flags(sample, so.stream);

    RenderOpts ro;
    CLI::App* render = app.add_subcommand("render", "Render one code to a PNG");
    render->add_option("--seed", ro.seed, "Master seed")->capture_default_str();
    render->add_option("--codes", ro.codes, "Codes file")->required();
    render->add_option("--index", ro.index, "Flat code index across the file")
        ->capture_default_str();
    render->add_option("--out", ro.out, "Output PNG path")->capture_default_str();
    render->add_flag("--grayscale", ro.grayscale,
                     "Write the normalized density only (no color, no background)");
    render->add_flag("--no-background", ro.no_background,
                     "Colorize but composite over black instead of a texture");
    add_render_flags(render, ro.cfg);

    StreamOpts to;
    CLI::App* stream = app.add_subcommand("stream", "Stream rendered batches in FBAT framing");
    stream->add_option("--seed", to.seed, "Master seed")->capture_default_str();
    stream->add_option("--codes", to.codes, "Codes file")->required();
    stream->add_option("--mode", to.mode, "Label mode")
        ->check(CLI::IsMember({"multiclass", "multiinstance"}))
        ->capture_default_str();
    stream->add_option("--batch", to.batch, "Images per batch (even in multiclass mode)")
        ->capture_default_str();
    stream->add_option("--count", to.count, "Number of batches")->capture_default_str();
    stream->add_option("--side", to.side, "Image side in pixels")->capture_default_str();
    stream->add_option("--sprite-side", to.sprite_side, "Multi-instance sprite side")
        ->capture_default_str();
    stream->add_option("--iterations", to.iterations, "Chaos-game points per render")
        ->capture_default_str();
    stream
        ->add_option("--sink", to.sink,
                     "Destination: file path, '-' for stdout, or tcp://host:port")
        ->capture_default_str();
    stream->add_option("--workers", to.workers, "Render pool size (0 = logical cores)")
        ->capture_default_str();
    add_stream_flags(stream, to.stream);

    ValidateOpts vo;
    CLI::App* validate = app.add_subcommand("validate", "Sampling studies and histograms (CSV)");
    validate->add_option("--seed", vo.seed, "Master seed")->capture_default_str();
    validate->add_option("--report", vo.report, "Report kind")
        ->check(CLI::IsMember({"study", "histogram"}))
        ->capture_default_str();
    validate->add_option("--trials", vo.trials, "Trials per system size (study)")
        ->capture_default_str();
    validate->add_option("--n-min", vo.n_min, "Smallest system size (study)")
        ->capture_default_str();
    validate->add_option("--n-max", vo.n_max, "Largest system size (study)")
        ->capture_default_str();
    validate->add_option("--maps", vo.maps, "System size (histogram)")->capture_default_str();
    validate->add_option("--bins", vo.bins, "Histogram bins")->capture_default_str();
    validate->add_option("--samples", vo.samples, "Sampled systems (histogram)")
        ->capture_default_str();
    validate->add_option("--workers", vo.workers, "Worker threads (0 = logical cores)")
        ->capture_default_str();
    validate->add_option("--out", vo.out, "CSV path or '-' for stdout")->capture_default_str();

    BenchOpts bo;
    CLI::App* bench = app.add_subcommand("bench", "Time pipeline stages (CSV)");
    bench->add_option("--min-calls", bo.min_calls, "Minimum timed calls per stage")
        ->capture_default_str();
    bench->add_option("--side", bo.side, "Image side for raster stages")->capture_default_str();
    bench->add_option("--iterations", bo.iterations, "Chaos-game points for iterate stages")
        ->capture_default_str();
    bench->add_option("--out", bo.out, "CSV path or '-' for stdout")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    try {
        if (*sample) return run_sample(so);
        if (*render) return run_render(ro);
        if (*stream) return run_stream(to);
        if (*validate) return run_validate(vo);
        if (*bench) return run_bench(bo);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
