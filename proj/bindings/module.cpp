// Python bindings. Codes cross the boundary as (n, 6) float64 arrays with
// columns (a00, a01, a10, a11, bx, by); selection probabilities are
// recomputed determinant-proportionally unless passed explicitly, matching
// what the codes file format stores and recomputes.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "fractalgen/cache.hpp"
#include "fractalgen/chaos.hpp"
#include "fractalgen/codec.hpp"
#include "fractalgen/ifs.hpp"
#include "fractalgen/multi_instance.hpp"
#include "fractalgen/render.hpp"
#include "fractalgen/rng.hpp"
#include "fractalgen/sampler.hpp"
#include "fractalgen/stream.hpp"
#include "fractalgen/thread_pool.hpp"
#include "fractalgen/types.hpp"

namespace py = pybind11;
using namespace fractalgen;

namespace {

using ParamArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

IfsCode code_from_arrays(const ParamArray& params, const py::object& probs) {
    if (params.ndim() != 2 || params.shape(1) != 6)
        throw DomainError("params must have shape (n, 6)");
    const auto n = static_cast<size_t>(params.shape(0));
    IfsCode code;
    code.maps.resize(n);
    auto p = params.unchecked<2>();
    for (size_t i = 0; i < n; ++i) {
        code.maps[i].a = {p(i, 0), p(i, 1), p(i, 2), p(i, 3)};
        code.maps[i].b = {p(i, 4), p(i, 5)};
    }
    if (probs.is_none()) {
        code.probs = determinant_probabilities(code.maps);
    } else {
        ParamArray pr = probs.cast<ParamArray>();
        if (pr.ndim() != 1 || static_cast<size_t>(pr.shape(0)) != n)
            throw DomainError("probs must have shape (n,)");
        code.probs.assign(pr.data(), pr.data() + n);
    }
    return code;
}

py::array_t<double> code_to_array(const IfsCode& code) {
    py::array_t<double> out({static_cast<py::ssize_t>(code.size()), py::ssize_t{6}});
    auto a = out.mutable_unchecked<2>();
    for (size_t i = 0; i < code.size(); ++i) {
        const auto& m = code.maps[i];
        a(i, 0) = m.a[0];
        a(i, 1) = m.a[1];
        a(i, 2) = m.a[2];
        a(i, 3) = m.a[3];
        a(i, 4) = m.b[0];
        a(i, 5) = m.b[1];
    }
    return out;
}

py::array_t<double> probs_to_array(const IfsCode& code) {
    py::array_t<double> out(static_cast<py::ssize_t>(code.probs.size()));
    std::memcpy(out.mutable_data(), code.probs.data(), code.probs.size() * sizeof(double));
    return out;
}

// classes: list of lists of (n, 6) arrays.
std::vector<std::vector<IfsCode>> classes_from_pylist(const py::list& classes) {
    std::vector<std::vector<IfsCode>> out;
    out.reserve(classes.size());
    for (const auto& group : classes) {
        std::vector<IfsCode> g;
        for (const auto& params : group.cast<py::list>())
            g.push_back(code_from_arrays(params.cast<ParamArray>(), py::none()));
        out.push_back(std::move(g));
    }
    return out;
}

py::array_t<uint8_t> rgb_to_array(const RgbImage& img) {
    py::array_t<uint8_t> out(
        {static_cast<py::ssize_t>(img.side), static_cast<py::ssize_t>(img.side), py::ssize_t{3}});
    std::memcpy(out.mutable_data(), img.data.data(), img.data.size());
    return out;
}

py::array_t<float> gray_to_array(const GrayImage& img) {
    py::array_t<float> out(
        {static_cast<py::ssize_t>(img.side), static_cast<py::ssize_t>(img.side)});
    std::memcpy(out.mutable_data(), img.data.data(), img.data.size() * sizeof(float));
    return out;
}

RgbImage rgb_from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 3 || a.shape(0) != a.shape(1) || a.shape(2) != 3)
        throw DomainError("image must have shape (side, side, 3)");
    RgbImage img(static_cast<int>(a.shape(0)));
    std::memcpy(img.data.data(), a.data(), img.data.size());
    return img;
}

// Owns the cache, pool and cursor of one endless generation run. Batch
// content depends only on (classes, master_seed, config, cursor), never on
// the worker count.
class Streamer {
public:
    Streamer(const py::list& classes, uint64_t master_seed, const std::string& mode,
             uint32_t batch_size, int side, int sprite_side, int iterations, int cache_capacity,
             int background_capacity, int refresh_period, int max_instances, unsigned workers) {
        spec_.master_seed = master_seed;
        spec_.render.side = side;
        spec_.render.sprite_side = sprite_side;
        spec_.render.iterations = iterations;
        spec_.stream.cache_capacity = cache_capacity;
        spec_.stream.background_capacity = background_capacity;
        spec_.stream.refresh_period = refresh_period;
        spec_.stream.max_instances = max_instances;
        spec_.classes = classes_from_pylist(classes);
        if (spec_.classes.empty()) throw DomainError("Streamer needs at least one class");

        if (mode == "multiclass")
            req_.mode = BatchRequest::Mode::kMulticlass;
        else if (mode == "multi-instance")
            req_.mode = BatchRequest::Mode::kMultiInstance;
        else
            throw DomainError("mode must be 'multiclass' or 'multi-instance'");
        req_.batch_size = batch_size;
        req_.side = side;

        pool_ = std::make_unique<ThreadPool>(workers != 0 ? workers
                                                          : std::thread::hardware_concurrency());
        cache_ = std::make_unique<RenderCache>(spec_.stream,
                                               static_cast<uint32_t>(spec_.classes.size()));
        py::gil_scoped_release release;
        Rng warm_rng(spec_.master_seed);
        warm_cache(spec_, *cache_, req_, warm_rng, pool_.get());
    }

    py::tuple next() {
        Batch batch;
        {
            py::gil_scoped_release release;
            batch = req_.mode == BatchRequest::Mode::kMulticlass
                        ? next_batch_multiclass(spec_, *cache_, req_, pool_.get(), &stats_)
                        : next_batch_multiinstance(spec_, *cache_, req_, pool_.get(), &stats_);
            req_.cursor += batch.count();
        }
        const py::ssize_t b = batch.count();
        const py::ssize_t s = batch.side;
        py::array_t<uint8_t> images({b, s, s, py::ssize_t{3}});
        std::memcpy(images.mutable_data(), batch.images.data(), batch.images.size());
        if (batch.mode == BatchRequest::Mode::kMulticlass) {
            py::array_t<uint32_t> labels(b);
            std::memcpy(labels.mutable_data(), batch.class_labels.data(),
                        batch.class_labels.size() * sizeof(uint32_t));
            return py::make_tuple(images, labels);
        }
        py::array_t<uint8_t> labels({b, static_cast<py::ssize_t>(batch.num_classes)});
        auto l = labels.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < b; ++i)
            for (py::ssize_t c = 0; c < static_cast<py::ssize_t>(batch.num_classes); ++c)
                l(i, c) = batch.multi_labels[i].bits[c];
        return py::make_tuple(images, labels);
    }

    py::dict stats() const {
        py::dict d;
        d["images_emitted"] = stats_.images_emitted;
        d["fresh_renders"] = stats_.fresh_renders;
        d["cache_draws"] = stats_.cache_draws;
        d["cache_refreshes"] = stats_.cache_refreshes;
        return d;
    }

    uint64_t cursor() const { return req_.cursor; }
    uint32_t num_classes() const { return static_cast<uint32_t>(spec_.classes.size()); }

private:
    DatasetSpec spec_;
    BatchRequest req_;
    std::unique_ptr<ThreadPool> pool_;
    std::unique_ptr<RenderCache> cache_;
    StreamStats stats_;
};

}  // namespace

PYBIND11_MODULE(_fractalgen, m) {
    m.doc() = "Labeled fractal image generation from affine IFS codes";
    m.attr("__version__") = "0.1.0";

    auto err = py::register_exception<Error>(m, "Error");
    py::register_exception<DomainError>(m, "DomainError", err);
    py::register_exception<DivergenceError>(m, "DivergenceError", err);
    py::register_exception<CorruptFileError>(m, "CorruptFileError", err);
    py::register_exception<NotReadyError>(m, "NotReadyError", err);
    py::register_exception<IoError>(m, "IoError", err);

    // Seed-path keys, frozen by the dataset format.
    m.attr("SAMPLE_SYSTEM") = static_cast<uint64_t>(kSampleSystem);
    m.attr("RENDER_IMAGE") = static_cast<uint64_t>(kRenderImage);
    m.attr("WARM_SPRITE") = static_cast<uint64_t>(kWarmSprite);
    m.attr("WARM_BACKGROUND") = static_cast<uint64_t>(kWarmBackground);
    m.attr("REFRESH") = static_cast<uint64_t>(kRefresh);
    m.attr("STREAM_IMAGE") = static_cast<uint64_t>(kStreamImage);
    m.attr("AUGMENT") = static_cast<uint64_t>(kAugment);

    m.def("derive_seed", &derive_seed, py::arg("parent"), py::arg("key"),
          "Child seed for a purpose-keyed substream; chain calls to build a path.");

    m.def(
        "sample_system",
        [](int n, double b_bound, uint64_t seed) {
            Rng rng(seed);
            const IfsCode code = sample_system(n, b_bound, rng);
            return py::make_tuple(code_to_array(code), probs_to_array(code));
        },
        py::arg("n"), py::arg("b_bound") = 1.0, py::arg("seed") = 0,
        "Sample a contractive n-map system; returns (params (n, 6), probs (n,)).");

    m.def(
        "sample_svs",
        [](int n, double alpha, uint64_t seed) {
            Rng rng(seed);
            const SvArray svs = sample_svs(n, alpha, rng);
            py::array_t<double> out({static_cast<py::ssize_t>(n), py::ssize_t{2}});
            auto a = out.mutable_unchecked<2>();
            for (int i = 0; i < n; ++i) {
                a(i, 0) = svs[i][0];
                a(i, 1) = svs[i][1];
            }
            return out;
        },
        py::arg("n"), py::arg("alpha"), py::arg("seed") = 0,
        "Singular value pairs with sum(s1 + 2*s2) == alpha, each 0 <= s2 <= s1 <= 1.");

    m.def(
        "sigma_factor",
        [](const ParamArray& params) { return sigma_factor(code_from_arrays(params, py::none())); },
        py::arg("params"));

    m.def(
        "is_contractive",
        [](const ParamArray& params, double tol) {
            return is_contractive(code_from_arrays(params, py::none()), tol);
        },
        py::arg("params"), py::arg("tol") = kContractTol,
        "True iff every map has largest singular value <= 1 + tol.");

    m.def(
        "render_image",
        [](const ParamArray& params, uint64_t seed, const py::object& probs, int side,
           int iterations, bool grayscale) -> py::object {
            const IfsCode code = code_from_arrays(params, probs);
            RenderConfig cfg;
            cfg.side = side;
            cfg.iterations = iterations;
            if (grayscale) {
                GrayImage img(0);
                {
                    py::gil_scoped_release release;
                    Rng rng(seed);
                    img = render_gray(code, cfg, rng);
                }
                return gray_to_array(img);
            }
            RgbImage img;
            {
                py::gil_scoped_release release;
                Rng rng(seed);
                img = render_single(code, cfg, rng);
            }
            return rgb_to_array(img);
        },
        py::arg("params"), py::arg("seed"), py::arg("probs") = py::none(), py::arg("side") = 256,
        py::arg("iterations") = 100000, py::arg("grayscale") = false,
        "One labeled training image. grayscale=True returns the normalized\n"
        "density (side, side) float32 before colorization; otherwise a full\n"
        "(side, side, 3) uint8 image with background, flips and blur.");

    m.def(
        "write_codes",
        [](const std::string& path, const py::list& classes, uint64_t master_seed) {
            DatasetSpec spec;
            spec.master_seed = master_seed;
            spec.classes = classes_from_pylist(classes);
            const std::vector<uint8_t> bytes = encode_codes(spec);
            write_file(path, bytes.data(), bytes.size());
            return bytes.size();
        },
        py::arg("path"), py::arg("classes"), py::arg("master_seed") = 0,
        "Write classes (list of lists of (n, 6) arrays) as a codes file;\n"
        "entries are quantized to float32. Returns the byte count.");

    m.def(
        "read_codes",
        [](const std::string& path) {
            const DecodeResult result = decode_codes(read_file(path));
            py::list classes;
            for (const auto& group : result.spec.classes) {
                py::list g;
                for (const auto& code : group) g.append(code_to_array(code));
                classes.append(g);
            }
            py::list violations;
            for (const auto& v : result.violations)
                violations.append(py::make_tuple(v.class_id, v.code_index, v.sigma_max));
            return py::make_tuple(classes, violations);
        },
        py::arg("path"),
        "Read a codes file back as (classes, violations); violations are\n"
        "(class_id, code_index, sigma_max) for stored non-contractive maps.");

    m.def(
        "write_png",
        [](const std::string& path,
           const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& image) {
            write_png(rgb_from_array(image), path);
        },
        py::arg("path"), py::arg("image"));

    m.def(
        "read_png", [](const std::string& path) { return rgb_to_array(read_png(path)); },
        py::arg("path"));

    py::class_<Streamer>(m, "Streamer",
                         "Endless labeled batch generator over a sprite cache. next() yields\n"
                         "(images (b, side, side, 3) uint8, labels): class ids (b,) uint32 in\n"
                         "multiclass mode, multi-hot (b, num_classes) uint8 in multi-instance\n"
                         "mode. Identical constructor arguments give identical batches.")
        .def(py::init<const py::list&, uint64_t, const std::string&, uint32_t, int, int, int, int,
                      int, int, int, unsigned>(),
             py::arg("classes"), py::arg("master_seed") = 0, py::arg("mode") = "multiclass",
             py::arg("batch_size") = 32, py::arg("side") = 256, py::arg("sprite_side") = 128,
             py::arg("iterations") = 100000, py::arg("cache_capacity") = 512,
             py::arg("background_capacity") = 64, py::arg("refresh_period") = 2,
             py::arg("max_instances") = 5, py::arg("workers") = 0)
        .def("next", &Streamer::next)
        .def("stats", &Streamer::stats)
        .def_property_readonly("cursor", &Streamer::cursor)
        .def_property_readonly("num_classes", &Streamer::num_classes);
}
