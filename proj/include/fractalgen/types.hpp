#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fractalgen {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument or precondition violation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Chaos-game trajectory escaped the guard radius; the code is not a
// contraction (or was corrupted).
class DivergenceError : public Error {
public:
    using Error::Error;
};

// Bad magic, bad CRC, truncated or malformed file.
class CorruptFileError : public Error {
public:
    using Error::Error;
};

// Operation requires a warmed cache.
class NotReadyError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// 2D affine map w(x) = A x + b. `a` is row-major {a00, a01, a10, a11}.
struct AffineMap {
    std::array<double, 4> a{1.0, 0.0, 0.0, 1.0};
    std::array<double, 2> b{0.0, 0.0};
};

// An IFS code: N affine maps with chaos-game selection probabilities.
// Construction does not enforce contractivity; decoded files and naive
// samples may violate it, so validity is a predicate (see ifs.hpp).
struct IfsCode {
    std::vector<AffineMap> maps;
    std::vector<double> probs;

    size_t size() const { return maps.size(); }
};

// SVD factors (theta, phi, sigma1, sigma2, d1, d2) composing a linear map
// A = R_theta * diag(sigma1, sigma2) * R_phi * diag(d1, d2).
struct SvdParams {
    double theta = 0.0;  // radians in [-pi, pi]
    double phi = 0.0;
    double sigma1 = 1.0;  // 0 <= sigma2 <= sigma1 <= 1
    double sigma2 = 1.0;
    int d1 = 1;  // signs in {-1, +1}
    int d2 = 1;
};

struct Region {
    double x_min = 0.0, x_max = 0.0;
    double y_min = 0.0, y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool contains(const Region& r, double tol = 0.0) const {
        return r.x_min >= x_min - tol && r.x_max <= x_max + tol &&
               r.y_min >= y_min - tol && r.y_max <= y_max + tol;
    }
};

// Attractor sample, stored as parallel coordinate arrays.
struct PointSet {
    std::vector<double> xs, ys;

    size_t size() const { return xs.size(); }
};

// Square hit-density raster. Counts in density mode, {0,1} in binary mode,
// [0,1] after normalization.
struct GrayImage {
    int side = 0;
    std::vector<float> data;  // row-major side*side

    GrayImage() = default;
    explicit GrayImage(int s) : side(s), data(static_cast<size_t>(s) * s, 0.0f) {}
    float& at(int row, int col) { return data[static_cast<size_t>(row) * side + col]; }
    float at(int row, int col) const { return data[static_cast<size_t>(row) * side + col]; }
};

// 8-bit RGB raster, row-major HWC.
struct RgbImage {
    int side = 0;
    std::vector<uint8_t> data;  // side*side*3

    RgbImage() = default;
    explicit RgbImage(int s) : side(s), data(static_cast<size_t>(s) * s * 3, 0) {}
    uint8_t* px(int row, int col) { return &data[(static_cast<size_t>(row) * side + col) * 3]; }
    const uint8_t* px(int row, int col) const {
        return &data[(static_cast<size_t>(row) * side + col) * 3];
    }
};

// Support mask accompanying a colorized fractal (true where density > 0).
using Mask = std::vector<uint8_t>;

// 3x3 binary stencil splatted at every attractor point. Bit (r*3+c) set
// means pixel (row-1+r, col-1+c) relative to the point's pixel is hit.
struct Patch3x3 {
    uint16_t bits = 1 << 4;  // center pixel only

    bool test(int r, int c) const { return (bits >> (r * 3 + c)) & 1; }
    int popcount() const { return __builtin_popcount(bits & 0x1FF); }
};

// Rendering knobs shared by the single- and multi-instance pipelines.
// Defaults follow the reference configuration; everything here is recorded
// in the dataset manifest.
struct RenderConfig {
    int side = 256;           // output image side (pixels)
    int sprite_side = 128;    // cached grayscale sprite side (multi-instance)
    int iterations = 100000;  // chaos-game length K
    int burn_in = 20;         // discarded leading iterates
    double pad_fraction = 0.025;
    double region_scale_min = 1.0;  // bounding-region jitter
    double region_scale_max = 1.5;
    double blur_sigma_max = 1.0;  // final Gaussian blur sigma ~ U(0, max)
    double divergence_radius = 1e8;
};

// Cache and batch-assembly knobs.
struct StreamConfig {
    int cache_capacity = 512;
    int background_capacity = 64;
    int refresh_period = 2;  // k_p: one sprite+background refresh per k_p images
    int max_instances = 5;   // n_max fractals per multi-instance image
};

// A labeled dataset: `classes[c]` is the group of IFS codes sharing class
// label c. Together with the master seed and configs this is sufficient to
// regenerate every image bit-exactly.
struct DatasetSpec {
    uint16_t version = 1;
    uint64_t master_seed = 0;
    RenderConfig render;
    StreamConfig stream;
    std::vector<std::vector<IfsCode>> classes;

    size_t num_classes() const { return classes.size(); }
};

}  // namespace fractalgen
