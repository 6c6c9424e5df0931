#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fractalgen/types.hpp"

namespace fractalgen {

// Codes file layout (all integers little-endian):
//   magic "FIFS", u16 version=1, u32 C,
//   per class: u16 group size,
//     per code: u8 N, then N * 6 f32 (A row-major a00 a01 a10 a11, then bx by),
//   trailing CRC32 (IEEE, over every preceding byte).
// Selection probabilities are not stored; they are a pure function of the
// determinants and are recomputed on load. Values are rounded to f32 once
// here; rendering consumes the decoded f32 values, so the file is the
// source of truth for a dataset.
inline constexpr uint16_t kCodesFormatVersion = 1;

// Decode-time contractivity flag threshold. Looser than the f64 sampling
// tolerance because entries are quantized to f32 on write: a map clamped to
// sigma_max exactly 1 can legitimately decode to 1 + a few 1e-8.
inline constexpr double kStoredContractTol = 1e-6;

std::vector<uint8_t> encode_codes(const DatasetSpec& spec);

// Incremental encoder for large collections (CRC maintained across writes).
class CodesEncoder {
public:
    explicit CodesEncoder(std::ostream& out, uint32_t num_classes);
    void add_group(const std::vector<IfsCode>& group);
    // Writes the trailing CRC. Must be called exactly once.
    void finish();
    uint64_t bytes_written() const { return bytes_; }
    uint32_t crc() const { return crc_; }

private:
    void write(const void* data, size_t len);
    std::ostream& out_;
    uint32_t declared_classes_;
    uint32_t written_classes_ = 0;
    uint64_t bytes_ = 0;
    uint32_t crc_ = 0;
    bool finished_ = false;
};

struct CodeViolation {
    uint32_t class_id;
    uint32_t code_index;
    double sigma_max;
};

struct DecodeResult {
    DatasetSpec spec;
    // Non-contractive codes are flagged, never dropped.
    std::vector<CodeViolation> violations;
};

// Validates magic, version and CRC; throws CorruptFileError on any
// malformation. Probabilities are recomputed from the stored matrices.
DecodeResult decode_codes(const std::vector<uint8_t>& bytes);

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const void* data, size_t len);

// JSON manifest carrying everything needed to regenerate the dataset
// bit-exactly together with the codes file: master seed, class/group
// structure, render and stream configuration, and the codes file CRC.
std::string write_manifest(const DatasetSpec& spec, uint32_t codes_crc);

struct ManifestInfo {
    uint64_t master_seed = 0;
    uint32_t num_classes = 0;
    std::vector<uint32_t> group_sizes;
    RenderConfig render;
    StreamConfig stream;
    uint32_t codes_crc = 0;
};

ManifestInfo parse_manifest(const std::string& text);

// 8-bit RGB PNG, no alpha, non-interlaced. zlib-backed.
void write_png(const RgbImage& img, const std::string& path);
std::vector<uint8_t> encode_png(const RgbImage& img);

// Reads PNGs produced by encode_png (8-bit RGB, non-interlaced).
RgbImage decode_png(const std::vector<uint8_t>& bytes);
RgbImage read_png(const std::string& path);

}  // namespace fractalgen
