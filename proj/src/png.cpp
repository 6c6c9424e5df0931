#include <zlib.h>

#include <cstdlib>
#include <cstring>

#include "fractalgen/codec.hpp"

// Minimal PNG support: 8-bit RGB, non-interlaced, single IDAT on encode.
// The reader accepts any number of IDAT chunks and all five scanline
// filters, but only the 8-bit RGB non-interlaced layout the writer emits.

namespace fractalgen {

namespace {

constexpr uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_u32be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_u32be(const uint8_t* p) {
    return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
           (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

void append_chunk(std::vector<uint8_t>& out, const char type[4], const uint8_t* data,
                  size_t len) {
    put_u32be(out, static_cast<uint32_t>(len));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    if (len) out.insert(out.end(), data, data + len);
    uint32_t crc = static_cast<uint32_t>(
        crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + len)));
    put_u32be(out, crc);
}

uint8_t paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<uint8_t>(a);
    if (pb <= pc) return static_cast<uint8_t>(b);
    return static_cast<uint8_t>(c);
}

void filter_row(int filter, const uint8_t* cur, const uint8_t* prev, size_t stride, int bpp,
                uint8_t* out) {
    for (size_t i = 0; i < stride; ++i) {
        int x = cur[i];
        int a = i >= static_cast<size_t>(bpp) ? cur[i - bpp] : 0;
        int b = prev ? prev[i] : 0;
        int c = (prev && i >= static_cast<size_t>(bpp)) ? prev[i - bpp] : 0;
        int v;
        switch (filter) {
            case 0: v = x; break;
            case 1: v = x - a; break;
            case 2: v = x - b; break;
            case 3: v = x - (a + b) / 2; break;
            default: v = x - paeth(a, b, c); break;
        }
        out[i] = static_cast<uint8_t>(v & 0xff);
    }
}

// Sum of absolute values with filtered bytes read as signed; the standard
// heuristic for picking the per-row filter.
uint64_t filter_cost(const uint8_t* row, size_t stride) {
    uint64_t sum = 0;
    for (size_t i = 0; i < stride; ++i) {
        int8_t s = static_cast<int8_t>(row[i]);
        sum += static_cast<uint64_t>(s < 0 ? -static_cast<int>(s) : s);
    }
    return sum;
}

void unfilter_row(int filter, uint8_t* cur, const uint8_t* prev, size_t stride, int bpp) {
    for (size_t i = 0; i < stride; ++i) {
        int a = i >= static_cast<size_t>(bpp) ? cur[i - bpp] : 0;
        int b = prev ? prev[i] : 0;
        int c = (prev && i >= static_cast<size_t>(bpp)) ? prev[i - bpp] : 0;
        int v;
        switch (filter) {
            case 0: v = cur[i]; break;
            case 1: v = cur[i] + a; break;
            case 2: v = cur[i] + b; break;
            case 3: v = cur[i] + (a + b) / 2; break;
            case 4: v = cur[i] + paeth(a, b, c); break;
            default: throw CorruptFileError("png: unknown scanline filter");
        }
        cur[i] = static_cast<uint8_t>(v & 0xff);
    }
}

}  // namespace

std::vector<uint8_t> encode_png(const RgbImage& img) {
    if (img.side <= 0) throw DomainError("png: empty image");
    const int bpp = 3;
    const size_t stride = static_cast<size_t>(img.side) * bpp;
    const uint32_t dim = static_cast<uint32_t>(img.side);

    std::vector<uint8_t> raw;
    raw.reserve((stride + 1) * dim);
    std::vector<uint8_t> trial(stride);
    std::vector<uint8_t> best(stride);
    for (uint32_t r = 0; r < dim; ++r) {
        const uint8_t* cur = img.data.data() + static_cast<size_t>(r) * stride;
        const uint8_t* prev = r ? img.data.data() + static_cast<size_t>(r - 1) * stride : nullptr;
        int best_filter = 0;
        uint64_t best_cost = UINT64_MAX;
        for (int f = 0; f < 5; ++f) {
            filter_row(f, cur, prev, stride, bpp, trial.data());
            uint64_t cost = filter_cost(trial.data(), stride);
            if (cost < best_cost) {
                best_cost = cost;
                best_filter = f;
                std::swap(trial, best);
            }
        }
        raw.push_back(static_cast<uint8_t>(best_filter));
        raw.insert(raw.end(), best.begin(), best.end());
    }

    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("png: deflate failed");
    comp.resize(comp_len);

    std::vector<uint8_t> out;
    out.insert(out.end(), kSignature, kSignature + 8);
    uint8_t ihdr[13];
    ihdr[0] = static_cast<uint8_t>(dim >> 24);
    ihdr[1] = static_cast<uint8_t>(dim >> 16);
    ihdr[2] = static_cast<uint8_t>(dim >> 8);
    ihdr[3] = static_cast<uint8_t>(dim);
    std::memcpy(ihdr + 4, ihdr, 4);  // square image, height == width
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 2;   // color type: truecolor
    ihdr[10] = 0;  // compression
    ihdr[11] = 0;  // filter method
    ihdr[12] = 0;  // non-interlaced
    append_chunk(out, "IHDR", ihdr, 13);
    append_chunk(out, "IDAT", comp.data(), comp.size());
    append_chunk(out, "IEND", nullptr, 0);
    return out;
}

RgbImage decode_png(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kSignature, 8) != 0)
        throw CorruptFileError("png: bad signature");

    uint32_t width = 0, height = 0;
    bool have_ihdr = false;
    std::vector<uint8_t> idat;

    size_t pos = 8;
    while (pos + 12 <= bytes.size()) {
        uint32_t len = get_u32be(bytes.data() + pos);
        if (pos + 12 + static_cast<size_t>(len) > bytes.size())
            throw CorruptFileError("png: truncated chunk");
        const uint8_t* type = bytes.data() + pos + 4;
        const uint8_t* data = bytes.data() + pos + 8;
        uint32_t stored_crc = get_u32be(data + len);
        uint32_t actual_crc =
            static_cast<uint32_t>(crc32(0L, type, static_cast<uInt>(4 + len)));
        if (stored_crc != actual_crc) throw CorruptFileError("png: chunk CRC mismatch");

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) throw CorruptFileError("png: bad IHDR length");
            width = get_u32be(data);
            height = get_u32be(data + 4);
            if (data[8] != 8 || data[9] != 2 || data[10] != 0 || data[11] != 0 || data[12] != 0)
                throw CorruptFileError("png: unsupported format (need 8-bit RGB, non-interlaced)");
            if (width == 0 || height == 0 || width != height)
                throw CorruptFileError("png: unsupported dimensions (need square, nonzero)");
            have_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            if (!have_ihdr) throw CorruptFileError("png: IDAT before IHDR");
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        // Ancillary chunks are skipped.
        pos += 12 + len;
    }
    if (!have_ihdr) throw CorruptFileError("png: missing IHDR");
    if (idat.empty()) throw CorruptFileError("png: missing IDAT");

    const int bpp = 3;
    const size_t stride = static_cast<size_t>(width) * bpp;
    uLongf raw_len = static_cast<uLongf>((stride + 1) * height);
    std::vector<uint8_t> raw(raw_len);
    int rc = uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size()));
    if (rc != Z_OK || raw_len != (stride + 1) * height)
        throw CorruptFileError("png: inflate failed");

    RgbImage img;
    img.side = static_cast<int>(width);
    img.data.resize(stride * height);
    const uint8_t* prev = nullptr;
    for (uint32_t r = 0; r < height; ++r) {
        const uint8_t* src = raw.data() + static_cast<size_t>(r) * (stride + 1);
        uint8_t* dst = img.data.data() + static_cast<size_t>(r) * stride;
        std::memcpy(dst, src + 1, stride);
        unfilter_row(src[0], dst, prev, stride, bpp);
        prev = dst;
    }
    return img;
}

}  // namespace fractalgen
