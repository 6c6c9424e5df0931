#include "fractalgen/codec.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fractalgen/ifs.hpp"
#include "json.hpp"

namespace fractalgen {

namespace {

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_f32(std::vector<uint8_t>& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

class Reader {
public:
    Reader(const uint8_t* data, size_t len) : data_(data), len_(len) {}

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32() {
        uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    size_t pos() const { return pos_; }
    size_t remaining() const { return len_ - pos_; }

private:
    void need(size_t n) const {
        if (len_ - pos_ < n) throw CorruptFileError("codes file truncated");
    }
    const uint8_t* data_;
    size_t len_;
    size_t pos_ = 0;
};

void append_code(std::vector<uint8_t>& out, const IfsCode& code) {
    size_t n = code.size();
    if (n < 2 || n > 255) throw DomainError("code size out of range for encoding");
    out.push_back(static_cast<uint8_t>(n));
    for (const AffineMap& m : code.maps) {
        for (double a : m.a) put_f32(out, static_cast<float>(a));
        put_f32(out, static_cast<float>(m.b[0]));
        put_f32(out, static_cast<float>(m.b[1]));
    }
}

}  // namespace

std::vector<uint8_t> encode_codes(const DatasetSpec& spec) {
    std::vector<uint8_t> out;
    out.insert(out.end(), {'F', 'I', 'F', 'S'});
    put_u16(out, kCodesFormatVersion);
    put_u32(out, static_cast<uint32_t>(spec.classes.size()));
    for (const auto& group : spec.classes) {
        if (group.empty() || group.size() > 0xffff)
            throw DomainError("class group size out of range for encoding");
        put_u16(out, static_cast<uint16_t>(group.size()));
        for (const IfsCode& code : group) append_code(out, code);
    }
    uint32_t crc = static_cast<uint32_t>(crc32(0L, out.data(), static_cast<uInt>(out.size())));
    put_u32(out, crc);
    return out;
}

CodesEncoder::CodesEncoder(std::ostream& out, uint32_t num_classes)
    : out_(out), declared_classes_(num_classes) {
    std::vector<uint8_t> header;
    header.insert(header.end(), {'F', 'I', 'F', 'S'});
    put_u16(header, kCodesFormatVersion);
    put_u32(header, num_classes);
    write(header.data(), header.size());
}

void CodesEncoder::add_group(const std::vector<IfsCode>& group) {
    if (finished_) throw std::logic_error("encoder already finished");
    if (written_classes_ == declared_classes_)
        throw std::logic_error("more groups than declared classes");
    if (group.empty() || group.size() > 0xffff)
        throw DomainError("class group size out of range for encoding");
    std::vector<uint8_t> buf;
    buf.reserve(2 + group.size() * (1 + 6 * 4 * group[0].size()));
    put_u16(buf, static_cast<uint16_t>(group.size()));
    for (const IfsCode& code : group) append_code(buf, code);
    write(buf.data(), buf.size());
    ++written_classes_;
}

void CodesEncoder::finish() {
    if (finished_) throw std::logic_error("encoder already finished");
    if (written_classes_ != declared_classes_)
        throw std::logic_error("fewer groups than declared classes");
    std::vector<uint8_t> tail;
    put_u32(tail, crc_);
    out_.write(reinterpret_cast<const char*>(tail.data()), static_cast<std::streamsize>(tail.size()));
    if (!out_) throw IoError("write failed");
    bytes_ += tail.size();
    finished_ = true;
}

void CodesEncoder::write(const void* data, size_t len) {
    crc_ = static_cast<uint32_t>(
        crc32(crc_, static_cast<const Bytef*>(data), static_cast<uInt>(len)));
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out_) throw IoError("write failed");
    bytes_ += len;
}

DecodeResult decode_codes(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 4 + 2 + 4 + 4) throw CorruptFileError("codes file too short");
    if (std::memcmp(bytes.data(), "FIFS", 4) != 0)
        throw CorruptFileError("bad magic, not a codes file");

    uint32_t stored_crc = 0;
    for (int i = 0; i < 4; ++i)
        stored_crc |= static_cast<uint32_t>(bytes[bytes.size() - 4 + i]) << (8 * i);
    uint32_t actual_crc = static_cast<uint32_t>(
        crc32(0L, bytes.data(), static_cast<uInt>(bytes.size() - 4)));
    if (stored_crc != actual_crc) throw CorruptFileError("codes file CRC mismatch");

    Reader r(bytes.data(), bytes.size() - 4);
    r.u32();  // magic, already checked
    uint16_t version = r.u16();
    if (version != kCodesFormatVersion) throw CorruptFileError("unsupported codes file version");
    uint32_t num_classes = r.u32();

    DecodeResult result;
    result.spec.classes.reserve(num_classes);
    for (uint32_t c = 0; c < num_classes; ++c) {
        uint16_t group_size = r.u16();
        if (group_size == 0) throw CorruptFileError("empty class group");
        std::vector<IfsCode> group;
        group.reserve(group_size);
        for (uint16_t g = 0; g < group_size; ++g) {
            uint8_t n = r.u8();
            if (n < 2) throw CorruptFileError("code with fewer than two maps");
            IfsCode code;
            code.maps.resize(n);
            for (uint8_t k = 0; k < n; ++k) {
                for (double& a : code.maps[k].a) a = r.f32();
                code.maps[k].b[0] = r.f32();
                code.maps[k].b[1] = r.f32();
                for (double a : code.maps[k].a)
                    if (!std::isfinite(a)) throw CorruptFileError("non-finite matrix entry");
                for (double b : code.maps[k].b)
                    if (!std::isfinite(b)) throw CorruptFileError("non-finite offset entry");
                double s = sigma_max(code.maps[k].a);
                if (s > 1.0 + kStoredContractTol)
                    result.violations.push_back({c, g, s});
            }
            code.probs = determinant_probabilities(code.maps);
            group.push_back(std::move(code));
        }
        result.spec.classes.push_back(std::move(group));
    }
    if (r.remaining() != 0) throw CorruptFileError("trailing bytes after last class");
    return result;
}

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    in.seekg(0, std::ios::end);
    auto len = in.tellg();
    if (len < 0) throw IoError("cannot stat " + path);
    in.seekg(0, std::ios::beg);
    std::vector<uint8_t> bytes(static_cast<size_t>(len));
    in.read(reinterpret_cast<char*>(bytes.data()), len);
    if (!in) throw IoError("short read on " + path);
    return bytes;
}

void write_file(const std::string& path, const void* data, size_t len) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw IoError("write failed on " + path);
}

std::string write_manifest(const DatasetSpec& spec, uint32_t codes_crc) {
    nlohmann::json j;
    j["format_version"] = spec.version;
    j["master_seed"] = spec.master_seed;
    j["num_classes"] = spec.classes.size();
    std::vector<uint32_t> group_sizes;
    group_sizes.reserve(spec.classes.size());
    for (const auto& g : spec.classes) group_sizes.push_back(static_cast<uint32_t>(g.size()));
    j["group_sizes"] = group_sizes;
    j["codes_crc32"] = codes_crc;
    j["render"] = {
        {"side", spec.render.side},
        {"sprite_side", spec.render.sprite_side},
        {"iterations", spec.render.iterations},
        {"burn_in", spec.render.burn_in},
        {"pad_fraction", spec.render.pad_fraction},
        {"region_scale_min", spec.render.region_scale_min},
        {"region_scale_max", spec.render.region_scale_max},
        {"blur_sigma_max", spec.render.blur_sigma_max},
        {"divergence_radius", spec.render.divergence_radius},
    };
    j["stream"] = {
        {"cache_capacity", spec.stream.cache_capacity},
        {"background_capacity", spec.stream.background_capacity},
        {"refresh_period", spec.stream.refresh_period},
        {"max_instances", spec.stream.max_instances},
    };
    return j.dump(2) + "\n";
}

ManifestInfo parse_manifest(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorruptFileError(std::string("manifest parse error: ") + e.what());
    }
    try {
        ManifestInfo info;
        info.master_seed = j.at("master_seed").get<uint64_t>();
        info.num_classes = j.at("num_classes").get<uint32_t>();
        info.group_sizes = j.at("group_sizes").get<std::vector<uint32_t>>();
        info.codes_crc = j.at("codes_crc32").get<uint32_t>();
        const auto& r = j.at("render");
        info.render.side = r.at("side").get<int>();
        info.render.sprite_side = r.at("sprite_side").get<int>();
        info.render.iterations = r.at("iterations").get<int>();
        info.render.burn_in = r.at("burn_in").get<int>();
        info.render.pad_fraction = r.at("pad_fraction").get<double>();
        info.render.region_scale_min = r.at("region_scale_min").get<double>();
        info.render.region_scale_max = r.at("region_scale_max").get<double>();
        info.render.blur_sigma_max = r.at("blur_sigma_max").get<double>();
        info.render.divergence_radius = r.at("divergence_radius").get<double>();
        const auto& s = j.at("stream");
        info.stream.cache_capacity = s.at("cache_capacity").get<int>();
        info.stream.background_capacity = s.at("background_capacity").get<int>();
        info.stream.refresh_period = s.at("refresh_period").get<int>();
        info.stream.max_instances = s.at("max_instances").get<int>();
        if (info.group_sizes.size() != info.num_classes)
            throw CorruptFileError("manifest group_sizes does not match num_classes");
        return info;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("manifest field error: ") + e.what());
    }
}

void write_png(const RgbImage& img, const std::string& path) {
    std::vector<uint8_t> bytes = encode_png(img);
    write_file(path, bytes.data(), bytes.size());
}

RgbImage read_png(const std::string& path) { return decode_png(read_file(path)); }

}  // namespace fractalgen
