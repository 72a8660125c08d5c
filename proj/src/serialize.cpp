#include "gvg/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "gvg/common.hpp"

namespace gvg {

void put_u16(std::string& buf, uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; i++) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& buf, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(buf, bits);
}

namespace {
uint8_t get_u8(const std::string& buf, size_t& pos) {
    require(pos + 1 <= buf.size(), "truncated buffer while reading u8");
    return static_cast<uint8_t>(buf[pos++]);
}
}  // namespace

uint16_t get_u16(const std::string& buf, size_t& pos) {
    require(pos + 2 <= buf.size(), "truncated buffer while reading u16");
    uint16_t v = static_cast<uint8_t>(buf[pos]) | (static_cast<uint16_t>(static_cast<uint8_t>(buf[pos + 1])) << 8);
    pos += 2;
    return v;
}

uint32_t get_u32(const std::string& buf, size_t& pos) {
    require(pos + 4 <= buf.size(), "truncated buffer while reading u32");
    uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
}

float get_f32(const std::string& buf, size_t& pos) {
    uint32_t bits = get_u32(buf, pos);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail("cannot open file for writing: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) fail("short write to " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(const std::string& bytes) {
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(out);
}

std::string file_hash(const std::string& path) {
    return hash_hex(read_file(path));
}

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, Tensor>>& tensors) {
    std::string buf;
    buf += "GVGT";
    put_u16(buf, 1);
    put_u32(buf, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        require(!name.empty() && name.size() <= 0xffff, "checkpoint tensor name invalid: " + name);
        put_u16(buf, static_cast<uint16_t>(name.size()));
        buf += name;
        require(t.rank() <= 0xff, "checkpoint tensor rank too large for " + name);
        buf.push_back(static_cast<char>(t.rank()));
        for (int64_t d : t.shape()) put_u32(buf, static_cast<uint32_t>(d));
        for (double x : t.data()) put_f32(buf, static_cast<float>(x));
    }
    write_file_atomic(path, buf);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
    std::string buf = read_file(path);
    size_t pos = 0;
    require(buf.size() >= 4 && buf.compare(0, 4, "GVGT") == 0,
            "not a GVGT checkpoint: " + path);
    pos = 4;
    uint16_t version = get_u16(buf, pos);
    require(version == 1, "unsupported GVGT version " + std::to_string(version) + " in " + path);
    uint32_t count = get_u32(buf, pos);
    std::map<std::string, Tensor> out;
    for (uint32_t i = 0; i < count; i++) {
        uint16_t name_len = get_u16(buf, pos);
        require(pos + name_len <= buf.size(), "truncated tensor name in " + path);
        std::string name = buf.substr(pos, name_len);
        pos += name_len;
        uint8_t rank = get_u8(buf, pos);
        Shape shape(rank);
        int64_t numel = 1;
        for (int r = 0; r < rank; r++) {
            shape[r] = get_u32(buf, pos);
            numel *= shape[r];
        }
        std::vector<double> data(numel);
        for (int64_t j = 0; j < numel; j++) data[j] = static_cast<double>(get_f32(buf, pos));
        out.emplace(std::move(name), Tensor::from(shape, std::move(data)));
    }
    require(pos == buf.size(), "trailing bytes in checkpoint " + path);
    return out;
}

}  // namespace gvg
