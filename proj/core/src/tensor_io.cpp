#include "turbmt/tensor_io.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace turbmt::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_u32(std::FILE* f, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    if (std::fwrite(b, 1, 4, f) != 4) throw std::runtime_error("tensor write failed");
}

uint32_t get_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw std::runtime_error("tensor read: truncated header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void write_raw(const std::filesystem::path& path,
               const std::vector<uint32_t>& dims, const std::vector<double>& data) {
    // write to a temp file then rename, so partial writes never clobber outputs
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        FilePtr f(std::fopen(tmp.string().c_str(), "wb"));
        if (!f) throw std::runtime_error("cannot open for write: " + path.string());
        if (std::fwrite("TSM1", 1, 4, f.get()) != 4)
            throw std::runtime_error("tensor write failed");
        put_u32(f.get(), static_cast<uint32_t>(dims.size()));
        size_t n = 1;
        for (uint32_t d : dims) {
            put_u32(f.get(), d);
            n *= d;
        }
        put_u32(f.get(), kDtypeF32);
        if (n != data.size()) throw std::logic_error("write_raw: dims/data mismatch");
        std::vector<float> payload(data.begin(), data.end());
        if (!payload.empty() &&
            std::fwrite(payload.data(), sizeof(float), payload.size(), f.get()) != payload.size())
            throw std::runtime_error("tensor write failed");
    }
    std::filesystem::rename(tmp, path);
}

std::pair<std::vector<uint32_t>, std::vector<double>>
read_raw(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open: " + path.string());
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, "TSM1", 4) != 0)
        throw std::runtime_error("not a TSM1 tensor file: " + path.string());
    uint32_t rank = get_u32(f.get());
    if (rank < 1 || rank > 4) throw std::runtime_error("unsupported tensor rank");
    std::vector<uint32_t> dims(rank);
    size_t n = 1;
    for (auto& d : dims) {
        d = get_u32(f.get());
        n *= d;
    }
    if (get_u32(f.get()) != kDtypeF32) throw std::runtime_error("unsupported dtype");
    std::vector<float> payload(n);
    if (n && std::fread(payload.data(), sizeof(float), n, f.get()) != n)
        throw std::runtime_error("tensor read: truncated payload");
    return {dims, std::vector<double>(payload.begin(), payload.end())};
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
    write_raw(path,
              {static_cast<uint32_t>(t.t()), static_cast<uint32_t>(t.h()),
               static_cast<uint32_t>(t.w()), static_cast<uint32_t>(t.c())},
              t.raw());
}

void write_grid(const std::filesystem::path& path, const Grid& g) {
    write_raw(path, {static_cast<uint32_t>(g.rows()), static_cast<uint32_t>(g.cols())},
              g.raw());
}

Tensor read_tensor(const std::filesystem::path& path) {
    auto [dims, data] = read_raw(path);
    if (dims.size() != 4) throw std::runtime_error("expected rank-4 tensor: " + path.string());
    Tensor t(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
             static_cast<int>(dims[2]), static_cast<int>(dims[3]));
    t.raw() = std::move(data);
    return t;
}

Grid read_grid(const std::filesystem::path& path) {
    auto [dims, data] = read_raw(path);
    if (dims.size() != 2) throw std::runtime_error("expected rank-2 tensor: " + path.string());
    Grid g(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    g.raw() = std::move(data);
    return g;
}

}  // namespace turbmt::io
