#include "uvtex/tensor_io.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

namespace uvtex {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_u32(std::FILE* f, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    std::fwrite(b, 1, 4, f);
}

uint32_t read_u32(std::FILE* f, const std::string& path) {
    unsigned char b[4];
    check(std::fread(b, 1, 4, f) == 4, Err::IoError, "truncated tensor file: " + path);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

} // namespace

void save_uvt(const std::string& path, const Tensor& t) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    check(f != nullptr, Err::IoError, "cannot open for write: " + path);
    std::fwrite("UVT1", 1, 4, f.get());
    write_u32(f.get(), 0); // dtype float32
    write_u32(f.get(), static_cast<uint32_t>(t.rank()));
    for (int d : t.shape) write_u32(f.get(), static_cast<uint32_t>(d));
    // Host is little-endian x86; payload written as-is.
    size_t n = t.data.size();
    check(std::fwrite(t.data.data(), sizeof(float), n, f.get()) == n, Err::IoError,
          "short write: " + path);
    check(std::fflush(f.get()) == 0, Err::IoError, "flush failed: " + path);
}

Tensor load_uvt(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    check(f != nullptr, Err::IoError, "cannot open: " + path);
    char magic[4];
    check(std::fread(magic, 1, 4, f.get()) == 4 && std::memcmp(magic, "UVT1", 4) == 0,
          Err::IoError, "bad magic in " + path);
    uint32_t dtype = read_u32(f.get(), path);
    check(dtype == 0, Err::IoError, "unsupported dtype tag in " + path);
    uint32_t rank = read_u32(f.get(), path);
    check(rank <= 8, Err::IoError, "absurd rank in " + path);
    std::vector<int> shape(rank);
    int64_t n = 1;
    for (uint32_t i = 0; i < rank; ++i) {
        shape[i] = static_cast<int>(read_u32(f.get(), path));
        n *= shape[i];
    }
    Tensor t;
    t.shape = shape;
    t.data.resize(static_cast<size_t>(n));
    check(std::fread(t.data.data(), sizeof(float), t.data.size(), f.get()) == t.data.size(),
          Err::IoError, "truncated payload in " + path);
    return t;
}

} // namespace uvtex
