#include "uvtex/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

namespace uvtex {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

void save_png(const std::string& path, const Tensor& image) {
    check(image.rank() == 3 && image.dim(2) == 3, Err::ShapeMismatch,
          "save_png expects {H,W,3}, got rank " + std::to_string(image.rank()));
    const int h = image.dim(0), w = image.dim(1);

    std::vector<unsigned char> bytes(static_cast<size_t>(h) * w * 3);
    for (size_t i = 0; i < bytes.size(); ++i) {
        float v = image.data[i];
        v = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0f));
    }

    FilePtr f(std::fopen(path.c_str(), "wb"));
    check(f != nullptr, Err::IoError, "cannot open for write: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    check(png != nullptr, Err::IoError, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(Err::IoError, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(Err::IoError, "libpng write error: " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<size_t>(h));
    for (int y = 0; y < h; ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * w * 3;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Tensor load_png(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    check(f != nullptr, Err::IoError, "cannot open: " + path);

    unsigned char sig[8];
    check(std::fread(sig, 1, 8, f.get()) == 8 && png_sig_cmp(sig, 0, 8) == 0, Err::IoError,
          "not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    check(png != nullptr, Err::IoError, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(Err::IoError, "png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(Err::IoError, "libpng read error: " + path);
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    std::vector<unsigned char> bytes(static_cast<size_t>(h) * w * 3);
    std::vector<png_bytep> rows(static_cast<size_t>(h));
    for (int y = 0; y < h; ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Tensor img({h, w, 3});
    for (size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0f;
    return img;
}

} // namespace uvtex
