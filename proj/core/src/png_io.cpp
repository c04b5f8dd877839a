#include "turbmt/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace turbmt::io {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// round-half-even quantization to [0, 255]
unsigned char quantize(double v) {
    v = std::min(1.0, std::max(0.0, v)) * 255.0;
    double r = std::nearbyint(v);  // default rounding mode is to-nearest-even
    return static_cast<unsigned char>(r);
}

}  // namespace

void write_png_frame(const std::filesystem::path& path, const Tensor& seq, int t) {
    if (t < 0 || t >= seq.t()) throw std::invalid_argument("write_png_frame: bad frame index");
    const int ch = seq.c();
    if (ch != 1 && ch != 3) throw std::invalid_argument("write_png_frame: need 1 or 3 channels");

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        FilePtr f(std::fopen(tmp.string().c_str(), "wb"));
        if (!f) throw std::runtime_error("cannot open for write: " + path.string());

        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png_create_info_struct(png);
        if (!png || !info || setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            throw std::runtime_error("libpng write failure: " + path.string());
        }
        png_init_io(png, f.get());
        png_set_IHDR(png, info, seq.w(), seq.h(), 8,
                     ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                     PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);

        std::vector<unsigned char> row(static_cast<size_t>(seq.w()) * ch);
        for (int y = 0; y < seq.h(); ++y) {
            for (int x = 0; x < seq.w(); ++x)
                for (int c = 0; c < ch; ++c)
                    row[static_cast<size_t>(x) * ch + c] = quantize(seq(t, y, x, c));
            png_write_row(png, row.data());
        }
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    }
    std::filesystem::rename(tmp, path);
}

Tensor read_png(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng read failure: " + path.string());
    }
    png_init_io(png, f.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int ch = static_cast<int>(png_get_channels(png, info));
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("unsupported PNG channel count: " + path.string());
    }

    Tensor out(1, h, w, ch);
    std::vector<unsigned char> row(static_cast<size_t>(w) * ch);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c)
                out(0, y, x, c) = row[static_cast<size_t>(x) * ch + c] / 255.0;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

}  // namespace turbmt::io
