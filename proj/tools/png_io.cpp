#include "png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "tpsalign/errors.hpp"

namespace tpsalign::cli {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

FeatureMap<double> read_png(const std::string& path) {
    File file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw ParseError("cannot open image '" + path + "'");
    }
    png_byte signature[8] = {};
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
        throw ParseError("'" + path + "' is not a PNG file");
    }
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("libpng initialization failed");
    }
    std::vector<png_byte> pixels;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("corrupt PNG '" + path + "'");
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_packing(png);
    png_set_expand(png);
    png_read_update_info(png, info);
    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const std::size_t channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) {
        rows[r] = pixels.data() + r * stride;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    FeatureMap<double> image(channels, height, width);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            for (std::size_t k = 0; k < channels; ++k) {
                image(k, r, c) = static_cast<double>(pixels[r * stride + c * channels + k]) / 255.0;
            }
        }
    }
    return image;
}

void write_png(const std::string& path, const FeatureMap<double>& image) {
    static constexpr int kColorTypes[] = {PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA, PNG_COLOR_TYPE_RGB,
                                          PNG_COLOR_TYPE_RGB_ALPHA};
    const std::size_t channels = image.channels();
    if (channels < 1 || channels > 4) {
        throw ShapeError("write_png: " + std::to_string(channels) + " channels cannot be stored as PNG");
    }
    const std::size_t width = image.width();
    const std::size_t height = image.height();
    std::vector<png_byte> pixels(width * height * channels);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            for (std::size_t k = 0; k < channels; ++k) {
                const double v = std::clamp(image(k, r, c), 0.0, 1.0);
                pixels[(r * width + c) * channels + k] = static_cast<png_byte>(std::lround(v * 255.0));
            }
        }
    }
    File file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw ParseError("cannot write image '" + path + "'");
    }
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw ParseError("libpng initialization failed");
    }
    std::vector<png_bytep> rows(height);
    for (std::size_t r = 0; r < height; ++r) {
        rows[r] = pixels.data() + r * width * channels;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ParseError("failed writing PNG '" + path + "'");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 kColorTypes[channels - 1], PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace tpsalign::cli
