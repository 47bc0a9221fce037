#ifndef TEXFUSE_IMAGE_IO_HPP
#define TEXFUSE_IMAGE_IO_HPP

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "texfuse/error.hpp"
#include "texfuse/image.hpp"

namespace texfuse {

enum class ImageFormat { png, pgm };

// BT.601 luma weights used wherever color is collapsed to gray.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

namespace detail {

struct PngReadState {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

inline void png_read_fn(png_structp png, png_bytep out, png_size_t count) {
    auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
    if (st->pos + count > st->size) png_error(png, "unexpected end of stream");
    std::memcpy(out, st->data + st->pos, count);
    st->pos += count;
}

inline void png_error_fn(png_structp, png_const_charp msg) {
    throw Error(Errc::malformed_file, std::string("png: ") + msg);
}

inline void png_warn_fn(png_structp, png_const_charp) {}

} // namespace detail

inline GrayImage decode_png(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
        throw Error(Errc::malformed_file, "png: bad signature");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             detail::png_error_fn, detail::png_warn_fn);
    if (!png) throw Error(Errc::io_failure, "png: allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(Errc::io_failure, "png: allocation failed");
    }
    detail::PngReadState st{bytes.data(), bytes.size(), 0};
    std::vector<std::vector<png_byte>> rows;
    GrayImage img;
    try {
        png_set_read_fn(png, &st, detail::png_read_fn);
        png_read_info(png, info);

        const png_uint_32 w = png_get_image_width(png, info);
        const png_uint_32 h = png_get_image_height(png, info);
        if (w < 1 || h < 1 || w > 1u << 20 || h > 1u << 20)
            throw Error(Errc::malformed_file, "png: unreasonable dimensions");
        const int color = png_get_color_type(png, info);
        const int depth = png_get_bit_depth(png, info);

        // Normalize every variant to 8-bit RGB or gray; drop alpha.
        if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
        if (depth == 16) png_set_strip_16(png);
        if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
        if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
        png_read_update_info(png, info);

        const int channels = png_get_channels(png, info);
        if (channels != 1 && channels != 3)
            throw Error(Errc::unsupported_format, "png: unsupported channel layout");
        const std::size_t rowbytes = png_get_rowbytes(png, info);

        rows.assign(h, std::vector<png_byte>(rowbytes));
        std::vector<png_bytep> row_ptrs(h);
        for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = rows[y].data();
        png_read_image(png, row_ptrs.data());

        img = GrayImage(static_cast<int>(w), static_cast<int>(h));
        for (png_uint_32 y = 0; y < h; ++y) {
            const png_byte* r = rows[y].data();
            for (png_uint_32 x = 0; x < w; ++x) {
                if (channels == 1) {
                    img.at(static_cast<int>(x), static_cast<int>(y)) = r[x];
                } else {
                    const double lum = kLumaR * r[3 * x] + kLumaG * r[3 * x + 1] + kLumaB * r[3 * x + 2];
                    img.at(static_cast<int>(x), static_cast<int>(y)) = lum;
                }
            }
        }
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

inline GrayImage decode_image(const std::vector<std::uint8_t>& bytes, ImageFormat format) {
    switch (format) {
        case ImageFormat::png: return decode_png(bytes);
        case ImageFormat::pgm: return decode_pgm(bytes);
    }
    throw Error(Errc::unsupported_format, "unknown image format");
}

// Sniffs the container from leading magic bytes, not the file name.
inline ImageFormat sniff_format(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return ImageFormat::png;
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5'))
        return ImageFormat::pgm;
    throw Error(Errc::unsupported_format, "unrecognized image magic");
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_failure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(Errc::io_failure, "read failed on " + path.string());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io_failure, "write failed on " + path.string());
}

inline GrayImage load_image(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    if (bytes.empty()) throw Error(Errc::malformed_file, "empty image file: " + path.string());
    return decode_image(bytes, sniff_format(bytes));
}

inline void save_pgm(const std::filesystem::path& path, const GrayImage& img) {
    write_file_bytes(path, encode_pgm(img));
}

} // namespace texfuse

#endif
