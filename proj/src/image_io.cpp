#include "finepose/image_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

#include "finepose/error.hpp"

namespace finepose {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct Decoded {
    int width = 0;
    int height = 0;
    int channels = 0;  // after transforms
    int bytes_per_sample = 1;
    std::vector<std::uint8_t> data;
};

void on_png_error(png_structp png, png_const_charp msg) {
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    if (err) *err = msg;
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// Decodes to 8- or 16-bit gray/RGB without alpha and without palette.
Decoded decode(const std::filesystem::path& path, bool keep_16bit, bool force_rgb) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open PNG '" + path.string() + "'");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw IoError("'" + path.string() + "' is not a PNG file");
    }

    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }

    Decoded out;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("decoding '" + path.string() + "': " + err);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) {
        // strip_16 would map small 16-bit values to 0
        if (!keep_16bit) png_set_strip_16(png);
    }
    png_set_strip_alpha(png);
    if (force_rgb) png_set_gray_to_rgb(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.channels = png_get_channels(png, info);
    out.bytes_per_sample = png_get_bit_depth(png, info) == 16 ? 2 : 1;
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    out.data.resize(rowbytes * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + rowbytes * static_cast<std::size_t>(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void append_bytes(png_structp png, png_bytep data, png_size_t len) {
    auto* buf = static_cast<std::string*>(png_get_io_ptr(png));
    buf->append(reinterpret_cast<const char*>(data), len);
}

void flush_noop(png_structp) {}

std::string encode(int width, int height, int color_type, int channels,
                   const std::vector<std::uint8_t>& data, int compression) {
    std::string buffer;
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("encoding PNG: " + err);
    }
    png_set_write_fn(png, &buffer, append_bytes, flush_noop);
    png_set_compression_level(png, compression);
    // adaptive filtering dominates the cost of fast encodes; flat overlays compress fine without it
    if (compression <= 3) png_set_filter(png, 0, PNG_FILTER_SUB);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
    for (int y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(data.data() + stride * static_cast<std::size_t>(y));
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return buffer;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file || std::fwrite(bytes.data(), 1, bytes.size(), file.get()) != bytes.size()) {
        throw IoError("cannot write '" + path.string() + "'");
    }
}

}  // namespace

BinaryMask read_mask_png(const std::filesystem::path& path) {
    const Decoded img = decode(path, /*keep_16bit=*/true, /*force_rgb=*/false);
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    const std::size_t px_bytes = static_cast<std::size_t>(img.channels * img.bytes_per_sample);
    std::vector<std::uint8_t> bits(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = img.data.data() + i * px_bytes;
        bool any = false;
        for (std::size_t k = 0; k < px_bytes; ++k) any = any || p[k] != 0;
        bits[i] = any ? 1 : 0;
    }
    return BinaryMask(img.width, img.height, std::move(bits));
}

std::string encode_mask_png(const BinaryMask& mask) {
    std::vector<std::uint8_t> gray(mask.size());
    const auto bits = mask.bits();
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = bits[i] ? 255 : 0;
    return encode(mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, 1, gray, 6);
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    write_file(path, encode_mask_png(mask));
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
    Decoded img = decode(path, /*keep_16bit=*/false, /*force_rgb=*/true);
    return {img.width, img.height, std::move(img.data)};
}

std::string encode_rgb_png(const RgbImage& image, int compression) {
    if (image.width <= 0 || image.height <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
        throw InvalidParameterError("RGB image buffer does not match its dimensions");
    }
    return encode(image.width, image.height, PNG_COLOR_TYPE_RGB, 3, image.pixels, compression);
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
    write_file(path, encode_rgb_png(image));
}

void blend_overlay(RgbImage& image, const BinaryMask& mask) {
    if (image.width != mask.width() || image.height != mask.height()) {
        throw DimensionMismatchError("overlay mask and image differ in size");
    }
    const auto bits = mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (!bits[i]) continue;
        std::uint8_t* px = image.pixels.data() + 3 * i;
        px[0] = static_cast<std::uint8_t>(px[0] / 2);
        px[1] = static_cast<std::uint8_t>((px[1] + 255 + 1) / 2);
        px[2] = static_cast<std::uint8_t>(px[2] / 2);
    }
}

}  // namespace finepose
