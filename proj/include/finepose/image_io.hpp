#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "finepose/mask.hpp"

namespace finepose {

/// 8-bit interleaved RGB image.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // width * height * 3
};

/// Reads any PNG; a pixel is foreground when any colour channel is nonzero
/// (alpha is ignored).
BinaryMask read_mask_png(const std::filesystem::path& path);
/// 8-bit grayscale, 0 = background, 255 = object.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
std::string encode_mask_png(const BinaryMask& mask);

RgbImage read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);
/// `compression` follows zlib levels (0-9).
std::string encode_rgb_png(const RgbImage& image, int compression = 6);

/// Paints the mask's set pixels 50% green over `image` in place.
void blend_overlay(RgbImage& image, const BinaryMask& mask);

}  // namespace finepose
