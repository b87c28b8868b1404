#include "finepose/mask.hpp"

#include <algorithm>
#include <string>

#include "finepose/error.hpp"

namespace finepose {

BinaryMask::BinaryMask(int width, int height) : BinaryMask(width, height, {}) {}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    if (width <= 0 || height <= 0) {
        throw InvalidParameterError("mask dimensions must be positive, got " + std::to_string(width) +
                                    "x" + std::to_string(height));
    }
    const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bits_.empty()) {
        bits_.assign(n, 0);
    } else if (bits_.size() != n) {
        throw DimensionMismatchError("mask bit count does not match width*height");
    } else {
        for (auto& b : bits_) b = b != 0 ? 1 : 0;
    }
}

void BinaryMask::fill(bool on) { std::fill(bits_.begin(), bits_.end(), on ? 1 : 0); }

std::size_t mask_area(const BinaryMask& mask) {
    std::size_t n = 0;
    for (const std::uint8_t b : mask.bits()) n += b;
    return n;
}

}  // namespace finepose
