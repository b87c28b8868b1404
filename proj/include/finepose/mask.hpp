#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace finepose {

/// Fixed-size row-major bitmask. Width and height are always positive.
class BinaryMask {
public:
    BinaryMask(int width, int height);
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return bits_.size(); }

    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool on = true) { bits_[index(x, y)] = on ? 1 : 0; }
    void fill(bool on);

    /// One byte per pixel, 0 or 1.
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::span<std::uint8_t> bits() noexcept { return bits_; }

    bool same_shape(const BinaryMask& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const BinaryMask&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> bits_;
};

/// Number of set pixels.
std::size_t mask_area(const BinaryMask& mask);

}  // namespace finepose
