#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "growcut/slice.hpp"

namespace growcut::png {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // row-major, pixels[y * width + x]
};

/// 8-bit grayscale PNG bytes. Fixed compression settings, so identical
/// input gives identical bytes.
std::string encode_gray8(const GrayImage& image);
GrayImage decode_gray8(const std::string& bytes);

/// Linear display mapping: clamp((v - (level - window / 2)) / window, 0, 1) * 255,
/// rounded half away from zero. Requires window > 0.
std::uint8_t window_level(double value, double window, double level) noexcept;

GrayImage render_slice(const Slice2D<float>& slice, double window, double level);

} // namespace growcut::png
