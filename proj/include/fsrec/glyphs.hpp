#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "fsrec/image.hpp"
#include "fsrec/tensor.hpp"

namespace fsrec::data {

/// 5x7 bitmap font for A-Z; one byte per column, bit 0 the top row.
inline const std::array<std::array<std::uint8_t, 5>, 26>& font5x7() {
    static const std::array<std::array<std::uint8_t, 5>, 26> table = {{
        {0x7E, 0x11, 0x11, 0x11, 0x7E},  // A
        {0x7F, 0x49, 0x49, 0x49, 0x36},  // B
        {0x3E, 0x41, 0x41, 0x41, 0x22},  // C
        {0x7F, 0x41, 0x41, 0x22, 0x1C},  // D
        {0x7F, 0x49, 0x49, 0x49, 0x41},  // E
        {0x7F, 0x09, 0x09, 0x09, 0x01},  // F
        {0x3E, 0x41, 0x49, 0x49, 0x7A},  // G
        {0x7F, 0x08, 0x08, 0x08, 0x7F},  // H
        {0x00, 0x41, 0x7F, 0x41, 0x00},  // I
        {0x20, 0x40, 0x41, 0x3F, 0x01},  // J
        {0x7F, 0x08, 0x14, 0x22, 0x41},  // K
        {0x7F, 0x40, 0x40, 0x40, 0x40},  // L
        {0x7F, 0x02, 0x0C, 0x02, 0x7F},  // M
        {0x7F, 0x04, 0x08, 0x10, 0x7F},  // N
        {0x3E, 0x41, 0x41, 0x41, 0x3E},  // O
        {0x7F, 0x09, 0x09, 0x09, 0x06},  // P
        {0x3E, 0x41, 0x51, 0x21, 0x5E},  // Q
        {0x7F, 0x09, 0x19, 0x29, 0x46},  // R
        {0x46, 0x49, 0x49, 0x49, 0x31},  // S
        {0x01, 0x01, 0x7F, 0x01, 0x01},  // T
        {0x3F, 0x40, 0x40, 0x40, 0x3F},  // U
        {0x1F, 0x20, 0x40, 0x20, 0x1F},  // V
        {0x3F, 0x40, 0x38, 0x40, 0x3F},  // W
        {0x63, 0x14, 0x08, 0x14, 0x63},  // X
        {0x07, 0x08, 0x70, 0x08, 0x07},  // Y
        {0x61, 0x51, 0x49, 0x45, 0x43},  // Z
    }};
    return table;
}

/// Deterministic 64x64 grayscale template for one letter: the 5x7 bitmap
/// scaled into a centered 40x56 box, edges softened with one blur pass.
inline Tensor glyph_template(char letter) {
    if (letter >= 'a' && letter <= 'z') letter = static_cast<char>(letter - 'a' + 'A');
    if (letter < 'A' || letter > 'Z') {
        throw std::invalid_argument("glyph_template: letter out of range");
    }
    const auto& cols = font5x7()[static_cast<std::size_t>(letter - 'A')];
    constexpr int cell = 8;
    constexpr int x_off = (64 - 5 * cell) / 2;  // 12
    constexpr int y_off = (64 - 7 * cell) / 2;  // 4
    Tensor img({kImageSize, kImageSize});
    for (int col = 0; col < 5; ++col) {
        for (int row = 0; row < 7; ++row) {
            if (!((cols[static_cast<std::size_t>(col)] >> row) & 1)) continue;
            for (int dy = 0; dy < cell; ++dy) {
                for (int dx = 0; dx < cell; ++dx) {
                    img.at(static_cast<std::size_t>(y_off + row * cell + dy),
                           static_cast<std::size_t>(x_off + col * cell + dx)) = 1.0;
                }
            }
        }
    }
    return box_blur(img);
}

}  // namespace fsrec::data
