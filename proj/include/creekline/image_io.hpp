#pragma once

#include "creekline/types.hpp"

#include <string>

namespace creekline {

// 8-bit image file I/O. PGM (P5/P2) and PPM (P6) are handled natively;
// .png goes through libpng. The format is picked from the file extension.

ColorImage read_color(const std::string& path);
GrayImage read_gray8(const std::string& path);

void write_color(const std::string& path, const ColorImage& img);

/// Writes a [0,1] plane as an 8-bit grayscale file (values scaled by 255
/// and rounded).
void write_gray8(const std::string& path, const GrayImage& img);

/// Quantizes a [0,1] value to the 8-bit scale used on disk.
std::uint8_t quantize8(double v);

}  // namespace creekline
