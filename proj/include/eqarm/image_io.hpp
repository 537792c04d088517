#pragma once

#include <filesystem>

#include "eqarm/types.hpp"

namespace eqarm {

// Lossless still-frame storage as binary netpbm: P5 (one channel) or
// P6 (three channels), maxval 255. Intensities map as byte / 255.

Frame load_frame_image(const std::filesystem::path& path);
void save_frame_image(const Frame& frame, const std::filesystem::path& path);

/// Quantize an intensity in [0,1] to the storage byte.
std::uint8_t intensity_to_byte(float v);
float byte_to_intensity(std::uint8_t b);

}  // namespace eqarm
