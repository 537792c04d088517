#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace eqarm {

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::string base64_encode(const std::vector<std::uint8_t>& data);

/// Throws ValidationError on non-base64 input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace eqarm
