#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace easl {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

inline constexpr std::size_t kEmotionClasses = 7;

inline constexpr std::array<std::string_view, kEmotionClasses> kEmotionNames = {"happy",   "sad",      "angry",  "fear",
                                                                                "disgust", "surprise", "neutral"};

}  // namespace easl
