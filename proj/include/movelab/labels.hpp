#pragma once

#include <array>
#include <string>
#include <string_view>

#include "movelab/errors.hpp"

namespace movelab {

// The 8 movement classes of the stacking task. Codes 0-7 in this order are
// part of every on-disk format and of all tie-breaking rules.
enum class LabelClass : int {
    middle2front = 0,
    front2middle = 1,
    middle2left = 2,
    left2middle = 3,
    middle2right = 4,
    right2middle = 5,
    middle2down = 6,
    down2middle = 7,
};

inline constexpr int kNumClasses = 8;

inline constexpr std::array<std::string_view, kNumClasses> kLabelNames = {
    "middle2front", "front2middle", "middle2left", "left2middle",
    "middle2right", "right2middle", "middle2down", "down2middle",
};

inline std::string_view to_string(LabelClass c) {
    return kLabelNames[static_cast<std::size_t>(c)];
}

inline LabelClass label_from_string(std::string_view name) {
    for (int i = 0; i < kNumClasses; ++i) {
        if (kLabelNames[static_cast<std::size_t>(i)] == name) return static_cast<LabelClass>(i);
    }
    throw ParseError("unknown label class '" + std::string(name) + "'");
}

inline int label_code(LabelClass c) { return static_cast<int>(c); }

} // namespace movelab
