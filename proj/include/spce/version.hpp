#pragma once

#include <string_view>

namespace spce {

inline constexpr std::string_view k_version = "spce-lab-0.1.0";
inline constexpr int k_report_schema = 1;

}  // namespace spce
