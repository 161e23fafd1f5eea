#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace procnet::detail {

/// (name, JSON text) of every file under scenarios/, embedded at build time.
const std::vector<std::pair<std::string_view, std::string_view>>& builtin_preset_texts();

}  // namespace procnet::detail
