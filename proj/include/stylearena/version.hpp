#pragma once

#include <string>
#include <string_view>

namespace stylearena {

std::string_view version();

inline constexpr std::string_view kDefaultProtocolTag = "held_out_protocol_v1";

}  // namespace stylearena
