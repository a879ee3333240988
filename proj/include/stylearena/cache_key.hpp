#pragma once

#include <string>

namespace stylearena {

/// Identity of one cached mimic generation. The canonical form
/// length-prefixes each string field, so keys built under different
/// protocol tags can never collide.
struct CacheKey {
    std::string protocol_tag;
    std::string generator;
    std::string pid;
    int task_idx = 0;

    std::string canonical() const {
        auto field = [](const std::string& s) { return std::to_string(s.size()) + ":" + s + "|"; };
        return field(protocol_tag) + field(generator) + field(pid) + std::to_string(task_idx);
    }

    friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

}  // namespace stylearena
