#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace stylearena {

/// Number of maximal whitespace-delimited tokens. Punctuation is not stripped.
std::size_t word_count(std::string_view text);

/// Inclusive word-range check, default 100..200 words.
bool in_range(std::string_view text, std::size_t lo = 100, std::size_t hi = 200);

/// Decodes UTF-8 into code points. Invalid bytes decode to themselves.
std::u32string decode_utf8(std::string_view text);

struct MatchingBlock {
    std::size_t a_pos = 0;
    std::size_t b_pos = 0;
    std::size_t size = 0;
};

/// Ratcliff-Obershelp matching blocks over code points, in a-order.
///
/// Each step takes the longest common substring of the current window; ties
/// go to the match starting leftmost in `a`, then leftmost in `b`. The
/// windows on either side of the match are then processed recursively.
std::vector<MatchingBlock> matching_blocks(std::u32string_view a, std::u32string_view b);

/// 2*M / (|a| + |b|) where M is the total matched-block length.
/// Empty vs empty is 1.0; empty vs non-empty is 0.0.
double lexical_overlap(std::string_view a, std::string_view b);

}  // namespace stylearena
