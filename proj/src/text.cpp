#include "stylearena/text.hpp"

#include <algorithm>
#include <cctype>
#include <tuple>

namespace stylearena {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

MatchingBlock longest_match(std::u32string_view a, std::size_t alo, std::size_t ahi,
                            std::u32string_view b, std::size_t blo, std::size_t bhi) {
    // Rolling DP over match lengths ending at (i, j). Scanning i then j in
    // ascending order and only replacing on a strictly longer match yields
    // the leftmost-in-a, then leftmost-in-b, longest block.
    const std::size_t width = bhi - blo;
    std::vector<std::size_t> prev(width + 1, 0);
    std::vector<std::size_t> cur(width + 1, 0);
    MatchingBlock best{alo, blo, 0};
    for (std::size_t i = alo; i < ahi; ++i) {
        for (std::size_t j = blo; j < bhi; ++j) {
            const std::size_t col = j - blo + 1;
            if (a[i] == b[j]) {
                cur[col] = prev[col - 1] + 1;
                if (cur[col] > best.size) {
                    best.size = cur[col];
                    best.a_pos = i + 1 - best.size;
                    best.b_pos = j + 1 - best.size;
                }
            } else {
                cur[col] = 0;
            }
        }
        std::swap(prev, cur);
    }
    return best;
}

}  // namespace

std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

bool in_range(std::string_view text, std::size_t lo, std::size_t hi) {
    const std::size_t n = word_count(text);
    return n >= lo && n <= hi;
}

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t extra = 0;
        char32_t cp = lead;
        if ((lead & 0xE0) == 0xC0) {
            extra = 1;
            cp = lead & 0x1F;
        } else if ((lead & 0xF0) == 0xE0) {
            extra = 2;
            cp = lead & 0x0F;
        } else if ((lead & 0xF8) == 0xF0) {
            extra = 3;
            cp = lead & 0x07;
        }
        bool valid = extra > 0 && i + extra < text.size();
        for (std::size_t k = 1; valid && k <= extra; ++k) {
            const auto cont = static_cast<unsigned char>(text[i + k]);
            if ((cont & 0xC0) != 0x80) {
                valid = false;
            } else {
                cp = (cp << 6) | (cont & 0x3F);
            }
        }
        if (valid) {
            out.push_back(cp);
            i += extra + 1;
        } else {
            out.push_back(lead);
            ++i;
        }
    }
    return out;
}

std::vector<MatchingBlock> matching_blocks(std::u32string_view a, std::u32string_view b) {
    std::vector<MatchingBlock> blocks;
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>> pending;
    pending.emplace_back(0, a.size(), 0, b.size());
    while (!pending.empty()) {
        auto [alo, ahi, blo, bhi] = pending.back();
        pending.pop_back();
        if (alo >= ahi || blo >= bhi) {
            continue;
        }
        const MatchingBlock m = longest_match(a, alo, ahi, b, blo, bhi);
        if (m.size == 0) {
            continue;
        }
        blocks.push_back(m);
        pending.emplace_back(alo, m.a_pos, blo, m.b_pos);
        pending.emplace_back(m.a_pos + m.size, ahi, m.b_pos + m.size, bhi);
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const MatchingBlock& x, const MatchingBlock& y) { return x.a_pos < y.a_pos; });
    return blocks;
}

double lexical_overlap(std::string_view a, std::string_view b) {
    const std::u32string ua = decode_utf8(a);
    const std::u32string ub = decode_utf8(b);
    const std::size_t total = ua.size() + ub.size();
    if (total == 0) {
        return 1.0;
    }
    std::size_t matched = 0;
    for (const auto& block : matching_blocks(ua, ub)) {
        matched += block.size;
    }
    return 2.0 * static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace stylearena
