#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dsom/matrix.hpp"

namespace dsom {

/// Decodes UTF-8 into Unicode scalar values. Strings are compared per scalar
/// value, not per byte, so multibyte characters count as single symbols.
inline std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0;
        std::size_t len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            throw std::invalid_argument("decode_utf8: invalid leading byte at offset " + std::to_string(i));
        }
        if (i + len > s.size())
            throw std::invalid_argument("decode_utf8: truncated sequence at offset " + std::to_string(i));
        for (std::size_t j = 1; j < len; ++j) {
            const auto bj = static_cast<unsigned char>(s[i + j]);
            if ((bj & 0xC0) != 0x80)
                throw std::invalid_argument("decode_utf8: invalid continuation byte at offset " +
                                            std::to_string(i + j));
            cp = (cp << 6) | (bj & 0x3F);
        }
        // Reject overlong encodings and surrogate range.
        static constexpr char32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && cp < min_for_len[len])
            throw std::invalid_argument("decode_utf8: overlong encoding at offset " + std::to_string(i));
        if (cp >= 0xD800 && cp <= 0xDFFF)
            throw std::invalid_argument("decode_utf8: surrogate code point at offset " + std::to_string(i));
        if (cp > 0x10FFFF)
            throw std::invalid_argument("decode_utf8: code point out of range at offset " + std::to_string(i));
        out.push_back(cp);
        i += len;
    }
    return out;
}

/// Edit distance: the minimum number of single-symbol replacements,
/// insertions and deletions transforming a into b, all at unit cost.
/// Two-row dynamic program, O(|a|*|b|) time, O(min) space.
inline std::int64_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<char32_t> sa = decode_utf8(a);
    std::vector<char32_t> sb = decode_utf8(b);
    if (sa.size() < sb.size()) sa.swap(sb); // keep the row short
    const std::size_t la = sa.size(), lb = sb.size();
    if (lb == 0) return static_cast<std::int64_t>(la);
    std::vector<std::int64_t> row(lb + 1);
    for (std::size_t j = 0; j <= lb; ++j) row[j] = static_cast<std::int64_t>(j);
    for (std::size_t i = 1; i <= la; ++i) {
        std::int64_t diag = row[0];
        row[0] = static_cast<std::int64_t>(i);
        for (std::size_t j = 1; j <= lb; ++j) {
            const std::int64_t sub = diag + (sa[i - 1] == sb[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
        }
    }
    return row[lb];
}

/// Edit distance divided by the length of the longer string (in scalar
/// values), so the result lies in [0, 1]. Two empty strings are identical
/// and map to 0 rather than dividing by zero.
inline double normalized_levenshtein(std::string_view a, std::string_view b) {
    const std::size_t la = decode_utf8(a).size();
    const std::size_t lb = decode_utf8(b).size();
    const std::size_t longest = std::max(la, lb);
    if (longest == 0) return 0.0;
    return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

/// Pairwise (normalized) edit distance matrix over a word list. Duplicate
/// words are allowed; they simply produce zero dissimilarity off-diagonal.
inline DissimilarityMatrix build_from_words(const std::vector<std::string>& words, bool normalized) {
    if (words.empty()) throw std::invalid_argument("build_from_words: empty word list");
    const std::size_t n = words.size();
    std::vector<double> values(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            const double d = normalized
                                 ? normalized_levenshtein(words[i], words[k])
                                 : static_cast<double>(levenshtein(words[i], words[k]));
            values[i * n + k] = d;
            values[k * n + i] = d;
        }
    }
    const ValueKind kind = normalized ? DissimilarityMatrix::detect_kind(values)
                                      : ValueKind::integer_valued;
    return DissimilarityMatrix(static_cast<std::int32_t>(n), std::move(values), kind);
}

} // namespace dsom
