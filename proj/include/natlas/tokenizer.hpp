#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace natlas::tok {

// Byte-level vocabulary: ids 0..255 are raw bytes, then three specials.
inline constexpr int kBos = 256;
inline constexpr int kEos = 257;
inline constexpr int kPad = 258;
inline constexpr int kVocab = 259;

inline std::vector<int> tokenize(std::string_view text) {
    std::vector<int> ids;
    ids.reserve(text.size());
    for (unsigned char c : text) ids.push_back(int(c));
    return ids;
}

// Specials are dropped: they have no byte image.
inline std::string detokenize(std::span<const int> ids) {
    std::string s;
    s.reserve(ids.size());
    for (int id : ids)
        if (id >= 0 && id < 256) s.push_back(char(static_cast<unsigned char>(id)));
    return s;
}

}  // namespace natlas::tok
