#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>

#include "finprep/errors.hpp"

// Minimal Unicode support for corpus processing: UTF-8 codec, coarse
// character classification over the scripts that occur in European web
// text, case folding, and accent stripping via a canonical-decomposition
// table for precomposed Latin/Greek/Cyrillic letters. Not a general
// Unicode library.

namespace finprep::uni {

inline void append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

inline std::string encode_utf8(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t c : cps) append_utf8(out, c);
    return out;
}

inline std::string encode_utf8(char32_t c) {
    std::string out;
    append_utf8(out, c);
    return out;
}

// Strict decoder: rejects overlong forms, surrogates, truncated sequences
// and values above U+10FFFF.
inline std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t c = 0;
        std::size_t len = 0;
        if (b0 < 0x80) {
            c = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            c = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            c = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            c = b0 & 0x07;
            len = 4;
        } else {
            throw Error("invalid UTF-8 byte at offset " + std::to_string(i));
        }
        if (i + len > s.size())
            throw Error("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char bk = static_cast<unsigned char>(s[i + k]);
            if ((bk & 0xC0) != 0x80)
                throw Error("invalid UTF-8 continuation at offset " + std::to_string(i + k));
            c = (c << 6) | (bk & 0x3F);
        }
        static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && c < kMin[len])
            throw Error("overlong UTF-8 sequence at offset " + std::to_string(i));
        if (c > 0x10FFFF || (c >= 0xD800 && c <= 0xDFFF))
            throw Error("invalid code point at offset " + std::to_string(i));
        out.push_back(c);
        i += len;
    }
    return out;
}

inline bool is_valid_utf8(std::string_view s) {
    try {
        decode_utf8(s);
        return true;
    } catch (const Error&) {
        return false;
    }
}

inline bool is_whitespace(char32_t c) {
    switch (c) {
        case U' ': case U'\t': case U'\n': case U'\r':
        case 0x0B: case 0x0C: case 0x85: case 0xA0:
        case 0x1680: case 0x2028: case 0x2029: case 0x202F:
        case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

inline bool is_digit(char32_t c) {
    return (c >= U'0' && c <= U'9') ||
           (c >= 0x0660 && c <= 0x0669) ||   // Arabic-Indic
           (c >= 0x06F0 && c <= 0x06F9) ||
           (c >= 0x0966 && c <= 0x096F) ||   // Devanagari
           (c >= 0xFF10 && c <= 0xFF19);     // fullwidth
}

// Combining marks (Mn-heavy blocks, coarse).
inline bool is_combining_mark(char32_t c) {
    return (c >= 0x0300 && c <= 0x036F) ||
           (c >= 0x0483 && c <= 0x0489) ||
           (c >= 0x0591 && c <= 0x05BD) ||
           (c >= 0x0610 && c <= 0x061A) ||
           (c >= 0x064B && c <= 0x065F) ||
           (c >= 0x06D6 && c <= 0x06DC) ||
           (c >= 0x1AB0 && c <= 0x1AFF) ||
           (c >= 0x1DC0 && c <= 0x1DFF) ||
           (c >= 0x20D0 && c <= 0x20FF) ||
           (c >= 0xFE20 && c <= 0xFE2F);
}

inline char32_t to_lower(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 0x20;
    if (c < 0x80) return c;
    // Latin-1 Supplement (0xD7 is the multiplication sign)
    if ((c >= 0xC0 && c <= 0xD6) || (c >= 0xD8 && c <= 0xDE)) return c + 0x20;
    // Latin Extended-A
    if (c >= 0x100 && c <= 0x137) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
    if (c == 0x178) return 0xFF;  // Y with diaeresis
    if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
    // Latin Extended Additional
    if (c >= 0x1E00 && c <= 0x1E95) return (c % 2 == 0) ? c + 1 : c;
    if (c == 0x1E9E) return 0xDF;  // capital sharp s
    if (c >= 0x1EA0 && c <= 0x1EFF) return (c % 2 == 0) ? c + 1 : c;
    // Greek
    if (c == 0x386) return 0x3AC;
    if (c >= 0x388 && c <= 0x38A) return c + 0x25;
    if (c == 0x38C) return 0x3CC;
    if (c == 0x38E || c == 0x38F) return c + 0x3F;
    if ((c >= 0x391 && c <= 0x3A1) || (c >= 0x3A3 && c <= 0x3AB)) return c + 0x20;
    // Cyrillic
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;
    if (c >= 0x410 && c <= 0x42F) return c + 0x20;
    if (c >= 0x460 && c <= 0x481) return (c % 2 == 0) ? c + 1 : c;
    if (c >= 0x48A && c <= 0x4BF) return (c % 2 == 0) ? c + 1 : c;
    if (c == 0x4C0) return 0x4CF;
    if (c >= 0x4C1 && c <= 0x4CE) return (c % 2 == 1) ? c + 1 : c;
    if (c >= 0x4D0 && c <= 0x52F) return (c % 2 == 0) ? c + 1 : c;
    return c;
}

inline bool is_upper(char32_t c) { return to_lower(c) != c; }

// Alphabetic, by block. Coarse on purpose: used for ratio heuristics,
// not for exact Unicode property queries.
inline bool is_alpha(char32_t c) {
    if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
    if (c < 0x80) return false;
    if (c == 0xAA || c == 0xB5 || c == 0xBA) return true;
    if ((c >= 0xC0 && c <= 0xD6) || (c >= 0xD8 && c <= 0xF6) || (c >= 0xF8 && c <= 0x2C1))
        return true;
    if (c >= 0x370 && c <= 0x3FF)  // Greek, minus punctuation code points
        return c != 0x374 && c != 0x375 && c != 0x37E && c != 0x384 && c != 0x385 && c != 0x387;
    if ((c >= 0x400 && c <= 0x481) || (c >= 0x48A && c <= 0x52F)) return true;  // Cyrillic
    if (c >= 0x531 && c <= 0x58F) return c != 0x55A && c != 0x589;              // Armenian
    if (c >= 0x5D0 && c <= 0x5EA) return true;                                  // Hebrew
    if ((c >= 0x621 && c <= 0x64A) || (c >= 0x66E && c <= 0x6D3)) return true;  // Arabic
    if ((c >= 0x904 && c <= 0x939) || (c >= 0x958 && c <= 0x961)) return true;  // Devanagari
    if (c >= 0x1E00 && c <= 0x1FFF)  // Latin Ext Additional + Greek Extended
        return true;
    if ((c >= 0x3041 && c <= 0x3096) || (c >= 0x30A1 && c <= 0x30FA)) return true;  // kana
    if (c >= 0x4E00 && c <= 0x9FFF) return true;    // CJK unified
    if (c >= 0xAC00 && c <= 0xD7A3) return true;    // Hangul
    if ((c >= 0xFF21 && c <= 0xFF3A) || (c >= 0xFF41 && c <= 0xFF5A)) return true;
    return false;
}

// Punctuation and symbols (Unicode categories P* and S*, coarse by block).
inline bool is_punct_or_symbol(char32_t c) {
    if ((c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
        (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E))
        return true;
    if (c >= 0xA1 && c <= 0xBF) return c != 0xAA && c != 0xB5 && c != 0xBA;
    if (c == 0xD7 || c == 0xF7) return true;
    if (c == 0x374 || c == 0x375 || c == 0x37E || c == 0x384 || c == 0x385 || c == 0x387)
        return true;
    if (c == 0x55A || c == 0x589 || c == 0x5BE || c == 0x5C0 || c == 0x5C3) return true;
    if (c == 0x60C || c == 0x61B || c == 0x61F || c == 0x66A || c == 0x66B || c == 0x66C)
        return true;
    if (c == 0x964 || c == 0x965) return true;
    if (c >= 0x2010 && c <= 0x2027) return true;   // dashes, quotes, daggers, ellipsis
    if (c >= 0x2030 && c <= 0x205E) return true;
    if (c >= 0x20A0 && c <= 0x20BF) return true;   // currency
    if (c >= 0x2100 && c <= 0x214F) return true;   // letterlike symbols
    if (c >= 0x2190 && c <= 0x2BFF) return true;   // arrows, math, box drawing, dingbats
    if (c >= 0x2E00 && c <= 0x2E7F) return true;   // supplemental punctuation
    if (c >= 0x3001 && c <= 0x303F) return true;   // CJK punctuation
    if ((c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFE50 && c <= 0xFE6B)) return true;
    if ((c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
        (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65))
        return true;
    if (c >= 0x1F300 && c <= 0x1FAFF) return true;  // emoji blocks
    return false;
}

namespace detail {

// Base letters of precomposed letter+mark code points (canonical
// decompositions, marks discarded). Each entry lists the base followed
// by the precomposed characters that reduce to it.
inline const std::unordered_map<char32_t, char32_t>& decomposition_map() {
    static const std::unordered_map<char32_t, char32_t> map = [] {
        std::unordered_map<char32_t, char32_t> m;
        struct Row {
            char32_t base;
            std::u32string_view composed;
        };
        static constexpr Row rows[] = {
            {U'A', U"ÀÁÂÃÄÅĀĂĄǍǞǠǺȀȂȦḀẠẢẤẦẨẪẬẮẰẲẴẶ"},
            {U'a', U"àáâãäåāăąǎǟǡǻȁȃȧḁạảấầẩẫậắằẳẵặ"},
            {U'C', U"ÇĆĈĊČḈ"},
            {U'c', U"çćĉċčḉ"},
            {U'D', U"ĎḊḌḎḐḒ"},
            {U'd', U"ďḋḍḏḑḓ"},
            {U'E', U"ÈÉÊËĒĔĖĘĚȄȆȨḔḖḘḚḜẸẺẼẾỀỂỄỆ"},
            {U'e', U"èéêëēĕėęěȅȇȩḕḗḙḛḝẹẻẽếềểễệ"},
            {U'G', U"ĜĞĠĢǦǴḠ"},
            {U'g', U"ĝğġģǧǵḡ"},
            {U'H', U"ĤȞḢḤḦḨḪ"},
            {U'h', U"ĥȟḣḥḧḩḫẖ"},
            {U'I', U"ÌÍÎÏĨĪĬĮİǏȈȊḬḮỈỊ"},
            {U'i', U"ìíîïĩīĭįǐȉȋḭḯỉị"},
            {U'J', U"Ĵ"},
            {U'j', U"ĵǰ"},
            {U'K', U"ĶǨḰḲḴ"},
            {U'k', U"ķǩḱḳḵ"},
            {U'L', U"ĹĻĽḶḸḺḼ"},
            {U'l', U"ĺļľḷḹḻḽ"},
            {U'M', U"ḾṀṂ"},
            {U'm', U"ḿṁṃ"},
            {U'N', U"ÑŃŅŇǸṄṆṈṊ"},
            {U'n', U"ñńņňǹṅṇṉṋ"},
            {U'O', U"ÒÓÔÕÖŌŎŐǑǪǬȌȎȪȬȮȰṌṎṐṒỌỎỐỒỔỖỘỚỜỞỠỢ"},
            {U'o', U"òóôõöōŏőǒǫǭȍȏȫȭȯȱṍṏṑṓọỏốồổỗộớờởỡợ"},
            {U'P', U"ṔṖ"},
            {U'p', U"ṕṗ"},
            {U'R', U"ŔŖŘȐȒṘṚṜṞ"},
            {U'r', U"ŕŗřȑȓṙṛṝṟ"},
            {U'S', U"ŚŜŞŠȘṠṢṤṦṨ"},
            {U's', U"śŝşšșṡṣṥṧṩ"},
            {U'T', U"ŢŤȚṪṬṮṰ"},
            {U't', U"ţťțṫṭṯṱẗ"},
            {U'U', U"ÙÚÛÜŨŪŬŮŰŲǓǕǗǙǛȔȖṲṴṶṸṺỤỦỨỪỬỮỰ"},
            {U'u', U"ùúûüũūŭůűųǔǖǘǚǜȕȗṳṵṷṹṻụủứừửữự"},
            {U'V', U"ṼṾ"},
            {U'v', U"ṽṿ"},
            {U'W', U"ŴẀẂẄẆẈ"},
            {U'w', U"ŵẁẃẅẇẉẘ"},
            {U'X', U"ẊẌ"},
            {U'x', U"ẋẍ"},
            {U'Y', U"ÝŶŸȲẎỲỴỶỸ"},
            {U'y', U"ýÿŷȳẏẙỳỵỷỹ"},
            {U'Z', U"ŹŻŽẐẒẔ"},
            {U'z', U"źżžẑẓẕ"},
            // Greek with tonos
            {0x391, U"Ά"}, {0x395, U"Έ"}, {0x397, U"Ή"}, {0x399, U"ΊΪ"},
            {0x39F, U"Ό"}, {0x3A5, U"ΎΫ"}, {0x3A9, U"Ώ"},
            {0x3B1, U"ά"}, {0x3B5, U"έ"}, {0x3B7, U"ή"}, {0x3B9, U"ίϊΐ"},
            {0x3BF, U"ό"}, {0x3C5, U"ύϋΰ"}, {0x3C9, U"ώ"},
            // Cyrillic
            {0x415, U"ЀЁ"}, {0x435, U"ѐё"}, {0x418, U"Й"}, {0x438, U"й"},
            {0x413, U"Ѓ"}, {0x433, U"ѓ"}, {0x41A, U"Ќ"}, {0x43A, U"ќ"},
            {0x406, U"Ї"}, {0x456, U"ї"}, {0x423, U"Ў"}, {0x443, U"ў"},
        };
        for (const auto& row : rows)
            for (char32_t c : row.composed) m.emplace(c, row.base);
        return m;
    }();
    return map;
}

}  // namespace detail

// Base letter after canonical decomposition, or the input itself when it
// has no decomposition we track.
inline char32_t strip_marks(char32_t c) {
    const auto& m = detail::decomposition_map();
    auto it = m.find(c);
    return it == m.end() ? c : it->second;
}

// Lowercase an arbitrary UTF-8 string (no accent stripping).
inline std::string lower_utf8(std::string_view s) {
    std::u32string cps = decode_utf8(s);
    for (char32_t& c : cps) c = to_lower(c);
    return encode_utf8(cps);
}

}  // namespace finprep::uni
