#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "finprep/errors.hpp"
#include "finprep/unicode.hpp"

using namespace finprep;

TEST_CASE("utf8 round trip") {
    std::string samples[] = {"", "plain ascii", "pääministeri", "käyttö ÅÄÖ",
                             "日本語テキスト", "mixed ascii ääkköset и кириллица $€"};
    for (const auto& s : samples) {
        std::u32string cps = uni::decode_utf8(s);
        REQUIRE(uni::encode_utf8(cps) == s);
    }
}

TEST_CASE("utf8 decode rejects malformed input") {
    REQUIRE_THROWS_AS(uni::decode_utf8(std::string_view("\x80", 1)), Error);
    REQUIRE_THROWS_AS(uni::decode_utf8(std::string_view("\xC3", 1)), Error);       // truncated
    REQUIRE_THROWS_AS(uni::decode_utf8(std::string_view("\xC0\xAF", 2)), Error);   // overlong
    REQUIRE_THROWS_AS(uni::decode_utf8(std::string_view("\xED\xA0\x80", 3)), Error);  // surrogate
    REQUIRE_THROWS_AS(uni::decode_utf8(std::string_view("\xF5\x80\x80\x80", 4)), Error);
    REQUIRE(uni::is_valid_utf8("kesän"));
    REQUIRE_FALSE(uni::is_valid_utf8(std::string_view("\xFF", 1)));
}

TEST_CASE("code point classification") {
    REQUIRE(uni::is_whitespace(U' '));
    REQUIRE(uni::is_whitespace(U'\t'));
    REQUIRE(uni::is_whitespace(0xA0));
    REQUIRE_FALSE(uni::is_whitespace(U'a'));

    REQUIRE(uni::is_digit(U'7'));
    REQUIRE_FALSE(uni::is_digit(U'x'));

    for (char32_t c : std::u32string_view(U".,!?;:()[]{}\"'%&/-+=<>#@$*^~|\\"))
        REQUIRE(uni::is_punct_or_symbol(c));
    REQUIRE(uni::is_punct_or_symbol(0x2026));  // horizontal ellipsis
    REQUIRE(uni::is_punct_or_symbol(0x20AC));  // euro sign
    REQUIRE(uni::is_punct_or_symbol(0x00BB));
    REQUIRE_FALSE(uni::is_punct_or_symbol(U'a'));
    REQUIRE_FALSE(uni::is_punct_or_symbol(0xE4));  // ä
    REQUIRE_FALSE(uni::is_punct_or_symbol(U'5'));

    REQUIRE(uni::is_alpha(U'k'));
    REQUIRE(uni::is_alpha(0xE4));
    REQUIRE(uni::is_alpha(0x430));  // Cyrillic а
    REQUIRE_FALSE(uni::is_alpha(U'9'));
    REQUIRE_FALSE(uni::is_alpha(U'.'));
}

TEST_CASE("lowercasing") {
    REQUIRE(uni::to_lower(U'A') == U'a');
    REQUIRE(uni::to_lower(0xC4) == char32_t(0xE4));  // Ä → ä
    REQUIRE(uni::to_lower(0xC5) == char32_t(0xE5));  // Å → å
    REQUIRE(uni::to_lower(0x160) == char32_t(0x161));  // Š → š
    REQUIRE(uni::to_lower(0x416) == char32_t(0x436));  // Ж → ж
    REQUIRE(uni::to_lower(0x393) == char32_t(0x3B3));  // Γ → γ
    REQUIRE(uni::to_lower(U'a') == U'a');
    REQUIRE(uni::lower_utf8("KESÄN Aikana") == "kesän aikana");

    REQUIRE(uni::is_upper(U'A'));
    REQUIRE(uni::is_upper(0xC4));
    REQUIRE_FALSE(uni::is_upper(U'a'));
    REQUIRE_FALSE(uni::is_upper(U'.'));
}

TEST_CASE("accent stripping") {
    REQUIRE(uni::strip_marks(U'ä') == U'a');
    REQUIRE(uni::strip_marks(U'ö') == U'o');
    REQUIRE(uni::strip_marks(U'å') == U'a');
    REQUIRE(uni::strip_marks(U'é') == U'e');
    REQUIRE(uni::strip_marks(U'ñ') == U'n');
    REQUIRE(uni::strip_marks(U'š') == U's');
    REQUIRE(uni::strip_marks(U'Ё') == U'Е');
    REQUIRE(uni::strip_marks(U'p') == U'p');
    // a combining mark passes through strip_marks; callers filter it out
    REQUIRE(uni::strip_marks(0x0308) == 0x0308);
    REQUIRE(uni::is_combining_mark(0x0308));
    REQUIRE_FALSE(uni::is_combining_mark(U'a'));
}
