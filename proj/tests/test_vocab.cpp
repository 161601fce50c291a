#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "finprep/errors.hpp"
#include "finprep/rng.hpp"
#include "finprep/unicode.hpp"
#include "finprep/vocab.hpp"

using namespace finprep;
using vocab::CasingMode;

// Reference trainer: recounts every adjacent pair from scratch each round
// and keeps the plain data structures visible. Quadratic, but obviously
// correct; the production trainer must match it move for move.
namespace naive {

struct Word {
    std::vector<std::string> syms;
    std::uint64_t count = 0;
};

inline std::vector<std::string> initial(const std::string& tok) {
    std::u32string cps = uni::decode_utf8(tok);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        std::string s = i == 0 ? "" : "##";
        uni::append_utf8(s, cps[i]);
        out.push_back(std::move(s));
    }
    return out;
}

inline std::string fuse_str(const std::string& l, const std::string& r) {
    std::string tail = r.rfind("##", 0) == 0 ? r.substr(2) : r;
    return l + tail;
}

struct Result {
    std::vector<std::string> pieces;
    std::vector<std::pair<std::string, std::string>> merges;
};

inline Result train(const std::unordered_map<std::string, std::uint64_t>& counts,
                    std::size_t vocab_size, CasingMode mode) {
    std::map<std::string, std::uint64_t> norm;
    for (const auto& [tok, n] : counts) {
        std::string t = mode == CasingMode::uncased ? vocab::strip_accents_lower(tok) : tok;
        norm[t] += n;
    }
    std::vector<Word> words;
    for (const auto& [tok, n] : norm) {
        if (tok.empty() || n == 0) continue;
        words.push_back({initial(tok), n});
    }

    std::vector<std::string> pieces;
    std::set<std::string> piece_set;
    auto add_piece = [&](const std::string& p) {
        if (piece_set.insert(p).second) pieces.push_back(p);
    };
    for (const char* s : vocab::kSpecialPieces) add_piece(s);
    std::set<std::string> alphabet;
    for (const auto& w : words)
        for (const auto& s : w.syms) alphabet.insert(s);
    for (const auto& s : alphabet) add_piece(s);

    std::set<std::pair<std::string, std::string>> already;
    std::vector<std::pair<std::string, std::string>> merges;
    while (pieces.size() < vocab_size) {
        std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts;
        for (const auto& w : words)
            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i)
                pair_counts[{w.syms[i], w.syms[i + 1]}] += w.count;

        std::pair<std::string, std::string> best;
        std::uint64_t best_count = 0;
        for (const auto& [p, c] : pair_counts) {
            if (already.count(p)) continue;
            if (c > best_count) {  // map order makes the first maximum the tie winner
                best = p;
                best_count = c;
            }
        }
        if (best_count < 2) break;

        already.insert(best);
        merges.push_back(best);
        std::string merged = fuse_str(best.first, best.second);
        add_piece(merged);
        for (auto& w : words) {
            std::vector<std::string> out;
            std::size_t i = 0;
            while (i < w.syms.size()) {
                if (i + 1 < w.syms.size() && w.syms[i] == best.first &&
                    w.syms[i + 1] == best.second) {
                    out.push_back(merged);
                    i += 2;
                } else {
                    out.push_back(w.syms[i]);
                    ++i;
                }
            }
            w.syms = std::move(out);
        }
    }
    return {std::move(pieces), std::move(merges)};
}

}  // namespace naive

TEST_CASE("accent stripping and lowercasing") {
    REQUIRE(vocab::strip_accents_lower("Pääministeri") == "paaministeri");
    REQUIRE(vocab::strip_accents_lower("Öljy-yhtiö") == "oljy-yhtio");
    REQUIRE(vocab::strip_accents_lower("ŠKODA") == "skoda");
    REQUIRE(vocab::strip_accents_lower("abc") == "abc");
    // decomposed input: base letter plus combining diaeresis
    REQUIRE(vocab::strip_accents_lower("a\xcc\x88") == "a");
}

TEST_CASE("basic tokenization") {
    using vocab::basic_tokenize;
    REQUIRE(basic_tokenize("Hei, maailma!", CasingMode::cased) ==
            std::vector<std::string>{"Hei", ",", "maailma", "!"});
    REQUIRE(basic_tokenize("valtiovarainministeri.", CasingMode::cased) ==
            std::vector<std::string>{"valtiovarainministeri", "."});
    REQUIRE(basic_tokenize("kesän aikana sekä", CasingMode::cased) ==
            std::vector<std::string>{"kesän", "aikana", "sekä"});
    REQUIRE(basic_tokenize("Kesän AIKANA", CasingMode::uncased) ==
            std::vector<std::string>{"kesan", "aikana"});
    REQUIRE(basic_tokenize("esim.(katso)", CasingMode::cased) ==
            std::vector<std::string>{"esim", ".", "(", "katso", ")"});
    REQUIRE(basic_tokenize("  \t \n ", CasingMode::cased).empty());
    REQUIRE(basic_tokenize("20–30 €", CasingMode::cased) ==
            std::vector<std::string>{"20", "–", "30", "€"});
}

TEST_CASE("initial symbols and merging") {
    REQUIRE(vocab::initial_symbols("abc") == std::vector<std::string>{"a", "##b", "##c"});
    REQUIRE(vocab::initial_symbols("a") == std::vector<std::string>{"a"});
    REQUIRE(vocab::initial_symbols("äiti") ==
            std::vector<std::string>{"ä", "##i", "##t", "##i"});
    REQUIRE(vocab::merge_symbols("a", "##b") == "ab");
    REQUIRE(vocab::merge_symbols("##a", "##b") == "##ab");
    REQUIRE(vocab::merge_symbols("ab", "##cd") == "abcd");
}

TEST_CASE("bpe encoding applies merges leftmost first without overlap") {
    vocab::MergeTable t;
    t.merges = {{"a", "##b"}};
    REQUIRE(vocab::bpe_encode("ab", t) == std::vector<std::string>{"ab"});
    REQUIRE(vocab::bpe_encode("aab", t) == std::vector<std::string>{"a", "##a", "##b"});

    vocab::MergeTable rep;
    rep.merges = {{"a", "##a"}};
    REQUIRE(vocab::bpe_encode("aaa", rep) == std::vector<std::string>{"aa", "##a"});
    REQUIRE(vocab::bpe_encode("aaaa", rep) == std::vector<std::string>{"aa", "##a", "##a"});

    vocab::MergeTable chain;
    chain.merges = {{"a", "##b"}, {"ab", "##c"}};
    REQUIRE(vocab::bpe_encode("abc", chain) == std::vector<std::string>{"abc"});
    REQUIRE(vocab::bpe_encode("abc", chain.prefix(1)) ==
            std::vector<std::string>{"ab", "##c"});
    REQUIRE(vocab::bpe_encode("abc", chain.prefix(0)) ==
            std::vector<std::string>{"a", "##b", "##c"});
}

TEST_CASE("bpe training single merge") {
    std::unordered_map<std::string, std::uint64_t> counts{{"ab", 3}};
    auto [v, merges] = vocab::train_bpe(counts, 8, CasingMode::cased);
    REQUIRE(merges.merges ==
            std::vector<std::pair<std::string, std::string>>{{"a", "##b"}});
    REQUIRE(v.pieces() == std::vector<std::string>{"[PAD]", "[UNK]", "[CLS]", "[SEP]",
                                                   "[MASK]", "##b", "a", "ab"});

    // a budget that only covers specials plus alphabet trains no merges
    auto [v2, m2] = vocab::train_bpe(counts, 7, CasingMode::cased);
    REQUIRE(m2.merges.empty());
    REQUIRE(v2.size() == 7);

    REQUIRE_THROWS_WITH(vocab::train_bpe(counts, 6, CasingMode::cased),
                        Catch::Matchers::ContainsSubstring("minimum 7"));
}

TEST_CASE("bpe training tie break is lexicographic") {
    std::unordered_map<std::string, std::uint64_t> counts{{"ab", 2}, {"ba", 2}};
    auto [v, merges] = vocab::train_bpe(counts, 10, CasingMode::cased);
    REQUIRE(merges.merges.size() == 1);
    REQUIRE(merges.merges[0] == std::pair<std::string, std::string>{"a", "##b"});
}

TEST_CASE("bpe training stops when no pair repeats") {
    std::unordered_map<std::string, std::uint64_t> counts{{"ab", 1}, {"cd", 1}};
    auto [v, merges] = vocab::train_bpe(counts, 50, CasingMode::cased);
    REQUIRE(merges.merges.empty());
    REQUIRE(v.size() == 5 + 4);  // specials + {a, ##b, c, ##d}
}

TEST_CASE("uncased training folds case and accents before counting") {
    std::unordered_map<std::string, std::uint64_t> counts{{"Pää", 1}, {"pää", 1}, {"paa", 1}};
    auto [v, merges] = vocab::train_bpe(counts, 12, CasingMode::uncased);
    // all three tokens normalize to "paa", so (a,##a) then (p,##aa) repeat
    REQUIRE_FALSE(merges.merges.empty());
    REQUIRE(merges.merges[0] == std::pair<std::string, std::string>{"##a", "##a"});
    REQUIRE(v.contains("paa"));
}

static std::unordered_map<std::string, std::uint64_t> random_counts(Rng& rng) {
    static const std::vector<std::string> letters = {"a", "b", "c", "d", "e",
                                                     "ä", "ö", "Ä", "s", "t"};
    std::unordered_map<std::string, std::uint64_t> counts;
    std::uint64_t ntypes = 3 + rng.next_below(40);
    for (std::uint64_t i = 0; i < ntypes; ++i) {
        std::uint64_t len = 1 + rng.next_below(7);
        std::string tok;
        for (std::uint64_t j = 0; j < len; ++j)
            tok += letters[rng.next_below(letters.size())];
        counts[tok] += 1 + rng.next_below(12);
    }
    return counts;
}

TEST_CASE("trainer matches the naive reference on random corpora") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        Rng rng(seed + 5000);
        auto counts = random_counts(rng);
        CasingMode mode = seed % 2 == 0 ? CasingMode::cased : CasingMode::uncased;

        // derive the minimum so small budgets can exercise the early stop
        std::set<std::string> alphabet;
        for (const auto& [tok, n] : counts) {
            std::string t =
                mode == CasingMode::uncased ? vocab::strip_accents_lower(tok) : tok;
            for (const auto& s : naive::initial(t)) alphabet.insert(s);
        }
        std::size_t minimum = vocab::kNumSpecials + alphabet.size();
        std::size_t budget =
            seed % 3 == 0 ? minimum + rng.next_below(6) : minimum + 40 + rng.next_below(60);

        auto expected = naive::train(counts, budget, mode);
        auto [v, merges] = vocab::train_bpe(counts, budget, mode);

        INFO("seed " << seed << " budget " << budget);
        REQUIRE(v.pieces() == expected.pieces);
        REQUIRE(merges.merges == expected.merges);
    }
}

TEST_CASE("wordpiece encoding is greedy longest prefix") {
    auto v = vocab::Vocab::with_specials(CasingMode::cased);
    for (const char* p : {"a", "ab", "##b", "##c", "abc"}) v.add(p);
    REQUIRE(vocab::wordpiece_encode("abc", v) == std::vector<std::string>{"abc"});
    REQUIRE(vocab::wordpiece_encode("abb", v) == std::vector<std::string>{"ab", "##b"});
    REQUIRE(vocab::wordpiece_encode("abcb", v) == std::vector<std::string>{"abc", "##b"});
    REQUIRE(vocab::wordpiece_encode("a", v) == std::vector<std::string>{"a"});
    // an unmatched position anywhere turns the whole token into [UNK]
    REQUIRE(vocab::wordpiece_encode("abx", v) == std::vector<std::string>{"[UNK]"});
    REQUIRE(vocab::wordpiece_encode("xa", v) == std::vector<std::string>{"[UNK]"});
    REQUIRE_THROWS_AS(vocab::wordpiece_encode("", v), Error);
}

TEST_CASE("compound splits into whole-word prefix and continuation") {
    auto v = vocab::Vocab::with_specials(CasingMode::cased);
    for (const char* p : {"valtiovarain", "##ministeri", "pääministeri"}) v.add(p);
    REQUIRE(vocab::wordpiece_encode("valtiovarainministeri", v) ==
            std::vector<std::string>{"valtiovarain", "##ministeri"});
    REQUIRE(vocab::wordpiece_encode("pääministeri", v) ==
            std::vector<std::string>{"pääministeri"});
}

TEST_CASE("wordpiece pieces reassemble into the token") {
    Rng rng(99);
    auto counts = random_counts(rng);
    std::vector<std::string> tokens;
    for (const auto& [tok, n] : counts) tokens.push_back(tok);
    auto [v, merges] = vocab::train_bpe(counts, 120, CasingMode::cased);

    for (const auto& tok : tokens) {
        auto pieces = vocab::wordpiece_encode(tok, v);
        REQUIRE_FALSE(pieces.empty());
        std::string joined;
        for (const auto& p : pieces) {
            REQUIRE(p != "[UNK]");  // training alphabet covers every token
            joined += p.rfind("##", 0) == 0 ? p.substr(2) : p;
        }
        REQUIRE(joined == tok);
    }
}

TEST_CASE("coverage statistics") {
    auto v = vocab::Vocab::with_specials(CasingMode::cased);
    v.add("hei");
    std::vector<std::string> texts{"hei hei"};
    auto rep = vocab::coverage_stats(texts, v);
    REQUIRE(rep.pieces_per_token == 1.0);
    REQUIRE(rep.unk_per_token == 0.0);

    texts = {"hei zzz"};
    rep = vocab::coverage_stats(texts, v);
    REQUIRE(rep.pieces_per_token == 1.0);  // [UNK] counts as one piece
    REQUIRE(rep.unk_per_token == 0.5);

    auto split = vocab::Vocab::with_specials(CasingMode::cased);
    for (const char* p : {"h", "##e", "##i"}) split.add(p);
    texts = {"hei"};
    REQUIRE(vocab::coverage_stats(texts, split).pieces_per_token == 3.0);

    REQUIRE_THROWS_AS(vocab::coverage_stats(std::vector<std::string>{"  "}, v), Error);
}

TEST_CASE("merge prefixes never decrease pieces per token") {
    Rng rng(123);
    auto counts = random_counts(rng);
    auto [v, merges] = vocab::train_bpe(counts, 200, CasingMode::cased);

    std::string text;
    for (const auto& [tok, n] : counts)
        for (std::uint64_t i = 0; i < n; ++i) text += tok + " ";
    std::vector<std::string> texts{text};

    double prev = 1e9;
    for (std::size_t k : {std::size_t{0}, std::size_t{2}, std::size_t{5}, merges.merges.size()}) {
        double ppt = vocab::bpe_pieces_per_token(texts, merges.prefix(k), CasingMode::cased);
        REQUIRE(ppt <= prev);
        prev = ppt;
    }
}

TEST_CASE("vocabulary file round trip") {
    auto v = vocab::Vocab::with_specials(CasingMode::cased);
    v.add("hei");
    v.add("##lä");
    std::ostringstream out;
    v.save(out);
    REQUIRE(out.str() == "[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\nhei\n##lä\n");

    std::istringstream in(out.str());
    auto back = vocab::Vocab::load(in, CasingMode::cased);
    REQUIRE(back.pieces() == v.pieces());
    REQUIRE(back.id_of("hei") == 5);
    REQUIRE(back.is_special(4));
    REQUIRE_FALSE(back.is_special(5));

    // specials must sit at the head of the file
    std::istringstream bad("[PAD]\n[UNK]\n[CLS]\nhei\n");
    REQUIRE_THROWS_WITH(vocab::Vocab::load(bad, CasingMode::cased),
                        Catch::Matchers::ContainsSubstring("[SEP]"));
    std::istringstream dup("[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\nhei\nhei\n");
    REQUIRE_THROWS_AS(vocab::Vocab::load(dup, CasingMode::cased), ParseError);
}

TEST_CASE("merge table file round trip") {
    vocab::MergeTable t;
    t.merges = {{"a", "##b"}, {"ab", "##c"}};
    std::ostringstream out;
    t.save(out);
    REQUIRE(out.str() == "a ##b\nab ##c\n");

    std::istringstream in(out.str());
    auto back = vocab::MergeTable::load(in);
    REQUIRE(back.merges == t.merges);

    std::istringstream bad("a ##b\nnospace\n");
    try {
        vocab::MergeTable::load(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        REQUIRE(e.line() == 2);
    }
}
