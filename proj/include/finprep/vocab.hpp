#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "finprep/errors.hpp"
#include "finprep/unicode.hpp"

// Subword vocabulary toolkit: BERT-style basic tokenization (cased, and
// uncased with accent stripping), a WordPiece-compatible BPE trainer, the
// matching greedy encoder, and vocabulary coverage statistics.

namespace finprep::vocab {

enum class CasingMode { cased, uncased };

inline const char* to_string(CasingMode m) {
    return m == CasingMode::cased ? "cased" : "uncased";
}

inline CasingMode casing_from_string(std::string_view s) {
    if (s == "cased") return CasingMode::cased;
    if (s == "uncased") return CasingMode::uncased;
    throw Error("unknown casing mode: " + std::string(s));
}

inline constexpr std::string_view kContinuationPrefix = "##";

inline constexpr const char* kSpecialPieces[5] = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
inline constexpr std::uint32_t kPadId = 0;
inline constexpr std::uint32_t kUnkId = 1;
inline constexpr std::uint32_t kClsId = 2;
inline constexpr std::uint32_t kSepId = 3;
inline constexpr std::uint32_t kMaskId = 4;
inline constexpr std::uint32_t kNumSpecials = 5;

// NFD-style decomposition with combining marks removed, then lowercased.
// Collapses a/ä and o/ö, which is what the uncased mode requires.
inline std::string strip_accents_lower(std::string_view text) {
    std::u32string cps = uni::decode_utf8(text);
    std::string out;
    out.reserve(text.size());
    for (char32_t c : cps) {
        char32_t base = uni::strip_marks(c);
        if (uni::is_combining_mark(base)) continue;
        uni::append_utf8(out, uni::to_lower(base));
    }
    return out;
}

// Whitespace split, then every punctuation or symbol code point becomes
// its own token. Uncased mode lowercases and strips accents first.
inline std::vector<std::string> basic_tokenize(std::string_view text, CasingMode mode) {
    std::string normalized;
    if (mode == CasingMode::uncased) {
        normalized = strip_accents_lower(text);
        text = normalized;
    }
    std::u32string cps = uni::decode_utf8(text);
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    };
    for (char32_t c : cps) {
        if (uni::is_whitespace(c)) {
            flush();
        } else if (uni::is_punct_or_symbol(c)) {
            flush();
            tokens.push_back(uni::encode_utf8(c));
        } else {
            uni::append_utf8(current, c);
        }
    }
    flush();
    return tokens;
}

// Subword inventory. The five special pieces always occupy ids 0-4 and
// ids are dense in piece order.
class Vocab {
public:
    Vocab() = default;

    static Vocab with_specials(CasingMode mode) {
        Vocab v;
        v.casing_ = mode;
        for (const char* s : kSpecialPieces) v.add(s);
        return v;
    }

    // Appends the piece if absent; returns its id either way.
    std::uint32_t add(std::string piece) {
        auto it = ids_.find(piece);
        if (it != ids_.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(pieces_.size());
        ids_.emplace(piece, id);
        pieces_.push_back(std::move(piece));
        return id;
    }

    std::optional<std::uint32_t> id_of(std::string_view piece) const {
        auto it = ids_.find(std::string(piece));
        return it == ids_.end() ? std::nullopt : std::optional<std::uint32_t>(it->second);
    }

    bool contains(std::string_view piece) const { return ids_.count(std::string(piece)) > 0; }

    const std::string& piece(std::uint32_t id) const { return pieces_.at(id); }

    std::size_t size() const { return pieces_.size(); }

    const std::vector<std::string>& pieces() const { return pieces_; }

    CasingMode casing() const { return casing_; }
    void set_casing(CasingMode mode) { casing_ = mode; }

    bool is_special(std::uint32_t id) const { return id < kNumSpecials; }

    // One piece per line, line number = id.
    void save(std::ostream& out) const {
        for (const auto& p : pieces_) out << p << '\n';
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot open for writing: " + path);
        save(out);
    }

    static Vocab load(std::istream& in, CasingMode mode) {
        Vocab v;
        v.casing_ = mode;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) throw ParseError(lineno, "empty vocabulary piece");
            if (v.ids_.count(line)) throw ParseError(lineno, "duplicate piece: " + line);
            v.add(line);
        }
        for (std::uint32_t i = 0; i < kNumSpecials; ++i) {
            if (v.pieces_.size() <= i || v.pieces_[i] != kSpecialPieces[i])
                throw Error(std::string("vocabulary must start with ") + kSpecialPieces[i] +
                            " at id " + std::to_string(i));
        }
        return v;
    }

    static Vocab load(const std::string& path, CasingMode mode) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open: " + path);
        return load(in, mode);
    }

private:
    std::vector<std::string> pieces_;
    std::unordered_map<std::string, std::uint32_t> ids_;
    CasingMode casing_ = CasingMode::cased;
};

// Ordered BPE merge rules; application order is training order.
struct MergeTable {
    std::vector<std::pair<std::string, std::string>> merges;

    MergeTable prefix(std::size_t n) const {
        MergeTable t;
        t.merges.assign(merges.begin(), merges.begin() + std::min(n, merges.size()));
        return t;
    }

    // "left<space>right", one merge per line. Pieces never contain
    // whitespace (tokens come from whitespace-split text).
    void save(std::ostream& out) const {
        for (const auto& [l, r] : merges) out << l << ' ' << r << '\n';
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot open for writing: " + path);
        save(out);
    }

    static MergeTable load(std::istream& in) {
        MergeTable t;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto sp = line.find(' ');
            if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size())
                throw ParseError(lineno, "expected 'left right': " + line);
            t.merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
        }
        return t;
    }

    static MergeTable load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open: " + path);
        return load(in);
    }
};

struct CoverageReport {
    double pieces_per_token = 0.0;
    double unk_per_token = 0.0;
};

// Splits a token into its initial symbols: the first code point plain,
// every following code point carrying the continuation prefix.
inline std::vector<std::string> initial_symbols(std::string_view token) {
    std::u32string cps = uni::decode_utf8(token);
    std::vector<std::string> syms;
    syms.reserve(cps.size());
    for (std::size_t i = 0; i < cps.size(); ++i) {
        std::string s = i == 0 ? std::string() : std::string(kContinuationPrefix);
        uni::append_utf8(s, cps[i]);
        syms.push_back(std::move(s));
    }
    return syms;
}

inline std::string merge_symbols(std::string_view left, std::string_view right) {
    std::string_view tail = right;
    if (tail.substr(0, kContinuationPrefix.size()) == kContinuationPrefix)
        tail.remove_prefix(kContinuationPrefix.size());
    return std::string(left) + std::string(tail);
}

namespace detail {

// One leftmost-first, non-overlapping pass. A fused symbol is strictly
// longer than either side, so the same pair cannot re-form across a
// fusion boundary and a single pass is exhaustive.
template <typename Sym>
inline void fuse_adjacent(std::vector<Sym>& syms, const Sym& left, const Sym& right,
                          const Sym& merged) {
    std::vector<Sym> out;
    out.reserve(syms.size());
    std::size_t i = 0;
    while (i < syms.size()) {
        if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
            out.push_back(merged);
            i += 2;
        } else {
            out.push_back(syms[i]);
            ++i;
        }
    }
    syms = std::move(out);
}

}  // namespace detail

// Applies the merge table in order, exhaustively, to one basic token.
inline std::vector<std::string> bpe_encode(std::string_view token, const MergeTable& table) {
    std::vector<std::string> syms = initial_symbols(token);
    for (const auto& [l, r] : table.merges) {
        if (syms.size() < 2) break;
        detail::fuse_adjacent(syms, l, r, merge_symbols(l, r));
    }
    return syms;
}

namespace detail {

// Incremental pair-count BPE trainer. Words are symbol-id sequences with
// type counts; a lazy max-heap tracks (count, pair) entries and stale
// entries are discarded on pop. Ties at equal count go to the pair whose
// (left, right) strings compare lexicographically smallest.
class BpeTrainer {
public:
    BpeTrainer(const std::unordered_map<std::string, std::uint64_t>& token_counts,
               std::size_t vocab_size, CasingMode mode)
        : vocab_size_(vocab_size), mode_(mode) {
        ingest(token_counts);
    }

    std::pair<Vocab, MergeTable> run() {
        Vocab vocab = Vocab::with_specials(mode_);
        std::set<std::string> alphabet;
        for (const auto& w : words_)
            for (std::int32_t s : w.syms) alphabet.insert(sym_strs_[static_cast<std::size_t>(s)]);
        std::size_t minimum = kNumSpecials + alphabet.size();
        if (vocab_size_ < minimum)
            throw Error("vocab_size " + std::to_string(vocab_size_) +
                        " below minimum " + std::to_string(minimum) +
                        " (specials + observed alphabet)");
        for (const auto& s : alphabet) vocab.add(s);

        count_all_pairs();
        MergeTable table;
        while (vocab.size() < vocab_size_) {
            auto best = pop_best();
            if (!best) break;
            std::uint64_t key = best->first;
            std::int32_t l = static_cast<std::int32_t>(key >> 32);
            std::int32_t r = static_cast<std::int32_t>(key & 0xFFFFFFFFULL);
            const std::string& ls = sym_strs_[static_cast<std::size_t>(l)];
            const std::string& rs = sym_strs_[static_cast<std::size_t>(r)];
            table.merges.emplace_back(ls, rs);
            merged_pairs_.insert(key);
            std::int32_t m = intern(merge_symbols(ls, rs));
            vocab.add(sym_strs_[static_cast<std::size_t>(m)]);
            apply_merge(key, l, r, m);
        }
        return {std::move(vocab), std::move(table)};
    }

private:
    struct Word {
        std::vector<std::int32_t> syms;
        std::uint64_t count = 0;
    };

    struct HeapEntry {
        std::uint64_t count;
        std::uint64_t key;
    };

    // Orders the lazy heap: higher count first, then lexicographically
    // smaller (left, right) strings first.
    struct HeapLess {
        const BpeTrainer* t;
        bool operator()(const HeapEntry& a, const HeapEntry& b) const {
            if (a.count != b.count) return a.count < b.count;
            return t->pair_strings(a.key) > t->pair_strings(b.key);
        }
    };

    std::pair<const std::string&, const std::string&> pair_strings(std::uint64_t key) const {
        return {sym_strs_[static_cast<std::size_t>(key >> 32)],
                sym_strs_[static_cast<std::size_t>(key & 0xFFFFFFFFULL)]};
    }

    static std::uint64_t pack(std::int32_t l, std::int32_t r) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(l)) << 32) |
               static_cast<std::uint32_t>(r);
    }

    std::int32_t intern(const std::string& s) {
        auto it = sym_ids_.find(s);
        if (it != sym_ids_.end()) return it->second;
        std::int32_t id = static_cast<std::int32_t>(sym_strs_.size());
        sym_strs_.push_back(s);
        sym_ids_.emplace(s, id);
        return id;
    }

    void ingest(const std::unordered_map<std::string, std::uint64_t>& token_counts) {
        std::unordered_map<std::string, std::uint64_t> normalized;
        const std::unordered_map<std::string, std::uint64_t>* source = &token_counts;
        if (mode_ == CasingMode::uncased) {
            for (const auto& [tok, n] : token_counts)
                normalized[strip_accents_lower(tok)] += n;
            source = &normalized;
        }
        for (const auto& [tok, n] : *source) {
            if (tok.empty() || n == 0) continue;
            Word w;
            w.count = n;
            for (auto& s : initial_symbols(tok)) w.syms.push_back(intern(s));
            words_.push_back(std::move(w));
        }
    }

    void touch(std::uint64_t key, std::uint64_t delta_add, std::uint64_t delta_sub,
               std::unordered_set<std::uint64_t>& dirty) {
        auto& c = pair_counts_[key];
        c += delta_add;
        c -= delta_sub;
        if (c == 0) pair_counts_.erase(key);
        dirty.insert(key);
    }

    void count_all_pairs() {
        heap_ = Heap(HeapLess{this});
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            const Word& w = words_[wi];
            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
                std::uint64_t key = pack(w.syms[i], w.syms[i + 1]);
                pair_counts_[key] += w.count;
                pair_words_[key].push_back(static_cast<std::uint32_t>(wi));
            }
        }
        for (const auto& [key, count] : pair_counts_) heap_.push({count, key});
    }

    std::optional<std::pair<std::uint64_t, std::uint64_t>> pop_best() {
        while (!heap_.empty()) {
            HeapEntry e = heap_.top();
            heap_.pop();
            auto it = pair_counts_.find(e.key);
            if (it == pair_counts_.end() || it->second != e.count) continue;  // stale
            if (merged_pairs_.count(e.key)) continue;
            if (e.count < 2) return std::nullopt;  // merge loop stops early
            return std::make_pair(e.key, e.count);
        }
        return std::nullopt;
    }

    void apply_merge(std::uint64_t key, std::int32_t l, std::int32_t r, std::int32_t m) {
        auto wit = pair_words_.find(key);
        if (wit == pair_words_.end()) return;
        std::vector<std::uint32_t> word_ids = std::move(wit->second);
        pair_words_.erase(wit);
        std::sort(word_ids.begin(), word_ids.end());
        word_ids.erase(std::unique(word_ids.begin(), word_ids.end()), word_ids.end());

        std::unordered_set<std::uint64_t> dirty;
        for (std::uint32_t wi : word_ids) {
            Word& w = words_[wi];
            bool present = false;
            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
                if (w.syms[i] == l && w.syms[i + 1] == r) {
                    present = true;
                    break;
                }
            }
            if (!present) continue;  // stale registration

            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i)
                touch(pack(w.syms[i], w.syms[i + 1]), 0, w.count, dirty);
            detail::fuse_adjacent(w.syms, l, r, m);
            for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
                std::uint64_t k = pack(w.syms[i], w.syms[i + 1]);
                touch(k, w.count, 0, dirty);
                pair_words_[k].push_back(wi);
            }
        }
        for (std::uint64_t k : dirty) {
            auto it = pair_counts_.find(k);
            if (it != pair_counts_.end()) heap_.push({it->second, k});
        }
    }

    using Heap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLess>;

    std::size_t vocab_size_;
    CasingMode mode_;
    std::vector<Word> words_;
    std::vector<std::string> sym_strs_;
    std::unordered_map<std::string, std::int32_t> sym_ids_;
    std::unordered_map<std::uint64_t, std::uint64_t> pair_counts_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> pair_words_;
    std::unordered_set<std::uint64_t> merged_pairs_;
    Heap heap_{HeapLess{nullptr}};
};

}  // namespace detail

// Trains a WordPiece-compatible BPE vocabulary from basic-token counts.
// Initial symbols are the observed code points, continuation-marked in
// non-initial position. The most frequent adjacent pair is merged until
// the vocabulary budget is reached or no pair occurs at least twice.
inline std::pair<Vocab, MergeTable> train_bpe(
    const std::unordered_map<std::string, std::uint64_t>& token_counts,
    std::size_t vocab_size, CasingMode mode) {
    detail::BpeTrainer trainer(token_counts, vocab_size, mode);
    return trainer.run();
}

// Greedy longest-prefix-match segmentation against the vocabulary. Any
// unmatchable position turns the whole token into [UNK].
inline std::vector<std::string> wordpiece_encode(std::string_view token, const Vocab& vocab) {
    std::u32string cps = uni::decode_utf8(token);
    if (cps.empty()) throw Error("wordpiece_encode: empty token");
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < cps.size()) {
        std::size_t end = cps.size();
        std::string match;
        for (; end > start; --end) {
            std::string cand = start > 0 ? std::string(kContinuationPrefix) : std::string();
            for (std::size_t i = start; i < end; ++i) uni::append_utf8(cand, cps[i]);
            if (vocab.contains(cand)) {
                match = std::move(cand);
                break;
            }
        }
        if (end == start) return {kSpecialPieces[kUnkId]};
        out.push_back(std::move(match));
        start = end;
    }
    return out;
}

// Pieces and [UNK] occurrences per basic token, over wordpiece encoding.
// [UNK] counts as exactly one piece.
template <typename TextRange>
inline CoverageReport coverage_stats(const TextRange& texts, const Vocab& vocab) {
    std::uint64_t tokens = 0, pieces = 0, unks = 0;
    std::unordered_map<std::string, std::pair<std::uint32_t, std::uint32_t>> cache;
    for (const auto& text : texts) {
        for (const auto& tok : basic_tokenize(text, vocab.casing())) {
            auto it = cache.find(tok);
            if (it == cache.end()) {
                auto enc = wordpiece_encode(tok, vocab);
                std::uint32_t u = 0;
                for (const auto& p : enc)
                    if (p == kSpecialPieces[kUnkId]) ++u;
                it = cache.emplace(tok, std::make_pair(static_cast<std::uint32_t>(enc.size()), u))
                         .first;
            }
            ++tokens;
            pieces += it->second.first;
            unks += it->second.second;
        }
    }
    if (tokens == 0) throw Error("coverage_stats: no basic tokens in input");
    return {static_cast<double>(pieces) / static_cast<double>(tokens),
            static_cast<double>(unks) / static_cast<double>(tokens)};
}

// Pieces per basic token under direct merge-table encoding. Used to
// compare coverage across merge-table prefixes.
template <typename TextRange>
inline double bpe_pieces_per_token(const TextRange& texts, const MergeTable& table,
                                   CasingMode mode) {
    std::uint64_t tokens = 0, pieces = 0;
    std::unordered_map<std::string, std::uint32_t> cache;
    for (const auto& text : texts) {
        for (const auto& tok : basic_tokenize(text, mode)) {
            auto it = cache.find(tok);
            if (it == cache.end())
                it = cache.emplace(tok, static_cast<std::uint32_t>(bpe_encode(tok, table).size()))
                         .first;
            ++tokens;
            pieces += it->second;
        }
    }
    if (tokens == 0) throw Error("bpe_pieces_per_token: no basic tokens in input");
    return static_cast<double>(pieces) / static_cast<double>(tokens);
}

}  // namespace finprep::vocab
