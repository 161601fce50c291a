#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "finprep/corpus.hpp"
#include "finprep/errors.hpp"
#include "finprep/parallel.hpp"
#include "finprep/unicode.hpp"
#include "finprep/vocab.hpp"

// Shingle-based deduplication: every document contributes hashed windows of
// n consecutive lowercased basic tokens to a corpus-wide index; a document's
// duplication ratio is the fraction of its shingles seen more than once.

namespace finprep::dedup {

struct ShingleIndex {
    std::uint64_t n = 10;
    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t total_shingles = 0;
};

namespace detail {

inline std::uint64_t hash_token(const std::string& tok) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : tok) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// With 64-bit hashes the birthday bound puts the chance of any false
// duplicate pair under ~3e-4 for 10^8 distinct shingles.
inline constexpr std::uint64_t kShingleBase = 0x9E3779B97F4A7C15ULL | 1ULL;

}  // namespace detail

// Hashes of all n-token windows of the document text. Documents shorter
// than n tokens yield a single whole-document shingle.
inline std::vector<std::uint64_t> document_shingles(std::string_view text, std::uint64_t n) {
    if (n == 0) throw Error("shingle length must be at least 1");
    std::vector<std::string> tokens = vocab::basic_tokenize(text, vocab::CasingMode::cased);
    std::vector<std::uint64_t> hashes;
    hashes.reserve(tokens.size());
    for (std::string& t : tokens) hashes.push_back(detail::hash_token(uni::lower_utf8(t)));
    std::vector<std::uint64_t> shingles;
    if (hashes.empty()) return shingles;
    if (hashes.size() < n) {
        std::uint64_t h = 0;
        for (std::uint64_t th : hashes) h = h * detail::kShingleBase + th;
        shingles.push_back(h);
        return shingles;
    }
    std::uint64_t pow_n1 = 1;  // base^(n-1)
    for (std::uint64_t i = 1; i < n; ++i) pow_n1 *= detail::kShingleBase;
    std::uint64_t h = 0;
    for (std::uint64_t i = 0; i < n; ++i) h = h * detail::kShingleBase + hashes[i];
    shingles.push_back(h);
    for (std::size_t i = n; i < hashes.size(); ++i) {
        h = (h - hashes[i - n] * pow_n1) * detail::kShingleBase + hashes[i];
        shingles.push_back(h);
    }
    return shingles;
}

template <typename DocRange>
inline ShingleIndex build_shingle_index(const DocRange& docs, std::uint64_t n,
                                        unsigned workers = 1) {
    ShingleIndex index;
    index.n = n;
    std::vector<const corpus::Document*> ptrs;
    for (const corpus::Document& d : docs) ptrs.push_back(&d);
    if (workers <= 1) {
        for (const corpus::Document* d : ptrs)
            for (std::uint64_t s : document_shingles(d->text, n)) {
                ++index.counts[s];
                ++index.total_shingles;
            }
        return index;
    }
    std::vector<std::vector<std::uint64_t>> per_doc(ptrs.size());
    parallel_for(ptrs.size(), workers,
                 [&](std::size_t i) { per_doc[i] = document_shingles(ptrs[i]->text, n); });
    for (const auto& shingles : per_doc)
        for (std::uint64_t s : shingles) {
            ++index.counts[s];
            ++index.total_shingles;
        }
    return index;
}

// Fraction of the document's shingles whose corpus-wide count is 2 or more.
// The index must have been built over a corpus containing the document.
inline double duplication_ratio(const corpus::Document& doc, const ShingleIndex& index) {
    std::vector<std::uint64_t> shingles = document_shingles(doc.text, index.n);
    if (shingles.empty()) return 0.0;
    std::uint64_t dup = 0, seen = 0;
    for (std::uint64_t s : shingles) {
        auto it = index.counts.find(s);
        if (it == index.counts.end()) continue;
        ++seen;
        if (it->second >= 2) ++dup;
    }
    if (seen == 0) throw Error("index mismatch: document " + doc.id + " not in index");
    return static_cast<double>(dup) / static_cast<double>(shingles.size());
}

enum class DupGroup { zero, low, mid, high };

inline const char* to_string(DupGroup g) {
    switch (g) {
        case DupGroup::zero: return "0%";
        case DupGroup::low: return "(0,10%]";
        case DupGroup::mid: return "(10,25%)";
        default: return "[25,100%]";
    }
}

inline DupGroup group_for(double ratio) {
    if (ratio <= 0.0) return DupGroup::zero;
    if (ratio <= 0.10) return DupGroup::low;
    if (ratio < 0.25) return DupGroup::mid;
    return DupGroup::high;
}

struct DupReport {
    std::string doc_id;
    double ratio = 0.0;
    DupGroup group = DupGroup::zero;
};

struct DedupResult {
    std::vector<corpus::Document> kept;
    std::vector<DupReport> reports;
};

// Removes documents whose ratio reaches the threshold (inclusive). All
// copies of a duplicate cross the threshold together, so removal is
// symmetric and independent of document order.
template <typename DocRange>
inline DedupResult dedup_filter(const DocRange& docs, const ShingleIndex& index, double threshold,
                                unsigned workers = 1) {
    if (threshold < 0.0 || threshold > 1.0) throw Error("threshold must be in [0,1]");
    std::vector<const corpus::Document*> ptrs;
    for (const corpus::Document& d : docs) ptrs.push_back(&d);
    std::vector<double> ratios(ptrs.size());
    parallel_for(ptrs.size(), workers,
                 [&](std::size_t i) { ratios[i] = duplication_ratio(*ptrs[i], index); });
    DedupResult result;
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
        result.reports.push_back({ptrs[i]->id, ratios[i], group_for(ratios[i])});
        bool removed = ratios[i] > 0.0 && ratios[i] >= threshold;
        if (!removed) result.kept.push_back(*ptrs[i]);
    }
    return result;
}

// Sequential variant: each document is scored against the shingles of
// previously kept documents only, so the first copy of a duplicate run
// survives.
template <typename DocRange>
inline DedupResult dedup_filter_keep_first(const DocRange& docs, std::uint64_t n,
                                           double threshold) {
    if (threshold < 0.0 || threshold > 1.0) throw Error("threshold must be in [0,1]");
    ShingleIndex kept_index;
    kept_index.n = n;
    DedupResult result;
    for (const corpus::Document& d : docs) {
        std::vector<std::uint64_t> shingles = document_shingles(d.text, n);
        std::uint64_t dup = 0;
        for (std::uint64_t s : shingles)
            if (kept_index.counts.count(s)) ++dup;
        double ratio = shingles.empty()
                           ? 0.0
                           : static_cast<double>(dup) / static_cast<double>(shingles.size());
        result.reports.push_back({d.id, ratio, group_for(ratio)});
        bool removed = ratio > 0.0 && ratio >= threshold;
        if (!removed) {
            result.kept.push_back(d);
            for (std::uint64_t s : shingles) {
                ++kept_index.counts[s];
                ++kept_index.total_shingles;
            }
        }
    }
    return result;
}

inline constexpr char kIndexMagic[8] = {'F', 'P', 'S', 'H', 'I', 'D', 'X', '1'};

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

inline std::uint32_t get_u32(std::istream& in) {
    char b[4];
    if (!in.read(b, 4)) throw Error("truncated shingle index");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& in) {
    char b[8];
    if (!in.read(b, 8)) throw Error("truncated shingle index");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
}

}  // namespace detail

// Binary layout: 8-byte magic, u32 n, u64 entry count, then (u64 hash,
// u64 count) pairs sorted by hash, all little-endian.
inline void save_index(std::ostream& out, const ShingleIndex& index) {
    out.write(kIndexMagic, 8);
    detail::put_u32(out, static_cast<std::uint32_t>(index.n));
    detail::put_u64(out, index.counts.size());
    std::vector<std::pair<std::uint64_t, std::uint64_t>> entries(index.counts.begin(),
                                                                 index.counts.end());
    std::sort(entries.begin(), entries.end());
    for (const auto& [h, c] : entries) {
        detail::put_u64(out, h);
        detail::put_u64(out, c);
    }
    if (!out) throw Error("failed writing shingle index");
}

inline ShingleIndex load_index(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kIndexMagic))
        throw Error("not a shingle index file");
    ShingleIndex index;
    index.n = detail::get_u32(in);
    std::uint64_t entries = detail::get_u64(in);
    index.counts.reserve(entries);
    for (std::uint64_t i = 0; i < entries; ++i) {
        std::uint64_t h = detail::get_u64(in);
        std::uint64_t c = detail::get_u64(in);
        if (c == 0) throw Error("corrupt shingle index: zero count");
        index.counts[h] = c;
        index.total_shingles += c;
    }
    return index;
}

inline void write_reports(std::ostream& out, const std::vector<DupReport>& reports) {
    for (const auto& r : reports) {
        nlohmann::json j;
        j["doc_id"] = r.doc_id;
        j["ratio"] = r.ratio;
        j["group"] = to_string(r.group);
        out << j.dump() << '\n';
    }
}

}  // namespace finprep::dedup
