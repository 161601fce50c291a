#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "finprep/errors.hpp"
#include "finprep/rng.hpp"
#include "finprep/unicode.hpp"
#include "finprep/vocab.hpp"

// Document model, JSON-lines ingestion and serialization, rule-based
// sentence splitting, corpus statistics, and chronological balanced
// splitting for classification datasets.

namespace finprep::corpus {

enum class Source { news, discussion, crawl, other };

inline const char* to_string(Source s) {
    switch (s) {
        case Source::news: return "news";
        case Source::discussion: return "discussion";
        case Source::crawl: return "crawl";
        default: return "other";
    }
}

// Unknown source strings map to `other`; ingestion never fails on source.
inline Source source_from_string(std::string_view s) {
    if (s == "news") return Source::news;
    if (s == "discussion") return Source::discussion;
    if (s == "crawl") return Source::crawl;
    return Source::other;
}

inline constexpr Source kAllSources[4] = {Source::news, Source::discussion, Source::crawl,
                                          Source::other};

struct Document {
    std::string id;
    Source source = Source::other;
    std::string text;
    std::optional<std::string> timestamp;  // ISO-8601; lexicographic order is chronological
    std::optional<std::string> label;
    std::map<std::string, std::string> meta;

    bool operator==(const Document&) const = default;
};

inline Document document_from_json(const nlohmann::json& j) {
    Document d;
    if (!j.contains("id") || !j["id"].is_string())
        throw Error("missing field `id`");
    d.id = j["id"].get<std::string>();
    if (d.id.empty()) throw Error("field `id` must be non-empty");
    if (!j.contains("text") || !j["text"].is_string())
        throw Error("missing field `text`");
    d.text = j["text"].get<std::string>();
    if (j.contains("source")) d.source = source_from_string(j["source"].get<std::string>());
    if (j.contains("timestamp") && !j["timestamp"].is_null())
        d.timestamp = j["timestamp"].get<std::string>();
    if (j.contains("label") && !j["label"].is_null())
        d.label = j["label"].get<std::string>();
    if (j.contains("meta"))
        for (const auto& [k, v] : j["meta"].items()) d.meta[k] = v.get<std::string>();
    return d;
}

inline nlohmann::json document_to_json(const Document& d) {
    nlohmann::json j;
    j["id"] = d.id;
    j["source"] = to_string(d.source);
    j["text"] = d.text;
    if (d.timestamp) j["timestamp"] = *d.timestamp;
    if (d.label) j["label"] = *d.label;
    if (!d.meta.empty()) j["meta"] = d.meta;
    return j;
}

// Streaming reader over line-delimited JSON documents. Errors carry the
// 1-based line number.
class DocumentReader {
public:
    explicit DocumentReader(std::istream& in) : in_(in) {}

    std::optional<Document> next() {
        std::string line;
        if (!std::getline(in_, line)) return std::nullopt;
        ++lineno_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(lineno_, "malformed JSON");
        if (!j.is_object()) throw ParseError(lineno_, "expected a JSON object");
        try {
            return document_from_json(j);
        } catch (const Error& e) {
            throw ParseError(lineno_, e.what());
        }
    }

    std::size_t line() const { return lineno_; }

private:
    std::istream& in_;
    std::size_t lineno_ = 0;
};

inline std::vector<Document> read_documents(std::istream& in) {
    DocumentReader reader(in);
    std::vector<Document> docs;
    while (auto d = reader.next()) docs.push_back(std::move(*d));
    return docs;
}

inline void write_document(std::ostream& out, const Document& d) {
    out << document_to_json(d).dump() << '\n';
}

inline void write_documents(std::ostream& out, const std::vector<Document>& docs) {
    for (const auto& d : docs) write_document(out, d);
}

// Default Finnish abbreviation list for the sentence splitter. A period
// ending one of these tokens does not end the sentence.
inline const std::set<std::string>& default_abbreviations() {
    static const std::set<std::string> abbr = {
        "esim.", "mm.",  "n.",    "ns.",  "jne.", "ym.",  "yms.", "ts.",
        "vrt.",  "ks.",  "huom.", "em.",  "ko.",  "tms.", "nro.", "puh.",
        "os.",   "prof.", "toim.", "ent.", "ao.",  "ml.",  "pl.",
    };
    return abbr;
}

// Rule-based sentence splitter: a run of {. ! ? …} ends a sentence when
// followed by whitespace and an uppercase letter or digit, unless the
// period closes a known abbreviation. Never returns empty sentences; all
// non-whitespace text is preserved.
inline std::vector<std::string> split_sentences(
    std::string_view text, const std::set<std::string>& abbreviations = default_abbreviations()) {
    std::u32string cps = uni::decode_utf8(text);
    std::vector<std::string> sentences;
    std::size_t start = 0;

    auto is_terminator = [](char32_t c) {
        return c == U'.' || c == U'!' || c == U'?' || c == 0x2026;
    };
    auto flush = [&](std::size_t end) {
        while (start < end && uni::is_whitespace(cps[start])) ++start;
        std::size_t last = end;
        while (last > start && uni::is_whitespace(cps[last - 1])) --last;
        if (last > start)
            sentences.push_back(uni::encode_utf8(
                std::u32string_view(cps.data() + start, last - start)));
        start = end;
    };

    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (!is_terminator(cps[i])) continue;
        std::size_t term_end = i;
        while (term_end + 1 < cps.size() && is_terminator(cps[term_end + 1])) ++term_end;
        std::size_t j = term_end + 1;
        if (j >= cps.size() || !uni::is_whitespace(cps[j])) {
            i = term_end;
            continue;
        }
        while (j < cps.size() && uni::is_whitespace(cps[j])) ++j;
        if (j >= cps.size() || !(uni::is_upper(cps[j]) || uni::is_digit(cps[j]))) {
            i = term_end;
            continue;
        }
        if (cps[term_end] == U'.') {
            // token ending at the period, e.g. "esim."
            std::size_t tok_start = term_end + 1;
            while (tok_start > start && !uni::is_whitespace(cps[tok_start - 1])) --tok_start;
            std::string token = uni::encode_utf8(
                std::u32string_view(cps.data() + tok_start, term_end + 1 - tok_start));
            if (abbreviations.count(uni::lower_utf8(token))) {
                i = term_end;
                continue;
            }
        }
        flush(term_end + 1);
        i = term_end;
    }
    flush(cps.size());
    return sentences;
}

struct CorpusStats {
    std::uint64_t docs = 0;
    std::uint64_t sentences = 0;
    std::uint64_t tokens = 0;  // basic-tokenizer tokens, cased mode
    std::uint64_t chars = 0;   // code points of raw text, whitespace included

    CorpusStats& operator+=(const CorpusStats& o) {
        docs += o.docs;
        sentences += o.sentences;
        tokens += o.tokens;
        chars += o.chars;
        return *this;
    }
    friend CorpusStats operator+(CorpusStats a, const CorpusStats& b) { return a += b; }
    bool operator==(const CorpusStats&) const = default;
};

struct StatsReport {
    std::map<Source, CorpusStats> per_source;
    CorpusStats total;
};

inline CorpusStats stats_for_document(const Document& d) {
    CorpusStats s;
    s.docs = 1;
    s.sentences = split_sentences(d.text).size();
    s.tokens = vocab::basic_tokenize(d.text, vocab::CasingMode::cased).size();
    s.chars = uni::decode_utf8(d.text).size();
    return s;
}

template <typename DocRange>
inline StatsReport corpus_stats(const DocRange& docs) {
    StatsReport report;
    for (const Document& d : docs) {
        CorpusStats s = stats_for_document(d);
        report.per_source[d.source] += s;
        report.total += s;
    }
    return report;
}

// Counts rendered like corpus summary tables: 4M, 0.9B, 68M.
inline std::string human_count(std::uint64_t n) {
    auto render = [](double v, const char* suffix) {
        std::ostringstream os;
        if (v < 10.0)
            os << static_cast<double>(static_cast<std::uint64_t>(v * 10.0 + 0.5)) / 10.0;
        else
            os << static_cast<std::uint64_t>(v + 0.5);
        os << suffix;
        return os.str();
    };
    // promote to the next unit at 90% of it, so 0.9B rather than 900M
    if (n >= 900000000ULL) return render(static_cast<double>(n) / 1e9, "B");
    if (n >= 900000ULL) return render(static_cast<double>(n) / 1e6, "M");
    if (n >= 900ULL) return render(static_cast<double>(n) / 1e3, "K");
    return std::to_string(n);
}

inline std::string format_stats_table(const StatsReport& report, bool human = false) {
    auto cell = [&](std::uint64_t v) { return human ? human_count(v) : std::to_string(v); };
    std::vector<std::array<std::string, 5>> rows;
    rows.push_back({"Source", "Docs", "Sents", "Tokens", "Chars"});
    for (Source s : kAllSources) {
        auto it = report.per_source.find(s);
        if (it == report.per_source.end()) continue;
        rows.push_back({to_string(s), cell(it->second.docs), cell(it->second.sentences),
                        cell(it->second.tokens), cell(it->second.chars)});
    }
    rows.push_back({"total", cell(report.total.docs), cell(report.total.sentences),
                    cell(report.total.tokens), cell(report.total.chars)});
    std::array<std::size_t, 5> width{};
    for (const auto& r : rows)
        for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], r[c].size());
    std::ostringstream os;
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < 5; ++c) {
            if (c == 0)
                os << r[c] << std::string(width[c] - r[c].size(), ' ');
            else
                os << "  " << std::string(width[c] - r[c].size(), ' ') << r[c];
        }
        os << '\n';
    }
    return os.str();
}

inline nlohmann::json stats_to_json(const StatsReport& report) {
    nlohmann::json j;
    auto row = [](const CorpusStats& s) {
        return nlohmann::json{
            {"docs", s.docs}, {"sentences", s.sentences}, {"tokens", s.tokens}, {"chars", s.chars}};
    };
    for (const auto& [src, s] : report.per_source) j["per_source"][to_string(src)] = row(s);
    j["total"] = row(report.total);
    return j;
}

struct SplitSpec {
    std::uint64_t train_per_class = 0;
    std::uint64_t dev_per_class = 0;
    std::uint64_t test_per_class = 0;
    std::vector<std::string> classes;
};

struct SplitResult {
    std::vector<Document> train;
    std::vector<Document> dev;
    std::vector<Document> test;
};

// Balanced chronological split: per class, a seeded uniform sample of
// train+dev+test documents is ordered by (timestamp, id) and assigned
// oldest to train, newest to test, the middle band to dev. Every class
// contributes the exact requested counts.
template <typename DocRange>
inline SplitResult balanced_chronological_split(const DocRange& docs, const SplitSpec& spec,
                                                std::uint64_t seed) {
    if (spec.train_per_class == 0 || spec.dev_per_class == 0 || spec.test_per_class == 0)
        throw Error("split counts must all be positive");
    if (spec.classes.empty()) throw Error("split spec needs at least one class");
    std::set<std::string> classes(spec.classes.begin(), spec.classes.end());
    if (classes.size() != spec.classes.size()) throw Error("split classes must be distinct");

    std::map<std::string, std::vector<const Document*>> by_class;
    for (const Document& d : docs) {
        if (!d.label || !classes.count(*d.label))
            throw Error("document " + d.id + " has no label in the split spec");
        if (!d.timestamp) throw Error("document " + d.id + " has no timestamp");
        by_class[*d.label].push_back(&d);
    }

    std::uint64_t need = spec.train_per_class + spec.dev_per_class + spec.test_per_class;
    SplitResult result;
    Rng master(seed);
    for (const auto& cls : spec.classes) {
        auto it = by_class.find(cls);
        std::size_t have = it == by_class.end() ? 0 : it->second.size();
        if (have < need)
            throw Error("insufficient class \"" + cls + "\": " + std::to_string(have) +
                        " documents, need " + std::to_string(need));
        auto& members = it->second;
        // Stable base order so the sample is a function of (corpus, seed)
        // alone, not of input order.
        std::sort(members.begin(), members.end(),
                  [](const Document* a, const Document* b) { return a->id < b->id; });
        Rng rng = master.substream(std::hash<std::string>{}(cls));
        std::vector<std::size_t> picked =
            rng.sample_indices(members.size(), static_cast<std::size_t>(need));
        std::vector<const Document*> sample;
        sample.reserve(picked.size());
        for (std::size_t i : picked) sample.push_back(members[i]);
        std::sort(sample.begin(), sample.end(), [](const Document* a, const Document* b) {
            if (*a->timestamp != *b->timestamp) return *a->timestamp < *b->timestamp;
            return a->id < b->id;
        });
        std::size_t pos = 0;
        for (std::uint64_t i = 0; i < spec.train_per_class; ++i)
            result.train.push_back(*sample[pos++]);
        for (std::uint64_t i = 0; i < spec.dev_per_class; ++i) result.dev.push_back(*sample[pos++]);
        for (std::uint64_t i = 0; i < spec.test_per_class; ++i)
            result.test.push_back(*sample[pos++]);
    }
    return result;
}

}  // namespace finprep::corpus
