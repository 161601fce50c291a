#pragma once

#include <cstdint>
#include <istream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "finprep/errors.hpp"

// Evaluation metrics over gold segmentation: UPOS tagging accuracy,
// mention-level entity precision/recall/F1 with conlleval's lenient IOB
// reading, and labeled attachment score for dependency trees.

namespace finprep::evalmetrics {

struct TaggedSentence {
    std::vector<std::string> tokens;
    std::vector<std::string> tags;

    bool operator==(const TaggedSentence&) const = default;
};

struct DepGraph {
    std::vector<std::uint32_t> heads;  // 0 = root
    std::vector<std::string> deprels;

    bool operator==(const DepGraph&) const = default;
};

struct Mention {
    std::size_t start = 0;  // token indices, end inclusive
    std::size_t end = 0;
    std::string type;

    auto operator<=>(const Mention&) const = default;
};

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            cols.push_back(line.substr(start));
            return cols;
        }
        cols.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

inline bool parse_uint(const std::string& s, std::uint64_t& out) {
    if (s.empty()) return false;
    out = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        out = out * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return true;
}

}  // namespace detail

// Reads CoNLL-U: UPOS from column 4, head from column 7, deprel from
// column 8. Comment lines, multiword ranges (1-2) and empty nodes (1.1)
// are skipped.
inline std::vector<std::pair<TaggedSentence, DepGraph>> parse_conllu(std::istream& in) {
    std::vector<std::pair<TaggedSentence, DepGraph>> sentences;
    TaggedSentence sent;
    DepGraph graph;
    std::vector<std::size_t> row_lines;
    std::size_t lineno = 0;

    auto flush = [&]() {
        if (sent.tokens.empty()) return;
        for (std::size_t i = 0; i < graph.heads.size(); ++i) {
            if (graph.heads[i] > graph.heads.size())
                throw ParseError(row_lines[i], "head index out of range");
            if (graph.heads[i] == i + 1)
                throw ParseError(row_lines[i], "token is its own head");
        }
        sentences.emplace_back(std::move(sent), std::move(graph));
        sent = {};
        graph = {};
        row_lines.clear();
    };

    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        if (line[0] == '#') continue;
        std::vector<std::string> cols = detail::split_tabs(line);
        if (cols.size() != 10)
            throw ParseError(lineno, "expected 10 columns, got " + std::to_string(cols.size()));
        if (cols[0].find('-') != std::string::npos || cols[0].find('.') != std::string::npos)
            continue;
        std::uint64_t id = 0;
        if (!detail::parse_uint(cols[0], id)) throw ParseError(lineno, "non-integer token id");
        std::uint64_t head = 0;
        if (!detail::parse_uint(cols[6], head)) throw ParseError(lineno, "non-integer head");
        sent.tokens.push_back(cols[1]);
        sent.tags.push_back(cols[3]);
        graph.heads.push_back(static_cast<std::uint32_t>(head));
        graph.deprels.push_back(cols[7]);
        row_lines.push_back(lineno);
    }
    flush();
    return sentences;
}

// Reads 2-column (token, tag) files with blank-line sentence separation.
inline std::vector<TaggedSentence> read_tagged(std::istream& in) {
    std::vector<TaggedSentence> sentences;
    TaggedSentence sent;
    std::size_t lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (!sent.tokens.empty()) sentences.push_back(std::move(sent));
            sent = {};
            continue;
        }
        std::size_t ws = line.find_first_of(" \t");
        if (ws == std::string::npos) throw ParseError(lineno, "expected token and tag");
        std::size_t tag_start = line.find_first_not_of(" \t", ws);
        if (tag_start == std::string::npos) throw ParseError(lineno, "expected token and tag");
        if (line.find_first_of(" \t", tag_start) != std::string::npos)
            throw ParseError(lineno, "expected exactly 2 columns");
        sent.tokens.push_back(line.substr(0, ws));
        sent.tags.push_back(line.substr(tag_start));
    }
    if (!sent.tokens.empty()) sentences.push_back(std::move(sent));
    return sentences;
}

namespace detail {

inline void check_alignment(std::size_t gold_sents, std::size_t pred_sents) {
    if (gold_sents != pred_sents)
        throw Error("sentence count mismatch: gold " + std::to_string(gold_sents) + ", pred " +
                    std::to_string(pred_sents));
}

inline void check_lengths(std::size_t sentence, std::size_t gold_len, std::size_t pred_len) {
    if (gold_len != pred_len)
        throw Error("sentence " + std::to_string(sentence + 1) + ": length mismatch (gold " +
                    std::to_string(gold_len) + ", pred " + std::to_string(pred_len) + ")");
}

}  // namespace detail

inline double upos_accuracy(const std::vector<TaggedSentence>& gold,
                            const std::vector<TaggedSentence>& pred) {
    detail::check_alignment(gold.size(), pred.size());
    std::uint64_t correct = 0, total = 0;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        detail::check_lengths(s, gold[s].tags.size(), pred[s].tags.size());
        for (std::size_t i = 0; i < gold[s].tags.size(); ++i) {
            ++total;
            if (gold[s].tags[i] == pred[s].tags[i]) ++correct;
        }
    }
    if (total == 0) throw Error("no tokens to evaluate");
    return static_cast<double>(correct) / static_cast<double>(total);
}

// Lenient IOB reading as implemented by conlleval: B-T always opens a
// mention; I-T opens one after O, after a different type, or at the start.
inline std::vector<Mention> extract_mentions(const std::vector<std::string>& tags) {
    std::vector<Mention> mentions;
    bool inside = false;
    Mention current;
    auto close = [&](std::size_t end) {
        if (inside) {
            current.end = end;
            mentions.push_back(current);
            inside = false;
        }
    };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const std::string& tag = tags[i];
        char marker = 'O';
        std::string type;
        if (tag == "O" || tag.empty()) {
            marker = 'O';
        } else if (tag[0] == 'B' || tag[0] == 'I') {
            marker = tag[0];
            if (tag.size() >= 2 && tag[1] == '-') type = tag.substr(2);
            else if (tag.size() == 1) type = "";
            else marker = 'O';  // unparseable, treated as outside
        }
        if (marker == 'O') {
            close(i - 1);
        } else if (marker == 'B') {
            close(i - 1);
            inside = true;
            current = {i, i, type};
        } else {
            if (inside && current.type == type) continue;
            close(i - 1);
            inside = true;
            current = {i, i, type};
        }
    }
    close(tags.empty() ? 0 : tags.size() - 1);
    return mentions;
}

struct PrfResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Exact (start, end, type) matching; precision 0 when nothing predicted,
// recall 0 when nothing gold, F1 0 when both are 0.
inline PrfResult mention_prf(const std::vector<TaggedSentence>& gold,
                             const std::vector<TaggedSentence>& pred) {
    detail::check_alignment(gold.size(), pred.size());
    std::set<std::tuple<std::size_t, std::size_t, std::size_t, std::string>> gold_set, pred_set;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        detail::check_lengths(s, gold[s].tags.size(), pred[s].tags.size());
        for (const Mention& m : extract_mentions(gold[s].tags))
            gold_set.emplace(s, m.start, m.end, m.type);
        for (const Mention& m : extract_mentions(pred[s].tags))
            pred_set.emplace(s, m.start, m.end, m.type);
    }
    std::uint64_t matches = 0;
    for (const auto& m : pred_set)
        if (gold_set.count(m)) ++matches;
    PrfResult r;
    if (!pred_set.empty())
        r.precision = static_cast<double>(matches) / static_cast<double>(pred_set.size());
    if (!gold_set.empty())
        r.recall = static_cast<double>(matches) / static_cast<double>(gold_set.size());
    if (r.precision + r.recall > 0.0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

// Fraction of tokens with both head and dependency label correct.
inline double las(const std::vector<DepGraph>& gold, const std::vector<DepGraph>& pred) {
    detail::check_alignment(gold.size(), pred.size());
    std::uint64_t correct = 0, total = 0;
    for (std::size_t s = 0; s < gold.size(); ++s) {
        detail::check_lengths(s, gold[s].heads.size(), pred[s].heads.size());
        for (std::size_t i = 0; i < gold[s].heads.size(); ++i) {
            ++total;
            if (gold[s].heads[i] == pred[s].heads[i] && gold[s].deprels[i] == pred[s].deprels[i])
                ++correct;
        }
    }
    if (total == 0) throw Error("no tokens to evaluate");
    return static_cast<double>(correct) / static_cast<double>(total);
}

inline nlohmann::json prf_to_json(const PrfResult& r) {
    return nlohmann::json{{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
}

}  // namespace finprep::evalmetrics
