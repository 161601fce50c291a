#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "finprep/corpus.hpp"
#include "finprep/errors.hpp"
#include "finprep/parallel.hpp"
#include "finprep/rng.hpp"
#include "finprep/vocab.hpp"

// Masked-LM and next-sentence-prediction example generation with
// whole-word masking, per-source duplication factors, and deterministic
// per-document RNG substreams.

namespace finprep::pregen {

struct GenConfig {
    std::uint64_t max_seq_len = 128;
    std::uint64_t max_predictions = 20;  // 77 is the usual pairing for length 512
    double mask_prob = 0.15;
    double random_next_prob = 0.5;
    double mask_token_prob = 0.8;
    double random_replace_prob = 0.1;
    double keep_prob = 0.1;
    double short_seq_prob = 0.1;
    std::map<corpus::Source, std::uint64_t> dup_factors;  // absent source: 1 pass
    std::uint64_t seed = 0;

    std::uint64_t dup_factor(corpus::Source s) const {
        auto it = dup_factors.find(s);
        return it == dup_factors.end() ? 1 : it->second;
    }

    void validate() const {
        if (max_seq_len < 5) throw ConfigError("max_seq_len must be at least 5");
        if (max_predictions < 1 || max_predictions > max_seq_len)
            throw ConfigError("max_predictions must be in [1, max_seq_len]");
        if (!(mask_prob > 0.0 && mask_prob < 1.0))
            throw ConfigError("mask_prob must be in (0,1)");
        auto frac = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!frac(random_next_prob)) throw ConfigError("random_next_prob must be in [0,1]");
        if (!frac(short_seq_prob)) throw ConfigError("short_seq_prob must be in [0,1]");
        if (!frac(mask_token_prob) || !frac(random_replace_prob) || !frac(keep_prob))
            throw ConfigError("masking branch probabilities must be in [0,1]");
        if (std::abs(mask_token_prob + random_replace_prob + keep_prob - 1.0) > 1e-9)
            throw ConfigError("masking branch probabilities must sum to 1");
        for (const auto& [s, f] : dup_factors)
            if (f < 1) throw ConfigError("duplication factors must be at least 1");
    }
};

struct PretrainExample {
    std::vector<std::int32_t> pieces;
    std::vector<std::int32_t> segment_ids;
    std::vector<std::int32_t> masked_positions;  // sorted ascending
    std::vector<std::int32_t> masked_labels;     // original pieces at those positions
    bool is_next = true;

    bool operator==(const PretrainExample&) const = default;
};

struct TokenizedDoc {
    std::string id;
    corpus::Source source = corpus::Source::other;
    std::vector<std::vector<std::int32_t>> sentences;  // piece ids per sentence
};

// Groups non-[CLS]/[SEP] positions into whole words: a "##" piece joins the
// word of the directly preceding position when that position is part of a
// word, otherwise it starts one.
inline std::vector<std::vector<std::size_t>> word_groups(const std::vector<std::int32_t>& pieces,
                                                         const vocab::Vocab& v) {
    std::vector<std::vector<std::size_t>> words;
    for (std::size_t pos = 0; pos < pieces.size(); ++pos) {
        std::int32_t id = pieces[pos];
        if (id == static_cast<std::int32_t>(vocab::kClsId) ||
            id == static_cast<std::int32_t>(vocab::kSepId))
            continue;
        const std::string& s = v.piece(static_cast<std::uint32_t>(id));
        bool continuation = s.size() >= 2 && s[0] == '#' && s[1] == '#';
        bool attachable = !words.empty() && words.back().back() + 1 == pos;
        if (continuation && attachable)
            words.back().push_back(pos);
        else
            words.push_back({pos});
    }
    return words;
}

struct MaskOutcome {
    std::vector<std::int32_t> positions;
    std::vector<std::int32_t> labels;
};

// Selects whole words until round(mask_prob * candidate pieces) positions
// are covered, clamped to [1, max_predictions]; words that would overflow
// the target are skipped. One draw per selected word picks the branch:
// mask all pieces, replace all with random non-special ids, or keep.
inline MaskOutcome apply_whole_word_mask(std::vector<std::int32_t>& pieces,
                                         const std::vector<std::vector<std::size_t>>& words,
                                         const GenConfig& cfg, Rng& rng,
                                         std::size_t vocab_size) {
    if (words.empty()) throw Error("empty candidates");
    if (vocab_size <= vocab::kNumSpecials)
        throw Error("vocabulary has no non-special pieces");
    std::size_t candidates = 0;
    for (const auto& w : words) candidates += w.size();
    std::uint64_t target = static_cast<std::uint64_t>(
        std::llround(cfg.mask_prob * static_cast<double>(candidates)));
    target = std::max<std::uint64_t>(1, std::min<std::uint64_t>(cfg.max_predictions, target));

    std::vector<std::size_t> order(words.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<std::size_t> chosen;
    std::uint64_t covered = 0;
    for (std::size_t wi : order) {
        std::uint64_t sz = words[wi].size();
        if (covered + sz > target) continue;
        chosen.push_back(wi);
        covered += sz;
    }
    if (chosen.empty()) {
        // every word alone exceeds the target; take the first that still
        // honors max_predictions so at least one prediction exists
        for (std::size_t wi : order) {
            if (words[wi].size() <= cfg.max_predictions) {
                chosen.push_back(wi);
                break;
            }
        }
        if (chosen.empty()) throw Error("empty candidates");
    }

    std::vector<std::pair<std::int32_t, std::int32_t>> recorded;
    for (std::size_t wi : chosen) {
        double draw = rng.next_double();
        int branch = draw < cfg.mask_token_prob
                         ? 0
                         : (draw < cfg.mask_token_prob + cfg.random_replace_prob ? 1 : 2);
        for (std::size_t pos : words[wi]) {
            recorded.emplace_back(static_cast<std::int32_t>(pos), pieces[pos]);
            if (branch == 0) {
                pieces[pos] = vocab::kMaskId;
            } else if (branch == 1) {
                pieces[pos] = static_cast<std::int32_t>(
                    vocab::kNumSpecials +
                    rng.next_below(vocab_size - vocab::kNumSpecials));
            }
        }
    }
    std::sort(recorded.begin(), recorded.end());
    MaskOutcome out;
    for (const auto& [pos, label] : recorded) {
        out.positions.push_back(pos);
        out.labels.push_back(label);
    }
    return out;
}

struct InstanceStats {
    std::map<corpus::Source, std::uint64_t> per_source;
    std::uint64_t skipped = 0;
};

struct InstanceResult {
    std::vector<PretrainExample> examples;
    InstanceStats stats;
};

namespace detail {

inline void truncate_pair(std::vector<std::int32_t>& a, std::vector<std::int32_t>& b,
                          std::uint64_t max_tokens, Rng& rng) {
    while (a.size() + b.size() > max_tokens) {
        auto& longer = a.size() > b.size() ? a : b;
        if (rng.bernoulli(0.5))
            longer.erase(longer.begin());
        else
            longer.pop_back();
    }
}

// Sentence-packing pass over one document, one duplication pass. Mirrors
// the standard BERT data tool: accumulate sentences into a chunk up to a
// per-pass target length, split at a random boundary into segment A and
// either the true continuation or a random other document's text.
inline std::vector<PretrainExample> instances_for_document(
    const std::vector<TokenizedDoc>& docs,
    const std::vector<std::vector<const std::vector<std::int32_t>*>>& cleaned,
    const std::vector<std::size_t>& eligible, std::size_t doc_index, std::uint64_t pass,
    const GenConfig& cfg, const vocab::Vocab& v, std::uint64_t& skipped) {
    const auto& sents = cleaned[doc_index];
    std::vector<PretrainExample> out;
    if (sents.empty()) return out;

    Rng rng = Rng(cfg.seed).substream({doc_index, pass});
    std::uint64_t max_num_tokens = cfg.max_seq_len - 3;
    std::uint64_t target_len = max_num_tokens;
    if (rng.next_double() < cfg.short_seq_prob)
        target_len = 2 + rng.next_below(max_num_tokens - 1);

    std::vector<std::size_t> chunk;
    std::uint64_t chunk_len = 0;
    std::size_t i = 0;
    while (i < sents.size()) {
        chunk.push_back(i);
        chunk_len += sents[i]->size();
        if (i == sents.size() - 1 || chunk_len >= target_len) {
            std::size_t a_end = 1;
            if (chunk.size() >= 2) a_end = 1 + rng.next_below(chunk.size() - 1);
            std::vector<std::int32_t> tokens_a;
            for (std::size_t k = 0; k < a_end; ++k)
                tokens_a.insert(tokens_a.end(), sents[chunk[k]]->begin(), sents[chunk[k]]->end());

            bool is_random = chunk.size() == 1 || rng.bernoulli(cfg.random_next_prob);
            std::vector<std::int32_t> tokens_b;
            bool emitted = true;
            if (is_random) {
                // partner = uniformly random other document with sentences
                std::size_t pool = eligible.size();
                auto self = std::lower_bound(eligible.begin(), eligible.end(), doc_index);
                bool self_in = self != eligible.end() && *self == doc_index;
                if (self_in) --pool;
                if (pool == 0) {
                    ++skipped;
                    emitted = false;
                } else {
                    std::size_t r = static_cast<std::size_t>(rng.next_below(pool));
                    if (self_in && r >= static_cast<std::size_t>(self - eligible.begin())) ++r;
                    const auto& psents = cleaned[eligible[r]];
                    std::uint64_t target_b =
                        target_len > tokens_a.size() ? target_len - tokens_a.size() : 1;
                    std::size_t start = static_cast<std::size_t>(rng.next_below(psents.size()));
                    for (std::size_t j = start; j < psents.size(); ++j) {
                        tokens_b.insert(tokens_b.end(), psents[j]->begin(), psents[j]->end());
                        if (tokens_b.size() >= target_b) break;
                    }
                    // unused chunk sentences go back for the next chunk
                    i -= chunk.size() - a_end;
                }
            } else {
                for (std::size_t k = a_end; k < chunk.size(); ++k)
                    tokens_b.insert(tokens_b.end(), sents[chunk[k]]->begin(),
                                    sents[chunk[k]]->end());
            }

            if (emitted) {
                truncate_pair(tokens_a, tokens_b, max_num_tokens, rng);
                PretrainExample ex;
                ex.pieces.reserve(tokens_a.size() + tokens_b.size() + 3);
                ex.pieces.push_back(vocab::kClsId);
                ex.segment_ids.push_back(0);
                for (std::int32_t id : tokens_a) {
                    ex.pieces.push_back(id);
                    ex.segment_ids.push_back(0);
                }
                ex.pieces.push_back(vocab::kSepId);
                ex.segment_ids.push_back(0);
                for (std::int32_t id : tokens_b) {
                    ex.pieces.push_back(id);
                    ex.segment_ids.push_back(1);
                }
                ex.pieces.push_back(vocab::kSepId);
                ex.segment_ids.push_back(1);
                ex.is_next = !is_random;
                auto words = word_groups(ex.pieces, v);
                MaskOutcome mask = apply_whole_word_mask(ex.pieces, words, cfg, rng, v.size());
                ex.masked_positions = std::move(mask.positions);
                ex.masked_labels = std::move(mask.labels);
                out.push_back(std::move(ex));
            }
            chunk.clear();
            chunk_len = 0;
        }
        ++i;
    }
    (void)docs;
    return out;
}

}  // namespace detail

// Expands every document dup_factor(source) times into pretraining
// examples. Output order is (document index, pass, position in document),
// and each (document, pass) consumes an independent RNG substream, so the
// result is a pure function of (docs, cfg) for any worker count.
inline InstanceResult create_instances(const std::vector<TokenizedDoc>& docs,
                                       const GenConfig& cfg, const vocab::Vocab& v,
                                       unsigned workers = 1) {
    cfg.validate();
    std::vector<std::vector<const std::vector<std::int32_t>*>> cleaned(docs.size());
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (const auto& s : docs[i].sentences)
            if (!s.empty()) cleaned[i].push_back(&s);
        if (!cleaned[i].empty()) eligible.push_back(i);
    }

    struct Slot {
        std::size_t doc;
        std::uint64_t pass;
    };
    std::vector<Slot> slots;
    for (std::size_t i = 0; i < docs.size(); ++i)
        for (std::uint64_t p = 0; p < cfg.dup_factor(docs[i].source); ++p) slots.push_back({i, p});

    std::vector<std::vector<PretrainExample>> produced(slots.size());
    std::vector<std::uint64_t> skips(slots.size(), 0);
    parallel_for(slots.size(), workers, [&](std::size_t si) {
        produced[si] = detail::instances_for_document(docs, cleaned, eligible, slots[si].doc,
                                                      slots[si].pass, cfg, v, skips[si]);
    });

    InstanceResult result;
    for (std::size_t si = 0; si < slots.size(); ++si) {
        result.stats.skipped += skips[si];
        result.stats.per_source[docs[slots[si].doc].source] += produced[si].size();
        for (auto& ex : produced[si]) result.examples.push_back(std::move(ex));
    }
    return result;
}

inline std::uint64_t serialize_examples(std::ostream& out,
                                        const std::vector<PretrainExample>& examples) {
    std::uint64_t count = 0;
    for (const auto& ex : examples) {
        nlohmann::json j;
        j["pieces"] = ex.pieces;
        j["segment_ids"] = ex.segment_ids;
        j["masked_positions"] = ex.masked_positions;
        j["masked_labels"] = ex.masked_labels;
        j["is_next"] = ex.is_next;
        out << j.dump() << '\n';
        if (!out) throw Error("write failed after " + std::to_string(count) + " examples");
        ++count;
    }
    return count;
}

inline std::vector<PretrainExample> read_examples(std::istream& in) {
    std::vector<PretrainExample> examples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(lineno, "malformed JSON");
        try {
            PretrainExample ex;
            ex.pieces = j.at("pieces").get<std::vector<std::int32_t>>();
            ex.segment_ids = j.at("segment_ids").get<std::vector<std::int32_t>>();
            ex.masked_positions = j.at("masked_positions").get<std::vector<std::int32_t>>();
            ex.masked_labels = j.at("masked_labels").get<std::vector<std::int32_t>>();
            ex.is_next = j.at("is_next").get<bool>();
            examples.push_back(std::move(ex));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return examples;
}

inline void write_tokenized(std::ostream& out, const std::vector<TokenizedDoc>& docs) {
    for (const auto& d : docs) {
        nlohmann::json j;
        j["id"] = d.id;
        j["source"] = corpus::to_string(d.source);
        j["sentences"] = d.sentences;
        out << j.dump() << '\n';
    }
    if (!out) throw Error("write failed");
}

inline std::vector<TokenizedDoc> read_tokenized(std::istream& in) {
    std::vector<TokenizedDoc> docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError(lineno, "malformed JSON");
        try {
            TokenizedDoc d;
            d.id = j.at("id").get<std::string>();
            d.source = corpus::source_from_string(j.at("source").get<std::string>());
            d.sentences = j.at("sentences").get<std::vector<std::vector<std::int32_t>>>();
            docs.push_back(std::move(d));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return docs;
}

// Duplication factors that roughly equalize expected examples per source:
// the largest source gets 1, smaller sources proportionally more passes.
inline std::map<corpus::Source, std::uint64_t> suggest_dup_factors(
    const std::map<corpus::Source, std::uint64_t>& token_counts) {
    std::uint64_t largest = 0;
    for (const auto& [s, t] : token_counts) largest = std::max(largest, t);
    std::map<corpus::Source, std::uint64_t> factors;
    for (const auto& [s, t] : token_counts) {
        if (t == 0) continue;
        auto f = static_cast<std::uint64_t>(
            std::llround(static_cast<double>(largest) / static_cast<double>(t)));
        factors[s] = std::max<std::uint64_t>(1, f);
    }
    return factors;
}

}  // namespace finprep::pregen
