#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "finprep/corpus.hpp"
#include "finprep/errors.hpp"
#include "finprep/rng.hpp"
#include "finprep/unicode.hpp"
#include "finprep/vocab.hpp"

// Quality filtering: character-class heuristics, trigram-cosine language
// identification, and a Pegasos-style linear hinge-loss classifier.

namespace finprep::filter {

struct Thresholds {
    double max_digit_ratio = 0.2;
    double max_upper_ratio = 0.3;
    double max_nontarget_alpha_ratio = 0.05;
    double min_avg_sentence_len = 5.0;  // basic tokens
    double min_lang_score = 0.7;
};

enum class Reason {
    ok,
    digit_ratio,
    upper_ratio,
    nontarget_alpha,
    short_sentences,
    language,
    classifier,
};

inline const char* to_string(Reason r) {
    switch (r) {
        case Reason::ok: return "ok";
        case Reason::digit_ratio: return "digit_ratio";
        case Reason::upper_ratio: return "upper_ratio";
        case Reason::nontarget_alpha: return "nontarget_alpha";
        case Reason::short_sentences: return "short_sentences";
        case Reason::language: return "language";
        default: return "classifier";
    }
}

struct FilterVerdict {
    bool kept = true;
    Reason reason = Reason::ok;
    std::optional<double> score;
};

struct CharClassRatios {
    double digit = 0.0;
    double upper = 0.0;
    double nontarget_alpha = 0.0;
};

// Finnish target alphabet: a-z plus å, ä, ö in both cases.
inline bool is_target_alpha(char32_t c) {
    if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return true;
    return c == 0xE5 || c == 0xE4 || c == 0xF6 || c == 0xC5 || c == 0xC4 || c == 0xD6;
}

// digit and upper ratios are over non-whitespace code points;
// nontarget_alpha is over alphabetic code points only.
inline CharClassRatios char_class_ratios(std::string_view text) {
    std::u32string cps = uni::decode_utf8(text);
    std::uint64_t nonspace = 0, digits = 0, uppers = 0, alpha = 0, nontarget = 0;
    for (char32_t c : cps) {
        if (uni::is_whitespace(c)) continue;
        ++nonspace;
        if (uni::is_digit(c)) ++digits;
        if (uni::is_upper(c)) ++uppers;
        if (uni::is_alpha(c)) {
            ++alpha;
            if (!is_target_alpha(c)) ++nontarget;
        }
    }
    if (nonspace == 0) throw Error("empty text");
    CharClassRatios r;
    r.digit = static_cast<double>(digits) / static_cast<double>(nonspace);
    r.upper = static_cast<double>(uppers) / static_cast<double>(nonspace);
    r.nontarget_alpha =
        alpha == 0 ? 0.0 : static_cast<double>(nontarget) / static_cast<double>(alpha);
    return r;
}

// Rules fire in fixed order: digit, upper, nontarget alphabet, average
// sentence length. A ratio must strictly exceed its bound to reject.
inline FilterVerdict heuristic_filter(const corpus::Document& doc, const Thresholds& t,
                                      const std::vector<std::uint64_t>& sentence_lengths) {
    bool blank = true;
    for (unsigned char ch : doc.text)
        if (!(ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r')) { blank = false; break; }
    if (blank || sentence_lengths.empty())
        return {false, Reason::short_sentences, 0.0};

    CharClassRatios r = char_class_ratios(doc.text);
    if (r.digit > t.max_digit_ratio) return {false, Reason::digit_ratio, r.digit};
    if (r.upper > t.max_upper_ratio) return {false, Reason::upper_ratio, r.upper};
    if (r.nontarget_alpha > t.max_nontarget_alpha_ratio)
        return {false, Reason::nontarget_alpha, r.nontarget_alpha};

    std::uint64_t total = 0;
    for (std::uint64_t n : sentence_lengths) total += n;
    double avg = static_cast<double>(total) / static_cast<double>(sentence_lengths.size());
    if (avg < t.min_avg_sentence_len) return {false, Reason::short_sentences, avg};
    return {true, Reason::ok, std::nullopt};
}

inline std::vector<std::uint64_t> sentence_token_lengths(std::string_view text) {
    std::vector<std::uint64_t> lengths;
    for (const std::string& s : corpus::split_sentences(text))
        lengths.push_back(vocab::basic_tokenize(s, vocab::CasingMode::cased).size());
    return lengths;
}

struct LanguageProfile {
    std::string lang;
    std::map<std::string, double> ngram_freqs;  // trigram -> relative frequency
};

namespace detail {

// Lowercase and collapse whitespace runs to single spaces, then count
// trigrams of code points.
inline std::map<std::string, std::uint64_t> trigram_counts(std::string_view text) {
    std::u32string cps = uni::decode_utf8(text);
    std::u32string norm;
    norm.reserve(cps.size());
    for (char32_t c : cps) {
        if (uni::is_whitespace(c)) {
            if (!norm.empty() && norm.back() != U' ') norm.push_back(U' ');
        } else {
            norm.push_back(uni::to_lower(c));
        }
    }
    while (!norm.empty() && norm.back() == U' ') norm.pop_back();
    std::map<std::string, std::uint64_t> counts;
    if (norm.size() < 3) return counts;
    for (std::size_t i = 0; i + 3 <= norm.size(); ++i)
        ++counts[uni::encode_utf8(std::u32string_view(norm.data() + i, 3))];
    return counts;
}

}  // namespace detail

inline std::vector<LanguageProfile> train_language_profiles(
    const std::map<std::string, std::string>& samples) {
    std::vector<LanguageProfile> profiles;
    for (const auto& [lang, text] : samples) {
        if (uni::decode_utf8(text).size() < 100)
            throw Error("sample too small: " + lang);
        auto counts = detail::trigram_counts(text);
        if (counts.empty()) throw Error("sample too small: " + lang);
        std::uint64_t total = 0;
        for (const auto& [k, v] : counts) total += v;
        LanguageProfile p;
        p.lang = lang;
        for (const auto& [k, v] : counts)
            p.ngram_freqs[k] = static_cast<double>(v) / static_cast<double>(total);
        profiles.push_back(std::move(p));
    }
    return profiles;
}

struct LangScore {
    std::string lang;
    double score = 0.0;  // cosine similarity in [0,1]
};

inline LangScore detect_language(std::string_view text,
                                 const std::vector<LanguageProfile>& profiles) {
    if (profiles.empty()) throw Error("no language profiles");
    if (uni::decode_utf8(text).size() < 3) throw Error("text too short for language detection");
    auto counts = detail::trigram_counts(text);
    double text_norm = 0.0;
    for (const auto& [k, v] : counts)
        text_norm += static_cast<double>(v) * static_cast<double>(v);
    text_norm = std::sqrt(text_norm);

    LangScore best;
    bool first = true;
    for (const auto& p : profiles) {
        double dot = 0.0, pnorm = 0.0;
        for (const auto& [k, f] : p.ngram_freqs) {
            pnorm += f * f;
            auto it = counts.find(k);
            if (it != counts.end()) dot += f * static_cast<double>(it->second);
        }
        double denom = text_norm * std::sqrt(pnorm);
        double cosine = denom > 0.0 ? dot / denom : 0.0;
        cosine = std::clamp(cosine, 0.0, 1.0);
        if (first || cosine > best.score || (cosine == best.score && p.lang < best.lang)) {
            best = {p.lang, cosine};
            first = false;
        }
    }
    return best;
}

inline FilterVerdict language_verdict(std::string_view text,
                                      const std::vector<LanguageProfile>& profiles,
                                      const std::string& target_lang, double min_score) {
    LangScore s = detect_language(text, profiles);
    if (s.lang != target_lang || s.score < min_score)
        return {false, Reason::language, s.score};
    return {true, Reason::ok, s.score};
}

enum class FeatureSpace { lexical, delexicalized };

inline const char* to_string(FeatureSpace f) {
    return f == FeatureSpace::lexical ? "lexical" : "delexicalized";
}

inline FeatureSpace feature_space_from_string(std::string_view s) {
    if (s == "lexical") return FeatureSpace::lexical;
    if (s == "delexicalized") return FeatureSpace::delexicalized;
    throw Error("unknown feature space: " + std::string(s));
}

using SparseVec = std::map<std::uint64_t, double>;

struct LinearModel {
    SparseVec weights;
    double bias = 0.0;
    FeatureSpace feature_space = FeatureSpace::lexical;
};

inline constexpr std::uint64_t kLexicalBuckets = 1ULL << 20;

// Hashed lowercased token unigram counts (FNV-1a, 2^20 buckets).
inline SparseVec lexical_features(std::string_view text) {
    SparseVec out;
    for (const std::string& tok : vocab::basic_tokenize(text, vocab::CasingMode::cased)) {
        std::string low = uni::lower_utf8(tok);
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : low) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        out[h % kLexicalBuckets] += 1.0;
    }
    return out;
}

struct LabeledExample {
    int label = 1;  // +1 or -1
    SparseVec features;
};

inline double score_linear(const LinearModel& m, const SparseVec& features) {
    double s = m.bias;
    for (const auto& [f, x] : features) {
        auto it = m.weights.find(f);
        if (it != m.weights.end()) s += it->second * x;
    }
    return s;
}

// Regularized hinge objective: lambda/2 ||w||^2 + mean hinge loss.
inline double svm_objective(const LinearModel& m, const std::vector<LabeledExample>& examples,
                            double lambda) {
    double norm2 = 0.0;
    for (const auto& [f, w] : m.weights) norm2 += w * w;
    double hinge = 0.0;
    for (const auto& ex : examples)
        hinge += std::max(0.0, 1.0 - ex.label * score_linear(m, ex.features));
    if (!examples.empty()) hinge /= static_cast<double>(examples.size());
    return 0.5 * lambda * norm2 + hinge;
}

// Pegasos stochastic subgradient descent with step 1/(lambda t). The
// weight vector is kept as scale * values so the per-step decay is O(1);
// the bias is folded in as a constant feature, so it decays with the
// weights (left undecayed it absorbs the huge early 1/(lambda t) steps
// and swamps every feature).
inline LinearModel train_linear_svm(const std::vector<LabeledExample>& examples, double lambda,
                                    std::uint64_t epochs, std::uint64_t seed,
                                    FeatureSpace space = FeatureSpace::lexical) {
    if (lambda <= 0.0) throw Error("lambda must be positive");
    bool pos = false, neg = false;
    for (const auto& ex : examples) {
        if (ex.label == 1) pos = true;
        else if (ex.label == -1) neg = true;
        else throw Error("labels must be +1 or -1");
    }
    if (!pos || !neg) throw Error("training data must contain both labels");

    std::unordered_map<std::uint64_t, double> values;
    double scale = 1.0;
    double bias = 0.0;
    std::uint64_t t = 0;

    Rng rng(seed);
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::uint64_t epoch = 0; epoch < epochs; ++epoch) {
        Rng sub = rng.substream(epoch);
        sub.shuffle(order);
        for (std::size_t idx : order) {
            const auto& ex = examples[idx];
            ++t;
            double eta = 1.0 / (lambda * static_cast<double>(t));
            // decay w and bias by (1 - 1/t); at t=1 this zeroes both
            if (t == 1) {
                values.clear();
                scale = 1.0;
                bias = 0.0;
            } else {
                double keep = 1.0 - 1.0 / static_cast<double>(t);
                scale *= keep;
                bias *= keep;
            }
            double margin = bias;
            for (const auto& [f, x] : ex.features) {
                auto it = values.find(f);
                if (it != values.end()) margin += scale * it->second * x;
            }
            if (ex.label * margin < 1.0) {
                for (const auto& [f, x] : ex.features)
                    values[f] += eta * ex.label * x / scale;
                bias += eta * ex.label;
            }
        }
    }

    LinearModel m;
    m.feature_space = space;
    m.bias = epochs == 0 ? 0.0 : bias;
    for (const auto& [f, v] : values) {
        double w = scale * v;
        if (w != 0.0) m.weights[f] = w;
    }
    return m;
}

inline FilterVerdict classifier_verdict(const LinearModel& m, const SparseVec& features,
                                        double cutoff = 0.0) {
    double s = score_linear(m, features);
    if (s < cutoff) return {false, Reason::classifier, s};
    return {true, Reason::ok, s};
}

inline nlohmann::json model_to_json(const LinearModel& m) {
    nlohmann::json j;
    j["feature_space"] = to_string(m.feature_space);
    j["bias"] = m.bias;
    nlohmann::json w = nlohmann::json::object();
    for (const auto& [f, v] : m.weights) w[std::to_string(f)] = v;
    j["weights"] = w;
    return j;
}

inline LinearModel model_from_json(const nlohmann::json& j) {
    LinearModel m;
    m.feature_space = feature_space_from_string(j.at("feature_space").get<std::string>());
    m.bias = j.at("bias").get<double>();
    for (const auto& [k, v] : j.at("weights").items())
        m.weights[std::stoull(k)] = v.get<double>();
    return m;
}

inline void save_model(std::ostream& out, const LinearModel& m) {
    out << model_to_json(m).dump(2) << '\n';
}

inline LinearModel load_model(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("malformed model file");
    return model_from_json(j);
}

inline nlohmann::json profiles_to_json(const std::vector<LanguageProfile>& profiles) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : profiles) {
        nlohmann::json j;
        j["lang"] = p.lang;
        nlohmann::json freqs = nlohmann::json::object();
        for (const auto& [k, v] : p.ngram_freqs) freqs[k] = v;
        j["ngram_freqs"] = freqs;
        arr.push_back(j);
    }
    return arr;
}

inline std::vector<LanguageProfile> profiles_from_json(const nlohmann::json& arr) {
    std::vector<LanguageProfile> profiles;
    for (const auto& j : arr) {
        LanguageProfile p;
        p.lang = j.at("lang").get<std::string>();
        for (const auto& [k, v] : j.at("ngram_freqs").items()) p.ngram_freqs[k] = v.get<double>();
        profiles.push_back(std::move(p));
    }
    return profiles;
}

inline void save_profiles(std::ostream& out, const std::vector<LanguageProfile>& profiles) {
    out << profiles_to_json(profiles).dump(2) << '\n';
}

inline std::vector<LanguageProfile> load_profiles(std::istream& in) {
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("malformed profile file");
    return profiles_from_json(j);
}

}  // namespace finprep::filter
