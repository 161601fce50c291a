#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "finprep/corpus.hpp"
#include "finprep/errors.hpp"
#include "finprep/filter.hpp"
#include "finprep/pregen.hpp"
#include "finprep/vocab.hpp"

// Flat key = value pipeline configuration. Every key has a default; a `#`
// starts a comment; unknown keys are rejected.

namespace finprep::config {

struct PipelineConfig {
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string target_lang = "fi";
    filter::Thresholds thresholds;          // filter.*
    std::uint64_t dedup_n = 10;             // dedup.n
    double dedup_threshold = 0.25;          // dedup.threshold
    bool dedup_keep_first = false;          // dedup.keep_first
    std::uint64_t vocab_size = 50000;       // vocab.size
    vocab::CasingMode casing = vocab::CasingMode::cased;  // vocab.casing
    pregen::GenConfig gen;                  // pregen.*
    corpus::SplitSpec split;                // split.*
    double svm_lambda = 0.01;               // svm.lambda
    std::uint64_t svm_epochs = 5;           // svm.epochs
    double svm_cutoff = 0.0;                // svm.cutoff
    std::string profiles_path;              // paths.profiles
    std::string svm_model_path;             // paths.svm_model
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw ConfigError(key + ": not a number: " + v);
        return d;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError(key + ": not a number: " + v);
    }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    if (v.empty()) throw ConfigError(key + ": not a count: " + v);
    std::uint64_t n = 0;
    for (char c : v) {
        if (c < '0' || c > '9') throw ConfigError(key + ": not a count: " + v);
        n = n * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return n;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": not a boolean: " + v);
}

inline double to_fraction(const std::string& key, const std::string& v) {
    double d = to_double(key, v);
    if (d < 0.0 || d > 1.0) throw ConfigError(key + ": must be in [0,1]");
    return d;
}

inline std::vector<std::string> split_commas(const std::string& v) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        std::size_t comma = v.find(',', start);
        std::string part =
            trim(comma == std::string::npos ? v.substr(start) : v.substr(start, comma - start));
        if (!part.empty()) out.push_back(part);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

// Key/value pairs in file order; later assignments to a key override
// earlier ones when applied.
inline std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = detail::trim(line);
        if (t.empty()) continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(t.substr(0, eq));
        std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

inline PipelineConfig apply_config(const std::vector<std::pair<std::string, std::string>>& entries) {
    PipelineConfig c;
    bool max_predictions_set = false;
    for (const auto& [key, v] : entries) {
        if (key == "seed") c.seed = detail::to_u64(key, v);
        else if (key == "workers") {
            std::uint64_t w = detail::to_u64(key, v);
            if (w < 1) throw ConfigError("workers: must be at least 1");
            c.workers = static_cast<unsigned>(w);
        }
        else if (key == "target_lang") c.target_lang = v;
        else if (key == "filter.max_digit_ratio") c.thresholds.max_digit_ratio = detail::to_fraction(key, v);
        else if (key == "filter.max_upper_ratio") c.thresholds.max_upper_ratio = detail::to_fraction(key, v);
        else if (key == "filter.max_nontarget_alpha_ratio") c.thresholds.max_nontarget_alpha_ratio = detail::to_fraction(key, v);
        else if (key == "filter.min_avg_sentence_len") {
            c.thresholds.min_avg_sentence_len = detail::to_double(key, v);
            if (c.thresholds.min_avg_sentence_len < 0) throw ConfigError(key + ": must be >= 0");
        }
        else if (key == "filter.min_lang_score") c.thresholds.min_lang_score = detail::to_fraction(key, v);
        else if (key == "dedup.n") {
            c.dedup_n = detail::to_u64(key, v);
            if (c.dedup_n < 1) throw ConfigError("dedup.n: must be at least 1");
        }
        else if (key == "dedup.threshold") c.dedup_threshold = detail::to_fraction(key, v);
        else if (key == "dedup.keep_first") c.dedup_keep_first = detail::to_bool(key, v);
        else if (key == "vocab.size") c.vocab_size = detail::to_u64(key, v);
        else if (key == "vocab.casing") {
            if (v != "cased" && v != "uncased") throw ConfigError("vocab.casing: must be cased or uncased");
            c.casing = v == "cased" ? vocab::CasingMode::cased : vocab::CasingMode::uncased;
        }
        else if (key == "pregen.max_seq_len") c.gen.max_seq_len = detail::to_u64(key, v);
        else if (key == "pregen.max_predictions") {
            c.gen.max_predictions = detail::to_u64(key, v);
            max_predictions_set = true;
        }
        else if (key == "pregen.mask_prob") c.gen.mask_prob = detail::to_fraction(key, v);
        else if (key == "pregen.random_next_prob") c.gen.random_next_prob = detail::to_fraction(key, v);
        else if (key == "pregen.mask_token_prob") c.gen.mask_token_prob = detail::to_fraction(key, v);
        else if (key == "pregen.random_replace_prob") c.gen.random_replace_prob = detail::to_fraction(key, v);
        else if (key == "pregen.keep_prob") c.gen.keep_prob = detail::to_fraction(key, v);
        else if (key == "pregen.short_seq_prob") c.gen.short_seq_prob = detail::to_fraction(key, v);
        else if (key.rfind("pregen.dup_factor.", 0) == 0) {
            std::string src = key.substr(18);
            if (src != "news" && src != "discussion" && src != "crawl" && src != "other")
                throw ConfigError(key + ": unknown source");
            c.gen.dup_factors[corpus::source_from_string(src)] = detail::to_u64(key, v);
        }
        else if (key == "split.train_per_class") c.split.train_per_class = detail::to_u64(key, v);
        else if (key == "split.dev_per_class") c.split.dev_per_class = detail::to_u64(key, v);
        else if (key == "split.test_per_class") c.split.test_per_class = detail::to_u64(key, v);
        else if (key == "split.classes") c.split.classes = detail::split_commas(v);
        else if (key == "svm.lambda") {
            c.svm_lambda = detail::to_double(key, v);
            if (c.svm_lambda <= 0) throw ConfigError("svm.lambda: must be positive");
        }
        else if (key == "svm.epochs") c.svm_epochs = detail::to_u64(key, v);
        else if (key == "svm.cutoff") c.svm_cutoff = detail::to_double(key, v);
        else if (key == "paths.profiles") c.profiles_path = v;
        else if (key == "paths.svm_model") c.svm_model_path = v;
        else throw ConfigError("unknown config key: " + key);
    }
    if (!max_predictions_set) c.gen.max_predictions = c.gen.max_seq_len == 512 ? 77 : 20;
    c.gen.seed = c.seed;
    try {
        c.gen.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("pregen: ") + e.what());
    }
    for (const std::string& p : {c.profiles_path, c.svm_model_path})
        if (!p.empty() && !std::filesystem::exists(p))
            throw ConfigError("referenced path does not exist: " + p);
    return c;
}

inline PipelineConfig load_config(std::istream& in) { return apply_config(parse_config(in)); }

}  // namespace finprep::config
