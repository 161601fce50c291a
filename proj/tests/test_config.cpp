#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "finprep/config.hpp"
#include "finprep/errors.hpp"

using namespace finprep;

static config::PipelineConfig load(const std::string& text) {
    std::istringstream in(text);
    return config::load_config(in);
}

TEST_CASE("config defaults") {
    auto c = load("");
    REQUIRE(c.seed == 0);
    REQUIRE(c.workers == 1);
    REQUIRE(c.target_lang == "fi");
    REQUIRE(c.thresholds.max_digit_ratio == 0.2);
    REQUIRE(c.thresholds.max_upper_ratio == 0.3);
    REQUIRE(c.thresholds.max_nontarget_alpha_ratio == 0.05);
    REQUIRE(c.thresholds.min_avg_sentence_len == 5.0);
    REQUIRE(c.dedup_n == 10);
    REQUIRE(c.dedup_threshold == 0.25);
    REQUIRE_FALSE(c.dedup_keep_first);
    REQUIRE(c.vocab_size == 50000);
    REQUIRE(c.casing == vocab::CasingMode::cased);
    REQUIRE(c.gen.max_seq_len == 128);
    REQUIRE(c.gen.max_predictions == 20);
    REQUIRE(c.gen.mask_prob == 0.15);
    REQUIRE(c.svm_lambda == 0.01);
}

TEST_CASE("config parsing tolerates comments and blank lines") {
    auto c = load(
        "# pipeline settings\n"
        "\n"
        "seed = 42   # reproducibility\n"
        "  workers=8\n"
        "vocab.casing = uncased\n");
    REQUIRE(c.seed == 42);
    REQUIRE(c.workers == 8);
    REQUIRE(c.casing == vocab::CasingMode::uncased);
    // the generator seed follows the pipeline seed
    REQUIRE(c.gen.seed == 42);
}

TEST_CASE("later keys override earlier ones") {
    auto c = load("seed = 1\nseed = 2\n");
    REQUIRE(c.seed == 2);
}

TEST_CASE("config rejects unknown keys and bad values") {
    REQUIRE_THROWS_WITH(load("nonsense = 1\n"),
                        Catch::Matchers::ContainsSubstring("unknown config key: nonsense"));
    REQUIRE_THROWS_WITH(load("seed\n"), Catch::Matchers::ContainsSubstring("line 1"));
    REQUIRE_THROWS_WITH(load("= 3\n"), Catch::Matchers::ContainsSubstring("empty key"));
    REQUIRE_THROWS_WITH(load("seed = abc\n"), Catch::Matchers::ContainsSubstring("seed"));
    REQUIRE_THROWS_WITH(load("filter.max_digit_ratio = 1.5\n"),
                        Catch::Matchers::ContainsSubstring("filter.max_digit_ratio"));
    REQUIRE_THROWS_WITH(load("dedup.threshold = -0.5\n"),
                        Catch::Matchers::ContainsSubstring("dedup.threshold"));
    REQUIRE_THROWS_AS(load("workers = 0\n"), ConfigError);
    REQUIRE_THROWS_AS(load("dedup.n = 0\n"), ConfigError);
    REQUIRE_THROWS_AS(load("svm.lambda = 0\n"), ConfigError);
    REQUIRE_THROWS_AS(load("vocab.casing = mixed\n"), ConfigError);
    REQUIRE_THROWS_AS(load("dedup.keep_first = maybe\n"), ConfigError);
}

TEST_CASE("prediction budget defaults follow sequence length") {
    REQUIRE(load("pregen.max_seq_len = 512\n").gen.max_predictions == 77);
    REQUIRE(load("pregen.max_seq_len = 128\n").gen.max_predictions == 20);
    REQUIRE(load("pregen.max_seq_len = 256\n").gen.max_predictions == 20);
    // an explicit value wins regardless of length
    auto c = load("pregen.max_seq_len = 512\npregen.max_predictions = 40\n");
    REQUIRE(c.gen.max_predictions == 40);

    // invalid combinations surface as pregen config errors
    REQUIRE_THROWS_WITH(load("pregen.max_seq_len = 128\npregen.max_predictions = 300\n"),
                        Catch::Matchers::ContainsSubstring("pregen:"));
}

TEST_CASE("duplication factor keys select sources") {
    auto c = load("pregen.dup_factor.news = 4\npregen.dup_factor.crawl = 2\n");
    REQUIRE(c.gen.dup_factor(corpus::Source::news) == 4);
    REQUIRE(c.gen.dup_factor(corpus::Source::crawl) == 2);
    REQUIRE(c.gen.dup_factor(corpus::Source::discussion) == 1);
    REQUIRE_THROWS_WITH(load("pregen.dup_factor.blog = 2\n"),
                        Catch::Matchers::ContainsSubstring("unknown source"));
    REQUIRE_THROWS_AS(load("pregen.dup_factor.news = 0\n"), ConfigError);
}

TEST_CASE("split settings") {
    auto c = load(
        "split.train_per_class = 100\n"
        "split.dev_per_class = 10\n"
        "split.test_per_class = 10\n"
        "split.classes = pos, neg ,neutral\n");
    REQUIRE(c.split.train_per_class == 100);
    REQUIRE(c.split.classes == std::vector<std::string>{"pos", "neg", "neutral"});
}

TEST_CASE("referenced paths must exist") {
    REQUIRE_THROWS_WITH(load("paths.profiles = /nonexistent/profiles.json\n"),
                        Catch::Matchers::ContainsSubstring("/nonexistent/profiles.json"));

    std::string path = "config_test_profile_ref.json";
    {
        std::ofstream out(path);
        out << "[]\n";
    }
    auto c = load("paths.profiles = " + path + "\n");
    REQUIRE(c.profiles_path == path);
    std::remove(path.c_str());
}

TEST_CASE("filter threshold keys map onto threshold fields") {
    auto c = load(
        "filter.max_digit_ratio = 0.1\n"
        "filter.max_upper_ratio = 0.5\n"
        "filter.max_nontarget_alpha_ratio = 0.02\n"
        "filter.min_avg_sentence_len = 3\n"
        "filter.min_lang_score = 0.9\n"
        "dedup.keep_first = true\n"
        "svm.cutoff = -0.25\n");
    REQUIRE(c.thresholds.max_digit_ratio == 0.1);
    REQUIRE(c.thresholds.max_upper_ratio == 0.5);
    REQUIRE(c.thresholds.max_nontarget_alpha_ratio == 0.02);
    REQUIRE(c.thresholds.min_avg_sentence_len == 3.0);
    REQUIRE(c.thresholds.min_lang_score == 0.9);
    REQUIRE(c.dedup_keep_first);
    REQUIRE(c.svm_cutoff == -0.25);
}
