// finprep: batch front end for the corpus preparation pipeline.
//
// Exit codes: 0 success, 1 processing error, 2 usage or config error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "finprep/config.hpp"
#include "finprep/corpus.hpp"
#include "finprep/dedup.hpp"
#include "finprep/errors.hpp"
#include "finprep/evalmetrics.hpp"
#include "finprep/filter.hpp"
#include "finprep/parallel.hpp"
#include "finprep/pregen.hpp"
#include "finprep/vocab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace finprep;

namespace {

// Writes through a temp file and renames on commit; a failed stage leaves
// no partial output behind.
class AtomicFile {
public:
    explicit AtomicFile(const std::string& target)
        : target_(target), tmp_(target + ".tmp"), out_(tmp_, std::ios::binary) {
        if (!out_) throw Error("cannot open for writing: " + tmp_);
    }

    std::ostream& stream() { return out_; }

    void commit() {
        out_.flush();
        if (!out_) throw Error("write failed: " + tmp_);
        out_.close();
        fs::rename(tmp_, target_);
        committed_ = true;
    }

    ~AtomicFile() {
        if (!committed_) {
            out_.close();
            std::error_code ec;
            fs::remove(tmp_, ec);
        }
    }

private:
    std::string target_;
    std::string tmp_;
    std::ofstream out_;
    bool committed_ = false;
};

std::ifstream open_input(const std::string& path) {
    if (!fs::exists(path)) throw ConfigError("input not found: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open: " + path);
    return in;
}

std::vector<corpus::Document> load_docs(const std::string& path) {
    std::ifstream in = open_input(path);
    return corpus::read_documents(in);
}

std::string read_all(const std::string& path) {
    std::ifstream in = open_input(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

vocab::Vocab load_vocab(const std::string& path, vocab::CasingMode mode) {
    if (!fs::exists(path)) throw ConfigError("input not found: " + path);
    return vocab::Vocab::load(path, mode);
}

// Per-document filtering shared by clean / langfilter / svmfilter.
json run_verdict_stage(const config::PipelineConfig& cfg, const std::string& in_path,
                       const std::string& out_path, const char* stage,
                       const std::function<filter::FilterVerdict(const corpus::Document&)>& judge) {
    std::vector<corpus::Document> docs = load_docs(in_path);
    std::vector<filter::FilterVerdict> verdicts(docs.size());
    parallel_for(docs.size(), cfg.workers, [&](std::size_t i) { verdicts[i] = judge(docs[i]); });

    AtomicFile out(out_path);
    std::map<std::string, std::uint64_t> rejected;
    std::uint64_t kept = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (verdicts[i].kept) {
            corpus::write_document(out.stream(), docs[i]);
            ++kept;
        } else {
            ++rejected[filter::to_string(verdicts[i].reason)];
        }
    }
    out.commit();

    json report;
    report["stage"] = stage;
    report["input_docs"] = docs.size();
    report["kept"] = kept;
    report["rejected"] = rejected;
    return report;
}

json run_clean(const config::PipelineConfig& cfg, const std::string& in_path,
               const std::string& out_path) {
    return run_verdict_stage(cfg, in_path, out_path, "clean", [&](const corpus::Document& d) {
        return filter::heuristic_filter(d, cfg.thresholds, filter::sentence_token_lengths(d.text));
    });
}

json run_langfilter(const config::PipelineConfig& cfg, const std::string& in_path,
                    const std::string& out_path, const std::string& profiles_path) {
    std::ifstream pin = open_input(profiles_path);
    std::vector<filter::LanguageProfile> profiles = filter::load_profiles(pin);
    return run_verdict_stage(cfg, in_path, out_path, "langfilter", [&](const corpus::Document& d) {
        try {
            return filter::language_verdict(d.text, profiles, cfg.target_lang,
                                            cfg.thresholds.min_lang_score);
        } catch (const Error&) {
            // too short to score counts as a language rejection
            return filter::FilterVerdict{false, filter::Reason::language, 0.0};
        }
    });
}

json run_svmfilter(const config::PipelineConfig& cfg, const std::string& in_path,
                   const std::string& out_path, const std::string& model_path) {
    std::ifstream min = open_input(model_path);
    filter::LinearModel model = filter::load_model(min);
    return run_verdict_stage(cfg, in_path, out_path, "svmfilter", [&](const corpus::Document& d) {
        return filter::classifier_verdict(model, filter::lexical_features(d.text), cfg.svm_cutoff);
    });
}

json run_dedup(const config::PipelineConfig& cfg, const std::string& in_path,
               const std::string& out_path, const std::string& report_path,
               const std::string& index_path) {
    std::vector<corpus::Document> docs = load_docs(in_path);
    dedup::DedupResult result;
    dedup::ShingleIndex index;
    if (cfg.dedup_keep_first) {
        result = dedup::dedup_filter_keep_first(docs, cfg.dedup_n, cfg.dedup_threshold);
    } else {
        index = dedup::build_shingle_index(docs, cfg.dedup_n, cfg.workers);
        result = dedup::dedup_filter(docs, index, cfg.dedup_threshold, cfg.workers);
    }

    AtomicFile out(out_path);
    corpus::write_documents(out.stream(), result.kept);
    out.commit();
    if (!report_path.empty()) {
        AtomicFile rep(report_path);
        dedup::write_reports(rep.stream(), result.reports);
        rep.commit();
    }
    if (!index_path.empty() && !cfg.dedup_keep_first) {
        AtomicFile idx(index_path);
        dedup::save_index(idx.stream(), index);
        idx.commit();
    }

    std::map<std::string, std::uint64_t> groups;
    for (const auto& r : result.reports) ++groups[dedup::to_string(r.group)];
    json report;
    report["stage"] = "dedup";
    report["input_docs"] = docs.size();
    report["kept"] = result.kept.size();
    report["removed"] = docs.size() - result.kept.size();
    report["groups"] = groups;
    return report;
}

json run_vocab_train(const config::PipelineConfig& cfg, const std::string& in_path,
                     const std::string& vocab_path, const std::string& merges_path) {
    std::vector<corpus::Document> docs = load_docs(in_path);
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& d : docs)
        for (const std::string& tok : vocab::basic_tokenize(d.text, cfg.casing)) ++counts[tok];

    auto [voc, merges] = vocab::train_bpe(counts, cfg.vocab_size, cfg.casing);
    {
        AtomicFile out(vocab_path);
        voc.save(out.stream());
        out.commit();
    }
    if (!merges_path.empty()) {
        AtomicFile out(merges_path);
        merges.save(out.stream());
        out.commit();
    }

    json report;
    report["stage"] = "vocab-train";
    report["input_docs"] = docs.size();
    report["distinct_tokens"] = counts.size();
    report["vocab_size"] = voc.size();
    report["merges"] = merges.merges.size();
    report["casing"] = vocab::to_string(cfg.casing);
    return report;
}

json run_encode(const config::PipelineConfig& cfg, const std::string& in_path,
                const std::string& vocab_path, const std::string& out_path) {
    std::vector<corpus::Document> docs = load_docs(in_path);
    vocab::Vocab voc = load_vocab(vocab_path, cfg.casing);

    std::vector<pregen::TokenizedDoc> encoded(docs.size());
    parallel_for(docs.size(), cfg.workers, [&](std::size_t i) {
        pregen::TokenizedDoc& t = encoded[i];
        t.id = docs[i].id;
        t.source = docs[i].source;
        for (const std::string& sentence : corpus::split_sentences(docs[i].text)) {
            std::vector<std::int32_t> ids;
            for (const std::string& tok : vocab::basic_tokenize(sentence, cfg.casing))
                for (const std::string& piece : vocab::wordpiece_encode(tok, voc))
                    ids.push_back(static_cast<std::int32_t>(*voc.id_of(piece)));
            if (!ids.empty()) t.sentences.push_back(std::move(ids));
        }
    });

    std::uint64_t sentences = 0, pieces = 0;
    for (const auto& t : encoded) {
        sentences += t.sentences.size();
        for (const auto& s : t.sentences) pieces += s.size();
    }

    AtomicFile out(out_path);
    pregen::write_tokenized(out.stream(), encoded);
    out.commit();

    json report;
    report["stage"] = "encode";
    report["input_docs"] = docs.size();
    report["sentences"] = sentences;
    report["pieces"] = pieces;
    return report;
}

json run_coverage(const config::PipelineConfig& cfg, const std::string& in_path,
                  const std::string& vocab_path) {
    std::vector<corpus::Document> docs = load_docs(in_path);
    vocab::Vocab voc = load_vocab(vocab_path, cfg.casing);
    std::vector<std::string> texts;
    texts.reserve(docs.size());
    for (const auto& d : docs) texts.push_back(d.text);
    vocab::CoverageReport cov = vocab::coverage_stats(texts, voc);
    json report;
    report["stage"] = "coverage";
    report["input_docs"] = docs.size();
    report["pieces_per_token"] = cov.pieces_per_token;
    report["unk_per_token"] = cov.unk_per_token;
    return report;
}

json run_pregen(const config::PipelineConfig& cfg, const std::string& in_path,
                const std::string& vocab_path, const std::string& out_path, bool with_stats) {
    std::ifstream in = open_input(in_path);
    std::vector<pregen::TokenizedDoc> docs = pregen::read_tokenized(in);
    vocab::Vocab voc = load_vocab(vocab_path, cfg.casing);

    pregen::InstanceResult result = pregen::create_instances(docs, cfg.gen, voc, cfg.workers);
    AtomicFile out(out_path);
    std::uint64_t written = pregen::serialize_examples(out.stream(), result.examples);
    out.commit();

    json report;
    report["stage"] = "pregen";
    report["input_docs"] = docs.size();
    report["examples"] = written;
    report["skipped"] = result.stats.skipped;
    if (with_stats) {
        json per_source = json::object();
        for (const auto& [s, n] : result.stats.per_source) per_source[corpus::to_string(s)] = n;
        report["per_source"] = per_source;
    }
    return report;
}

json run_split(const config::PipelineConfig& cfg, const std::string& in_path,
               const std::string& train_path, const std::string& dev_path,
               const std::string& test_path) {
    std::vector<corpus::Document> docs = load_docs(in_path);
    corpus::SplitResult split = corpus::balanced_chronological_split(docs, cfg.split, cfg.seed);
    {
        AtomicFile out(train_path);
        corpus::write_documents(out.stream(), split.train);
        out.commit();
    }
    {
        AtomicFile out(dev_path);
        corpus::write_documents(out.stream(), split.dev);
        out.commit();
    }
    {
        AtomicFile out(test_path);
        corpus::write_documents(out.stream(), split.test);
        out.commit();
    }
    json report;
    report["stage"] = "split";
    report["input_docs"] = docs.size();
    report["train"] = split.train.size();
    report["dev"] = split.dev.size();
    report["test"] = split.test.size();
    return report;
}

json run_lang_train(const std::vector<std::string>& sample_specs, const std::string& out_path) {
    std::map<std::string, std::string> samples;
    for (const std::string& spec : sample_specs) {
        std::size_t eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size())
            throw ConfigError("--sample expects lang=path, got: " + spec);
        samples[spec.substr(0, eq)] = read_all(spec.substr(eq + 1));
    }
    if (samples.empty()) throw ConfigError("lang-train needs at least one --sample");
    std::vector<filter::LanguageProfile> profiles = filter::train_language_profiles(samples);
    AtomicFile out(out_path);
    filter::save_profiles(out.stream(), profiles);
    out.commit();
    json report;
    report["stage"] = "lang-train";
    json langs = json::array();
    for (const auto& p : profiles) langs.push_back(p.lang);
    report["languages"] = langs;
    return report;
}

json run_svm_train(const config::PipelineConfig& cfg, const std::string& pos_path,
                   const std::string& neg_path, const std::string& out_path) {
    std::vector<filter::LabeledExample> examples;
    for (const auto& d : load_docs(pos_path))
        examples.push_back({1, filter::lexical_features(d.text)});
    std::size_t positives = examples.size();
    for (const auto& d : load_docs(neg_path))
        examples.push_back({-1, filter::lexical_features(d.text)});

    filter::LinearModel model =
        filter::train_linear_svm(examples, cfg.svm_lambda, cfg.svm_epochs, cfg.seed);
    AtomicFile out(out_path);
    filter::save_model(out.stream(), model);
    out.commit();

    json report;
    report["stage"] = "svm-train";
    report["positives"] = positives;
    report["negatives"] = examples.size() - positives;
    report["objective"] = filter::svm_objective(model, examples, cfg.svm_lambda);
    return report;
}

json run_eval(const std::string& task, const std::string& gold_path, const std::string& pred_path,
              bool conllu) {
    json report;
    report["stage"] = "eval";
    report["task"] = task;
    if (task == "las") {
        std::ifstream g = open_input(gold_path), p = open_input(pred_path);
        auto gold = evalmetrics::parse_conllu(g);
        auto pred = evalmetrics::parse_conllu(p);
        std::vector<evalmetrics::DepGraph> gg, pp;
        for (auto& [s, d] : gold) gg.push_back(std::move(d));
        for (auto& [s, d] : pred) pp.push_back(std::move(d));
        report["las"] = evalmetrics::las(gg, pp);
        return report;
    }
    std::vector<evalmetrics::TaggedSentence> gold, pred;
    if (conllu) {
        std::ifstream g = open_input(gold_path), p = open_input(pred_path);
        for (auto& [s, d] : evalmetrics::parse_conllu(g)) gold.push_back(std::move(s));
        for (auto& [s, d] : evalmetrics::parse_conllu(p)) pred.push_back(std::move(s));
    } else {
        std::ifstream g = open_input(gold_path), p = open_input(pred_path);
        gold = evalmetrics::read_tagged(g);
        pred = evalmetrics::read_tagged(p);
    }
    if (task == "upos") {
        report["accuracy"] = evalmetrics::upos_accuracy(gold, pred);
    } else if (task == "ner") {
        evalmetrics::PrfResult r = evalmetrics::mention_prf(gold, pred);
        report["precision"] = r.precision;
        report["recall"] = r.recall;
        report["f1"] = r.f1;
    } else {
        throw ConfigError("unknown eval task: " + task);
    }
    return report;
}

json run_stats(const std::string& in_path, bool human, bool as_json, std::ostream& outstream) {
    std::vector<corpus::Document> docs = load_docs(in_path);
    corpus::StatsReport stats = corpus::corpus_stats(docs);
    if (!as_json) outstream << corpus::format_stats_table(stats, human);
    json report = corpus::stats_to_json(stats);
    report["stage"] = "stats";
    return report;
}

void print_report(const json& report, bool as_json, std::ostream& out) {
    if (as_json) {
        out << report.dump() << '\n';
        return;
    }
    if (report.contains("stage")) out << report["stage"].get<std::string>() << ":\n";
    for (const auto& [k, v] : report.items()) {
        if (k == "stage") continue;
        out << "  " << k << " = " << v.dump() << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corpus preparation pipeline: filtering, deduplication, subword "
                 "vocabulary training, coverage evaluation, pretraining example "
                 "generation, and tagging/parsing metrics"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_flag = 0;
    unsigned workers_flag = 1;
    bool json_out = false;
    app.add_option("--config", config_path, "pipeline config file (key = value)");
    auto* seed_opt = app.add_option("--seed", seed_flag, "random seed");
    auto* workers_opt = app.add_option("--workers", workers_flag, "parallel worker count");
    app.add_flag("--json", json_out, "machine-readable reports on stdout");

    struct {
        std::string input;
        bool human = false;
    } stats;
    auto* stats_cmd = app.add_subcommand("stats", "corpus statistics per source");
    stats_cmd->add_option("--input", stats.input, "documents (JSON lines)")->required();
    stats_cmd->add_flag("--human", stats.human, "abbreviate counts (4M, 0.9B)");

    struct {
        std::string input, output;
    } clean;
    auto* clean_cmd = app.add_subcommand("clean", "heuristic quality filtering");
    clean_cmd->add_option("--input", clean.input)->required();
    clean_cmd->add_option("--output", clean.output)->required();

    struct {
        std::vector<std::string> samples;
        std::string output;
    } lang_train;
    auto* lang_train_cmd = app.add_subcommand("lang-train", "train language profiles");
    lang_train_cmd->add_option("--sample", lang_train.samples, "lang=path, repeatable")
        ->required();
    lang_train_cmd->add_option("--output", lang_train.output)->required();

    struct {
        std::string input, output, profiles;
    } langfilter;
    auto* langfilter_cmd = app.add_subcommand("langfilter", "language detection filtering");
    langfilter_cmd->add_option("--input", langfilter.input)->required();
    langfilter_cmd->add_option("--output", langfilter.output)->required();
    langfilter_cmd->add_option("--profiles", langfilter.profiles)->required();
    std::string lf_lang;
    double lf_min_score = 0.0;
    auto* lf_lang_opt = langfilter_cmd->add_option("--lang", lf_lang, "target language");
    auto* lf_score_opt =
        langfilter_cmd->add_option("--min-score", lf_min_score, "minimum cosine score");

    struct {
        std::string positive, negative, output;
    } svm_train;
    auto* svm_train_cmd = app.add_subcommand("svm-train", "train the quality classifier");
    svm_train_cmd->add_option("--positive", svm_train.positive)->required();
    svm_train_cmd->add_option("--negative", svm_train.negative)->required();
    svm_train_cmd->add_option("--output", svm_train.output)->required();
    double svm_lambda_flag = 0.0;
    std::uint64_t svm_epochs_flag = 0;
    auto* svm_lambda_opt = svm_train_cmd->add_option("--lambda", svm_lambda_flag);
    auto* svm_epochs_opt = svm_train_cmd->add_option("--epochs", svm_epochs_flag);

    struct {
        std::string input, output, model;
    } svmfilter;
    auto* svmfilter_cmd = app.add_subcommand("svmfilter", "classifier-based filtering");
    svmfilter_cmd->add_option("--input", svmfilter.input)->required();
    svmfilter_cmd->add_option("--output", svmfilter.output)->required();
    svmfilter_cmd->add_option("--model", svmfilter.model)->required();
    double svm_cutoff_flag = 0.0;
    auto* svm_cutoff_opt = svmfilter_cmd->add_option("--cutoff", svm_cutoff_flag);

    struct {
        std::string input, output, report, index;
        bool keep_first = false;
    } dedup_args;
    auto* dedup_cmd = app.add_subcommand("dedup", "shingle-based deduplication");
    dedup_cmd->add_option("--input", dedup_args.input)->required();
    dedup_cmd->add_option("--output", dedup_args.output)->required();
    dedup_cmd->add_option("--report", dedup_args.report, "per-document duplication report");
    dedup_cmd->add_option("--index", dedup_args.index, "write the binary shingle index");
    auto* dedup_kf_opt = dedup_cmd->add_flag("--keep-first", dedup_args.keep_first,
                                             "keep the first copy of duplicates");
    std::uint64_t dedup_n_flag = 0;
    double dedup_thr_flag = 0.0;
    auto* dedup_n_opt = dedup_cmd->add_option("--n", dedup_n_flag, "shingle length in tokens");
    auto* dedup_thr_opt =
        dedup_cmd->add_option("--threshold", dedup_thr_flag, "removal threshold (inclusive)");

    struct {
        std::string input, output, merges;
    } vocab_train;
    auto* vocab_train_cmd = app.add_subcommand("vocab-train", "train a subword vocabulary");
    vocab_train_cmd->add_option("--input", vocab_train.input)->required();
    vocab_train_cmd->add_option("--output", vocab_train.output, "vocab file, one piece per line")
        ->required();
    vocab_train_cmd->add_option("--merges", vocab_train.merges, "merge table file");
    std::uint64_t vocab_size_flag = 0;
    std::string casing_flag;
    auto* vocab_size_opt = vocab_train_cmd->add_option("--size", vocab_size_flag);
    auto* vt_casing_opt =
        vocab_train_cmd->add_option("--casing", casing_flag)->check(CLI::IsMember({"cased", "uncased"}));

    struct {
        std::string input, vocab, output;
    } encode;
    auto* encode_cmd = app.add_subcommand("encode", "wordpiece-encode documents by sentence");
    encode_cmd->add_option("--input", encode.input)->required();
    encode_cmd->add_option("--vocab", encode.vocab)->required();
    encode_cmd->add_option("--output", encode.output)->required();
    auto* enc_casing_opt =
        encode_cmd->add_option("--casing", casing_flag)->check(CLI::IsMember({"cased", "uncased"}));

    struct {
        std::string input, vocab;
    } coverage;
    auto* coverage_cmd = app.add_subcommand("coverage", "pieces and UNK per basic token");
    coverage_cmd->add_option("--input", coverage.input)->required();
    coverage_cmd->add_option("--vocab", coverage.vocab)->required();
    auto* cov_casing_opt =
        coverage_cmd->add_option("--casing", casing_flag)->check(CLI::IsMember({"cased", "uncased"}));

    struct {
        std::string input, vocab, output;
        bool stats = false;
    } pregen_args;
    auto* pregen_cmd = app.add_subcommand("pregen", "generate masked-LM / NSP examples");
    pregen_cmd->add_option("--input", pregen_args.input, "encoded documents")->required();
    pregen_cmd->add_option("--vocab", pregen_args.vocab)->required();
    pregen_cmd->add_option("--output", pregen_args.output)->required();
    pregen_cmd->add_flag("--stats", pregen_args.stats, "report per-source example counts");
    std::uint64_t seq_len_flag = 0, max_pred_flag = 0;
    auto* seq_len_opt = pregen_cmd->add_option("--max-seq-len", seq_len_flag);
    auto* max_pred_opt = pregen_cmd->add_option("--max-predictions", max_pred_flag);

    struct {
        std::string input, train, dev, test;
    } split_args;
    auto* split_cmd = app.add_subcommand("split", "balanced chronological split");
    split_cmd->add_option("--input", split_args.input)->required();
    split_cmd->add_option("--train", split_args.train)->required();
    split_cmd->add_option("--dev", split_args.dev)->required();
    split_cmd->add_option("--test", split_args.test)->required();
    std::uint64_t tr_flag = 0, dv_flag = 0, ts_flag = 0;
    std::string classes_flag;
    auto* tr_opt = split_cmd->add_option("--train-per-class", tr_flag);
    auto* dv_opt = split_cmd->add_option("--dev-per-class", dv_flag);
    auto* ts_opt = split_cmd->add_option("--test-per-class", ts_flag);
    auto* classes_opt = split_cmd->add_option("--classes", classes_flag, "comma-separated labels");

    struct {
        std::string task, gold, pred;
        bool conllu = false;
    } eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "tagging / NER / parsing metrics");
    eval_cmd->add_option("--task", eval_args.task)
        ->required()
        ->check(CLI::IsMember({"upos", "ner", "las"}));
    eval_cmd->add_option("--gold", eval_args.gold)->required();
    eval_cmd->add_option("--pred", eval_args.pred)->required();
    eval_cmd->add_flag("--conllu", eval_args.conllu, "read CoNLL-U instead of 2-column files");

    struct {
        std::string input, outdir;
    } all_args;
    auto* all_cmd = app.add_subcommand("all", "run the full pipeline into a directory");
    all_cmd->add_option("--input", all_args.input)->required();
    all_cmd->add_option("--outdir", all_args.outdir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        config::PipelineConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in = open_input(config_path);
            cfg = config::load_config(in);
        }
        if (seed_opt->count() > 0) {
            cfg.seed = seed_flag;
            cfg.gen.seed = seed_flag;
        }
        if (workers_opt->count() > 0) {
            if (workers_flag < 1) throw ConfigError("workers: must be at least 1");
            cfg.workers = workers_flag;
        }
        if (lf_lang_opt->count() > 0) cfg.target_lang = lf_lang;
        if (lf_score_opt->count() > 0) {
            if (lf_min_score < 0.0 || lf_min_score > 1.0)
                throw ConfigError("min-score: must be in [0,1]");
            cfg.thresholds.min_lang_score = lf_min_score;
        }
        if (svm_lambda_opt->count() > 0) {
            if (svm_lambda_flag <= 0) throw ConfigError("lambda: must be positive");
            cfg.svm_lambda = svm_lambda_flag;
        }
        if (svm_epochs_opt->count() > 0) cfg.svm_epochs = svm_epochs_flag;
        if (svm_cutoff_opt->count() > 0) cfg.svm_cutoff = svm_cutoff_flag;
        if (dedup_n_opt->count() > 0) {
            if (dedup_n_flag < 1) throw ConfigError("n: must be at least 1");
            cfg.dedup_n = dedup_n_flag;
        }
        if (dedup_thr_opt->count() > 0) {
            if (dedup_thr_flag < 0.0 || dedup_thr_flag > 1.0)
                throw ConfigError("threshold: must be in [0,1]");
            cfg.dedup_threshold = dedup_thr_flag;
        }
        if (dedup_kf_opt->count() > 0) cfg.dedup_keep_first = dedup_args.keep_first;
        if (vocab_size_opt->count() > 0) cfg.vocab_size = vocab_size_flag;
        if (vt_casing_opt->count() > 0 || enc_casing_opt->count() > 0 ||
            cov_casing_opt->count() > 0)
            cfg.casing =
                casing_flag == "uncased" ? vocab::CasingMode::uncased : vocab::CasingMode::cased;
        if (seq_len_opt->count() > 0) {
            cfg.gen.max_seq_len = seq_len_flag;
            if (max_pred_opt->count() == 0)
                cfg.gen.max_predictions = seq_len_flag == 512 ? 77 : 20;
        }
        if (max_pred_opt->count() > 0) cfg.gen.max_predictions = max_pred_flag;
        if (seq_len_opt->count() > 0 || max_pred_opt->count() > 0) cfg.gen.validate();
        if (tr_opt->count() > 0) cfg.split.train_per_class = tr_flag;
        if (dv_opt->count() > 0) cfg.split.dev_per_class = dv_flag;
        if (ts_opt->count() > 0) cfg.split.test_per_class = ts_flag;
        if (classes_opt->count() > 0) cfg.split.classes = config::detail::split_commas(classes_flag);

        json report;
        if (stats_cmd->parsed()) {
            report = run_stats(stats.input, stats.human, json_out, std::cout);
            if (json_out) std::cout << report.dump() << '\n';
            return 0;
        } else if (clean_cmd->parsed()) {
            report = run_clean(cfg, clean.input, clean.output);
        } else if (lang_train_cmd->parsed()) {
            report = run_lang_train(lang_train.samples, lang_train.output);
        } else if (langfilter_cmd->parsed()) {
            report = run_langfilter(cfg, langfilter.input, langfilter.output, langfilter.profiles);
        } else if (svm_train_cmd->parsed()) {
            report = run_svm_train(cfg, svm_train.positive, svm_train.negative, svm_train.output);
        } else if (svmfilter_cmd->parsed()) {
            report = run_svmfilter(cfg, svmfilter.input, svmfilter.output, svmfilter.model);
        } else if (dedup_cmd->parsed()) {
            report = run_dedup(cfg, dedup_args.input, dedup_args.output, dedup_args.report,
                               dedup_args.index);
        } else if (vocab_train_cmd->parsed()) {
            report = run_vocab_train(cfg, vocab_train.input, vocab_train.output,
                                     vocab_train.merges);
        } else if (encode_cmd->parsed()) {
            report = run_encode(cfg, encode.input, encode.vocab, encode.output);
        } else if (coverage_cmd->parsed()) {
            report = run_coverage(cfg, coverage.input, coverage.vocab);
        } else if (pregen_cmd->parsed()) {
            report = run_pregen(cfg, pregen_args.input, pregen_args.vocab, pregen_args.output,
                                pregen_args.stats);
        } else if (split_cmd->parsed()) {
            report = run_split(cfg, split_args.input, split_args.train, split_args.dev,
                               split_args.test);
        } else if (eval_cmd->parsed()) {
            report = run_eval(eval_args.task, eval_args.gold, eval_args.pred, eval_args.conllu);
        } else if (all_cmd->parsed()) {
            fs::create_directories(all_args.outdir);
            auto in_dir = [&](const char* name) { return all_args.outdir + "/" + name; };
            json stages = json::array();
            std::string current = all_args.input;

            stages.push_back(run_clean(cfg, current, in_dir("clean.jsonl")));
            current = in_dir("clean.jsonl");
            if (!cfg.profiles_path.empty()) {
                stages.push_back(
                    run_langfilter(cfg, current, in_dir("langfilter.jsonl"), cfg.profiles_path));
                current = in_dir("langfilter.jsonl");
            }
            if (!cfg.svm_model_path.empty()) {
                stages.push_back(
                    run_svmfilter(cfg, current, in_dir("svmfilter.jsonl"), cfg.svm_model_path));
                current = in_dir("svmfilter.jsonl");
            }
            stages.push_back(run_dedup(cfg, current, in_dir("dedup.jsonl"),
                                       in_dir("dedup_report.jsonl"), in_dir("shingles.idx")));
            current = in_dir("dedup.jsonl");
            stages.push_back(
                run_vocab_train(cfg, current, in_dir("vocab.txt"), in_dir("merges.txt")));
            stages.push_back(
                run_encode(cfg, current, in_dir("vocab.txt"), in_dir("encoded.jsonl")));
            stages.push_back(run_pregen(cfg, in_dir("encoded.jsonl"), in_dir("vocab.txt"),
                                        in_dir("examples.jsonl"), true));
            report["stage"] = "all";
            report["stages"] = stages;
        }
        print_report(report, json_out, std::cout);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
