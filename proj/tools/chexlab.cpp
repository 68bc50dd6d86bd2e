// chexlab — command-line front end for the report labeling pipeline.
// One verb per pipeline stage; every run that writes an output appends a
// record to <run-dir>/run_manifest.jsonl with config snapshot and file
// digests. Flag precedence: command line > --config file > defaults.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chexlab/chat_client.hpp"
#include "chexlab/corpus.hpp"
#include "chexlab/digest.hpp"
#include "chexlab/error.hpp"
#include "chexlab/labeler.hpp"
#include "chexlab/lexicon.hpp"
#include "chexlab/manifest.hpp"
#include "chexlab/mapper.hpp"
#include "chexlab/metrics.hpp"
#include "chexlab/model.hpp"
#include "chexlab/prompt.hpp"
#include "chexlab/synthetic.hpp"
#include "chexlab/taxonomy.hpp"
#include "chexlab/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace chexlab;

namespace {

// ---------------------------------------------------------------------------
// config file handling

const std::map<std::string, std::set<std::string>> kConfigSchema = {
    {"", {"reports", "corpus", "lexicon", "template", "cache_dir", "model", "labels", "pred",
          "gold", "out", "run_dir", "sizes", "train", "client", "eval"}},
    {"train", {"steps", "learning_rate", "batch_size", "lr_halving_interval", "max_tokens",
               "seed", "warm_start", "threshold", "feature_bits", "log_every"}},
    {"client", {"endpoint", "model_id", "provider", "concurrency", "max_output_tokens",
                "temperature", "mode", "stub_fail_attempts", "stub_poison"}},
    {"eval", {"subset", "policy", "section", "pred_format"}},
};

class ConfigDoc {
public:
    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) raise(ErrorKind::Config, "cannot open config file " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
            doc_ = json::parse(buf.str());
        } catch (const json::parse_error& e) {
            raise(ErrorKind::Config, std::string("invalid config JSON: ") + e.what());
        }
        if (!doc_.is_object()) raise(ErrorKind::Config, "config must be a JSON object");
        validate(doc_, "");
    }

    // CLI flag wins; otherwise the config file value; otherwise the bound
    // default stays.
    template <class T>
    void fill(const CLI::App* cmd, const std::string& flag, const char* group, const char* key,
              T& value) const {
        if (cmd->count(flag) > 0 || doc_.is_null()) return;
        const json* section = &doc_;
        if (group[0] != '\0') {
            auto it = doc_.find(group);
            if (it == doc_.end()) return;
            section = &*it;
        }
        auto it = section->find(key);
        if (it == section->end()) return;
        try {
            value = it->get<T>();
        } catch (const json::exception&) {
            raise(ErrorKind::Config, std::string("config key '") + key + "' has the wrong type");
        }
    }

    json snapshot() const { return doc_.is_null() ? json::object() : doc_; }

private:
    void validate(const json& obj, const std::string& group) const {
        auto schema = kConfigSchema.find(group);
        for (const auto& [key, value] : obj.items()) {
            if (schema == kConfigSchema.end() || !schema->second.count(key))
                raise(ErrorKind::Config, "unknown config key '" +
                                             (group.empty() ? key : group + "." + key) + "'");
            if (kConfigSchema.count(key) && value.is_object()) validate(value, key);
        }
    }

    json doc_;
};

// ---------------------------------------------------------------------------
// small shared helpers

std::vector<CorpusRecord> read_corpus_file(const std::string& path, CorpusReadStats* stats = nullptr) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open corpus file " + path);
    return read_corpus_jsonl(in, stats);
}

LabelTable read_labels_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open label file " + path);
    return read_label_csv(in);
}

void write_labels_file(const std::string& path, const LabelTable& table) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::Io, "cannot write label file " + path);
    write_label_csv(out, table);
}

MappingLexicon lexicon_from(const std::string& path) {
    return path.empty() ? default_lexicon() : load_lexicon(path);
}

SectionChoice parse_section_flag(const std::string& s) {
    auto section = section_from_key(s);
    if (!section) raise(ErrorKind::Config, "bad section '" + s + "'");
    return *section;
}

UncertainPolicy parse_policy_flag(const std::string& s) {
    if (s == "merge") return UncertainPolicy::MergeUncertainAsPositive;
    if (s == "positive-only" || s == "positive_only") return UncertainPolicy::PositiveOnly;
    raise(ErrorKind::Config, "bad policy '" + s + "' (merge | positive-only)");
}

std::span<const Category> subset_for(int n) {
    if (n == 13) return all_categories();
    if (n == 10) return comparison_subset_10();
    raise(ErrorKind::Config, "subset must be 10 or 13");
}

fs::path run_dir_for(const std::string& run_dir, const std::string& out) {
    if (!run_dir.empty()) return run_dir;
    if (!out.empty() && fs::path(out).has_parent_path()) return fs::path(out).parent_path();
    return ".";
}

struct ManifestBuilder {
    RunManifest m;
    explicit ManifestBuilder(std::string subcommand) {
        m.subcommand = std::move(subcommand);
        m.started_at = now_iso8601_utc();
    }
    void input(const std::string& name, const std::string& path) {
        if (!path.empty()) m.inputs.push_back(digest_of(name, path));
    }
    void output(const std::string& name, const std::string& path) {
        if (!path.empty() && fs::exists(path)) m.outputs.push_back(digest_of(name, path));
    }
    void commit(const fs::path& dir) {
        m.finished_at = now_iso8601_utc();
        append_run_manifest(dir, m);
    }
};

json config_snapshot(std::initializer_list<std::pair<const char*, json>> entries) {
    json j = json::object();
    for (const auto& [k, v] : entries) j[k] = v;
    return j;
}

// Rows for the requested section(s): each report contributes its selected
// section, one named section, or both existing sections.
std::vector<std::pair<SectionChoice, const CorpusRecord*>> rows_for_sections(
    const std::vector<CorpusRecord>& corpus, const std::string& section_flag) {
    std::vector<std::pair<SectionChoice, const CorpusRecord*>> rows;
    for (const CorpusRecord& r : corpus) {
        if (section_flag == "selected") {
            rows.emplace_back(r.selected_section, &r);
        } else if (section_flag == "both") {
            if (r.report.findings && !r.report.findings->empty())
                rows.emplace_back(SectionChoice::Findings, &r);
            if (r.report.impression && !r.report.impression->empty())
                rows.emplace_back(SectionChoice::Impression, &r);
        } else {
            SectionChoice s = parse_section_flag(section_flag);
            const auto& text = s == SectionChoice::Findings ? r.report.findings : r.report.impression;
            if (text && !text->empty()) rows.emplace_back(s, &r);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// subcommands

struct IngestArgs {
    std::string config, reports, out, run_dir;
    std::vector<std::string> keywords;
    std::size_t take = 0;
};

void cmd_ingest(const IngestArgs& a) {
    std::ifstream in(a.reports);
    if (!in) raise(ErrorKind::Io, "cannot open reports file " + a.reports);
    CorpusReadStats stats;
    std::vector<CorpusRecord> records = read_reports_jsonl(in, &stats);

    if (!a.keywords.empty() || a.take > 0) {
        std::vector<RadiologyReport> reports;
        reports.reserve(records.size());
        for (CorpusRecord& r : records) reports.push_back(std::move(r.report));
        std::size_t count = a.take > 0 ? a.take : reports.size();
        std::vector<RadiologyReport> subset = keyword_subset(reports, a.keywords, count);
        records.clear();
        for (RadiologyReport& r : subset) records.push_back(make_corpus_record(std::move(r)));
    }

    {
        std::ofstream out(a.out);
        if (!out) raise(ErrorKind::Io, "cannot write corpus file " + a.out);
        write_corpus_jsonl(out, records);
    }

    ManifestBuilder mb("ingest");
    mb.m.config = config_snapshot({{"reports", a.reports},
                                   {"out", a.out},
                                   {"keywords", a.keywords},
                                   {"take", a.take}});
    mb.m.warning_count = stats.skipped;
    mb.m.details["rows"] = records.size();
    mb.m.details["skipped"] = stats.skipped;
    mb.input("reports", a.reports);
    mb.output("corpus", a.out);
    mb.commit(run_dir_for(a.run_dir, a.out));

    std::cout << "ingested " << records.size() << " reports";
    if (stats.skipped > 0) std::cout << " (" << stats.skipped << " malformed lines skipped)";
    std::cout << "\n";
}

struct GptLabelArgs {
    std::string config, corpus, template_path, lexicon, endpoint, model_id = "gpt-4";
    std::string cache_dir, out, run_dir, provider = "http", mode;
    int concurrency = 4;
    int max_output_tokens = 1024;
    double temperature = 0.0;
    int stub_fail_attempts = 0;
    std::string stub_poison;
    int retry_base_ms = 1000;
};

void cmd_gpt_label(const GptLabelArgs& a) {
    std::vector<CorpusRecord> corpus = read_corpus_file(a.corpus);
    MappingLexicon lexicon = lexicon_from(a.lexicon);
    PromptTemplate prompt_template = load_template(a.template_path);
    if (!a.mode.empty()) {
        auto mode = prompt_mode_from_key(a.mode);
        if (!mode) raise(ErrorKind::Config, "bad mode '" + a.mode + "'");
        prompt_template.mode = *mode;
    }

    std::unique_ptr<ChatClient> client;
    if (a.provider == "stub") {
        StubChatClient::Options opts;
        opts.mode = prompt_template.mode;
        opts.fail_attempts_per_report = a.stub_fail_attempts;
        opts.poison_token = a.stub_poison;
        client = std::make_unique<StubChatClient>(lexicon, opts);
    } else if (a.provider == "http") {
        std::string key = api_key_from_env();
        if (key.empty())
            raise(ErrorKind::Config, "CHEX_API_KEY is not set (use --provider stub for offline runs)");
        HttpChatClient::Options opts;
        opts.base_url = a.endpoint;
        opts.api_key = key;
        client = std::make_unique<HttpChatClient>(opts);
    } else {
        raise(ErrorKind::Config, "bad provider '" + a.provider + "' (http | stub)");
    }

    ChatRequest base;
    base.model_id = a.model_id;
    base.temperature = a.temperature;
    base.max_tokens = a.max_output_tokens;

    BatchOptions options;
    options.concurrency = a.concurrency;
    if (!a.cache_dir.empty()) options.cache_dir = a.cache_dir;
    options.retry.base_delay_ms = a.retry_base_ms;

    BatchResult result = batch_label(corpus, prompt_template, lexicon, *client, base, options);

    write_labels_file(a.out, result.labels);
    std::string quarantine_path = a.out + ".quarantine.jsonl";
    {
        std::ofstream q(quarantine_path);
        write_quarantine_jsonl(q, result.quarantined);
    }

    ManifestBuilder mb("gpt-label");
    mb.m.config = config_snapshot({{"corpus", a.corpus},
                                   {"template", a.template_path},
                                   {"lexicon", a.lexicon},
                                   {"provider", a.provider},
                                   {"endpoint", a.endpoint},
                                   {"model_id", a.model_id},
                                   {"mode", std::string(prompt_mode_key(prompt_template.mode))},
                                   {"concurrency", a.concurrency},
                                   {"cache_dir", a.cache_dir},
                                   {"temperature", a.temperature},
                                   {"max_output_tokens", a.max_output_tokens}});
    mb.m.warning_count = result.quarantined.size();
    mb.m.details["model_id"] = a.model_id;
    mb.m.details["template_hash"] = template_hash(prompt_template);
    mb.m.details["labeled"] = result.labels.rows.size();
    mb.m.details["quarantined"] = result.quarantined.size();
    mb.m.details["network_calls"] = result.network_calls;
    mb.m.details["cache_hits"] = result.cache_hits;
    mb.m.details["retries"] = result.retries;
    json failures = json::array();
    for (const QuarantineRecord& q : result.quarantined) failures.push_back(q.study_id);
    mb.m.details["failure_ids"] = failures;
    mb.input("corpus", a.corpus);
    mb.input("template", a.template_path);
    if (!a.lexicon.empty()) mb.input("lexicon", a.lexicon);
    mb.output("labels", a.out);
    mb.output("quarantine", quarantine_path);

    bool total_failure = !corpus.empty() && result.labels.rows.empty();
    if (total_failure) mb.m.error_count = 1;
    mb.commit(run_dir_for(a.run_dir, a.out));

    std::cout << "labeled " << result.labels.rows.size() << "/" << corpus.size() << " reports ("
              << result.quarantined.size() << " quarantined, " << result.network_calls
              << " network calls, " << result.cache_hits << " cache hits, " << result.retries
              << " retries)\n";
    if (total_failure) raise(ErrorKind::Http, "no report could be labeled");
}

struct RuleLabelArgs {
    std::string config, corpus, lexicon, out, run_dir, section = "selected";
    bool four_status = false;
};

void cmd_rule_label(const RuleLabelArgs& a) {
    std::vector<CorpusRecord> corpus = read_corpus_file(a.corpus);
    MappingLexicon lexicon = lexicon_from(a.lexicon);

    LabelTable table;
    table.scheme = a.four_status ? LabelScheme::FourStatus : LabelScheme::Binary;
    for (auto [section, record] : rows_for_sections(corpus, a.section)) {
        const std::string& text = section_text(*record, section);
        table.rows.push_back(a.four_status
                                 ? rule_label_four_status(text, lexicon, record->report.study_id, section)
                                 : rule_label(text, lexicon, record->report.study_id, section));
    }
    write_labels_file(a.out, table);

    ManifestBuilder mb("rule-label");
    mb.m.config = config_snapshot({{"corpus", a.corpus},
                                   {"lexicon", a.lexicon},
                                   {"section", a.section},
                                   {"four_status", a.four_status}});
    mb.m.details["rows"] = table.rows.size();
    mb.input("corpus", a.corpus);
    if (!a.lexicon.empty()) mb.input("lexicon", a.lexicon);
    mb.output("labels", a.out);
    mb.commit(run_dir_for(a.run_dir, a.out));
    std::cout << "rule-labeled " << table.rows.size() << " rows\n";
}

struct TrainArgs {
    std::string config, corpus, labels, out, run_dir, warm_start, log_path;
    TrainConfig train;
    int feature_bits = 18;
};

void cmd_train(const TrainArgs& a) {
    std::vector<CorpusRecord> corpus = read_corpus_file(a.corpus);
    LabelTable labels = read_labels_file(a.labels);

    TrainConfig config = a.train;
    config.encoder.feature_bits = a.feature_bits;
    if (!a.warm_start.empty()) config.warm_start = a.warm_start;

    TrainResult result = train(corpus, labels, config);
    save_model(fs::path(a.out), result.model);
    std::string log_path = a.log_path.empty() ? a.out + ".log.jsonl" : a.log_path;
    {
        std::ofstream log(log_path);
        if (!log) raise(ErrorKind::Io, "cannot write training log " + log_path);
        write_train_log_jsonl(log, result.log);
    }

    ManifestBuilder mb("train");
    mb.m.seed = config.seed;
    mb.m.config = config_snapshot({{"corpus", a.corpus},
                                   {"labels", a.labels},
                                   {"steps", config.steps},
                                   {"learning_rate", config.learning_rate},
                                   {"batch_size", config.batch_size},
                                   {"lr_halving_interval", config.lr_halving_interval},
                                   {"max_tokens", config.max_tokens},
                                   {"seed", config.seed},
                                   {"threshold", config.threshold},
                                   {"feature_bits", a.feature_bits},
                                   {"warm_start", a.warm_start}});
    mb.m.details["examples"] = labels.rows.size();
    mb.m.details["final_loss"] = result.log.empty() ? 0.0 : result.log.back().loss;
    mb.input("corpus", a.corpus);
    mb.input("labels", a.labels);
    if (!a.warm_start.empty()) mb.input("warm_start", a.warm_start);
    mb.output("model", a.out);
    mb.output("log", log_path);
    mb.commit(run_dir_for(a.run_dir, a.out));
    std::cout << "trained " << config.steps << " steps on " << labels.rows.size()
              << " examples; final batch loss "
              << (result.log.empty() ? 0.0 : result.log.back().loss) << "\n";
}

struct InferArgs {
    std::string config, corpus, model, out, run_dir, section = "selected", probs;
    double threshold = 0.5;
};

void cmd_infer(const InferArgs& a) {
    std::vector<CorpusRecord> corpus = read_corpus_file(a.corpus);
    TrainedModel model = load_model(fs::path(a.model));

    LabelTable table;
    table.scheme = LabelScheme::Binary;
    std::ofstream probs;
    if (!a.probs.empty()) {
        probs.open(a.probs);
        if (!probs) raise(ErrorKind::Io, "cannot write probabilities file " + a.probs);
    }
    for (auto [section, record] : rows_for_sections(corpus, a.section)) {
        Prediction p = predict(model, section_text(*record, section), a.threshold,
                               record->report.study_id, section);
        if (probs.is_open()) {
            json j;
            j["study_id"] = record->report.study_id;
            j["section"] = std::string(section_key(section));
            json probabilities = json::object();
            for (Category c : all_categories())
                probabilities[std::string(category_key(c))] =
                    p.probabilities[static_cast<std::size_t>(c)];
            j["probabilities"] = probabilities;
            probs << j.dump() << '\n';
        }
        table.rows.push_back(std::move(p.label));
    }
    write_labels_file(a.out, table);

    ManifestBuilder mb("infer");
    mb.m.config = config_snapshot({{"corpus", a.corpus},
                                   {"model", a.model},
                                   {"section", a.section},
                                   {"threshold", a.threshold}});
    mb.m.details["rows"] = table.rows.size();
    mb.input("corpus", a.corpus);
    mb.input("model", a.model);
    mb.output("labels", a.out);
    if (!a.probs.empty()) mb.output("probabilities", a.probs);
    mb.commit(run_dir_for(a.run_dir, a.out));
    std::cout << "inferred " << table.rows.size() << " rows\n";
}

struct EvalArgs {
    std::string config, pred, gold, out, run_dir, section = "findings";
    std::string policy = "merge", pred_format = "chexlab";
    int subset = 13;
};

void cmd_eval(const EvalArgs& a) {
    SectionChoice section = parse_section_flag(a.section);
    LabelTable pred;
    if (a.pred_format == "chexpert") {
        std::ifstream in(a.pred);
        if (!in) raise(ErrorKind::Io, "cannot open prediction file " + a.pred);
        pred = read_chexpert_csv(in, section);
    } else if (a.pred_format == "chexlab") {
        pred = read_labels_file(a.pred);
    } else {
        raise(ErrorKind::Config, "bad pred format '" + a.pred_format + "' (chexlab | chexpert)");
    }
    LabelTable gold = read_labels_file(a.gold);

    MetricsReport report =
        evaluate(pred, gold, section, subset_for(a.subset), parse_policy_flag(a.policy));
    std::cout << render_metrics_report(report);
    if (!a.out.empty()) {
        std::ofstream out(a.out);
        if (!out) raise(ErrorKind::Io, "cannot write report file " + a.out);
        write_metrics_jsonl(out, report);
    }

    ManifestBuilder mb("eval");
    mb.m.config = config_snapshot({{"pred", a.pred},
                                   {"gold", a.gold},
                                   {"section", a.section},
                                   {"subset", a.subset},
                                   {"policy", a.policy},
                                   {"pred_format", a.pred_format}});
    mb.m.details["n_studies"] = report.n_studies;
    mb.m.details["micro_f1"] = report.micro.f1;
    mb.m.details["macro_f1"] = report.macro.f1;
    mb.input("pred", a.pred);
    mb.input("gold", a.gold);
    mb.output("report", a.out);
    mb.commit(run_dir_for(a.run_dir, a.out));
}

struct DistribArgs {
    std::string config, labels, out, run_dir, section = "both";
};

void cmd_distrib(const DistribArgs& a) {
    LabelTable table = read_labels_file(a.labels);
    std::ofstream out;
    if (!a.out.empty()) {
        out.open(a.out);
        if (!out) raise(ErrorKind::Io, "cannot write distribution file " + a.out);
    }
    json details = json::object();
    for (SectionChoice section : {SectionChoice::Findings, SectionChoice::Impression}) {
        if (a.section != "both" && parse_section_flag(a.section) != section) continue;
        Distribution dist = distribution(table, section);
        if (a.section == "both" && dist.n_studies == 0) continue;
        std::cout << render_distribution(dist);
        if (out.is_open()) write_distribution_jsonl(out, dist);
        details[std::string(section_key(section))] = dist.n_studies;
    }

    ManifestBuilder mb("distrib");
    mb.m.config = config_snapshot({{"labels", a.labels}, {"section", a.section}});
    mb.m.details = details;
    mb.input("labels", a.labels);
    mb.output("report", a.out);
    mb.commit(run_dir_for(a.run_dir, a.out));
}

struct CrosstabArgs {
    std::string config, a_path, b_path, out, run_dir;
};

void cmd_crosstab(const CrosstabArgs& a) {
    LabelTable ta = read_labels_file(a.a_path);
    LabelTable tb = read_labels_file(a.b_path);
    auto tabs = cross_tab(ta, tb);
    std::ofstream out;
    if (!a.out.empty()) {
        out.open(a.out);
        if (!out) raise(ErrorKind::Io, "cannot write crosstab file " + a.out);
    }
    for (const auto& [section, tab] : tabs) {
        std::cout << render_cross_tab(tab, section);
        if (out.is_open()) write_cross_tab_jsonl(out, tab, section);
    }

    ManifestBuilder mb("crosstab");
    mb.m.config = config_snapshot({{"a", a.a_path}, {"b", a.b_path}});
    mb.m.details["sections"] = tabs.size();
    mb.input("a", a.a_path);
    mb.input("b", a.b_path);
    mb.output("report", a.out);
    mb.commit(run_dir_for(a.run_dir, a.out));
}

struct CurveArgs {
    std::string config, corpus, labels, gold, out, run_dir, sizes = "500,1500,5000";
    TrainConfig train;
    int feature_bits = 18;
};

void cmd_curve(const CurveArgs& a) {
    std::vector<CorpusRecord> corpus = read_corpus_file(a.corpus);
    LabelTable labels = read_labels_file(a.labels);
    LabelTable gold = read_labels_file(a.gold);

    std::vector<std::size_t> sizes;
    std::stringstream ss(a.sizes);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) sizes.push_back(static_cast<std::size_t>(std::stoull(item)));
    }
    if (sizes.empty()) raise(ErrorKind::Config, "--sizes must name at least one size");

    TrainConfig config = a.train;
    config.encoder.feature_bits = a.feature_bits;
    auto curves = learning_curve(corpus, labels, sizes, gold, config);

    std::ofstream out;
    if (!a.out.empty()) {
        out.open(a.out);
        if (!out) raise(ErrorKind::Io, "cannot write curve file " + a.out);
    }
    for (const auto& [section, points] : curves) {
        std::cout << "section: " << section_key(section) << "\n";
        std::cout << "train_size  macro_f1\n";
        for (const CurvePoint& p : points) {
            std::cout << p.train_size << "  " << p.macro_f1 << "\n";
            if (out.is_open()) {
                json j;
                j["section"] = std::string(section_key(section));
                j["train_size"] = p.train_size;
                j["macro_f1"] = p.macro_f1;
                out << j.dump() << '\n';
            }
        }
    }

    ManifestBuilder mb("curve");
    mb.m.seed = config.seed;
    mb.m.config = config_snapshot({{"corpus", a.corpus},
                                   {"labels", a.labels},
                                   {"gold", a.gold},
                                   {"sizes", a.sizes},
                                   {"steps", config.steps},
                                   {"seed", config.seed}});
    mb.input("corpus", a.corpus);
    mb.input("labels", a.labels);
    mb.input("gold", a.gold);
    mb.output("curve", a.out);
    mb.commit(run_dir_for(a.run_dir, a.out));
}

void add_train_flags(CLI::App* cmd, TrainConfig& config, int& feature_bits) {
    cmd->add_option("--steps", config.steps, "Optimizer steps");
    cmd->add_option("--lr", config.learning_rate, "Initial learning rate");
    cmd->add_option("--batch-size", config.batch_size, "Mini-batch size");
    cmd->add_option("--lr-halving-interval", config.lr_halving_interval,
                    "Halve the learning rate every N steps");
    cmd->add_option("--max-tokens", config.max_tokens, "Input truncation length in tokens");
    cmd->add_option("--seed", config.seed, "RNG seed");
    cmd->add_option("--threshold", config.threshold, "Positive decision threshold");
    cmd->add_option("--feature-bits", feature_bits, "log2 of the hashed feature space");
    cmd->add_option("--log-every", config.log_every, "Log the loss every N steps");
}

void fill_train_config(const ConfigDoc& cfg, const CLI::App* cmd, TrainConfig& config,
                       int& feature_bits, std::string& warm_start) {
    cfg.fill(cmd, "--steps", "train", "steps", config.steps);
    cfg.fill(cmd, "--lr", "train", "learning_rate", config.learning_rate);
    cfg.fill(cmd, "--batch-size", "train", "batch_size", config.batch_size);
    cfg.fill(cmd, "--lr-halving-interval", "train", "lr_halving_interval",
             config.lr_halving_interval);
    cfg.fill(cmd, "--max-tokens", "train", "max_tokens", config.max_tokens);
    cfg.fill(cmd, "--seed", "train", "seed", config.seed);
    cfg.fill(cmd, "--threshold", "train", "threshold", config.threshold);
    cfg.fill(cmd, "--feature-bits", "train", "feature_bits", feature_bits);
    cfg.fill(cmd, "--log-every", "train", "log_every", config.log_every);
    if (cmd->get_option_no_throw("--warm-start") != nullptr)
        cfg.fill(cmd, "--warm-start", "train", "warm_start", warm_start);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chexlab: label chest X-ray reports, distill a fast classifier, evaluate"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd = app.add_subcommand("ingest", "Normalize and section-split raw reports");
    ingest_cmd->add_option("--config", ingest.config, "JSON config file");
    ingest_cmd->add_option("--reports", ingest.reports, "Input reports (JSON lines)");
    ingest_cmd->add_option("--out", ingest.out, "Output corpus file");
    ingest_cmd->add_option("--keyword", ingest.keywords,
                           "Boost keyword; matching reports are kept first (repeatable)");
    ingest_cmd->add_option("--take", ingest.take, "Total reports to keep (0 = all)");
    ingest_cmd->add_option("--run-dir", ingest.run_dir, "Manifest directory");

    GptLabelArgs gpt;
    auto* gpt_cmd = app.add_subcommand("gpt-label", "Pseudo-label a corpus via a chat-completion model");
    gpt_cmd->add_option("--config", gpt.config, "JSON config file");
    gpt_cmd->add_option("--corpus", gpt.corpus, "Corpus file from ingest");
    gpt_cmd->add_option("--template", gpt.template_path, "Prompt template file");
    gpt_cmd->add_option("--lexicon", gpt.lexicon, "Lexicon file (default: built-in)");
    gpt_cmd->add_option("--endpoint", gpt.endpoint, "Chat-completion base URL");
    gpt_cmd->add_option("--model", gpt.model_id, "Model id");
    gpt_cmd->add_option("--cache-dir", gpt.cache_dir, "Response cache directory");
    gpt_cmd->add_option("--concurrency", gpt.concurrency, "Max in-flight requests");
    gpt_cmd->add_option("--mode", gpt.mode, "extract | direct | four-status (overrides template)");
    gpt_cmd->add_option("--provider", gpt.provider, "http | stub");
    gpt_cmd->add_option("--out", gpt.out, "Output label file");
    gpt_cmd->add_option("--run-dir", gpt.run_dir, "Manifest directory");
    gpt_cmd->add_option("--temperature", gpt.temperature, "Decoding temperature");
    gpt_cmd->add_option("--max-output-tokens", gpt.max_output_tokens, "Decoding budget");
    gpt_cmd->add_option("--stub-fail-attempts", gpt.stub_fail_attempts,
                        "Stub fault injection: transient failures per report");
    gpt_cmd->add_option("--stub-poison", gpt.stub_poison,
                        "Stub fault injection: reports containing this token always fail");
    gpt_cmd->add_option("--retry-base-ms", gpt.retry_base_ms, "Retry backoff base delay (ms)");

    RuleLabelArgs rule;
    auto* rule_cmd = app.add_subcommand("rule-label", "Label a corpus with the rule lexicon only");
    rule_cmd->add_option("--config", rule.config, "JSON config file");
    rule_cmd->add_option("--corpus", rule.corpus, "Corpus file from ingest");
    rule_cmd->add_option("--lexicon", rule.lexicon, "Lexicon file (default: built-in)");
    rule_cmd->add_option("--section", rule.section, "selected | findings | impression | both");
    rule_cmd->add_flag("--four-status", rule.four_status, "Emit four-status labels");
    rule_cmd->add_option("--out", rule.out, "Output label file");
    rule_cmd->add_option("--run-dir", rule.run_dir, "Manifest directory");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Distill pseudo-labels into a linear classifier");
    train_cmd->add_option("--config", train_args.config, "JSON config file");
    train_cmd->add_option("--corpus", train_args.corpus, "Corpus file from ingest");
    train_cmd->add_option("--labels", train_args.labels, "Pseudo-label file");
    train_cmd->add_option("--out", train_args.out, "Output model file");
    train_cmd->add_option("--warm-start", train_args.warm_start, "Initialize from a saved model");
    train_cmd->add_option("--train-log", train_args.log_path, "Training log path");
    train_cmd->add_option("--run-dir", train_args.run_dir, "Manifest directory");
    add_train_flags(train_cmd, train_args.train, train_args.feature_bits);

    InferArgs infer;
    auto* infer_cmd = app.add_subcommand("infer", "Predict labels with a trained model");
    infer_cmd->add_option("--config", infer.config, "JSON config file");
    infer_cmd->add_option("--corpus", infer.corpus, "Corpus file from ingest");
    infer_cmd->add_option("--model", infer.model, "Model file");
    infer_cmd->add_option("--section", infer.section, "selected | findings | impression | both");
    infer_cmd->add_option("--threshold", infer.threshold, "Positive decision threshold");
    infer_cmd->add_option("--probs", infer.probs, "Also write per-category probabilities (JSON lines)");
    infer_cmd->add_option("--out", infer.out, "Output label file");
    infer_cmd->add_option("--run-dir", infer.run_dir, "Manifest directory");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold labels");
    eval_cmd->add_option("--config", eval_args.config, "JSON config file");
    eval_cmd->add_option("--pred", eval_args.pred, "Prediction label file");
    eval_cmd->add_option("--gold", eval_args.gold, "Gold label file (binary)");
    eval_cmd->add_option("--section", eval_args.section, "findings | impression");
    eval_cmd->add_option("--subset", eval_args.subset, "10 | 13");
    eval_cmd->add_option("--policy", eval_args.policy, "merge | positive-only");
    eval_cmd->add_option("--pred-format", eval_args.pred_format, "chexlab | chexpert");
    eval_cmd->add_option("--out", eval_args.out, "Also write the report as JSON lines");
    eval_cmd->add_option("--run-dir", eval_args.run_dir, "Manifest directory");

    DistribArgs distrib;
    auto* distrib_cmd = app.add_subcommand("distrib", "Per-category label distribution");
    distrib_cmd->add_option("--config", distrib.config, "JSON config file");
    distrib_cmd->add_option("--labels", distrib.labels, "Label file (binary)");
    distrib_cmd->add_option("--section", distrib.section, "findings | impression | both");
    distrib_cmd->add_option("--out", distrib.out, "Also write rows as JSON lines");
    distrib_cmd->add_option("--run-dir", distrib.run_dir, "Manifest directory");

    CrosstabArgs crosstab;
    auto* crosstab_cmd = app.add_subcommand("crosstab", "4x4 status concordance of two labelers");
    crosstab_cmd->add_option("--config", crosstab.config, "JSON config file");
    crosstab_cmd->add_option("--a", crosstab.a_path, "First four-status label file (rows)");
    crosstab_cmd->add_option("--b", crosstab.b_path, "Second four-status label file (columns)");
    crosstab_cmd->add_option("--out", crosstab.out, "Also write cells as JSON lines");
    crosstab_cmd->add_option("--run-dir", crosstab.run_dir, "Manifest directory");

    CurveArgs curve;
    auto* curve_cmd = app.add_subcommand("curve", "Macro-F1 vs training-set size");
    curve_cmd->add_option("--config", curve.config, "JSON config file");
    curve_cmd->add_option("--corpus", curve.corpus, "Corpus file from ingest");
    curve_cmd->add_option("--labels", curve.labels, "Pseudo-label file");
    curve_cmd->add_option("--gold", curve.gold, "Gold label file (binary)");
    curve_cmd->add_option("--sizes", curve.sizes, "Comma-separated training sizes");
    curve_cmd->add_option("--out", curve.out, "Also write points as JSON lines");
    curve_cmd->add_option("--run-dir", curve.run_dir, "Manifest directory");
    add_train_flags(curve_cmd, curve.train, curve.feature_bits);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest_cmd->parsed()) {
            ConfigDoc cfg;
            if (!ingest.config.empty()) cfg.load(ingest.config);
            cfg.fill(ingest_cmd, "--reports", "", "reports", ingest.reports);
            cfg.fill(ingest_cmd, "--out", "", "out", ingest.out);
            cfg.fill(ingest_cmd, "--run-dir", "", "run_dir", ingest.run_dir);
            if (ingest.reports.empty() || ingest.out.empty())
                raise(ErrorKind::Config, "ingest needs --reports and --out");
            cmd_ingest(ingest);
        } else if (gpt_cmd->parsed()) {
            ConfigDoc cfg;
            if (!gpt.config.empty()) cfg.load(gpt.config);
            cfg.fill(gpt_cmd, "--corpus", "", "corpus", gpt.corpus);
            cfg.fill(gpt_cmd, "--template", "", "template", gpt.template_path);
            cfg.fill(gpt_cmd, "--lexicon", "", "lexicon", gpt.lexicon);
            cfg.fill(gpt_cmd, "--cache-dir", "", "cache_dir", gpt.cache_dir);
            cfg.fill(gpt_cmd, "--out", "", "out", gpt.out);
            cfg.fill(gpt_cmd, "--run-dir", "", "run_dir", gpt.run_dir);
            cfg.fill(gpt_cmd, "--endpoint", "client", "endpoint", gpt.endpoint);
            cfg.fill(gpt_cmd, "--model", "client", "model_id", gpt.model_id);
            cfg.fill(gpt_cmd, "--provider", "client", "provider", gpt.provider);
            cfg.fill(gpt_cmd, "--concurrency", "client", "concurrency", gpt.concurrency);
            cfg.fill(gpt_cmd, "--max-output-tokens", "client", "max_output_tokens",
                     gpt.max_output_tokens);
            cfg.fill(gpt_cmd, "--temperature", "client", "temperature", gpt.temperature);
            cfg.fill(gpt_cmd, "--mode", "client", "mode", gpt.mode);
            cfg.fill(gpt_cmd, "--stub-fail-attempts", "client", "stub_fail_attempts",
                     gpt.stub_fail_attempts);
            cfg.fill(gpt_cmd, "--stub-poison", "client", "stub_poison", gpt.stub_poison);
            if (gpt.corpus.empty() || gpt.template_path.empty() || gpt.out.empty())
                raise(ErrorKind::Config, "gpt-label needs --corpus, --template and --out");
            cmd_gpt_label(gpt);
        } else if (rule_cmd->parsed()) {
            ConfigDoc cfg;
            if (!rule.config.empty()) cfg.load(rule.config);
            cfg.fill(rule_cmd, "--corpus", "", "corpus", rule.corpus);
            cfg.fill(rule_cmd, "--lexicon", "", "lexicon", rule.lexicon);
            cfg.fill(rule_cmd, "--out", "", "out", rule.out);
            cfg.fill(rule_cmd, "--run-dir", "", "run_dir", rule.run_dir);
            cfg.fill(rule_cmd, "--section", "eval", "section", rule.section);
            if (rule.corpus.empty() || rule.out.empty())
                raise(ErrorKind::Config, "rule-label needs --corpus and --out");
            cmd_rule_label(rule);
        } else if (train_cmd->parsed()) {
            ConfigDoc cfg;
            if (!train_args.config.empty()) cfg.load(train_args.config);
            cfg.fill(train_cmd, "--corpus", "", "corpus", train_args.corpus);
            cfg.fill(train_cmd, "--labels", "", "labels", train_args.labels);
            cfg.fill(train_cmd, "--out", "", "out", train_args.out);
            cfg.fill(train_cmd, "--run-dir", "", "run_dir", train_args.run_dir);
            fill_train_config(cfg, train_cmd, train_args.train, train_args.feature_bits,
                              train_args.warm_start);
            if (train_args.corpus.empty() || train_args.labels.empty() || train_args.out.empty())
                raise(ErrorKind::Config, "train needs --corpus, --labels and --out");
            cmd_train(train_args);
        } else if (infer_cmd->parsed()) {
            ConfigDoc cfg;
            if (!infer.config.empty()) cfg.load(infer.config);
            cfg.fill(infer_cmd, "--corpus", "", "corpus", infer.corpus);
            cfg.fill(infer_cmd, "--model", "", "model", infer.model);
            cfg.fill(infer_cmd, "--out", "", "out", infer.out);
            cfg.fill(infer_cmd, "--run-dir", "", "run_dir", infer.run_dir);
            cfg.fill(infer_cmd, "--threshold", "train", "threshold", infer.threshold);
            if (infer.corpus.empty() || infer.model.empty() || infer.out.empty())
                raise(ErrorKind::Config, "infer needs --corpus, --model and --out");
            cmd_infer(infer);
        } else if (eval_cmd->parsed()) {
            ConfigDoc cfg;
            if (!eval_args.config.empty()) cfg.load(eval_args.config);
            cfg.fill(eval_cmd, "--pred", "", "pred", eval_args.pred);
            cfg.fill(eval_cmd, "--gold", "", "gold", eval_args.gold);
            cfg.fill(eval_cmd, "--out", "", "out", eval_args.out);
            cfg.fill(eval_cmd, "--run-dir", "", "run_dir", eval_args.run_dir);
            cfg.fill(eval_cmd, "--section", "eval", "section", eval_args.section);
            cfg.fill(eval_cmd, "--subset", "eval", "subset", eval_args.subset);
            cfg.fill(eval_cmd, "--policy", "eval", "policy", eval_args.policy);
            cfg.fill(eval_cmd, "--pred-format", "eval", "pred_format", eval_args.pred_format);
            if (eval_args.pred.empty() || eval_args.gold.empty())
                raise(ErrorKind::Config, "eval needs --pred and --gold");
            cmd_eval(eval_args);
        } else if (distrib_cmd->parsed()) {
            ConfigDoc cfg;
            if (!distrib.config.empty()) cfg.load(distrib.config);
            cfg.fill(distrib_cmd, "--labels", "", "labels", distrib.labels);
            cfg.fill(distrib_cmd, "--out", "", "out", distrib.out);
            cfg.fill(distrib_cmd, "--run-dir", "", "run_dir", distrib.run_dir);
            cfg.fill(distrib_cmd, "--section", "eval", "section", distrib.section);
            if (distrib.labels.empty()) raise(ErrorKind::Config, "distrib needs --labels");
            cmd_distrib(distrib);
        } else if (crosstab_cmd->parsed()) {
            ConfigDoc cfg;
            if (!crosstab.config.empty()) cfg.load(crosstab.config);
            cfg.fill(crosstab_cmd, "--out", "", "out", crosstab.out);
            cfg.fill(crosstab_cmd, "--run-dir", "", "run_dir", crosstab.run_dir);
            if (crosstab.a_path.empty() || crosstab.b_path.empty())
                raise(ErrorKind::Config, "crosstab needs --a and --b");
            cmd_crosstab(crosstab);
        } else if (curve_cmd->parsed()) {
            ConfigDoc cfg;
            if (!curve.config.empty()) cfg.load(curve.config);
            cfg.fill(curve_cmd, "--corpus", "", "corpus", curve.corpus);
            cfg.fill(curve_cmd, "--labels", "", "labels", curve.labels);
            cfg.fill(curve_cmd, "--gold", "", "gold", curve.gold);
            cfg.fill(curve_cmd, "--out", "", "out", curve.out);
            cfg.fill(curve_cmd, "--run-dir", "", "run_dir", curve.run_dir);
            cfg.fill(curve_cmd, "--sizes", "", "sizes", curve.sizes);
            std::string unused_warm;
            fill_train_config(cfg, curve_cmd, curve.train, curve.feature_bits, unused_warm);
            if (curve.corpus.empty() || curve.labels.empty() || curve.gold.empty())
                raise(ErrorKind::Config, "curve needs --corpus, --labels and --gold");
            cmd_curve(curve);
        }
    } catch (const Error& e) {
        std::cerr << "chexlab: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "chexlab: unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
