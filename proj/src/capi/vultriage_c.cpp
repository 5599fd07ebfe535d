#include "vultriage/vultriage.h"

#include "common/error.hpp"
#include "common/text.hpp"
#include "config/config.hpp"
#include "control/control_path.hpp"
#include "eval/dataset.hpp"
#include "eval/metrics.hpp"
#include "eval/report.hpp"
#include "knowledge/corpus.hpp"
#include "knowledge/index.hpp"
#include "pipeline/orchestrator.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

using namespace vultriage;

struct vt_config {
    config::RunConfig cfg;
};

struct vt_session {
    config::RunConfig cfg;
    std::unique_ptr<llm::ChatClient> client;
    std::unique_ptr<knowledge::Encoder> encoder;
    std::optional<knowledge::KnowledgeIndex> index;

    pipeline::TriageResources resources() const
    {
        return {client.get(), index ? &*index : nullptr, index ? encoder.get() : nullptr};
    }
};

namespace {

thread_local std::string g_last_error;

vt_status to_status(ErrorCode c)
{
    switch (c) {
    case ErrorCode::Usage: return VT_ERR_USAGE;
    case ErrorCode::Syntax: return VT_ERR_SYNTAX;
    case ErrorCode::UnsupportedLanguage: return VT_ERR_UNSUPPORTED_LANGUAGE;
    case ErrorCode::MissingPlaceholder: return VT_ERR_MISSING_PLACEHOLDER;
    case ErrorCode::CorpusFormat: return VT_ERR_CORPUS_FORMAT;
    case ErrorCode::IndexFormat: return VT_ERR_INDEX_FORMAT;
    case ErrorCode::EncoderUnavailable: return VT_ERR_ENCODER_UNAVAILABLE;
    case ErrorCode::EmptyCorpus: return VT_ERR_EMPTY_CORPUS;
    case ErrorCode::Llm: return VT_ERR_LLM;
    case ErrorCode::VerdictParse: return VT_ERR_VERDICT_PARSE;
    case ErrorCode::QueryParse: return VT_ERR_QUERY_PARSE;
    case ErrorCode::MissingPrediction: return VT_ERR_MISSING_PREDICTION;
    case ErrorCode::Data: return VT_ERR_DATA;
    case ErrorCode::Io: return VT_ERR_IO;
    case ErrorCode::Internal: return VT_ERR_INTERNAL;
    }
    return VT_ERR_INTERNAL;
}

template <typename Fn>
vt_status guarded(Fn&& fn)
{
    try {
        fn();
        return VT_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return VT_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return VT_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s)
{
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p)
        throw std::bad_alloc();
    std::memcpy(p, s.data(), s.size() + 1);
    return p;
}

void require(const void* p, const char* what)
{
    if (!p)
        throw UsageError(std::string(what) + " must not be NULL");
}

control::StructuralContext context_of(const char* code, const char* language, const char* level)
{
    require(code, "code");
    graphs::SourceFunction fn;
    fn.id = "input";
    fn.code = code;
    if (language)
        fn.language = language;
    return control::generate_structural_context(fn, control::parse_level(level ? level : "C"));
}

std::string header_record(const config::RunConfig& cfg)
{
    nlohmann::ordered_json h = {
        {"type", "header"},
        {"tool", "vultriage"},
        {"version", config::kToolVersion},
        {"config_fingerprint", config::fingerprint(cfg)},
        {"config", nlohmann::ordered_json::parse(config::to_json(cfg))},
    };
    return h.dump();
}

} // namespace

extern "C" {

const char* vt_version(void)
{
    return config::kToolVersion;
}

const char* vt_status_name(vt_status status)
{
    switch (status) {
    case VT_OK: return "ok";
    case VT_ERR_USAGE: return "usage";
    case VT_ERR_SYNTAX: return "syntax";
    case VT_ERR_UNSUPPORTED_LANGUAGE: return "unsupported-language";
    case VT_ERR_MISSING_PLACEHOLDER: return "missing-placeholder";
    case VT_ERR_CORPUS_FORMAT: return "corpus-format";
    case VT_ERR_INDEX_FORMAT: return "index-format";
    case VT_ERR_ENCODER_UNAVAILABLE: return "encoder-unavailable";
    case VT_ERR_EMPTY_CORPUS: return "empty-corpus";
    case VT_ERR_LLM: return "llm";
    case VT_ERR_VERDICT_PARSE: return "verdict-parse";
    case VT_ERR_QUERY_PARSE: return "query-parse";
    case VT_ERR_MISSING_PREDICTION: return "missing-prediction";
    case VT_ERR_DATA: return "data";
    case VT_ERR_IO: return "io";
    case VT_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* vt_last_error(void)
{
    return g_last_error.c_str();
}

void vt_string_free(char* s)
{
    std::free(s);
}

vt_status vt_config_new(vt_config** out)
{
    return guarded([&] {
        require(out, "out");
        *out = new vt_config{};
    });
}

vt_status vt_config_load(const char* path, vt_config** out)
{
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        auto c = std::make_unique<vt_config>();
        c->cfg = config::load_config_file(path);
        *out = c.release();
    });
}

vt_status vt_config_apply_json(vt_config* cfg, const char* json)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(json, "json");
        config::RunConfig next = cfg->cfg;
        config::apply_json(next, json);
        cfg->cfg = std::move(next);
    });
}

vt_status vt_config_to_json(const vt_config* cfg, char** out)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = dup_string(config::to_json(cfg->cfg));
    });
}

vt_status vt_config_fingerprint(const vt_config* cfg, char** out)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        *out = dup_string(config::fingerprint(cfg->cfg));
    });
}

void vt_config_free(vt_config* cfg)
{
    delete cfg;
}

vt_status vt_extract_context(const char* code, const char* language, const char* level, char** out)
{
    return guarded([&] {
        require(out, "out");
        *out = dup_string(context_of(code, language, level).s);
    });
}

vt_status vt_extract_context_json(const char* code, const char* language, const char* level, char** out)
{
    return guarded([&] {
        require(out, "out");
        auto sc = context_of(code, language, level);
        nlohmann::ordered_json j = {{"level", level ? level : "C"},
                                    {"t_ast", sc.t_ast},
                                    {"t_cfg", sc.t_cfg},
                                    {"t_dfg", sc.t_dfg},
                                    {"s", sc.s}};
        *out = dup_string(j.dump());
    });
}

vt_status vt_build_kb(const vt_config* cfg, const char* corpus_path, const char* out_path, size_t* out_entries)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(corpus_path, "corpus_path");
        require(out_path, "out_path");
        auto corpus = knowledge::load_corpus(corpus_path);
        auto encoder = config::make_encoder(cfg->cfg.encoder);
        std::optional<knowledge::KnowledgeIndex> cache;
        if (std::filesystem::exists(out_path)) {
            try {
                cache = knowledge::KnowledgeIndex::load(out_path);
            } catch (const IndexFormatError&) {
            }
        }
        auto index =
            knowledge::build_knowledge_base(corpus, *encoder, cfg->cfg.knowledge.alpha, cache ? &*cache : nullptr);
        index.save(out_path);
        if (out_entries)
            *out_entries = index.size();
    });
}

vt_status vt_session_new(const vt_config* cfg, vt_session** out)
{
    return guarded([&] {
        require(cfg, "cfg");
        require(out, "out");
        auto s = std::make_unique<vt_session>();
        s->cfg = cfg->cfg;
        s->client = config::make_client(s->cfg.llm);
        s->encoder = config::make_encoder(s->cfg.encoder);
        if (!s->cfg.kb_path.empty())
            s->index = knowledge::KnowledgeIndex::load(s->cfg.kb_path, s->encoder->fingerprint());
        *out = s.release();
    });
}

void vt_session_free(vt_session* s)
{
    delete s;
}

vt_status vt_triage(vt_session* s, const char* id, const char* code, char** out_json)
{
    return guarded([&] {
        require(s, "session");
        require(code, "code");
        require(out_json, "out_json");
        graphs::SourceFunction fn;
        fn.id = id ? id : "input";
        fn.code = code;
        auto r = pipeline::triage(fn, s->resources(), config::triage_config(s->cfg));
        *out_json = dup_string(pipeline::verdict_record(fn.id, r));
    });
}

vt_status vt_analyze(vt_session* s, const char* dataset_path, const char* out_path, int resume,
                     vt_progress_fn progress, void* user, vt_analyze_summary* out)
{
    return guarded([&] {
        require(s, "session");
        require(dataset_path, "dataset_path");
        require(out_path, "out_path");
        auto functions = eval::load_dataset(dataset_path);
        pipeline::AnalyzeOptions opts;
        opts.out_path = out_path;
        opts.workers = s->cfg.workers;
        opts.resume = resume != 0;
        opts.header_json = header_record(s->cfg);
        opts.config_fingerprint = config::fingerprint(s->cfg);
        if (progress)
            opts.progress = [progress, user](const std::string& id, std::size_t done, std::size_t total) {
                progress(id.c_str(), done, total, user);
            };
        auto sum = pipeline::run_analyze(functions, s->resources(), config::triage_config(s->cfg), opts);
        if (out)
            *out = {sum.total, sum.analyzed, sum.skipped, sum.failed};
    });
}

vt_status vt_session_telemetry(const vt_session* s, uint64_t* requests, uint64_t* successes, uint64_t* failures,
                               uint64_t* retries)
{
    return guarded([&] {
        require(s, "session");
        auto t = s->client->telemetry();
        if (requests)
            *requests = t.requests;
        if (successes)
            *successes = t.successes;
        if (failures)
            *failures = t.failures;
        if (retries)
            *retries = t.retries;
    });
}

vt_status vt_compute_metrics(uint64_t pc, uint64_t pv, uint64_t pb, uint64_t pr, vt_metrics* out)
{
    return guarded([&] {
        require(out, "out");
        eval::PairCounts c{pc, pv, pb, pr};
        auto m = eval::compute_metrics(c);
        *out = {pc, pv, pb, pr, m.error, m.precision, m.recall, m.fpr, m.accuracy, m.f1};
    });
}

vt_status vt_mcnemar_exact(uint64_t b, uint64_t c, double* p_value)
{
    return guarded([&] {
        require(p_value, "p_value");
        *p_value = eval::mcnemar_exact(b, c);
    });
}

vt_status vt_evaluate(const vt_eval_options* opts, char** out_table, char** out_report_json)
{
    return guarded([&] {
        require(opts, "opts");
        require(opts->predictions_path, "predictions_path");
        require(opts->dataset_path, "dataset_path");
        require(opts->pairs_path, "pairs_path");
        auto dataset = eval::load_dataset(opts->dataset_path);
        auto pairs = eval::load_pairs(opts->pairs_path);
        eval::validate_pairs(pairs, dataset);
        double fraction = opts->sample_fraction;
        if (fraction < 1.0)
            pairs = eval::sample_pairs(pairs, fraction, opts->seed);
        auto preds = eval::load_predictions(opts->predictions_path);
        auto ev = eval::evaluate_pairs(pairs, preds);

        std::optional<eval::McNemarResult> mc;
        if (opts->baseline_path) {
            auto base = eval::load_predictions(opts->baseline_path);
            std::vector<graphs::Label> a, b, labels;
            auto pick = [](const std::map<std::string, eval::Prediction>& m, const std::string& id) {
                auto it = m.find(id);
                if (it == m.end())
                    throw MissingPrediction(id);
                return it->second.label;
            };
            for (const auto& p : pairs) {
                for (const auto& [id, label] :
                     {std::pair{p.vulnerable_id, graphs::Label::Vulnerable}, std::pair{p.benign_id, graphs::Label::Benign}}) {
                    a.push_back(pick(preds, id));
                    b.push_back(pick(base, id));
                    labels.push_back(label);
                }
            }
            mc = eval::mcnemar_exact(a, b, labels);
        }

        config::RunConfig cfg = opts->config ? opts->config->cfg : config::RunConfig{};
        nlohmann::ordered_json prov = {
            {"tool", "vultriage"},
            {"version", config::kToolVersion},
            {"config_fingerprint", config::fingerprint(cfg)},
            {"config", nlohmann::ordered_json::parse(config::to_json(cfg))},
            {"predictions", opts->predictions_path},
            {"baseline", opts->baseline_path ? nlohmann::ordered_json(opts->baseline_path) : nlohmann::ordered_json()},
            {"sample", {{"fraction", fraction}, {"seed", opts->seed}}},
        };
        std::string table = eval::render_table(ev, mc);
        std::string report = eval::report_json(ev, mc, prov.dump());
        if (out_table)
            *out_table = dup_string(table);
        if (out_report_json)
            *out_report_json = dup_string(report);
    });
}

} // extern "C"
