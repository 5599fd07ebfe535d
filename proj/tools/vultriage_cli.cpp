// vultriage command-line front end over the C API.

#include "vultriage/vultriage.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kBackend = 3 };

int exit_code(vt_status s)
{
    switch (s) {
    case VT_OK: return kOk;
    case VT_ERR_USAGE: return kUsage;
    case VT_ERR_LLM:
    case VT_ERR_ENCODER_UNAVAILABLE: return kBackend;
    default: return kData;
    }
}

struct Failed {
    int code;
};

void check(vt_status s, const char* what)
{
    if (s == VT_OK)
        return;
    std::cerr << "vultriage: " << what << ": " << vt_last_error() << " [" << vt_status_name(s) << "]\n";
    throw Failed{exit_code(s)};
}

struct CString {
    char* p = nullptr;
    ~CString() { vt_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct ConfigDeleter {
    void operator()(vt_config* c) const { vt_config_free(c); }
};
using ConfigPtr = std::unique_ptr<vt_config, ConfigDeleter>;

struct SessionDeleter {
    void operator()(vt_session* s) const { vt_session_free(s); }
};
using SessionPtr = std::unique_ptr<vt_session, SessionDeleter>;

std::string read_all(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "vultriage: cannot read '" << path << "'\n";
        throw Failed{kData};
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_all(const std::string& path, const std::string& data)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << data;
    if (!out) {
        std::cerr << "vultriage: cannot write '" << path << "'\n";
        throw Failed{kData};
    }
}

// Defaults, then the config file, then flags.
ConfigPtr resolve_config(const std::string& path, const nlohmann::json& overlay)
{
    vt_config* raw = nullptr;
    if (path.empty())
        check(vt_config_new(&raw), "config");
    else
        check(vt_config_load(path.c_str(), &raw), "config");
    ConfigPtr cfg(raw);
    if (!overlay.empty())
        check(vt_config_apply_json(cfg.get(), overlay.dump().c_str()), "config");
    return cfg;
}

void progress(const char* id, size_t done, size_t total, void*)
{
    std::fprintf(stderr, "[%zu/%zu] %s\n", done, total, id);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"VulTriage: LLM vulnerability triage with structural, knowledge and semantic context"};
    app.set_version_flag("--version", vt_version());
    app.require_subcommand(1);

    // build-kb
    std::string kb_corpus, kb_out, kb_config;
    double kb_alpha = 0.5;
    auto* build = app.add_subcommand("build-kb", "Index a CWE export for knowledge retrieval");
    build->add_option("--corpus", kb_corpus, "CWE export: .xml, .csv or .jsonl")->required()->check(CLI::ExistingFile);
    build->add_option("--out", kb_out, "Index file to write")->required();
    auto* kb_alpha_opt = build->add_option("--alpha", kb_alpha, "Dense weight in the hybrid score, in [0, 1]")
                             ->check(CLI::Range(0.0, 1.0));
    build->add_option("--config", kb_config, "JSON config file")->check(CLI::ExistingFile);

    // extract-context
    std::string ec_input, ec_level = "C", ec_language = "c";
    bool ec_json = false;
    auto* extract = app.add_subcommand("extract-context", "Print the structural context of a C source file");
    extract->add_option("--input,input", ec_input, "Source file, given positionally or with --input")->required()->check(CLI::ExistingFile);
    extract->add_option("--level", ec_level, "Granularity level")->check(CLI::IsMember({"A", "B", "C"}));
    extract->add_option("--language", ec_language, "Source language");
    extract->add_flag("--json", ec_json, "Emit a JSON object instead of text");

    // analyze
    std::string an_input, an_kb, an_level, an_config, an_out, an_mock, an_transcript;
    int an_workers = 0;
    bool an_resume = false, an_quiet = false;
    auto* analyze = app.add_subcommand("analyze", "Triage every function of a dataset");
    analyze->add_option("--input", an_input, "Dataset (JSON Lines: id, code, label)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* an_kb_opt = analyze->add_option("--kb", an_kb, "Knowledge index from build-kb");
    auto* an_level_opt =
        analyze->add_option("--level", an_level, "Granularity level")->check(CLI::IsMember({"A", "B", "C"}));
    analyze->add_option("--config", an_config, "JSON config file")->check(CLI::ExistingFile);
    analyze->add_option("--out", an_out, "Verdict file to write")->required();
    auto* an_mock_opt =
        analyze->add_option("--mock-script", an_mock, "Use the scripted backend with this script")->check(CLI::ExistingFile);
    auto* an_transcript_opt = analyze->add_option("--transcript", an_transcript, "Append LLM exchanges to this file");
    auto* an_workers_opt = analyze->add_option("--workers", an_workers, "Concurrent functions")->check(CLI::PositiveNumber);
    analyze->add_flag("--resume", an_resume, "Keep verdicts already in --out and skip their functions");
    analyze->add_flag("--quiet", an_quiet, "No progress output");

    // evaluate
    std::string ev_pred, ev_dataset, ev_pairs, ev_baseline, ev_report, ev_config;
    double ev_fraction = 1.0;
    std::uint64_t ev_seed = 0;
    auto* evaluate = app.add_subcommand("evaluate", "Pair-wise metrics for a verdict file");
    evaluate->add_option("--predictions", ev_pred, "Verdict file from analyze")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--dataset", ev_dataset, "Dataset with labels")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--pairs", ev_pairs, "Pair manifest (JSON Lines)")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--baseline", ev_baseline, "Second verdict file for the McNemar test")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--report", ev_report, "Write the JSON report here");
    evaluate->add_option("--sample-fraction", ev_fraction, "Evaluate a seeded sample of the pairs")
        ->check(CLI::Range(0.0, 1.0));
    auto* ev_seed_opt = evaluate->add_option("--seed", ev_seed, "Sampling seed");
    evaluate->add_option("--config", ev_config, "JSON config file; supplies the seed and is echoed into the report")
        ->check(CLI::ExistingFile);

    if (argc > 1 && argv[1][0] != '-') {
        std::string sub = argv[1];
        if (sub != "build-kb" && sub != "extract-context" && sub != "analyze" && sub != "evaluate") {
            std::cerr << "vultriage: unknown subcommand '" << sub
                      << "'; expected build-kb, extract-context, analyze or evaluate (see --help)\n";
            return kUsage;
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*build) {
            nlohmann::json overlay;
            if (kb_alpha_opt->count())
                overlay["knowledge"]["alpha"] = kb_alpha;
            auto cfg = resolve_config(kb_config, overlay);
            size_t n = 0;
            check(vt_build_kb(cfg.get(), kb_corpus.c_str(), kb_out.c_str(), &n), "build-kb");
            std::cout << "indexed " << n << " entries into " << kb_out << "\n";
        } else if (*extract) {
            std::string code = read_all(ec_input);
            CString out;
            if (ec_json)
                check(vt_extract_context_json(code.c_str(), ec_language.c_str(), ec_level.c_str(), &out.p),
                      "extract-context");
            else
                check(vt_extract_context(code.c_str(), ec_language.c_str(), ec_level.c_str(), &out.p),
                      "extract-context");
            std::cout << out.str() << "\n";
        } else if (*analyze) {
            nlohmann::json overlay;
            if (an_kb_opt->count())
                overlay["kb"] = an_kb;
            if (an_level_opt->count())
                overlay["level"] = an_level;
            if (an_workers_opt->count())
                overlay["workers"] = an_workers;
            if (an_mock_opt->count()) {
                overlay["llm"]["backend"] = "scripted";
                overlay["llm"]["script"] = an_mock;
            }
            if (an_transcript_opt->count())
                overlay["llm"]["transcript"] = an_transcript;
            auto cfg = resolve_config(an_config, overlay);
            vt_session* raw = nullptr;
            check(vt_session_new(cfg.get(), &raw), "analyze");
            SessionPtr session(raw);
            vt_analyze_summary sum{};
            check(vt_analyze(session.get(), an_input.c_str(), an_out.c_str(), an_resume ? 1 : 0,
                             an_quiet ? nullptr : progress, nullptr, &sum),
                  "analyze");
            std::cerr << "analyzed " << sum.analyzed << ", skipped " << sum.skipped << ", failed " << sum.failed
                      << " of " << sum.total << "\n";
            if (sum.failed > 0) {
                std::cerr << "vultriage: " << sum.failed << " function(s) failed at the judgment call; see the error"
                          << " records in " << an_out << "\n";
                return kBackend;
            }
        } else if (*evaluate) {
            nlohmann::json overlay;
            if (ev_seed_opt->count())
                overlay["seed"] = ev_seed;
            auto cfg = resolve_config(ev_config, overlay);
            CString effective;
            check(vt_config_to_json(cfg.get(), &effective.p), "config");
            vt_eval_options opts{};
            opts.predictions_path = ev_pred.c_str();
            opts.dataset_path = ev_dataset.c_str();
            opts.pairs_path = ev_pairs.c_str();
            opts.baseline_path = ev_baseline.empty() ? nullptr : ev_baseline.c_str();
            opts.sample_fraction = ev_fraction;
            opts.seed = nlohmann::json::parse(effective.str()).at("seed").get<std::uint64_t>();
            opts.config = cfg.get();
            CString table, report;
            check(vt_evaluate(&opts, &table.p, &report.p), "evaluate");
            std::cout << table.str();
            if (!ev_report.empty())
                write_all(ev_report, report.str() + "\n");
        }
    } catch (const Failed& f) {
        return f.code;
    }
    return kOk;
}
