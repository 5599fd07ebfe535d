#include "pipeline/orchestrator.hpp"

#include "common/error.hpp"
#include "common/text.hpp"
#include "eval/dataset.hpp"
#include "prompts/prompts.hpp"

#include <json.hpp>

#include <atomic>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

namespace vultriage::pipeline {

using ojson = nlohmann::ordered_json;

const char* path_name(PathId p)
{
    switch (p) {
    case PathId::Control: return "control";
    case PathId::Knowledge: return "knowledge";
    case PathId::Semantic: return "semantic";
    }
    return "?";
}

Instruction assemble_instruction(const std::string& code, const std::string& control_info,
                                 const std::string& knowledge, const std::string& explain)
{
    Instruction in;
    in.code = code;
    in.control_info = control_info.empty() ? std::string(kNoStructure) : control_info;
    in.knowledge = knowledge.empty() ? std::string(kNoKnowledge) : knowledge;
    in.explain = explain.empty() ? std::string(kNoExplanation) : explain;
    in.text = text::substitute(prompts::kFinalJudgment, {{"Code", in.code},
                                                         {"Control_Info", in.control_info},
                                                         {"Knowledge", in.knowledge},
                                                         {"Explain", in.explain}});
    return in;
}

namespace {

bool is_noise(char c)
{
    return c == '*' || c == '_' || c == '#' || c == '`' || c == '>' || c == '-' ||
           std::isspace(static_cast<unsigned char>(c));
}

void skip_noise(std::string_view& s)
{
    while (!s.empty() && is_noise(s.front()))
        s.remove_prefix(1);
}

std::optional<graphs::Label> verdict_on_line(std::string_view line)
{
    skip_noise(line);
    if (!text::starts_with_ci(line, "verdict"))
        return std::nullopt;
    line.remove_prefix(7);
    skip_noise(line);
    if (line.empty() || line.front() != ':')
        return std::nullopt;
    line.remove_prefix(1);
    skip_noise(line);
    auto word_end = [&](std::size_t n) {
        return line.size() == n || !std::isalnum(static_cast<unsigned char>(line[n]));
    };
    if (text::starts_with_ci(line, "yes") && word_end(3))
        return graphs::Label::Vulnerable;
    if (text::starts_with_ci(line, "no") && word_end(2))
        return graphs::Label::Benign;
    return std::nullopt;
}

double seconds_since(std::chrono::steady_clock::time_point t)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

} // namespace

graphs::Label parse_verdict(const std::string& response)
{
    auto lines = text::split_lines(response);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it)
        if (auto l = verdict_on_line(*it))
            return *l;
    throw VerdictParseError("response has no 'Verdict: Yes' or 'Verdict: No' line");
}

TriageResult triage(const graphs::SourceFunction& fn, const TriageResources& res, const TriageConfig& cfg)
{
    if (!res.llm)
        throw UsageError("triage needs an LLM client");
    using SteadyClock = std::chrono::steady_clock;
    TriageResult out;
    auto& degraded = out.verdict.degraded_paths;
    auto start = SteadyClock::now();

    std::string s;
    try {
        s = control::generate_structural_context(fn, cfg.level).s;
    } catch (const Error&) {
    }
    if (s.empty())
        degraded.insert(PathId::Control);
    out.timing.control = seconds_since(start);

    auto t = SteadyClock::now();
    std::string k;
    if (res.index && res.encoder) {
        try {
            out.prompt_hashes.push_back(llm::prompt_hash(knowledge::render_query_prompt(fn)));
            auto queries = knowledge::generate_queries(fn, *res.llm, cfg.inference);
            k = knowledge::retrieve_knowledge(*res.index, *res.encoder, queries, cfg.knowledge).text;
        } catch (const Error&) {
        }
    }
    if (k.empty())
        degraded.insert(PathId::Knowledge);
    out.timing.knowledge = seconds_since(t);

    t = SteadyClock::now();
    out.prompt_hashes.push_back(llm::prompt_hash(semantic::render_explanation_prompt(fn)));
    auto e = semantic::generate_explanation(fn, *res.llm, cfg.inference);
    if (e.degraded || e.text.empty())
        degraded.insert(PathId::Semantic);
    out.timing.semantic = seconds_since(t);

    t = SteadyClock::now();
    Instruction instr = assemble_instruction(fn.code, s, k, e.text);
    out.instruction_hash = llm::prompt_hash(instr.text);
    llm::ChatRequest req = cfg.inference;
    req.prompt = instr.text;
    out.prompt_hashes.push_back(out.instruction_hash);
    auto first = res.llm->complete(req);
    out.verdict.raw = first.text;
    try {
        out.verdict.label = parse_verdict(first.text);
    } catch (const VerdictParseError&) {
        req.prompt = instr.text + "\n\n" + std::string(kVerdictReminder);
        out.prompt_hashes.push_back(llm::prompt_hash(req.prompt));
        try {
            auto second = res.llm->complete(req);
            out.verdict.raw = second.text;
            out.verdict.label = parse_verdict(second.text);
        } catch (const Error&) {
            out.verdict.label = graphs::Label::Benign;
            out.verdict.parse_failure = true;
        }
    }
    out.timing.judgment = seconds_since(t);
    out.timing.total = seconds_since(start);
    return out;
}

// ------------------------------------------------------------------ runner

std::string verdict_record(const std::string& id, const TriageResult& r)
{
    ojson degraded = ojson::array();
    for (PathId p : r.verdict.degraded_paths) // std::set: control, knowledge, semantic
        degraded.push_back(path_name(p));
    ojson rec = {
        {"type", "verdict"},
        {"id", id},
        {"label", eval::label_name(r.verdict.label)},
        {"degraded_paths", degraded},
        {"parse_failure", r.verdict.parse_failure},
        {"raw", r.verdict.raw},
        {"transcript", {{"instruction_hash", r.instruction_hash}, {"prompt_hashes", r.prompt_hashes}}},
    };
    return rec.dump();
}

namespace {

std::string timing_record(const std::string& id, const StageTiming& t)
{
    ojson rec = {{"id", id},
                 {"control", t.control},
                 {"knowledge", t.knowledge},
                 {"semantic", t.semantic},
                 {"judgment", t.judgment},
                 {"total", t.total}};
    return rec.dump();
}

std::string error_record(const std::string& id, const std::string& what)
{
    return ojson{{"type", "error"}, {"id", id}, {"error", what}}.dump();
}

// Validates an existing verdict file and returns the verdict lines to keep.
std::vector<std::string> resumable_records(const std::string& path, const std::string& fingerprint,
                                           std::set<std::string>& done)
{
    auto lines = text::split_lines(text::read_file(path));
    if (lines.empty())
        return {};
    ojson header;
    try {
        header = ojson::parse(lines.front());
    } catch (const ojson::exception&) {
        throw DataError("cannot resume: '" + path + "' does not start with a header record");
    }
    if (header.value("type", std::string()) != "header")
        throw DataError("cannot resume: '" + path + "' does not start with a header record");
    if (header.value("config_fingerprint", std::string()) != fingerprint)
        throw UsageError("cannot resume: '" + path +
                         "' was written with a different configuration; remove it or drop --resume");
    std::vector<std::string> keep;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        ojson j;
        try {
            j = ojson::parse(lines[i]);
        } catch (const ojson::exception&) {
            continue; // torn write
        }
        if (j.value("type", std::string()) != "verdict" || !j.contains("id") || !j["id"].is_string())
            continue;
        if (done.insert(j["id"].get<std::string>()).second)
            keep.push_back(lines[i]);
    }
    return keep;
}

} // namespace

AnalyzeSummary run_analyze(const std::vector<graphs::SourceFunction>& functions, const TriageResources& res,
                           const TriageConfig& cfg, const AnalyzeOptions& opts)
{
    AnalyzeSummary summary;
    summary.total = functions.size();

    std::set<std::string> done;
    std::vector<std::string> kept;
    bool resuming = opts.resume && std::filesystem::exists(opts.out_path);
    if (resuming)
        kept = resumable_records(opts.out_path, opts.config_fingerprint, done);

    std::ofstream out(opts.out_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + opts.out_path + "'");
    out << opts.header_json << '\n';
    for (const auto& line : kept)
        out << line << '\n';
    out.flush();

    const std::string timing_path = opts.out_path + ".timing";
    std::ofstream timing(timing_path, std::ios::binary | (resuming ? std::ios::app : std::ios::trunc));
    if (!timing)
        throw IoError("cannot write '" + timing_path + "'");

    std::vector<const graphs::SourceFunction*> pending;
    for (const auto& fn : functions) {
        if (done.count(fn.id))
            ++summary.skipped;
        else
            pending.push_back(&fn);
    }

    struct Slot {
        std::string record;
        std::string timing;
        bool failed = false;
    };
    std::vector<std::optional<Slot>> slots(pending.size());
    std::size_t next_to_write = 0;
    std::mutex mu;
    std::atomic<std::size_t> next_job{0};

    auto flush_ready = [&] { // caller holds mu
        while (next_to_write < slots.size() && slots[next_to_write]) {
            Slot& s = *slots[next_to_write];
            out << s.record << '\n';
            if (!s.timing.empty())
                timing << s.timing << '\n';
            if (s.failed)
                ++summary.failed;
            else
                ++summary.analyzed;
            if (opts.progress)
                opts.progress(pending[next_to_write]->id, summary.analyzed + summary.failed, pending.size());
            s = Slot{};
            ++next_to_write;
        }
        out.flush();
        timing.flush();
    };

    auto worker = [&] {
        for (;;) {
            std::size_t i = next_job.fetch_add(1);
            if (i >= pending.size())
                return;
            const auto& fn = *pending[i];
            Slot slot;
            try {
                auto r = triage(fn, res, cfg);
                slot.record = verdict_record(fn.id, r);
                slot.timing = timing_record(fn.id, r.timing);
            } catch (const std::exception& e) {
                slot.record = error_record(fn.id, e.what());
                slot.failed = true;
            }
            std::lock_guard lock(mu);
            slots[i] = std::move(slot);
            flush_ready();
        }
    };

    std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, opts.workers)), pending.size());
    std::vector<std::thread> threads;
    for (std::size_t i = 1; i < n; ++i)
        threads.emplace_back(worker);
    if (n > 0)
        worker();
    for (auto& th : threads)
        th.join();
    if (!out || !timing)
        throw IoError("write to '" + opts.out_path + "' failed");
    return summary;
}

} // namespace vultriage::pipeline
