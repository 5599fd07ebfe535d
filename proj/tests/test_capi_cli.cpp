// Exercises the shared library through its C header and the CLI as a
// subprocess.

#include "vultriage/vultriage.h"

#include "support/test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sys/wait.h>

namespace {

std::string fixture_text(const std::string& rel)
{
    return vt_test::read_fixture(rel);
}

struct Owned {
    char* p = nullptr;
    ~Owned() { vt_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct RunResult {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr folded into the captured output.
RunResult run_cli(const std::string& args)
{
    std::string cmd = std::string(VT_CLI_PATH) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe)
        return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
        r.out.append(buf.data(), n);
    int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// stdout only.
RunResult run_cli_stdout(const std::string& args)
{
    return run_cli(args + " 2>/dev/null");
}

std::string q(const std::string& s)
{
    return "'" + s + "'";
}

const char* kGolden =
    "Function copy_bytes@L1: 2 declarations, 1 assignments, 1 branches, 1 calls. Key call chain: memcpy. "
    "Conditions/Loops: if(len > max).\n"
    "Function copy_bytes: retained control points 5/9; branches 1; calls 1. Path 1: Entry → [True] if(len > max) "
    "→ return → Exit. Path 2: Entry → [False] if(len > max) → call memcpy → Exit.\n"
    "Function copy_bytes: edges retained 3/4; parameter sources 2; chains 1. Parameter sources: param:len@L1; "
    "param:src@L1. Data chain: param:len → if(len > max) → call memcpy.\n";

} // namespace

// ------------------------------------------------------------------- C API

TEST(CApi, VersionAndStatusNames)
{
    EXPECT_STREQ(vt_version(), "0.1.0");
    EXPECT_STREQ(vt_status_name(VT_OK), "ok");
    EXPECT_STRNE(vt_status_name(VT_ERR_SYNTAX), vt_status_name(VT_ERR_DATA));
}

TEST(CApi, ExtractContext)
{
    std::string code = fixture_text("copy_bytes.c");
    Owned out;
    ASSERT_EQ(vt_extract_context(code.c_str(), nullptr, "C", &out.p), VT_OK);
    EXPECT_EQ(out.str() + "\n", kGolden);

    Owned js;
    ASSERT_EQ(vt_extract_context_json(code.c_str(), "c", "A", &js.p), VT_OK);
    auto j = nlohmann::json::parse(js.str());
    EXPECT_EQ(j["level"], "A");
    EXPECT_EQ(j["s"], j["t_ast"].get<std::string>() + "\n" + j["t_cfg"].get<std::string>() + "\n" +
                          j["t_dfg"].get<std::string>());
}

TEST(CApi, ErrorsCarryCodesAndMessages)
{
    Owned out;
    EXPECT_EQ(vt_extract_context("int f( {", "c", "C", &out.p), VT_ERR_SYNTAX);
    EXPECT_EQ(out.p, nullptr);
    EXPECT_NE(std::string(vt_last_error()).find("1:8"), std::string::npos);
    EXPECT_EQ(vt_extract_context("int f(void){return 0;}", "cobol", "C", &out.p), VT_ERR_UNSUPPORTED_LANGUAGE);
    EXPECT_EQ(vt_extract_context("int f(void){return 0;}", "c", "Z", &out.p), VT_ERR_USAGE);
    EXPECT_EQ(vt_extract_context(nullptr, "c", "C", &out.p), VT_ERR_USAGE);
}

TEST(CApi, ConfigRoundTripAndValidation)
{
    vt_config* cfg = nullptr;
    ASSERT_EQ(vt_config_new(&cfg), VT_OK);
    Owned fp1, fp2, js;
    ASSERT_EQ(vt_config_fingerprint(cfg, &fp1.p), VT_OK);
    ASSERT_EQ(vt_config_apply_json(cfg, R"({"workers": 9})"), VT_OK);
    ASSERT_EQ(vt_config_fingerprint(cfg, &fp2.p), VT_OK);
    EXPECT_EQ(fp1.str(), fp2.str()); // concurrency does not change results
    ASSERT_EQ(vt_config_apply_json(cfg, R"({"level": "B", "knowledge": {"alpha": 0.25}})"), VT_OK);
    ASSERT_EQ(vt_config_to_json(cfg, &js.p), VT_OK);
    auto j = nlohmann::json::parse(js.str());
    EXPECT_EQ(j["level"], "B");
    EXPECT_EQ(j["knowledge"]["alpha"], 0.25);
    EXPECT_EQ(j["llm"]["temperature"], 0.7);
    EXPECT_EQ(j["knowledge"]["max_entries"], 2);
    EXPECT_EQ(vt_config_apply_json(cfg, R"({"levle": "B"})"), VT_ERR_USAGE);
    EXPECT_EQ(vt_config_apply_json(cfg, R"({"knowledge": {"alpha": 2}})"), VT_ERR_USAGE);
    vt_config_free(cfg);
}

TEST(CApi, MetricsAndMcNemar)
{
    vt_metrics m{};
    ASSERT_EQ(vt_compute_metrics(147, 207, 52, 29, &m), VT_OK);
    EXPECT_EQ(m.error, 288u);
    EXPECT_NEAR(m.accuracy, 0.6356, 5e-5);
    EXPECT_NEAR(m.f1, 0.6907, 5e-5);
    EXPECT_EQ(vt_compute_metrics(0, 0, 0, 0, &m), VT_ERR_DATA);
    double p = 0;
    ASSERT_EQ(vt_mcnemar_exact(10, 0, &p), VT_OK);
    EXPECT_NEAR(p, 2 * std::pow(0.5, 10), 1e-15);
}

TEST(CApi, SessionTriageWithScriptedBackend)
{
    vt_test::TempDir dir;
    vt_config* cfg = nullptr;
    ASSERT_EQ(vt_config_new(&cfg), VT_OK);
    size_t n = 0;
    ASSERT_EQ(vt_build_kb(cfg, vt_test::fixture("cwe/toy.xml").c_str(), dir.file("kb.bin").c_str(), &n), VT_OK);
    EXPECT_EQ(n, 5u);
    nlohmann::json overlay = {{"kb", dir.file("kb.bin")},
                              {"llm", {{"backend", "scripted"}, {"script", vt_test::fixture("analyze/mock_script.json")}}}};
    ASSERT_EQ(vt_config_apply_json(cfg, overlay.dump().c_str()), VT_OK);
    vt_session* s = nullptr;
    ASSERT_EQ(vt_session_new(cfg, &s), VT_OK);
    std::string code = "void show(const char *msg)\n{\n    printf(msg);\n}";
    Owned rec;
    ASSERT_EQ(vt_triage(s, "fmt", code.c_str(), &rec.p), VT_OK);
    auto j = nlohmann::json::parse(rec.str());
    EXPECT_EQ(j["type"], "verdict");
    EXPECT_EQ(j["id"], "fmt");
    EXPECT_EQ(j["label"], "vulnerable");
    EXPECT_TRUE(j["degraded_paths"].empty());
    uint64_t req = 0, ok = 0, fail = 0, retries = 0;
    ASSERT_EQ(vt_session_telemetry(s, &req, &ok, &fail, &retries), VT_OK);
    EXPECT_EQ(req, 3u);
    EXPECT_EQ(ok, 3u);
    vt_session_free(s);
    vt_config_free(cfg);
}

TEST(CApi, SessionRejectsIndexFromAnotherEncoder)
{
    vt_test::TempDir dir;
    vt_config* cfg = nullptr;
    ASSERT_EQ(vt_config_new(&cfg), VT_OK);
    size_t n = 0;
    ASSERT_EQ(vt_build_kb(cfg, vt_test::fixture("cwe/toy.xml").c_str(), dir.file("kb.bin").c_str(), &n), VT_OK);
    nlohmann::json overlay = {{"kb", dir.file("kb.bin")},
                              {"encoder", {{"dim", 32}}},
                              {"llm", {{"backend", "scripted"}, {"script", vt_test::fixture("analyze/mock_script.json")}}}};
    ASSERT_EQ(vt_config_apply_json(cfg, overlay.dump().c_str()), VT_OK);
    vt_session* s = nullptr;
    EXPECT_EQ(vt_session_new(cfg, &s), VT_ERR_INDEX_FORMAT);
    EXPECT_EQ(s, nullptr);
    vt_config_free(cfg);
}

// --------------------------------------------------------------------- CLI

TEST(Cli, ExtractContextGolden)
{
    auto r = run_cli_stdout("extract-context --level C " + q(vt_test::fixture("copy_bytes.c")));
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, kGolden);
    auto js = run_cli_stdout("extract-context --json --input " + q(vt_test::fixture("copy_bytes.c")));
    EXPECT_EQ(js.code, 0);
    EXPECT_EQ(nlohmann::json::parse(js.out)["level"], "C");
}

TEST(Cli, UsageErrorsExitOne)
{
    auto r = run_cli("frobnicate");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("unknown subcommand"), std::string::npos);
    EXPECT_EQ(run_cli("").code, 1);
    EXPECT_EQ(run_cli("analyze --input " + q(vt_test::fixture("analyze/dataset.jsonl"))).code, 1);
    EXPECT_EQ(run_cli("extract-context --level Q " + q(vt_test::fixture("copy_bytes.c"))).code, 1);
}

TEST(Cli, HelpDocumentsEveryFlag)
{
    auto top = run_cli("--help");
    EXPECT_EQ(top.code, 0);
    for (const char* sub : {"build-kb", "extract-context", "analyze", "evaluate"})
        EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
    const std::map<std::string, std::vector<std::string>> flags = {
        {"build-kb", {"--corpus", "--out", "--alpha", "--config"}},
        {"extract-context", {"--input", "--level", "--language", "--json"}},
        {"analyze",
         {"--input", "--kb", "--level", "--config", "--out", "--mock-script", "--transcript", "--workers", "--resume",
          "--quiet"}},
        {"evaluate",
         {"--predictions", "--dataset", "--pairs", "--baseline", "--report", "--sample-fraction", "--seed",
          "--config"}},
    };
    for (const auto& [sub, list] : flags) {
        auto h = run_cli(sub + " --help");
        EXPECT_EQ(h.code, 0);
        for (const auto& f : list)
            EXPECT_NE(h.out.find(f), std::string::npos) << sub << " " << f;
    }
}

TEST(Cli, SyntaxErrorIsADataError)
{
    vt_test::TempDir dir;
    vultriage::text::write_file(dir.file("bad.c"), "int f( {");
    auto r = run_cli("extract-context " + q(dir.file("bad.c")));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("syntax"), std::string::npos);
}

TEST(Cli, BuildAnalyzeEvaluate)
{
    vt_test::TempDir dir;
    std::string kb = dir.file("kb.bin");
    auto b = run_cli("build-kb --corpus " + q(vt_test::fixture("cwe/toy.xml")) + " --out " + q(kb));
    ASSERT_EQ(b.code, 0) << b.out;
    EXPECT_NE(b.out.find("indexed 5 entries"), std::string::npos);

    std::string analyze = "analyze --quiet --input " + q(vt_test::fixture("analyze/dataset.jsonl")) + " --kb " +
                          q(kb) + " --mock-script " + q(vt_test::fixture("analyze/mock_script.json"));
    auto a1 = run_cli(analyze + " --out " + q(dir.file("v1.jsonl")) + " --workers 1");
    ASSERT_EQ(a1.code, 0) << a1.out;
    auto a2 = run_cli(analyze + " --out " + q(dir.file("v2.jsonl")) + " --workers 1");
    ASSERT_EQ(a2.code, 0) << a2.out;
    auto a3 = run_cli(analyze + " --out " + q(dir.file("v3.jsonl")) + " --workers 4");
    ASSERT_EQ(a3.code, 0) << a3.out;
    std::string v1 = vultriage::text::read_file(dir.file("v1.jsonl"));
    EXPECT_EQ(v1, vultriage::text::read_file(dir.file("v2.jsonl")));
    // The header echoes the worker count; fingerprint and records do not depend on it.
    auto l1 = vultriage::text::split_lines(v1);
    auto l3 = vultriage::text::split_lines(vultriage::text::read_file(dir.file("v3.jsonl")));
    ASSERT_EQ(l1.size(), 11u);
    ASSERT_EQ(l3.size(), 11u);
    EXPECT_TRUE(std::equal(l1.begin() + 1, l1.end(), l3.begin() + 1));
    auto header = nlohmann::json::parse(l1.front());
    EXPECT_EQ(header["config_fingerprint"], nlohmann::json::parse(l3.front())["config_fingerprint"]);
    EXPECT_EQ(header["type"], "header");
    EXPECT_EQ(header["version"], "0.1.0");
    EXPECT_EQ(header["config"]["kb"], kb);
    EXPECT_FALSE(header["config_fingerprint"].get<std::string>().empty());

    auto e = run_cli_stdout("evaluate --predictions " + q(dir.file("v1.jsonl")) + " --dataset " +
                            q(vt_test::fixture("analyze/dataset.jsonl")) + " --pairs " +
                            q(vt_test::fixture("analyze/pairs.jsonl")) + " --baseline " + q(dir.file("v3.jsonl")) +
                            " --report " + q(dir.file("report.json")));
    ASSERT_EQ(e.code, 0) << e.out;
    auto report = nlohmann::json::parse(vultriage::text::read_file(dir.file("report.json")));
    // Mock outcomes: pairs 2, 3, 5 correct; pair 1 both vulnerable; pair 4 reversed.
    EXPECT_EQ(report["P-C"], 3);
    EXPECT_EQ(report["P-V"], 1);
    EXPECT_EQ(report["P-B"], 0);
    EXPECT_EQ(report["P-R"], 1);
    EXPECT_NEAR(report["P"].get<double>(), 4.0 / 6.0, 1e-12);
    EXPECT_NEAR(report["F1"].get<double>(), 8.0 / 11.0, 1e-12);
    EXPECT_EQ(report["mcnemar"]["p_value"], 1.0);
    EXPECT_EQ(report["version"], "0.1.0");
    EXPECT_TRUE(report.contains("config_fingerprint"));
    EXPECT_NE(e.out.find("0.6667"), std::string::npos);
}

TEST(Cli, ConfigPrecedence)
{
    vt_test::TempDir dir;
    vultriage::text::write_file(dir.file("cfg.json"), R"({"schema_version": 1, "level": "B", "workers": 2})");
    std::string base = "analyze --quiet --input " + q(vt_test::fixture("analyze/dataset.jsonl")) +
                       " --mock-script " + q(vt_test::fixture("analyze/mock_script.json")) + " --config " +
                       q(dir.file("cfg.json"));
    ASSERT_EQ(run_cli(base + " --out " + q(dir.file("a.jsonl"))).code, 0);
    ASSERT_EQ(run_cli(base + " --level A --out " + q(dir.file("b.jsonl"))).code, 0);
    auto ha = nlohmann::json::parse(vultriage::text::split_lines(vultriage::text::read_file(dir.file("a.jsonl")))[0]);
    auto hb = nlohmann::json::parse(vultriage::text::split_lines(vultriage::text::read_file(dir.file("b.jsonl")))[0]);
    EXPECT_EQ(ha["config"]["level"], "B");
    EXPECT_EQ(ha["config"]["workers"], 2);
    EXPECT_EQ(hb["config"]["level"], "A");
    EXPECT_EQ(ha["config"]["llm"]["temperature"], 0.7);
    vultriage::text::write_file(dir.file("bad.json"), R"({"schema_version": 99})");
    EXPECT_EQ(run_cli("analyze --input " + q(vt_test::fixture("analyze/dataset.jsonl")) + " --out " +
                      q(dir.file("c.jsonl")) + " --config " + q(dir.file("bad.json")))
                  .code,
              1);
}

TEST(Cli, BackendFailureExitsThree)
{
    vt_test::TempDir dir;
    vultriage::text::write_file(
        dir.file("cfg.json"),
        R"({"llm": {"backend": "http", "endpoint": "http://127.0.0.1:1/v1/chat/completions",)"
        R"( "max_attempts": 1, "timeout_seconds": 2}})");
    auto r = run_cli("analyze --quiet --input " + q(vt_test::fixture("analyze/dataset.jsonl")) + " --config " +
                     q(dir.file("cfg.json")) + " --out " + q(dir.file("v.jsonl")));
    EXPECT_EQ(r.code, 3) << r.out;
    auto lines = vultriage::text::split_lines(vultriage::text::read_file(dir.file("v.jsonl")));
    ASSERT_EQ(lines.size(), 11u);
    EXPECT_EQ(nlohmann::json::parse(lines[1])["type"], "error");
}

TEST(Cli, MissingPredictionIsADataError)
{
    vt_test::TempDir dir;
    vultriage::text::write_file(dir.file("v.jsonl"),
                                "{\"type\":\"verdict\",\"id\":\"p1_vuln\",\"label\":\"vulnerable\"}\n");
    auto r = run_cli("evaluate --predictions " + q(dir.file("v.jsonl")) + " --dataset " +
                     q(vt_test::fixture("analyze/dataset.jsonl")) + " --pairs " +
                     q(vt_test::fixture("analyze/pairs.jsonl")));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("p1_fixed"), std::string::npos);
}
