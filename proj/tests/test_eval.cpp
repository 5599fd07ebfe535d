#include "common/error.hpp"
#include "eval/dataset.hpp"
#include "eval/metrics.hpp"
#include "eval/report.hpp"
#include "support/oracles.hpp"
#include "support/test_support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <random>

using namespace vultriage;
using namespace vultriage::eval;
using graphs::Label;

namespace {

constexpr double kTol = 5e-5;

PairCounts counts(std::uint64_t pc, std::uint64_t pv, std::uint64_t pb, std::uint64_t pr)
{
    PairCounts c;
    c.pc = pc;
    c.pv = pv;
    c.pb = pb;
    c.pr = pr;
    return c;
}

struct Row {
    std::uint64_t pc, pv, pb, pr, error;
    double p, r, fpr, acc, f1;
};

// Alternating labels. A is right and B wrong on the first `b` functions, the
// reverse on the next `c`, and both are right on the remaining `agree`.
struct Synthetic {
    std::vector<Label> labels, a, b;
};

Synthetic discordant(std::size_t b, std::size_t c, std::size_t agree)
{
    Synthetic s;
    auto flip = [](Label l) { return l == Label::Vulnerable ? Label::Benign : Label::Vulnerable; };
    std::size_t n = b + c + agree;
    for (std::size_t i = 0; i < n; ++i) {
        Label truth = i % 2 == 0 ? Label::Vulnerable : Label::Benign;
        s.labels.push_back(truth);
        if (i < b) {
            s.a.push_back(truth);
            s.b.push_back(flip(truth));
        } else if (i < b + c) {
            s.a.push_back(flip(truth));
            s.b.push_back(truth);
        } else {
            s.a.push_back(truth);
            s.b.push_back(truth);
        }
    }
    return s;
}

} // namespace

TEST(Pairs, ClassifyAllFourOutcomes)
{
    EXPECT_EQ(classify_pair(Label::Vulnerable, Label::Benign), PairOutcome::PC);
    EXPECT_EQ(classify_pair(Label::Vulnerable, Label::Vulnerable), PairOutcome::PV);
    EXPECT_EQ(classify_pair(Label::Benign, Label::Benign), PairOutcome::PB);
    EXPECT_EQ(classify_pair(Label::Benign, Label::Vulnerable), PairOutcome::PR);
    EXPECT_STREQ(outcome_name(PairOutcome::PR), "P-R");
}

// Published rows: main result and the ablation variants.
TEST(Metrics, ReportedRowsReproduce)
{
    const Row rows[] = {
        {147, 207, 52, 29, 288, 0.6000, 0.8138, 0.5425, 0.6356, 0.6907},
        {55, 55, 18, 3, 76, 0.6548, 0.8397, 0.4427, 0.6985, 0.7358},
        {42, 58, 23, 8, 89, 0.6024, 0.7634, 0.5038, 0.6298, 0.6734},
        {45, 63, 13, 10, 86, 0.5967, 0.8244, 0.5573, 0.6336, 0.6923},
        {42, 60, 11, 18, 89, 0.5667, 0.7786, 0.5954, 0.5916, 0.6559},
    };
    for (const auto& row : rows) {
        SCOPED_TRACE(row.pc);
        auto m = compute_metrics(counts(row.pc, row.pv, row.pb, row.pr));
        EXPECT_EQ(m.error, row.error);
        EXPECT_NEAR(m.precision, row.p, kTol);
        EXPECT_NEAR(m.recall, row.r, kTol);
        EXPECT_NEAR(m.fpr, row.fpr, kTol);
        EXPECT_NEAR(m.accuracy, row.acc, kTol);
        EXPECT_NEAR(m.f1, row.f1, kTol);
    }
}

// Against a confusion matrix tallied directly from function-level outcomes.
TEST(Metrics, MatchDirectConfusionOnRandomOutcomes)
{
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> size(1, 300);
    for (int trial = 0; trial < 200; ++trial) {
        int n = size(rng);
        PairCounts pc;
        double tp = 0, fp = 0, tn = 0, fn = 0;
        for (int i = 0; i < n; ++i) {
            Label v = coin(rng) ? Label::Vulnerable : Label::Benign;
            Label b = coin(rng) ? Label::Vulnerable : Label::Benign;
            pc.add(classify_pair(v, b));
            (v == Label::Vulnerable ? tp : fn) += 1;
            (b == Label::Vulnerable ? fp : tn) += 1;
        }
        auto m = compute_metrics(pc);
        auto ratio = [](double a, double b) { return b == 0 ? std::nan("") : a / b; };
        auto same = [](double x, double y) { return (std::isnan(x) && std::isnan(y)) || std::abs(x - y) < 1e-12; };
        double p = ratio(tp, tp + fp), r = ratio(tp, tp + fn);
        EXPECT_TRUE(same(m.precision, p));
        EXPECT_TRUE(same(m.recall, r));
        EXPECT_TRUE(same(m.fpr, ratio(fp, fp + tn)));
        EXPECT_TRUE(same(m.accuracy, (tp + tn) / (2.0 * n)));
        double f1 = (std::isnan(p) || std::isnan(r) || p + r == 0) ? std::nan("") : 2 * p * r / (p + r);
        if (!std::isnan(f1))
            EXPECT_TRUE(same(m.f1, f1));
        // Pair identities: recall counts vulnerable members, FPR benign ones.
        EXPECT_TRUE(same(m.recall, double(pc.pc + pc.pv) / n));
        EXPECT_TRUE(same(m.fpr, double(pc.pv + pc.pr) / n));
        EXPECT_EQ(m.error, pc.pv + pc.pb + pc.pr);
    }
}

TEST(Metrics, UndefinedRatiosAreNaN)
{
    // Everything predicted benign: no positive predictions.
    auto m = compute_metrics(counts(0, 0, 5, 0));
    EXPECT_TRUE(std::isnan(m.precision));
    EXPECT_EQ(m.recall, 0.0);
    EXPECT_EQ(m.fpr, 0.0);
    EXPECT_EQ(m.accuracy, 0.5);
    EXPECT_EQ(m.f1, 0.0);
    EXPECT_THROW(compute_metrics(counts(0, 0, 0, 0)), DataError);
    EXPECT_EQ(format_metric(std::nan("")), "NaN");
    EXPECT_EQ(format_metric(0.690666), "0.6907");
}

TEST(McNemar, ClosedFormCase)
{
    EXPECT_NEAR(mcnemar_exact(10, 0), 2 * std::pow(0.5, 10), 1e-15);
    EXPECT_NEAR(mcnemar_exact(0, 10), 2 * std::pow(0.5, 10), 1e-15);
    EXPECT_EQ(mcnemar_exact(0, 0), 1.0);
    EXPECT_EQ(mcnemar_exact(3, 3), 1.0);
}

TEST(McNemar, MatchesExhaustiveSummation)
{
    EXPECT_NEAR(mcnemar_exact(6, 2), vt_test::mcnemar_bruteforce(6, 2), 1e-12);
    for (unsigned n = 0; n <= 25; ++n)
        for (unsigned b = 0; b <= n; ++b)
            EXPECT_NEAR(mcnemar_exact(b, n - b), vt_test::mcnemar_bruteforce(b, n - b), 1e-12)
                << "b=" << b << " c=" << n - b;
}

TEST(McNemar, SignificanceBandsOnSyntheticVectors)
{
    auto strong = discordant(20, 2, 100);
    auto r1 = mcnemar_exact(strong.a, strong.b, strong.labels);
    EXPECT_EQ(r1.b, 20u);
    EXPECT_EQ(r1.c, 2u);
    EXPECT_LT(r1.p_value, 0.001);

    auto moderate = discordant(12, 3, 100);
    auto r2 = mcnemar_exact(moderate.a, moderate.b, moderate.labels);
    EXPECT_LT(r2.p_value, 0.05);
    EXPECT_GE(r2.p_value, 0.001);

    auto weak = discordant(5, 3, 100);
    EXPECT_GE(mcnemar_exact(weak.a, weak.b, weak.labels).p_value, 0.05);

    EXPECT_THROW(mcnemar_exact(strong.a, weak.b, strong.labels), DataError);
}

TEST(Sampling, SeededAndOrderPreserving)
{
    std::vector<PairRecord> pairs;
    for (int i = 0; i < 100; ++i)
        pairs.push_back({std::to_string(i), "v" + std::to_string(i), "b" + std::to_string(i)});
    auto a = sample_pairs(pairs, 0.3, 7);
    auto b = sample_pairs(pairs, 0.3, 7);
    auto c = sample_pairs(pairs, 0.3, 8);
    ASSERT_EQ(a.size(), 30u);
    EXPECT_EQ(c.size(), 30u);
    std::vector<std::string> ia, ib, ic;
    for (const auto& p : a)
        ia.push_back(p.pair_id);
    for (const auto& p : b)
        ib.push_back(p.pair_id);
    for (const auto& p : c)
        ic.push_back(p.pair_id);
    EXPECT_EQ(ia, ib);
    EXPECT_NE(ia, ic);
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](const PairRecord& x, const PairRecord& y) {
        return std::stoi(x.pair_id) < std::stoi(y.pair_id);
    }));
    EXPECT_EQ(sample_pairs(pairs, 1.0, 1).size(), 100u);
    EXPECT_EQ(sample_pairs(pairs, 0.001, 1).size(), 1u);
}

TEST(Dataset, ParsesRecordsAndRejectsBadOnes)
{
    auto d = parse_dataset("{\"id\":\"a\",\"code\":\"int f(void){return 0;}\",\"label\":\"vulnerable\"}\n\n"
                           "{\"id\":7,\"code\":\"x\",\"label\":0}\n");
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d[0].id, "a");
    EXPECT_EQ(d[0].label, Label::Vulnerable);
    EXPECT_EQ(d[1].id, "7");
    EXPECT_EQ(d[1].label, Label::Benign);
    EXPECT_THROW(parse_dataset("{\"id\":\"a\",\"code\":\"x\"}\n{\"id\":\"a\",\"code\":\"y\"}\n"), DataError);
    EXPECT_THROW(parse_dataset("{\"code\":\"x\"}\n"), DataError);
    EXPECT_THROW(parse_dataset("{\"id\":\"a\",\"code\":\"x\",\"label\":\"maybe\"}\n"), DataError);
    EXPECT_THROW(parse_dataset("not json\n"), DataError);
    EXPECT_EQ(parse_label("YES"), Label::Vulnerable);
    EXPECT_EQ(parse_label("benign"), Label::Benign);
}

TEST(Dataset, PairsAndValidation)
{
    auto pairs = parse_pairs("{\"vulnerable_id\":\"v\",\"benign_id\":\"b\"}\n");
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(pairs[0].pair_id, "1");
    auto data = parse_dataset("{\"id\":\"v\",\"code\":\"x\",\"label\":\"vulnerable\"}\n"
                              "{\"id\":\"b\",\"code\":\"y\",\"label\":\"benign\"}\n");
    EXPECT_NO_THROW(validate_pairs(pairs, data));
    EXPECT_THROW(validate_pairs(parse_pairs("{\"vulnerable_id\":\"b\",\"benign_id\":\"v\"}\n"), data), DataError);
    EXPECT_THROW(validate_pairs(parse_pairs("{\"vulnerable_id\":\"v\",\"benign_id\":\"zz\"}\n"), data), DataError);
    EXPECT_THROW(parse_pairs("{\"vulnerable_id\":\"v\"}\n"), DataError);
}

TEST(Evaluate, FixtureVerdicts)
{
    auto pairs = load_pairs(vt_test::fixture("analyze/pairs.jsonl"));
    auto preds = parse_predictions("{\"type\":\"header\"}\n"
                                   "{\"type\":\"verdict\",\"id\":\"p1_vuln\",\"label\":\"vulnerable\"}\n"
                                   "{\"type\":\"verdict\",\"id\":\"p1_fixed\",\"label\":\"vulnerable\"}\n"
                                   "{\"type\":\"verdict\",\"id\":\"p2_vuln\",\"label\":\"vulnerable\"}\n"
                                   "{\"type\":\"verdict\",\"id\":\"p2_fixed\",\"label\":\"benign\"}\n"
                                   "{\"type\":\"verdict\",\"id\":\"p3_vuln\",\"label\":\"benign\"}\n"
                                   "{\"type\":\"verdict\",\"id\":\"p3_fixed\",\"label\":\"benign\","
                                   "\"parse_failure\":true}\n"
                                   "{\"type\":\"verdict\",\"id\":\"p4_vuln\",\"label\":\"benign\"}\n"
                                   "{\"type\":\"verdict\",\"id\":\"p4_fixed\",\"label\":\"vulnerable\"}\n"
                                   "{\"type\":\"verdict\",\"id\":\"p5_vuln\",\"label\":\"vulnerable\"}\n"
                                   "{\"type\":\"error\",\"id\":\"p5_fixed\",\"error\":\"x\"}\n");
    EXPECT_THROW(evaluate_pairs(pairs, preds), MissingPrediction);
    preds["p5_fixed"] = {Label::Benign, false};
    auto ev = evaluate_pairs(pairs, preds);
    EXPECT_EQ(ev.counts.pc, 2u);
    EXPECT_EQ(ev.counts.pv, 1u);
    EXPECT_EQ(ev.counts.pb, 1u);
    EXPECT_EQ(ev.counts.pr, 1u);
    EXPECT_EQ(ev.flagged_pairs, std::vector<std::string>{"p3"});
    auto table = render_table(ev);
    EXPECT_NE(table.find("P-C"), std::string::npos);
    EXPECT_NE(table.find("p3"), std::string::npos);
    auto j = nlohmann::json::parse(report_json(ev, McNemarResult{1, 2, 1.0}, R"({"tool":"t"})"));
    EXPECT_EQ(j["tool"], "t");
    EXPECT_EQ(j["P-C"], 2);
    EXPECT_EQ(j["Error"], 3);
    EXPECT_EQ(j["mcnemar"]["c"], 2);
    auto all_benign = nlohmann::json::parse(report_json(
        [] {
            PairEvaluation e;
            e.counts = counts(0, 0, 3, 0);
            e.metrics = compute_metrics(e.counts);
            return e;
        }(),
        std::nullopt, ""));
    EXPECT_EQ(all_benign["P"], "NaN");
}
