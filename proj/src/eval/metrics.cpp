#include "eval/metrics.hpp"

#include "common/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace vultriage::eval {

using graphs::Label;

const char* outcome_name(PairOutcome o)
{
    switch (o) {
    case PairOutcome::PC: return "P-C";
    case PairOutcome::PV: return "P-V";
    case PairOutcome::PB: return "P-B";
    case PairOutcome::PR: return "P-R";
    }
    return "?";
}

PairOutcome classify_pair(Label vulnerable_pred, Label benign_pred)
{
    if (vulnerable_pred == Label::Vulnerable)
        return benign_pred == Label::Benign ? PairOutcome::PC : PairOutcome::PV;
    return benign_pred == Label::Benign ? PairOutcome::PB : PairOutcome::PR;
}

void PairCounts::add(PairOutcome o)
{
    switch (o) {
    case PairOutcome::PC: ++pc; break;
    case PairOutcome::PV: ++pv; break;
    case PairOutcome::PB: ++pb; break;
    case PairOutcome::PR: ++pr; break;
    }
}

Confusion confusion_from_pairs(const PairCounts& c)
{
    return {c.pc + c.pv, c.pv + c.pr, c.pc + c.pb, c.pb + c.pr};
}

namespace {

double ratio(double num, double den)
{
    return den == 0 ? std::numeric_limits<double>::quiet_NaN() : num / den;
}

} // namespace

MetricsReport compute_metrics(const PairCounts& counts)
{
    if (counts.pairs() == 0)
        throw DataError("no pairs to evaluate");
    MetricsReport r;
    r.counts = counts;
    r.error = counts.pairs() - counts.pc;
    Confusion m = confusion_from_pairs(counts);
    auto d = [](std::uint64_t v) { return static_cast<double>(v); };
    r.precision = ratio(d(m.tp), d(m.tp + m.fp));
    r.recall = ratio(d(m.tp), d(m.tp + m.fn));
    r.fpr = ratio(d(m.fp), d(m.fp + m.tn));
    r.accuracy = ratio(d(m.tp + m.tn), d(m.tp + m.tn + m.fp + m.fn));
    r.f1 = ratio(2 * d(m.tp), d(2 * m.tp + m.fp + m.fn));
    return r;
}

PairEvaluation evaluate_pairs(const std::vector<PairRecord>& pairs, const std::map<std::string, Prediction>& predictions)
{
    PairEvaluation ev;
    auto find = [&](const std::string& id) -> const Prediction& {
        auto it = predictions.find(id);
        if (it == predictions.end())
            throw MissingPrediction(id);
        return it->second;
    };
    for (const auto& p : pairs) {
        const Prediction& v = find(p.vulnerable_id);
        const Prediction& b = find(p.benign_id);
        PairOutcome o = classify_pair(v.label, b.label);
        ev.outcomes.push_back(o);
        ev.counts.add(o);
        if (v.parse_failure || b.parse_failure)
            ev.flagged_pairs.push_back(p.pair_id);
    }
    ev.metrics = compute_metrics(ev.counts);
    return ev;
}

double mcnemar_exact(std::uint64_t b, std::uint64_t c)
{
    std::uint64_t n = b + c;
    if (n == 0)
        return 1.0;
    std::uint64_t k = std::min(b, c);
    double nd = static_cast<double>(n);
    double cdf = 0;
    for (std::uint64_t i = 0; i <= k; ++i) {
        double id = static_cast<double>(i);
        cdf += std::exp(std::lgamma(nd + 1) - std::lgamma(id + 1) - std::lgamma(nd - id + 1) - nd * std::log(2.0));
    }
    return std::min(1.0, 2.0 * cdf);
}

McNemarResult mcnemar_exact(const std::vector<Label>& preds_a, const std::vector<Label>& preds_b,
                            const std::vector<Label>& labels)
{
    if (preds_a.size() != labels.size() || preds_b.size() != labels.size())
        throw DataError("prediction vectors are not aligned with the labels");
    McNemarResult r;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        bool a_ok = preds_a[i] == labels[i];
        bool b_ok = preds_b[i] == labels[i];
        if (a_ok && !b_ok)
            ++r.b;
        else if (!a_ok && b_ok)
            ++r.c;
    }
    r.p_value = mcnemar_exact(r.b, r.c);
    return r;
}

std::vector<PairRecord> sample_pairs(const std::vector<PairRecord>& pairs, double fraction, std::uint64_t seed)
{
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw UsageError("sample fraction must lie in [0, 1]");
    auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pairs.size())));
    if (fraction > 0 && n == 0 && !pairs.empty())
        n = 1;
    std::vector<PairRecord> out;
    std::mt19937_64 rng(seed);
    std::sample(pairs.begin(), pairs.end(), std::back_inserter(out), n, rng);
    return out;
}

} // namespace vultriage::eval
