#include "eval/report.hpp"

#include "common/text.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace vultriage::eval {

using ojson = nlohmann::ordered_json;

std::string format_metric(double v)
{
    if (std::isnan(v))
        return "NaN";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

namespace {

ojson metric_value(double v)
{
    if (std::isnan(v))
        return "NaN";
    return v;
}

std::string format_p(double p)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

} // namespace

std::string render_table(const PairEvaluation& ev, const std::optional<McNemarResult>& mcnemar)
{
    const MetricsReport& m = ev.metrics;
    const PairCounts& c = m.counts;
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-7s %5s %5s %5s %5s %6s  %-7s %-7s %-7s %-7s %-7s\n", "Pairs", "P-C", "P-V",
                  "P-B", "P-R", "Error", "P", "R", "FPR", "Acc", "F1");
    os << line;
    std::snprintf(line, sizeof line, "%-7llu %5llu %5llu %5llu %5llu %6llu  %-7s %-7s %-7s %-7s %-7s\n",
                  static_cast<unsigned long long>(c.pairs()), static_cast<unsigned long long>(c.pc),
                  static_cast<unsigned long long>(c.pv), static_cast<unsigned long long>(c.pb),
                  static_cast<unsigned long long>(c.pr), static_cast<unsigned long long>(m.error),
                  format_metric(m.precision).c_str(), format_metric(m.recall).c_str(), format_metric(m.fpr).c_str(),
                  format_metric(m.accuracy).c_str(), format_metric(m.f1).c_str());
    os << line;
    if (!ev.flagged_pairs.empty())
        os << "Pairs with an unparseable verdict (counted as benign): " << text::join(ev.flagged_pairs, ", ")
           << "\n";
    if (mcnemar)
        os << "McNemar exact test vs baseline: b=" << mcnemar->b << " c=" << mcnemar->c
           << " p=" << format_p(mcnemar->p_value) << "\n";
    return os.str();
}

std::string report_json(const PairEvaluation& ev, const std::optional<McNemarResult>& mcnemar,
                        const std::string& provenance_json)
{
    ojson j = ojson::object();
    if (!provenance_json.empty()) {
        ojson provenance = ojson::parse(provenance_json);
        for (auto& [k, v] : provenance.items())
            j[k] = v;
    }
    const MetricsReport& m = ev.metrics;
    j["pairs"] = m.counts.pairs();
    j["P-C"] = m.counts.pc;
    j["P-V"] = m.counts.pv;
    j["P-B"] = m.counts.pb;
    j["P-R"] = m.counts.pr;
    j["Error"] = m.error;
    j["P"] = metric_value(m.precision);
    j["R"] = metric_value(m.recall);
    j["FPR"] = metric_value(m.fpr);
    j["Acc"] = metric_value(m.accuracy);
    j["F1"] = metric_value(m.f1);
    j["flagged_pairs"] = ev.flagged_pairs;
    if (mcnemar)
        j["mcnemar"] = {{"b", mcnemar->b}, {"c", mcnemar->c}, {"p_value", mcnemar->p_value}};
    return j.dump(2);
}

} // namespace vultriage::eval
