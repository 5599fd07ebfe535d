#pragma once

#include "eval/dataset.hpp"
#include "graphs/ast.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vultriage::eval {

enum class PairOutcome { PC, PV, PB, PR };
const char* outcome_name(PairOutcome o); // "P-C", "P-V", "P-B", "P-R"

// Predictions for the vulnerable and the benign member of one pair.
PairOutcome classify_pair(graphs::Label vulnerable_pred, graphs::Label benign_pred);

struct PairCounts {
    std::uint64_t pc = 0, pv = 0, pb = 0, pr = 0;
    std::uint64_t pairs() const { return pc + pv + pb + pr; }
    void add(PairOutcome o);
};

// Function-level confusion counts with vulnerable as the positive class.
struct Confusion {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
};
Confusion confusion_from_pairs(const PairCounts& c);

// Ratios with a zero denominator are NaN.
struct MetricsReport {
    PairCounts counts;
    std::uint64_t error = 0;
    double precision = 0, recall = 0, fpr = 0, accuracy = 0, f1 = 0;
};

// Throws DataError for zero pairs.
MetricsReport compute_metrics(const PairCounts& counts);

struct PairEvaluation {
    std::vector<PairOutcome> outcomes; // aligned with the pairs
    PairCounts counts;
    MetricsReport metrics;
    std::vector<std::string> flagged_pairs; // a member's verdict was a parse failure
};

// Throws MissingPrediction when either member of a pair has no verdict.
PairEvaluation evaluate_pairs(const std::vector<PairRecord>& pairs,
                              const std::map<std::string, Prediction>& predictions);

struct McNemarResult {
    std::uint64_t b = 0; // A correct, B wrong
    std::uint64_t c = 0; // A wrong, B correct
    double p_value = 1.0;
};

// Exact two-sided test: min(1, 2 * BinomCDF(min(b, c); b + c, 1/2)); 1 when b + c = 0.
double mcnemar_exact(std::uint64_t b, std::uint64_t c);

// Aligned prediction vectors against the same labels. Throws DataError on a
// length mismatch.
McNemarResult mcnemar_exact(const std::vector<graphs::Label>& preds_a, const std::vector<graphs::Label>& preds_b,
                            const std::vector<graphs::Label>& labels);

// Seeded uniform sample without replacement of round(fraction * n) pairs
// (at least one when fraction > 0), kept in input order.
std::vector<PairRecord> sample_pairs(const std::vector<PairRecord>& pairs, double fraction, std::uint64_t seed);

} // namespace vultriage::eval
