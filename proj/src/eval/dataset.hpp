#pragma once

#include "graphs/ast.hpp"

#include <map>
#include <string>
#include <vector>

namespace vultriage::eval {

// Dataset: JSON Lines, one object per function:
//   {"id": "...", "code": "...", "label": "vulnerable" | "benign" | 1 | 0, "language": "c"}
// "label" and "language" are optional. Blank lines are ignored. Throws
// DataError on malformed records or duplicate ids.
std::vector<graphs::SourceFunction> parse_dataset(const std::string& jsonl);
std::vector<graphs::SourceFunction> load_dataset(const std::string& path);

const char* label_name(graphs::Label l);
graphs::Label parse_label(const std::string& s); // throws DataError

struct PairRecord {
    std::string pair_id;
    std::string vulnerable_id;
    std::string benign_id;
};

// Pair manifest: JSON Lines {"pair_id"?, "vulnerable_id", "benign_id"}.
// A missing pair_id defaults to the 1-based line ordinal.
std::vector<PairRecord> parse_pairs(const std::string& jsonl);
std::vector<PairRecord> load_pairs(const std::string& path);

// Each pair must reference known ids whose labels, when present, match the
// pair roles. Throws DataError.
void validate_pairs(const std::vector<PairRecord>& pairs, const std::vector<graphs::SourceFunction>& dataset);

struct Prediction {
    graphs::Label label = graphs::Label::Benign;
    bool parse_failure = false;
};

// Reads "verdict" records from a verdict file; other record types are skipped.
std::map<std::string, Prediction> parse_predictions(const std::string& jsonl);
std::map<std::string, Prediction> load_predictions(const std::string& path);

} // namespace vultriage::eval
