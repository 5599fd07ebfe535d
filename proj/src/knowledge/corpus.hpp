#pragma once

#include <compare>
#include <string>
#include <vector>

namespace vultriage::knowledge {

// Numeric CWE identifier; renders as "CWE-<n>" and orders numerically.
class CweId {
public:
    CweId() = default;
    explicit CweId(int n) : n_(n) {}

    // Accepts "CWE-787", "cwe-787" or "787". Throws CorpusFormatError.
    static CweId parse(const std::string& s);

    int value() const { return n_; }
    std::string str() const { return "CWE-" + std::to_string(n_); }

    friend auto operator<=>(const CweId&, const CweId&) = default;

private:
    int n_ = 0;
};

struct KnowledgeEntry {
    CweId cwe_id;
    std::string name;
    std::string description;
    std::string example; // vulnerable code, may be empty

    // name + description + example, newline separated; the text that gets encoded.
    std::string passage() const;
};

// Official CWE XML export: Weakness elements with ID, Name, Description and
// Demonstrative_Examples/Example_Code[@Nature="Bad"]. Weaknesses with an empty
// description are skipped.
std::vector<KnowledgeEntry> load_cwe_xml(const std::string& xml_text);

// CWE CSV export. Required columns: "CWE-ID" (or "ID"), "Name", "Description".
// Optional example column: "Demonstrative Examples", "Demonstrative Example" or "Example".
std::vector<KnowledgeEntry> load_cwe_csv(const std::string& csv_text);

// One JSON object per line: {"cwe_id", "name", "description", "example"}.
std::vector<KnowledgeEntry> load_cwe_jsonl(const std::string& jsonl_text);

// Picks the loader from the file extension (.xml, .csv, .jsonl/.json).
// Throws CorpusFormatError on malformed input or duplicate ids.
std::vector<KnowledgeEntry> load_corpus(const std::string& path);

// RFC 4180 records: quoted fields may hold commas, quotes ("") and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

} // namespace vultriage::knowledge
