#pragma once

#include "graphs/ast.hpp"
#include "knowledge/index.hpp"
#include "llm/llm_client.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace vultriage::knowledge {

enum class QueryKind { Predicted, Fallback };

struct RetrievalQuery {
    std::string text;
    QueryKind kind = QueryKind::Predicted;
    bool operator==(const RetrievalQuery&) const = default;
};

inline constexpr std::string_view kFallbackQuery =
    "common software vulnerability patterns requiring further inspection";

RetrievalQuery fallback_query();

std::string render_query_prompt(const graphs::SourceFunction& fn);

// Reads the "Query 1:" and "Query 2:" lines. Values of N/A or None are dropped;
// when both are dropped the fallback query is returned. Throws QueryParseError
// when neither line is present.
std::vector<RetrievalQuery> parse_queries(const std::string& response);

// One LLM call. A response without query lines degrades to the fallback query;
// LlmError propagates.
std::vector<RetrievalQuery> generate_queries(const graphs::SourceFunction& fn, llm::ChatClient& llm,
                                             const llm::ChatRequest& params = {});

struct KnowledgeOptions {
    double alpha = 0.5;
    std::size_t k = 2;               // per query
    std::size_t max_entries = 2;     // after deduplication
    std::size_t example_chars = 1500; // per entry; 0 keeps examples whole
};

struct KnowledgeContext {
    std::vector<KnowledgeEntry> entries;
    std::string text;
};

// Example code longer than `budget` characters is cut at a UTF-8 boundary and
// marked with a trailing "…".
std::string clip_example(const std::string& example, std::size_t budget);

std::string render_entry(const KnowledgeEntry& e, std::size_t example_chars);

// Union in (query order, rank order), first occurrence of each CWE kept,
// truncated to max_entries.
KnowledgeContext assemble_knowledge(const std::vector<std::vector<Scored>>& per_query,
                                    std::size_t max_entries, std::size_t example_chars);

// Encodes the queries and retrieves per query. Throws EncoderUnavailable or
// EmptyCorpus.
KnowledgeContext retrieve_knowledge(const KnowledgeIndex& index, const Encoder& encoder,
                                    const std::vector<RetrievalQuery>& queries, const KnowledgeOptions& opts);

} // namespace vultriage::knowledge
