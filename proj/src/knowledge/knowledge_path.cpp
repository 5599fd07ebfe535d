#include "knowledge/knowledge_path.hpp"

#include "common/error.hpp"
#include "common/text.hpp"
#include "prompts/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>

namespace vultriage::knowledge {

namespace {

// Strips list bullets and emphasis that chat models like to add.
std::string strip_decoration(std::string_view s)
{
    std::string t = text::trim(s);
    while (!t.empty() && (t.front() == '*' || t.front() == '#' || t.front() == '-' || t.front() == '>' ||
                          t.front() == '_' || t.front() == '`'))
        t = text::trim(std::string_view(t).substr(1));
    while (!t.empty() && (t.back() == '*' || t.back() == '_' || t.back() == '`'))
        t = text::trim(std::string_view(t).substr(0, t.size() - 1));
    return t;
}

// Returns the text after "Query <n>:" when the line is that query.
std::optional<std::string> query_value(std::string_view line, char n)
{
    std::string t = strip_decoration(line);
    std::string head = "query ";
    head += n;
    if (!text::starts_with_ci(t, head))
        return std::nullopt;
    std::string_view rest = std::string_view(t).substr(head.size());
    while (!rest.empty() && (rest.front() == '*' || rest.front() == ' '))
        rest.remove_prefix(1);
    if (rest.empty() || rest.front() != ':')
        return std::nullopt;
    return strip_decoration(rest.substr(1));
}

bool is_empty_query(const std::string& v)
{
    std::string key;
    for (char c : v)
        if (std::isalnum(static_cast<unsigned char>(c)))
            key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return key.empty() || key == "na" || key == "none" || key == "null" || key == "notapplicable";
}

} // namespace

RetrievalQuery fallback_query()
{
    return {std::string(kFallbackQuery), QueryKind::Fallback};
}

std::string render_query_prompt(const graphs::SourceFunction& fn)
{
    return text::substitute(prompts::kQueryGeneration, {{"Code", fn.code}});
}

std::vector<RetrievalQuery> parse_queries(const std::string& response)
{
    std::optional<std::string> q1, q2;
    for (const auto& line : text::split_lines(response)) {
        if (!q1)
            if (auto v = query_value(line, '1')) {
                q1 = *v;
                continue;
            }
        if (!q2)
            if (auto v = query_value(line, '2'))
                q2 = *v;
    }
    if (!q1 && !q2)
        throw QueryParseError("response has no 'Query 1:' or 'Query 2:' line");
    std::vector<RetrievalQuery> out;
    for (const auto& q : {q1, q2})
        if (q && !is_empty_query(*q))
            out.push_back({*q, QueryKind::Predicted});
    if (out.empty())
        out.push_back(fallback_query());
    return out;
}

std::vector<RetrievalQuery> generate_queries(const graphs::SourceFunction& fn, llm::ChatClient& llm,
                                             const llm::ChatRequest& params)
{
    llm::ChatRequest req = params;
    req.prompt = render_query_prompt(fn);
    auto res = llm.complete(req);
    try {
        return parse_queries(res.text);
    } catch (const QueryParseError&) {
        return {fallback_query()};
    }
}

std::string clip_example(const std::string& example, std::size_t budget)
{
    if (budget == 0 || example.size() <= budget)
        return example;
    std::size_t cut = budget;
    while (cut > 0 && (static_cast<unsigned char>(example[cut]) & 0xC0) == 0x80)
        --cut;
    return example.substr(0, cut) + "…";
}

std::string render_entry(const KnowledgeEntry& e, std::size_t example_chars)
{
    std::string out = e.cwe_id.str() + ": " + e.name + "\nDescription: " + e.description;
    if (!e.example.empty())
        out += "\nVulnerable example:\n" + clip_example(e.example, example_chars);
    return out;
}

KnowledgeContext assemble_knowledge(const std::vector<std::vector<Scored>>& per_query, std::size_t max_entries,
                                    std::size_t example_chars)
{
    KnowledgeContext ctx;
    std::set<CweId> seen;
    for (const auto& ranked : per_query)
        for (const auto& s : ranked) {
            if (ctx.entries.size() >= max_entries)
                break;
            if (seen.insert(s.item->entry.cwe_id).second)
                ctx.entries.push_back(s.item->entry);
        }
    std::vector<std::string> parts;
    for (const auto& e : ctx.entries)
        parts.push_back(render_entry(e, example_chars));
    ctx.text = text::join(parts, "\n\n");
    return ctx;
}

KnowledgeContext retrieve_knowledge(const KnowledgeIndex& index, const Encoder& encoder,
                                    const std::vector<RetrievalQuery>& queries, const KnowledgeOptions& opts)
{
    std::vector<std::string> texts;
    for (const auto& q : queries)
        texts.push_back(q.text);
    auto enc = encoder.encode(texts);
    std::vector<std::vector<Scored>> per_query;
    for (const auto& e : enc)
        per_query.push_back(retrieve_top_k(index, e, opts.k, opts.alpha));
    return assemble_knowledge(per_query, opts.max_entries, opts.example_chars);
}

} // namespace vultriage::knowledge
