#include "knowledge/corpus.hpp"

#include "common/error.hpp"
#include "common/text.hpp"

#include <expat.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>

namespace vultriage::knowledge {

CweId CweId::parse(const std::string& raw)
{
    std::string s = text::trim(raw);
    if (text::starts_with_ci(s, "CWE-"))
        s = s.substr(4);
    int n = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || n < 0)
        throw CorpusFormatError("invalid CWE id '" + raw + "'");
    return CweId(n);
}

std::string KnowledgeEntry::passage() const
{
    std::string p = name;
    if (!description.empty())
        p += "\n" + description;
    if (!example.empty())
        p += "\n" + example;
    return p;
}

namespace {

std::string local_name(const XML_Char* qname)
{
    std::string n(qname);
    auto colon = n.rfind(':');
    return colon == std::string::npos ? n : n.substr(colon + 1);
}

// Streams the export once; only the fields we need are buffered.
class CweXmlReader {
public:
    std::vector<KnowledgeEntry> run(const std::string& xml)
    {
        XML_Parser p = XML_ParserCreate(nullptr);
        XML_SetUserData(p, this);
        XML_SetElementHandler(p, &CweXmlReader::on_start, &CweXmlReader::on_end);
        XML_SetCharacterDataHandler(p, &CweXmlReader::on_text);
        if (XML_Parse(p, xml.data(), static_cast<int>(xml.size()), XML_TRUE) == XML_STATUS_ERROR) {
            std::string msg = std::string("CWE XML: ") + XML_ErrorString(XML_GetErrorCode(p)) +
                              " at line " + std::to_string(XML_GetCurrentLineNumber(p));
            XML_ParserFree(p);
            throw CorpusFormatError(msg);
        }
        XML_ParserFree(p);
        if (error_)
            throw CorpusFormatError(*error_);
        return std::move(out_);
    }

private:
    static void on_start(void* self, const XML_Char* name, const XML_Char** attrs)
    {
        static_cast<CweXmlReader*>(self)->start(local_name(name), attrs);
    }
    static void on_end(void* self, const XML_Char* name)
    {
        static_cast<CweXmlReader*>(self)->end(local_name(name));
    }
    static void on_text(void* self, const XML_Char* s, int len)
    {
        static_cast<CweXmlReader*>(self)->chars(std::string(s, static_cast<std::size_t>(len)));
    }

    void start(const std::string& name, const XML_Char** attrs)
    {
        std::map<std::string, std::string> a;
        for (int i = 0; attrs[i]; i += 2)
            a[attrs[i]] = attrs[i + 1];
        if (name == "Weakness") {
            in_weakness_ = true;
            cur_ = {};
            has_example_ = false;
            try {
                cur_.cwe_id = CweId::parse(a["ID"]);
            } catch (const CorpusFormatError& e) {
                if (!error_)
                    error_ = e.what();
            }
            cur_.name = text::collapse_whitespace(a["Name"]);
            return;
        }
        if (!in_weakness_)
            return;
        if (name == "Description" && depth_in_desc_ == 0 && !in_example_) {
            depth_in_desc_ = 1;
            desc_.clear();
        } else if (depth_in_desc_ > 0) {
            ++depth_in_desc_;
        }
        if (in_example_)
            settle_whitespace();
        if (name == "Example_Code" && !has_example_ && a["Nature"] == "Bad") {
            in_example_ = true;
            example_.clear();
            pending_ws_.clear();
        } else if (in_example_ && name == "br") {
            example_ += '\n';
        }
    }

    void end(const std::string& name)
    {
        if (!in_weakness_)
            return;
        if (depth_in_desc_ > 0) {
            if (--depth_in_desc_ == 0)
                cur_.description = text::collapse_whitespace(desc_);
            return;
        }
        if (in_example_) {
            settle_whitespace();
            if (name == "Example_Code") {
                in_example_ = false;
                has_example_ = true;
                cur_.example = tidy_code(example_);
            } else if (name == "div" || name == "p") {
                if (!example_.empty() && example_.back() != '\n')
                    example_ += '\n';
            }
            return;
        }
        if (name == "Weakness") {
            in_weakness_ = false;
            if (!cur_.description.empty())
                out_.push_back(std::move(cur_));
        }
    }

    void chars(const std::string& s)
    {
        if (depth_in_desc_ > 0)
            desc_ += s;
        else if (in_example_) {
            if (s.find_first_not_of(" \t\r\n") == std::string::npos) {
                pending_ws_ += s;
            } else {
                example_ += pending_ws_;
                pending_ws_.clear();
                example_ += s;
            }
        }
    }

    // Whitespace spanning a line break next to markup is indentation of the
    // XML itself, not of the code.
    void settle_whitespace()
    {
        if (pending_ws_.find('\n') == std::string::npos)
            example_ += pending_ws_;
        pending_ws_.clear();
    }

    static std::string tidy_code(const std::string& raw)
    {
        std::vector<std::string> lines;
        for (auto& l : text::split_lines(raw)) {
            std::size_t end = l.find_last_not_of(" \t");
            std::string t = end == std::string::npos ? std::string() : l.substr(0, end + 1);
            if (!t.empty() || (!lines.empty() && !lines.back().empty()))
                lines.push_back(t);
        }
        while (!lines.empty() && lines.back().empty())
            lines.pop_back();
        std::size_t indent = std::string::npos;
        for (const auto& l : lines)
            if (!l.empty())
                indent = std::min(indent, l.find_first_not_of(" \t"));
        if (indent != std::string::npos && indent > 0)
            for (auto& l : lines)
                if (!l.empty())
                    l.erase(0, indent);
        return text::join(lines, "\n");
    }

    std::vector<KnowledgeEntry> out_;
    KnowledgeEntry cur_;
    bool in_weakness_ = false;
    int depth_in_desc_ = 0;
    std::string desc_;
    bool in_example_ = false;
    bool has_example_ = false;
    std::string example_;
    std::string pending_ws_;
    std::optional<std::string> error_;
};

void check_unique(const std::vector<KnowledgeEntry>& entries)
{
    std::set<CweId> seen;
    for (const auto& e : entries)
        if (!seen.insert(e.cwe_id).second)
            throw CorpusFormatError("duplicate entry " + e.cwe_id.str());
}

std::string lower_ext(const std::string& path)
{
    auto dot = path.rfind('.');
    return dot == std::string::npos ? std::string() : text::to_lower(path.substr(dot));
}

} // namespace

std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty()))
            rows.push_back(std::move(row));
        row.clear();
    };
    while (i < text.size()) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
            } else {
                field += c;
            }
            ++i;
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            // handled with the newline
        } else if (c == '\n') {
            end_row();
        } else {
            field += c;
            field_started = true;
        }
        ++i;
    }
    if (quoted)
        throw CorpusFormatError("CSV: unterminated quoted field");
    if (!field.empty() || !row.empty())
        end_row();
    return rows;
}

std::vector<KnowledgeEntry> load_cwe_xml(const std::string& xml_text)
{
    auto out = CweXmlReader().run(xml_text);
    check_unique(out);
    return out;
}

std::vector<KnowledgeEntry> load_cwe_csv(const std::string& csv_text)
{
    auto rows = parse_csv(csv_text);
    if (rows.empty())
        throw CorpusFormatError("CSV: missing header row");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < rows[0].size(); ++i) {
        std::string h = text::trim(rows[0][i]);
        if (i == 0 && h.rfind("\xEF\xBB\xBF", 0) == 0) // UTF-8 BOM
            h = h.substr(3);
        col[h] = i;
    }
    auto find = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
        for (const char* n : names)
            if (auto it = col.find(n); it != col.end())
                return it->second;
        return std::nullopt;
    };
    auto id_col = find({"CWE-ID", "ID"});
    auto name_col = find({"Name"});
    auto desc_col = find({"Description"});
    auto ex_col = find({"Demonstrative Examples", "Demonstrative Example", "Example"});
    if (!id_col || !name_col || !desc_col)
        throw CorpusFormatError("CSV: required columns are CWE-ID, Name, Description");
    std::vector<KnowledgeEntry> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto get = [&](std::optional<std::size_t> c) {
            return c && *c < row.size() ? row[*c] : std::string();
        };
        KnowledgeEntry e;
        e.cwe_id = CweId::parse(get(id_col));
        e.name = text::collapse_whitespace(get(name_col));
        e.description = text::collapse_whitespace(get(desc_col));
        e.example = text::trim(get(ex_col));
        if (e.description.empty())
            continue;
        out.push_back(std::move(e));
    }
    check_unique(out);
    return out;
}

std::vector<KnowledgeEntry> load_cwe_jsonl(const std::string& jsonl_text)
{
    std::vector<KnowledgeEntry> out;
    int line_no = 0;
    for (const auto& line : text::split_lines(jsonl_text)) {
        ++line_no;
        if (text::trim(line).empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw CorpusFormatError("JSONL line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("cwe_id") || !j.contains("name") || !j.contains("description"))
            throw CorpusFormatError("JSONL line " + std::to_string(line_no) +
                                    ": expected cwe_id, name and description");
        KnowledgeEntry e;
        const auto& id = j["cwe_id"];
        e.cwe_id = id.is_number_integer() ? CweId(id.get<int>()) : CweId::parse(id.get<std::string>());
        e.name = j["name"].get<std::string>();
        e.description = j["description"].get<std::string>();
        e.example = j.value("example", std::string());
        if (text::trim(e.description).empty())
            continue;
        out.push_back(std::move(e));
    }
    check_unique(out);
    return out;
}

std::vector<KnowledgeEntry> load_corpus(const std::string& path)
{
    std::string body = text::read_file(path);
    std::string ext = lower_ext(path);
    if (ext == ".xml")
        return load_cwe_xml(body);
    if (ext == ".csv")
        return load_cwe_csv(body);
    if (ext == ".jsonl" || ext == ".json")
        return load_cwe_jsonl(body);
    throw CorpusFormatError("unrecognised corpus extension '" + ext + "' (expected .xml, .csv or .jsonl)");
}

} // namespace vultriage::knowledge
