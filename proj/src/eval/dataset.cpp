#include "eval/dataset.hpp"

#include "common/error.hpp"
#include "common/text.hpp"

#include <json.hpp>

#include <set>

namespace vultriage::eval {

using nlohmann::json;

namespace {

template <typename Fn>
void for_each_record(const std::string& jsonl, Fn fn)
{
    std::size_t lineno = 0;
    for (const auto& line : text::split_lines(jsonl)) {
        ++lineno;
        if (text::trim(line).empty())
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.is_object())
            throw DataError("line " + std::to_string(lineno) + ": expected a JSON object");
        try {
            fn(j, lineno);
        } catch (const json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::string id_string(const json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number_integer())
        return std::to_string(v.get<long long>());
    throw DataError("id must be a string or integer");
}

} // namespace

const char* label_name(graphs::Label l)
{
    return l == graphs::Label::Vulnerable ? "vulnerable" : "benign";
}

graphs::Label parse_label(const std::string& s)
{
    std::string t = text::to_lower(text::trim(s));
    if (t == "vulnerable" || t == "1" || t == "yes" || t == "true")
        return graphs::Label::Vulnerable;
    if (t == "benign" || t == "0" || t == "no" || t == "false")
        return graphs::Label::Benign;
    throw DataError("unknown label '" + s + "'");
}

std::vector<graphs::SourceFunction> parse_dataset(const std::string& jsonl)
{
    std::vector<graphs::SourceFunction> out;
    std::set<std::string> ids;
    for_each_record(jsonl, [&](const json& j, std::size_t lineno) {
        graphs::SourceFunction fn;
        if (!j.contains("id") || !j.contains("code"))
            throw DataError("line " + std::to_string(lineno) + ": record needs 'id' and 'code'");
        fn.id = id_string(j["id"]);
        fn.code = j["code"].get<std::string>();
        fn.language = j.value("language", std::string("c"));
        if (j.contains("label") && !j["label"].is_null()) {
            const auto& l = j["label"];
            fn.label = parse_label(l.is_string() ? l.get<std::string>() : std::to_string(l.get<int>()));
        }
        if (!ids.insert(fn.id).second)
            throw DataError("duplicate function id '" + fn.id + "'");
        out.push_back(std::move(fn));
    });
    return out;
}

std::vector<graphs::SourceFunction> load_dataset(const std::string& path)
{
    return parse_dataset(text::read_file(path));
}

std::vector<PairRecord> parse_pairs(const std::string& jsonl)
{
    std::vector<PairRecord> out;
    for_each_record(jsonl, [&](const json& j, std::size_t lineno) {
        PairRecord p;
        p.pair_id = j.contains("pair_id") ? id_string(j["pair_id"]) : std::to_string(out.size() + 1);
        if (!j.contains("vulnerable_id") || !j.contains("benign_id"))
            throw DataError("line " + std::to_string(lineno) + ": pair needs 'vulnerable_id' and 'benign_id'");
        p.vulnerable_id = id_string(j["vulnerable_id"]);
        p.benign_id = id_string(j["benign_id"]);
        out.push_back(std::move(p));
    });
    return out;
}

std::vector<PairRecord> load_pairs(const std::string& path)
{
    return parse_pairs(text::read_file(path));
}

void validate_pairs(const std::vector<PairRecord>& pairs, const std::vector<graphs::SourceFunction>& dataset)
{
    std::map<std::string, const graphs::SourceFunction*> by_id;
    for (const auto& fn : dataset)
        by_id[fn.id] = &fn;
    auto check = [&](const std::string& pair, const std::string& id, graphs::Label want) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw DataError("pair " + pair + " references unknown function '" + id + "'");
        if (it->second->label && *it->second->label != want)
            throw DataError("pair " + pair + ": function '" + id + "' is labeled " +
                            label_name(*it->second->label) + ", expected " + label_name(want));
    };
    std::set<std::string> pair_ids;
    for (const auto& p : pairs) {
        if (!pair_ids.insert(p.pair_id).second)
            throw DataError("duplicate pair id '" + p.pair_id + "'");
        check(p.pair_id, p.vulnerable_id, graphs::Label::Vulnerable);
        check(p.pair_id, p.benign_id, graphs::Label::Benign);
    }
}

std::map<std::string, Prediction> parse_predictions(const std::string& jsonl)
{
    std::map<std::string, Prediction> out;
    for_each_record(jsonl, [&](const json& j, std::size_t) {
        if (j.value("type", std::string()) != "verdict")
            return;
        Prediction p;
        p.label = parse_label(j.at("label").get<std::string>());
        p.parse_failure = j.value("parse_failure", false);
        out[id_string(j.at("id"))] = p;
    });
    return out;
}

std::map<std::string, Prediction> load_predictions(const std::string& path)
{
    return parse_predictions(text::read_file(path));
}

} // namespace vultriage::eval
