#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "eval.hpp"
#include "pretty.hpp"
#include "value.hpp"

// JSON formats.
//
// Catalog documents:
//   { "node": "<name>", "resources": [ { "type": ..., "title": ...,
//     "parameters": { ... } }, ... ] }
// Attribute values map to JSON directly except resource references, which
// become { "$ref": { "type": ..., "title": ... } }, and hash keys: integer
// keys are written as their decimal digits, so an object key consisting of
// canonical decimal digits always reads back as an integer key. String keys
// that look like integer keys cannot be represented and are rejected.
//
// Facts documents are a single object of fact names to values.

namespace pupcat {

using Json = nlohmann::ordered_json;

struct JsonIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool isCanonicalInt(const std::string& s) {
    std::string digits = s;
    bool negative = !digits.empty() && digits[0] == '-';
    if (negative)
        digits.erase(0, 1);
    if (digits.empty())
        return false;
    for (char c : digits)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            return false;
    if (digits.size() > 1 && digits[0] == '0')
        return false; // leading zeros stay strings
    if (negative && digits == "0")
        return false; // "-0" is not the canonical spelling of 0
    try {
        size_t used = 0;
        (void)std::stoll(s, &used);
        return used == s.size();
    } catch (const std::out_of_range&) {
        return false;
    }
}

inline Json valueToJson(const ValuePtr& v) {
    return std::visit(
        [&](const auto& x) -> Json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, long long> || std::is_same_v<T, bool> ||
                          std::is_same_v<T, std::string>) {
                return Json(x);
            } else if constexpr (std::is_same_v<T, std::vector<ValuePtr>>) {
                Json arr = Json::array();
                for (const auto& e : x)
                    arr.push_back(valueToJson(e));
                return arr;
            } else if constexpr (std::is_same_v<T, std::vector<HashValEntry>>) {
                Json obj = Json::object();
                for (const auto& entry : x) {
                    std::string key;
                    if (auto* i = std::get_if<long long>(&entry.key)) {
                        key = std::to_string(*i);
                    } else {
                        key = std::get<std::string>(entry.key);
                        if (isCanonicalInt(key))
                            throw JsonIoError("hash key '" + key +
                                              "' would be read back as an integer key and "
                                              "cannot be written to JSON");
                        if (key == "$ref")
                            throw JsonIoError("hash key '$ref' collides with the resource "
                                              "reference encoding and cannot be written to "
                                              "JSON");
                    }
                    obj[key] = valueToJson(entry.value);
                }
                return obj;
            } else { // RefValue
                Json ref = Json::object();
                ref["type"] = x.type;
                ref["title"] = x.title;
                Json obj = Json::object();
                obj["$ref"] = std::move(ref);
                return obj;
            }
        },
        v->v);
}

inline ValuePtr jsonToValue(const Json& j) {
    switch (j.type()) {
    case Json::value_t::boolean:
        return boolValue(j.get<bool>());
    case Json::value_t::number_integer:
        return intValue(j.get<long long>());
    case Json::value_t::number_unsigned: {
        auto u = j.get<unsigned long long>();
        if (u > static_cast<unsigned long long>(std::numeric_limits<long long>::max()))
            throw JsonIoError("integer " + j.dump() + " is out of range");
        return intValue(static_cast<long long>(u));
    }
    case Json::value_t::string:
        return strValue(j.get<std::string>());
    case Json::value_t::array: {
        std::vector<ValuePtr> elems;
        for (const auto& e : j)
            elems.push_back(jsonToValue(e));
        return arrayValue(std::move(elems));
    }
    case Json::value_t::object: {
        if (j.size() == 1 && j.contains("$ref")) {
            const Json& ref = j.at("$ref");
            if (!ref.is_object() || !ref.contains("type") || !ref.contains("title") ||
                !ref.at("type").is_string() || !ref.at("title").is_string() ||
                ref.size() != 2)
                throw JsonIoError("malformed $ref object: " + j.dump());
            return refValue(ref.at("type").get<std::string>(),
                            ref.at("title").get<std::string>());
        }
        std::vector<HashValEntry> entries;
        for (const auto& [key, val] : j.items()) {
            ScalarKey k;
            if (isCanonicalInt(key))
                k = static_cast<long long>(std::stoll(key));
            else
                k = key;
            entries.push_back(HashValEntry{std::move(k), jsonToValue(val)});
        }
        return hashValue(std::move(entries));
    }
    default:
        throw JsonIoError("unsupported JSON value: " + j.dump() +
                          " (only integers, strings, booleans, arrays and objects)");
    }
}

inline Json catalogToJson(const Catalog& catalog, const std::string& node) {
    Json resources = Json::array();
    for (const auto& r : catalog.items()) {
        Json entry = Json::object();
        entry["type"] = r->type;
        entry["title"] = r->title;
        Json params = Json::object();
        for (const auto& [name, value] : r->attrs)
            params[name] = valueToJson(value);
        entry["parameters"] = std::move(params);
        resources.push_back(std::move(entry));
    }
    Json doc = Json::object();
    doc["node"] = node;
    doc["resources"] = std::move(resources);
    return doc;
}

inline std::vector<std::shared_ptr<const Resource>> resourcesFromJson(const Json& arr) {
    if (!arr.is_array())
        throw JsonIoError("expected an array of resources");
    std::vector<std::shared_ptr<const Resource>> out;
    for (const auto& entry : arr) {
        if (!entry.is_object() || !entry.contains("type") || !entry.contains("title") ||
            !entry.at("type").is_string() || !entry.at("title").is_string())
            throw JsonIoError("malformed resource entry: " + entry.dump());
        auto r = std::make_shared<Resource>();
        r->type = entry.at("type").get<std::string>();
        r->title = entry.at("title").get<std::string>();
        if (entry.contains("parameters")) {
            const Json& params = entry.at("parameters");
            if (!params.is_object())
                throw JsonIoError("resource parameters must be an object");
            for (const auto& [name, value] : params.items())
                r->attrs.emplace_back(name, jsonToValue(value));
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline bool validFactName(const std::string& name) {
    if (name.empty())
        return false;
    if (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_')
        return false;
    for (char c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
            return false;
    return true;
}

inline bool containsRef(const ValuePtr& v) {
    return std::visit(
        [](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, RefValue>) {
                return true;
            } else if constexpr (std::is_same_v<T, std::vector<ValuePtr>>) {
                for (const auto& e : x)
                    if (containsRef(e))
                        return true;
                return false;
            } else if constexpr (std::is_same_v<T, std::vector<HashValEntry>>) {
                for (const auto& entry : x)
                    if (containsRef(entry.value))
                        return true;
                return false;
            } else {
                return false;
            }
        },
        v->v);
}

inline Facts factsFromJson(const Json& j) {
    if (!j.is_object())
        throw JsonIoError("facts document must be a JSON object");
    Facts facts;
    for (const auto& [name, value] : j.items()) {
        if (!validFactName(name))
            throw JsonIoError("invalid fact name '" + name + "'");
        ValuePtr v = jsonToValue(value);
        if (containsRef(v))
            throw JsonIoError("fact '" + name + "' contains a resource reference");
        facts.emplace_back(name, std::move(v));
    }
    return facts;
}

inline Json parseJsonFile(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw JsonIoError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const std::exception& e) {
        throw JsonIoError(path + ": " + e.what());
    }
}

// One NDJSON line per step: the innermost entry of the derivation names the
// rule that fired; "chain" lists the full derivation, outermost first.
inline Json stepRecordToJson(const StepRecord& rec) {
    Json line = Json::object();
    line["step"] = rec.index;
    if (!rec.deriv.empty()) {
        const DerivEntry& leaf = rec.deriv.back();
        line["judgement"] = judgementName(leaf.judgement);
        line["rule"] = ruleName(leaf.rule);
        line["scope"] = leaf.scope.str();
        std::string term = std::visit(
            [](const auto& t) {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, ExprPtr>)
                    return prettyExpr(t);
                else if constexpr (std::is_same_v<T, StmtPtr>)
                    return prettyStmt(t);
                else
                    return prettyManifest(t);
            },
            leaf.term);
        line["term"] = oneLine(term);
        Json chain = Json::array();
        for (const auto& entry : rec.deriv)
            chain.push_back(ruleName(entry.rule));
        line["chain"] = std::move(chain);
    }
    return line;
}

class TraceWriter : public StepObserver {
public:
    explicit TraceWriter(std::ostream& out) : out_(out) {}

    void onStep(const StepRecord& rec) override { out_ << stepRecordToJson(rec) << "\n"; }

private:
    std::ostream& out_;
};

} // namespace pupcat
