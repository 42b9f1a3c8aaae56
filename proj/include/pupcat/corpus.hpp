#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "audit.hpp"
#include "json_io.hpp"
#include "parser.hpp"

// Conformance corpus runner.
//
// A case is a directory containing:
//   main.pp           the manifest
//   node.txt          node name to compile for (single line)
//   facts.json        optional, top-scope facts
// and exactly one of:
//   expect.json       expected catalog document ({"node":..., "resources":[...]});
//                     resources compare order-insensitively, parameters exactly
//   expect-error.txt  expected error kind name (e.g. DuplicateResource or
//                     ParseError); further lines, if any, are substrings the
//                     error message must contain
//
// Malformed cases are reported as harness errors rather than test failures.
// Every compiled case is additionally audited for rule determinism and state
// monotonicity; a violation fails the case.

namespace pupcat {

struct CaseResult {
    std::string name;
    bool pass = false;
    bool harness = false; // malformed case, not a semantics failure
    std::string message;  // set when failed
};

namespace corpus_detail {

inline std::string readFile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw JsonIoError("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string describeResource(const Resource& r) {
    return capitalizeType(r.type) + "[" + quoteString(r.title) + "]";
}

// Order-insensitive over resources; parameters must match exactly as maps.
inline std::optional<std::string>
compareCatalog(const std::vector<std::shared_ptr<const Resource>>& expected,
               const Catalog& actual) {
    using Key = std::pair<std::string, std::string>;
    std::map<Key, std::shared_ptr<const Resource>> want;
    for (const auto& r : expected)
        if (!want.emplace(Key{r->type, r->title}, r).second)
            return "invalid case: duplicate expected resource " + describeResource(*r);

    for (const auto& r : actual.items()) {
        auto it = want.find(Key{r->type, r->title});
        if (it == want.end())
            return "unexpected resource " + describeResource(*r);
        const Resource& w = *it->second;
        std::map<std::string, ValuePtr> wantAttrs(w.attrs.begin(), w.attrs.end());
        std::map<std::string, ValuePtr> gotAttrs(r->attrs.begin(), r->attrs.end());
        if (wantAttrs.size() != w.attrs.size() || gotAttrs.size() != r->attrs.size())
            return "duplicate attribute in " + describeResource(*r);
        for (const auto& [name, value] : wantAttrs) {
            auto g = gotAttrs.find(name);
            if (g == gotAttrs.end())
                return describeResource(*r) + " lacks attribute '" + name + "'";
            if (!valueEquals(value, g->second))
                return describeResource(*r) + " attribute '" + name + "': expected " +
                       prettyValue(value) + ", got " + prettyValue(g->second);
        }
        for (const auto& [name, value] : gotAttrs)
            if (!wantAttrs.count(name))
                return describeResource(*r) + " has unexpected attribute '" + name + "'";
        want.erase(it);
    }
    if (!want.empty())
        return "missing resource " + describeResource(*want.begin()->second);
    return std::nullopt;
}

struct Expectation {
    std::optional<Json> catalog;            // expect.json document
    std::optional<std::string> errorKind;   // first line of expect-error.txt
    std::vector<std::string> errorNeedles;  // remaining lines
};

} // namespace corpus_detail

inline CaseResult runCorpusCase(const std::filesystem::path& caseDir,
                                const std::filesystem::path& root) {
    using namespace corpus_detail;
    CaseResult result;
    result.name = std::filesystem::relative(caseDir, root).generic_string();
    if (result.name == ".")
        result.name = caseDir.filename().generic_string();

    std::string node;
    std::string source;
    Facts facts;
    Expectation expect;
    try {
        source = readFile(caseDir / "main.pp");
        node = trim(readFile(caseDir / "node.txt"));
        if (node.empty() || node.find('\n') != std::string::npos)
            throw JsonIoError("node.txt must hold a single node name");
        if (std::filesystem::exists(caseDir / "facts.json"))
            facts = factsFromJson(parseJsonFile((caseDir / "facts.json").string()));

        bool hasCatalog = std::filesystem::exists(caseDir / "expect.json");
        bool hasError = std::filesystem::exists(caseDir / "expect-error.txt");
        if (hasCatalog == hasError)
            throw JsonIoError("need exactly one of expect.json, expect-error.txt");
        if (hasCatalog) {
            Json doc = parseJsonFile((caseDir / "expect.json").string());
            if (!doc.is_object() || !doc.contains("node") || !doc.contains("resources"))
                throw JsonIoError("expect.json must be a catalog document");
            if (doc.at("node").get<std::string>() != node)
                throw JsonIoError("expect.json node does not match node.txt");
            expect.catalog = std::move(doc);
        } else {
            std::istringstream lines(readFile(caseDir / "expect-error.txt"));
            std::string line;
            while (std::getline(lines, line)) {
                line = trim(line);
                if (line.empty())
                    continue;
                if (!expect.errorKind)
                    expect.errorKind = line;
                else
                    expect.errorNeedles.push_back(line);
            }
            if (!expect.errorKind)
                throw JsonIoError("expect-error.txt is empty");
            if (*expect.errorKind != "ParseError" &&
                !errKindFromName(*expect.errorKind))
                throw JsonIoError("unknown error kind '" + *expect.errorKind + "'");
        }
    } catch (const std::exception& e) {
        result.harness = true;
        result.message = e.what();
        return result;
    }

    auto checkNeedles = [&](const std::string& what) -> std::optional<std::string> {
        for (const auto& needle : expect.errorNeedles)
            if (what.find(needle) == std::string::npos)
                return "error message '" + what + "' does not contain '" + needle + "'";
        return std::nullopt;
    };

    EvalOptions opts;
    try {
        ParserOptions popts;
        popts.builtinTypes = opts.builtinTypes;
        ManifestPtr manifest = parseSource(source, popts);
        if (expect.errorKind && *expect.errorKind == "ParseError") {
            result.message = "expected a parse error, but parsing succeeded";
            return result;
        }

        AuditObserver audit(node, opts);
        CompileOutcome out = compile(manifest, node, facts, opts, &audit);
        if (audit.firstViolation()) {
            result.message = "audit: " + *audit.firstViolation();
            return result;
        }
        if (!expect.catalog) {
            result.message = "expected error " + *expect.errorKind +
                             ", but compilation succeeded";
            return result;
        }
        auto expected = resourcesFromJson(expect.catalog->at("resources"));
        if (auto diff = compareCatalog(expected, out.catalog)) {
            result.message = *diff;
            return result;
        }
        result.pass = true;
        return result;
    } catch (const ParseError& e) {
        if (!expect.errorKind || *expect.errorKind != "ParseError") {
            result.message = std::string("unexpected parse error: ") + e.what();
            return result;
        }
        if (auto miss = checkNeedles(e.what())) {
            result.message = *miss;
            return result;
        }
        result.pass = true;
        return result;
    } catch (const CompileError& e) {
        if (!expect.errorKind || *expect.errorKind == "ParseError") {
            result.message = std::string("unexpected compile error: ") + e.what();
            return result;
        }
        if (errKindName(e.kind) != *expect.errorKind) {
            result.message = "expected error kind " + *expect.errorKind + ", got " +
                             errKindName(e.kind) + " (" + e.what() + ")";
            return result;
        }
        if (auto miss = checkNeedles(e.what())) {
            result.message = *miss;
            return result;
        }
        result.pass = true;
        return result;
    } catch (const std::exception& e) {
        result.harness = true;
        result.message = e.what();
        return result;
    }
}

inline std::vector<CaseResult> runCorpusDir(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> cases;
    if (std::filesystem::exists(root / "main.pp")) {
        cases.push_back(root);
    } else {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
            if (entry.is_directory() && std::filesystem::exists(entry.path() / "main.pp"))
                cases.push_back(entry.path());
    }
    std::sort(cases.begin(), cases.end());

    std::vector<CaseResult> results;
    results.reserve(cases.size());
    for (const auto& dir : cases)
        results.push_back(runCorpusCase(dir, root));
    return results;
}

} // namespace pupcat
