#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pupcat/corpus.hpp"
#include "pupcat/json_io.hpp"
#include "pupcat/parser.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCompileError = 1;
constexpr int kExitParseError = 2;
constexpr int kExitIoError = 3;

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw pupcat::JsonIoError("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void printPretty(std::ostream& out, const pupcat::Catalog& catalog,
                 const std::string& node) {
    out << "catalog for node " << node << " (" << catalog.size() << " resource"
        << (catalog.size() == 1 ? "" : "s") << ")\n";
    for (const auto& r : catalog.items()) {
        out << pupcat::capitalizeType(r->type) << "[" << pupcat::quoteString(r->title)
            << "]\n";
        for (const auto& [name, value] : r->attrs)
            out << "  " << name << " => " << pupcat::prettyValue(value) << "\n";
    }
}

int runCompile(const std::string& manifestPath, const std::string& node,
               const std::string& factsPath, const std::string& outPath,
               const std::string& tracePath, long long maxSteps, bool paperDivergence,
               const std::vector<std::string>& extraTypes, const std::string& format) {
    pupcat::EvalOptions opts;
    opts.maxSteps = maxSteps;
    opts.paperDivergence = paperDivergence;
    for (const auto& t : extraTypes)
        opts.builtinTypes.insert(t);

    std::string source;
    pupcat::Facts facts;
    try {
        source = readFile(manifestPath);
        if (!factsPath.empty())
            facts = pupcat::factsFromJson(pupcat::parseJsonFile(factsPath));
    } catch (const std::exception& e) {
        std::cerr << "pupcat: " << e.what() << "\n";
        return kExitIoError;
    }

    pupcat::ManifestPtr manifest;
    try {
        pupcat::ParserOptions popts;
        popts.builtinTypes = opts.builtinTypes;
        manifest = pupcat::parseSource(source, popts);
    } catch (const pupcat::ParseError& e) {
        std::cerr << "pupcat: " << manifestPath << ": " << e.what() << "\n";
        return kExitParseError;
    }

    std::ofstream traceFile;
    std::unique_ptr<pupcat::TraceWriter> trace;
    if (!tracePath.empty()) {
        traceFile.open(tracePath);
        if (!traceFile) {
            std::cerr << "pupcat: cannot open " << tracePath << " for writing\n";
            return kExitIoError;
        }
        trace = std::make_unique<pupcat::TraceWriter>(traceFile);
    }

    pupcat::CompileOutcome outcome;
    try {
        outcome = pupcat::compile(manifest, node, facts, opts, trace.get());
    } catch (const pupcat::CompileError& e) {
        std::cerr << "pupcat: " << e.what() << "\n";
        return kExitCompileError;
    }

    try {
        if (format == "pretty") {
            if (outPath.empty()) {
                printPretty(std::cout, outcome.catalog, node);
            } else {
                std::ofstream out(outPath);
                if (!out)
                    throw pupcat::JsonIoError("cannot open " + outPath + " for writing");
                printPretty(out, outcome.catalog, node);
            }
        } else {
            pupcat::Json doc = pupcat::catalogToJson(outcome.catalog, node);
            if (outPath.empty()) {
                std::cout << doc.dump(2) << "\n";
            } else {
                std::ofstream out(outPath);
                if (!out)
                    throw pupcat::JsonIoError("cannot open " + outPath + " for writing");
                out << doc.dump(2) << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "pupcat: " << e.what() << "\n";
        return kExitIoError;
    }
    return kExitOk;
}

int runTest(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        std::cerr << "pupcat: " << dir << " is not a directory\n";
        return kExitIoError;
    }
    auto results = pupcat::runCorpusDir(dir);
    size_t passed = 0;
    for (const auto& r : results) {
        if (r.pass) {
            ++passed;
            std::cout << "PASS " << r.name << "\n";
        } else if (r.harness) {
            std::cout << "ERROR " << r.name << ": " << r.message << "\n";
        } else {
            std::cout << "FAIL " << r.name << ": " << r.message << "\n";
        }
    }
    std::cout << passed << "/" << results.size() << " cases passed\n";
    return passed == results.size() ? kExitOk : kExitCompileError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"compiles declarative Puppet-style manifests to per-node catalogs"};
    app.require_subcommand(1);

    std::string manifestPath, node, factsPath, outPath, tracePath;
    std::string format = "json";
    long long maxSteps = 1000000;
    bool paperDivergence = false;
    std::vector<std::string> extraTypes;

    CLI::App* compile =
        app.add_subcommand("compile", "compile a manifest to a catalog for one node");
    compile->add_option("manifest", manifestPath, "manifest file (.pp)")->required();
    compile->add_option("--node", node, "node name to compile for")->required();
    compile->add_option("--facts", factsPath, "JSON file with top-scope facts");
    compile->add_option("--out", outPath, "write the catalog here instead of stdout");
    compile->add_option("--trace", tracePath, "write an NDJSON step trace here");
    compile->add_option("--max-steps", maxSteps, "step budget before giving up")
        ->check(CLI::PositiveNumber);
    compile->add_flag("--paper-divergence", paperDivergence,
                      "loop on inheritance cycles instead of reporting them");
    compile->add_option("--builtin-types", extraTypes,
                        "additional built-in resource type names")
        ->delimiter(',');
    compile->add_option("--format", format, "catalog output format")
        ->check(CLI::IsMember({"json", "pretty"}));

    std::string corpusDir;
    CLI::App* test = app.add_subcommand("test", "run a conformance corpus directory");
    test->add_option("dir", corpusDir, "directory with .pp/.expect.json cases")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitParseError;
    }

    if (compile->parsed())
        return runCompile(manifestPath, node, factsPath, outPath, tracePath, maxSteps,
                          paperDivergence, extraTypes, format);
    return runTest(corpusDir);
}
