#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "pupcat/corpus.hpp"

using namespace pupcat;
namespace fs = std::filesystem;

namespace {

// Scratch corpus directory, removed when the test section ends.
struct TempCorpus {
    fs::path root;

    TempCorpus() {
        static int counter = 0;
        root = fs::temp_directory_path() /
               ("pupcat_corpus_test_" + std::to_string(++counter));
        fs::remove_all(root);
        fs::create_directories(root);
    }

    ~TempCorpus() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }

    fs::path makeCase(const std::string& name,
                      const std::vector<std::pair<std::string, std::string>>& files) {
        fs::path dir = root / name;
        fs::create_directories(dir);
        for (const auto& [fname, text] : files)
            std::ofstream(dir / fname) << text;
        return dir;
    }
};

CaseResult runOne(const std::vector<std::pair<std::string, std::string>>& files) {
    TempCorpus tmp;
    fs::path dir = tmp.makeCase("case", files);
    return runCorpusCase(dir, tmp.root);
}

} // namespace

TEST_CASE("the shipped corpus passes in full", "[corpus]") {
    fs::path root = fs::path(PUPCAT_SOURCE_DIR) / "corpus";
    auto results = runCorpusDir(root);
    REQUIRE(results.size() == 76);
    for (const auto& r : results) {
        INFO(r.name + ": " + r.message);
        CHECK(r.pass);
        CHECK_FALSE(r.harness);
    }
}

TEST_CASE("corpus discovery", "[corpus]") {
    SECTION("a root that is itself a case runs once") {
        TempCorpus tmp;
        tmp.makeCase(".", {{"main.pp", "file { 'x': }"},
                           {"node.txt", "n\n"},
                           {"expect.json",
                            "{\"node\": \"n\", \"resources\": "
                            "[{\"type\": \"file\", \"title\": \"x\"}]}"}});
        auto results = runCorpusDir(tmp.root);
        REQUIRE(results.size() == 1);
        REQUIRE(results[0].pass);
        REQUIRE(results[0].name == tmp.root.filename().generic_string());
    }

    SECTION("nested cases are found and sorted") {
        TempCorpus tmp;
        tmp.makeCase("b/deep", {{"main.pp", "file { 'x': }"},
                                {"node.txt", "n"},
                                {"expect.json",
                                 "{\"node\": \"n\", \"resources\": "
                                 "[{\"type\": \"file\", \"title\": \"x\"}]}"}});
        tmp.makeCase("a", {{"main.pp", "include ghost"},
                           {"node.txt", "n"},
                           {"expect-error.txt", "UndefinedDefinition"}});
        auto results = runCorpusDir(tmp.root);
        REQUIRE(results.size() == 2);
        REQUIRE(results[0].name == "a");
        REQUIRE(results[1].name == "b/deep");
        REQUIRE(results[0].pass);
        REQUIRE(results[1].pass);
    }
}

TEST_CASE("catalog expectations", "[corpus]") {
    SECTION("resources compare order-insensitively") {
        CaseResult r = runOne(
            {{"main.pp", "file { 'a': owner => 'x' } package { 'p': }"},
             {"node.txt", "n"},
             {"expect.json",
              "{\"node\": \"n\", \"resources\": ["
              "{\"type\": \"package\", \"title\": \"p\", \"parameters\": {}},"
              "{\"type\": \"file\", \"title\": \"a\", \"parameters\": {\"owner\": \"x\"}}]}"}});
        INFO(r.message);
        REQUIRE(r.pass);
    }

    SECTION("attribute value mismatch") {
        CaseResult r = runOne(
            {{"main.pp", "file { 'a': owner => 'x' }"},
             {"node.txt", "n"},
             {"expect.json",
              "{\"node\": \"n\", \"resources\": ["
              "{\"type\": \"file\", \"title\": \"a\", \"parameters\": {\"owner\": \"y\"}}]}"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE_FALSE(r.harness);
        REQUIRE(r.message == "File['a'] attribute 'owner': expected 'y', got 'x'");
    }

    SECTION("missing expected attribute") {
        CaseResult r = runOne(
            {{"main.pp", "file { 'a': owner => 'x' }"},
             {"node.txt", "n"},
             {"expect.json",
              "{\"node\": \"n\", \"resources\": [{\"type\": \"file\", \"title\": \"a\", "
              "\"parameters\": {\"owner\": \"x\", \"q\": 1}}]}"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message == "File['a'] lacks attribute 'q'");
    }

    SECTION("surplus actual attribute") {
        CaseResult r = runOne(
            {{"main.pp", "file { 'a': owner => 'x' }"},
             {"node.txt", "n"},
             {"expect.json",
              "{\"node\": \"n\", \"resources\": ["
              "{\"type\": \"file\", \"title\": \"a\", \"parameters\": {}}]}"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message == "File['a'] has unexpected attribute 'owner'");
    }

    SECTION("unexpected resource") {
        CaseResult r = runOne(
            {{"main.pp", "file { 'a': } package { 'p': }"},
             {"node.txt", "n"},
             {"expect.json",
              "{\"node\": \"n\", \"resources\": ["
              "{\"type\": \"file\", \"title\": \"a\", \"parameters\": {}}]}"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message == "unexpected resource Package['p']");
    }

    SECTION("missing resource") {
        CaseResult r = runOne(
            {{"main.pp", "file { 'a': }"},
             {"node.txt", "n"},
             {"expect.json",
              "{\"node\": \"n\", \"resources\": ["
              "{\"type\": \"file\", \"title\": \"a\", \"parameters\": {}},"
              "{\"type\": \"service\", \"title\": \"s\", \"parameters\": {}}]}"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message == "missing resource Service['s']");
    }

    SECTION("a duplicate expected resource marks the case invalid") {
        CaseResult r = runOne(
            {{"main.pp", "file { 'a': }"},
             {"node.txt", "n"},
             {"expect.json",
              "{\"node\": \"n\", \"resources\": ["
              "{\"type\": \"file\", \"title\": \"a\", \"parameters\": {}},"
              "{\"type\": \"file\", \"title\": \"a\", \"parameters\": {}}]}"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message == "invalid case: duplicate expected resource File['a']");
    }

    SECTION("facts feed the compilation") {
        CaseResult r = runOne(
            {{"main.pp", "file { 'f': owner => $who }"},
             {"node.txt", "n"},
             {"facts.json", "{\"who\": \"alice\"}"},
             {"expect.json",
              "{\"node\": \"n\", \"resources\": [{\"type\": \"file\", \"title\": \"f\", "
              "\"parameters\": {\"owner\": \"alice\"}}]}"}});
        INFO(r.message);
        REQUIRE(r.pass);
    }
}

TEST_CASE("error expectations", "[corpus]") {
    SECTION("kind alone suffices") {
        CaseResult r = runOne({{"main.pp", "include ghost"},
                               {"node.txt", "n"},
                               {"expect-error.txt", "UndefinedDefinition\n"}});
        INFO(r.message);
        REQUIRE(r.pass);
    }

    SECTION("extra lines are message substrings") {
        CaseResult r = runOne(
            {{"main.pp", "include ghost"},
             {"node.txt", "n"},
             {"expect-error.txt", "UndefinedDefinition\nclass 'ghost' is not defined\n"}});
        INFO(r.message);
        REQUIRE(r.pass);
    }

    SECTION("a missing substring fails the case") {
        CaseResult r = runOne({{"main.pp", "include ghost"},
                               {"node.txt", "n"},
                               {"expect-error.txt", "UndefinedDefinition\nzzz-not-there\n"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message.find("does not contain 'zzz-not-there'") != std::string::npos);
    }

    SECTION("the wrong kind fails with both names") {
        CaseResult r = runOne({{"main.pp", "include ghost"},
                               {"node.txt", "n"},
                               {"expect-error.txt", "DuplicateVariable"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message.find("expected error kind DuplicateVariable, got "
                               "UndefinedDefinition") == 0);
    }

    SECTION("expected errors must actually happen") {
        CaseResult r = runOne({{"main.pp", "$x = 1"},
                               {"node.txt", "n"},
                               {"expect-error.txt", "UndefinedVariable"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message == "expected error UndefinedVariable, but compilation succeeded");
    }

    SECTION("parse errors match the ParseError pseudo-kind") {
        CaseResult r = runOne({{"main.pp", "$x = @gone"},
                               {"node.txt", "n"},
                               {"expect-error.txt", "ParseError\nvirtual resources\n"}});
        INFO(r.message);
        REQUIRE(r.pass);
    }

    SECTION("an expected parse error that parses fails") {
        CaseResult r = runOne({{"main.pp", "$x = 1"},
                               {"node.txt", "n"},
                               {"expect-error.txt", "ParseError"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message == "expected a parse error, but parsing succeeded");
    }

    SECTION("a parse error where a catalog was expected") {
        CaseResult r = runOne(
            {{"main.pp", "$x = @gone"},
             {"node.txt", "n"},
             {"expect.json", "{\"node\": \"n\", \"resources\": []}"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE_FALSE(r.harness);
        REQUIRE(r.message.find("unexpected parse error: ") == 0);
    }

    SECTION("a compile error where a catalog was expected") {
        CaseResult r = runOne(
            {{"main.pp", "include ghost"},
             {"node.txt", "n"},
             {"expect.json", "{\"node\": \"n\", \"resources\": []}"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message.find("unexpected compile error: ") == 0);
    }

    SECTION("a compile error cannot satisfy a ParseError expectation") {
        // parsing succeeds, so the case fails before evaluation even starts
        CaseResult r = runOne({{"main.pp", "include ghost"},
                               {"node.txt", "n"},
                               {"expect-error.txt", "ParseError"}});
        REQUIRE_FALSE(r.pass);
        REQUIRE(r.message == "expected a parse error, but parsing succeeded");
    }
}

TEST_CASE("malformed cases are harness errors", "[corpus]") {
    auto harness = [](const std::vector<std::pair<std::string, std::string>>& files) {
        CaseResult r = runOne(files);
        REQUIRE(r.harness);
        REQUIRE_FALSE(r.pass);
        return r.message;
    };

    SECTION("missing main.pp") {
        std::string msg = harness({{"node.txt", "n"}, {"expect-error.txt", "ParseError"}});
        REQUIRE(msg.find("cannot open") == 0);
        REQUIRE(msg.find("main.pp") != std::string::npos);
    }

    SECTION("missing node.txt") {
        std::string msg = harness({{"main.pp", "$x = 1"},
                                   {"expect.json", "{\"node\": \"n\", \"resources\": []}"}});
        REQUIRE(msg.find("node.txt") != std::string::npos);
    }

    SECTION("multi-line node.txt") {
        REQUIRE(harness({{"main.pp", "$x = 1"},
                         {"node.txt", "a\nb"},
                         {"expect.json", "{\"node\": \"a\", \"resources\": []}"}}) ==
                "node.txt must hold a single node name");
    }

    SECTION("both expectation files") {
        REQUIRE(harness({{"main.pp", "$x = 1"},
                         {"node.txt", "n"},
                         {"expect.json", "{\"node\": \"n\", \"resources\": []}"},
                         {"expect-error.txt", "ParseError"}}) ==
                "need exactly one of expect.json, expect-error.txt");
    }

    SECTION("neither expectation file") {
        REQUIRE(harness({{"main.pp", "$x = 1"}, {"node.txt", "n"}}) ==
                "need exactly one of expect.json, expect-error.txt");
    }

    SECTION("empty expect-error.txt") {
        REQUIRE(harness({{"main.pp", "$x = 1"},
                         {"node.txt", "n"},
                         {"expect-error.txt", "\n  \n"}}) == "expect-error.txt is empty");
    }

    SECTION("unknown error kind name") {
        REQUIRE(harness({{"main.pp", "$x = 1"},
                         {"node.txt", "n"},
                         {"expect-error.txt", "Bogus"}}) == "unknown error kind 'Bogus'");
    }

    SECTION("expect.json that is not a catalog document") {
        REQUIRE(harness({{"main.pp", "$x = 1"},
                         {"node.txt", "n"},
                         {"expect.json", "[1, 2]"}}) ==
                "expect.json must be a catalog document");
    }

    SECTION("expect.json for a different node") {
        REQUIRE(harness({{"main.pp", "$x = 1"},
                         {"node.txt", "n"},
                         {"expect.json", "{\"node\": \"m\", \"resources\": []}"}}) ==
                "expect.json node does not match node.txt");
    }

    SECTION("invalid facts.json") {
        std::string msg = harness({{"main.pp", "$x = 1"},
                                   {"node.txt", "n"},
                                   {"facts.json", "{\"9bad\": 1}"},
                                   {"expect.json", "{\"node\": \"n\", \"resources\": []}"}});
        REQUIRE(msg == "invalid fact name '9bad'");
    }
}
