// End-to-end acceptance checks. Each numbered check prints exactly one
// PASS/FAIL line; the exit status is nonzero if any check fails. Unlike the
// unit suites this binary exercises the shipped corpus, the generator, and
// the installed CLI binary together.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "pupcat/audit.hpp"
#include "pupcat/corpus.hpp"
#include "pupcat/gen.hpp"
#include "pupcat/json_io.hpp"
#include "pupcat/parser.hpp"

#ifndef PUPCAT_SOURCE_DIR
#error "PUPCAT_SOURCE_DIR must point at the repository root"
#endif
#ifndef PUPCAT_CLI_PATH
#error "PUPCAT_CLI_PATH must point at the pupcat CLI binary"
#endif

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int failures = 0;

double msSince(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void report(int number, const std::string& label, bool ok, const std::string& detail) {
    if (ok) {
        std::printf("PASS %2d %s\n", number, label.c_str());
    } else {
        ++failures;
        std::printf("FAIL %2d %s: %s\n", number, label.c_str(), detail.c_str());
    }
    std::fflush(stdout);
}

// Accumulates reasons; empty means the check passed.
struct Check {
    std::string detail;
    bool ok() const { return detail.empty(); }
    void require(bool cond, const std::string& why) {
        if (!cond && detail.empty())
            detail = why;
    }
};

struct RunResult {
    bool ok = false;
    bool parseFailed = false;
    pupcat::Catalog catalog;
    pupcat::DefEnv defs;
    pupcat::ErrKind errKind = pupcat::ErrKind::InternalStuck;
    std::string errWhat;
    long long steps = 0;
};

RunResult compileSource(const std::string& source, const std::string& node,
                        const pupcat::Facts& facts = {},
                        const pupcat::EvalOptions& opts = {},
                        pupcat::StepObserver* observer = nullptr) {
    RunResult r;
    try {
        pupcat::ParserOptions popts;
        popts.builtinTypes = opts.builtinTypes;
        pupcat::ManifestPtr m = pupcat::parseSource(source, popts);
        pupcat::CompileOutcome out = pupcat::compile(m, node, facts, opts, observer);
        r.ok = true;
        r.catalog = out.catalog;
        r.defs = out.finalState.defs;
        r.steps = out.steps;
    } catch (const pupcat::ParseError& e) {
        r.parseFailed = true;
        r.errWhat = e.what();
    } catch (const pupcat::CompileError& e) {
        r.errKind = e.kind;
        r.errWhat = e.what();
    }
    return r;
}

std::string attrString(const pupcat::Catalog& catalog, const std::string& type,
                       const std::string& title, const std::string& attr) {
    auto v = catalog.lookup(type, title, attr);
    if (!v)
        return "<absent>";
    if (auto* s = std::get_if<std::string>(&(*v)->v))
        return *s;
    return "<not a string>";
}

std::string readWholeFile(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string firstLine(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

struct CliResult {
    int exitCode = -1;
    std::string output;
};

CliResult runCli(const std::string& args) {
    CliResult r;
    std::string cmd = std::string(PUPCAT_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return r;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0)
        r.output.append(buf, n);
    int status = pclose(pipe);
    if (WIFEXITED(status))
        r.exitCode = WEXITSTATUS(status);
    return r;
}

std::vector<fs::path> corpusCaseDirs(const fs::path& root) {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "main.pp"))
            dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

const char* kSshManifest = R"PP(
class ssh::params {
  case $::osfamily {
    'Debian': { $sshd_package = 'ssh' }
    'RedHat': { $sshd_package = 'openssh-server' }
    default: { fail("SSH class not supported") }
  }
}

class ssh ($ssh_pkg = $::ssh::params::sshd_package) inherits ssh::params {
  package { $ssh_pkg:
    ensure => installed
  }
}

node 'ssh.example.com' {
  include ssh
}
)PP";

const char* kThreeServicesManifest = R"PP(
node default {
  $source = '/source'
  include service1
}

class service1 {
  $mode = 123

  include service2

  file { 'config1':
    path => 'path1',
    source => $source,
    mode => $mode,
    checksum => $checksum,
    provider => $provider,
    recurse => $recurse
  }

  $checksum = md5
}

class service2 inherits service3 {
  $recurse = true

  file { 'config2':
    path => 'path2',
    source => $source,
    mode => $mode,
    checksum => $checksum,
    provider => $provider,
    recurse => $recurse
  }
}

class service3 {
  $provider = posix

  file { 'config3':
    path => 'path3',
    mode => $mode,
    checksum => $checksum,
    recurse => $recurse
  }
}
)PP";

const char* kClassParamsManifest = R"PP(
class c (
  $backupArg = false,
  $pathArg = '/default',
  $modeArg = 123 ) {

  file { 'from_class':
    backup => $backupArg,
    source => $pathArg,
    path => $path,
    mode => $modeArg
  }
}

define d (
  $backupArg = false,
  $pathArg = '/default',
  $modeArg = 123 ) {

  file { 'from_define':
    backup => $backupArg,
    source => $pathArg,
    path => $path,
    mode => $modeArg
  }
}

node default {

  $backup = true

  class { c:
    backupArg => $backup,
    pathArg => $path
  }

  d { "service3":
    backupArg => $backup,
    pathArg => $path
  }

  $path = '/path'
}
)PP";

const char* kRefDerefManifest = R"PP(
file { "foo.txt":
  owner => "alice"
}
$y = "foo.txt"
$x = File[$y]
file { "bar.txt":
  owner => $x["owner"]
}
)PP";

void check1SshExample() {
    Check c;
    pupcat::Facts facts;
    facts.emplace_back("osfamily", pupcat::strValue("Debian"));
    auto start = Clock::now();
    RunResult r = compileSource(kSshManifest, "ssh.example.com", facts);
    double ms = msSince(start);
    c.require(r.ok, "compilation failed: " + r.errWhat);
    if (r.ok) {
        c.require(r.catalog.size() == 1,
                  "expected exactly 1 resource, got " + std::to_string(r.catalog.size()));
        const pupcat::ResourcePtr* res = r.catalog.find("package", "ssh");
        c.require(res != nullptr, "catalog lacks package['ssh']");
        if (res) {
            c.require((*res)->attrs.size() == 1, "package['ssh'] should carry one attribute");
            c.require(attrString(r.catalog, "package", "ssh", "ensure") == "installed",
                      "package['ssh'] ensure is " +
                          attrString(r.catalog, "package", "ssh", "ensure"));
        }
    }
    c.require(ms < 1000.0, "took " + std::to_string(ms) + " ms");
    report(1, "ssh example fidelity", c.ok(), c.detail);
}

void check2StrictModeDivergence() {
    Check c;

    auto start = Clock::now();
    RunResult r1 = compileSource(kThreeServicesManifest, "host.example.com");
    double ms1 = msSince(start);
    c.require(!r1.ok && !r1.parseFailed, "three-services manifest should hit a compile error");
    if (!r1.ok && !r1.parseFailed) {
        c.require(r1.errKind == pupcat::ErrKind::UndefinedDefinition,
                  "three-services manifest raised " + std::string(pupcat::errKindName(r1.errKind)) +
                      " instead of UndefinedDefinition");
        c.require(r1.errWhat.find("service1") != std::string::npos,
                  "error does not name service1: " + r1.errWhat);
    }
    c.require(ms1 < 1000.0, "three-services compile took " + std::to_string(ms1) + " ms");

    start = Clock::now();
    RunResult r2 = compileSource(kClassParamsManifest, "host.example.com");
    double ms2 = msSince(start);
    c.require(!r2.ok && !r2.parseFailed, "class-parameters manifest should hit a compile error");
    if (!r2.ok && !r2.parseFailed) {
        c.require(r2.errKind == pupcat::ErrKind::UndefinedVariable,
                  "class-parameters manifest raised " + std::string(pupcat::errKindName(r2.errKind)) +
                      " instead of UndefinedVariable");
        c.require(r2.errWhat.find("$path") != std::string::npos,
                  "error does not name $path: " + r2.errWhat);
    }
    c.require(ms2 < 1000.0, "class-parameters compile took " + std::to_string(ms2) + " ms");

    report(2, "strict-mode divergence", c.ok(), c.detail);
}

void check3ResourceReference() {
    Check c;
    RunResult r = compileSource(kRefDerefManifest, "any.example.com");
    c.require(r.ok, "compilation failed: " + r.errWhat);
    if (r.ok) {
        c.require(r.catalog.size() == 2,
                  "expected 2 resources, got " + std::to_string(r.catalog.size()));
        c.require(attrString(r.catalog, "file", "foo.txt", "owner") == "alice",
                  "foo.txt owner is " + attrString(r.catalog, "file", "foo.txt", "owner"));
        c.require(attrString(r.catalog, "file", "bar.txt", "owner") == "alice",
                  "bar.txt owner is " + attrString(r.catalog, "file", "bar.txt", "owner"));
    }
    report(3, "resource reference dereference", c.ok(), c.detail);
}

void check4CorpusCoverage() {
    Check c;
    const fs::path root = fs::path(PUPCAT_SOURCE_DIR) / "corpus";
    auto results = pupcat::runCorpusDir(root);
    c.require(results.size() >= 40,
              "corpus has only " + std::to_string(results.size()) + " cases");

    size_t statements = 0, nodes = 0, resources = 0, classes = 0, unsupported = 0,
           errors = 0;
    for (const auto& r : results) {
        if (!r.pass) {
            c.require(false, (r.harness ? "harness error in " : "failing case ") + r.name +
                                 ": " + r.message);
            break;
        }
        if (r.name.rfind("statements/", 0) == 0)
            ++statements;
        else if (r.name.rfind("nodes/", 0) == 0)
            ++nodes;
        else if (r.name.rfind("resources/", 0) == 0)
            ++resources;
        else if (r.name.rfind("classes/", 0) == 0)
            ++classes;
        else if (r.name.rfind("unsupported/", 0) == 0)
            ++unsupported;
        else if (r.name.rfind("errors/", 0) == 0)
            ++errors;
    }
    c.require(statements >= 11, "statement coverage: " + std::to_string(statements));
    c.require(nodes >= 8, "node coverage: " + std::to_string(nodes));
    c.require(resources >= 4, "resource coverage: " + std::to_string(resources));
    c.require(classes >= 5, "class coverage: " + std::to_string(classes));
    c.require(errors >= 1, "error-case coverage: " + std::to_string(errors));
    c.require(unsupported >= 1, "unsupported coverage: " + std::to_string(unsupported));

    // Every unsupported-construct case must pin a clean parse rejection.
    for (const auto& dir : corpusCaseDirs(root / "unsupported")) {
        std::string kind = firstLine(readWholeFile(dir / "expect-error.txt"));
        c.require(kind == "ParseError",
                  dir.filename().string() + " expects '" + kind + "', not ParseError");
    }
    report(4, "corpus category coverage", c.ok(), c.detail);
}

// Shared by checks 5 and 6: compiles the corpus and 1,000 generated
// manifests under the auditing observer, which re-derives the applicable
// rule set and the growth invariant at every step.
struct AuditTotals {
    long long steps = 0;
    long long manifests = 0;
    long long corpusManifests = 0;
    double elapsedMs = 0;
    std::vector<std::string> violations;
};

AuditTotals runAuditSweep() {
    AuditTotals totals;
    auto start = Clock::now();

    const fs::path root = fs::path(PUPCAT_SOURCE_DIR) / "corpus";
    for (const auto& dir : corpusCaseDirs(root)) {
        std::string source = readWholeFile(dir / "main.pp");
        std::string node = firstLine(readWholeFile(dir / "node.txt"));
        while (!node.empty() && (node.back() == '\r' || node.back() == ' '))
            node.pop_back();
        pupcat::Facts facts;
        if (fs::exists(dir / "facts.json"))
            facts = pupcat::factsFromJson(pupcat::parseJsonFile((dir / "facts.json").string()));

        pupcat::EvalOptions opts;
        pupcat::AuditObserver audit(node, opts);
        RunResult r = compileSource(source, node, facts, opts, &audit);
        if (r.parseFailed)
            continue; // unsupported-construct cases never start stepping
        totals.steps += audit.steps();
        ++totals.manifests;
        ++totals.corpusManifests;
        if (audit.firstViolation())
            totals.violations.push_back(dir.string() + ": " + *audit.firstViolation());
    }

    for (unsigned long long seed = 1; seed <= 1000; ++seed) {
        pupcat::GenOutput g = pupcat::genSafeManifest(seed);
        pupcat::EvalOptions opts;
        if (g.maxSteps > 0)
            opts.maxSteps = g.maxSteps;
        opts.paperDivergence = g.paperDivergence;
        pupcat::AuditObserver audit(g.node, opts);
        try {
            pupcat::compile(g.manifest, g.node, g.facts, opts, &audit);
        } catch (const pupcat::CompileError& e) {
            totals.violations.push_back("seed " + std::to_string(seed) +
                                        ": safe manifest failed: " + e.what());
        }
        totals.steps += audit.steps();
        ++totals.manifests;
        if (audit.firstViolation())
            totals.violations.push_back("seed " + std::to_string(seed) + ": " +
                                        *audit.firstViolation());
    }

    totals.elapsedMs = msSince(start);
    return totals;
}

void check5Determinism(const AuditTotals& totals) {
    Check c;
    c.require(totals.violations.empty(),
              totals.violations.empty() ? "" : totals.violations.front());
    c.require(totals.corpusManifests > 0, "no corpus manifests were audited");
    c.require(totals.manifests >= totals.corpusManifests + 1000,
              "audited only " + std::to_string(totals.manifests) + " manifests");
    c.require(totals.steps >= 100000,
              "only " + std::to_string(totals.steps) + " steps were audited");
    c.require(totals.elapsedMs < 60000.0,
              "sweep took " + std::to_string(totals.elapsedMs) + " ms");
    std::string label = "determinism audit (" + std::to_string(totals.steps) +
                        " steps across " + std::to_string(totals.manifests) + " manifests, " +
                        std::to_string(static_cast<long long>(totals.elapsedMs)) + " ms)";
    report(5, label, c.ok(), c.detail);
}

void check6Monotonicity(const AuditTotals& totals) {
    Check c;
    c.require(totals.violations.empty(),
              totals.violations.empty() ? "" : totals.violations.front());

    // Injected fault: a binding silently changes its value between steps.
    pupcat::EvalState before1, after1;
    before1.vars = *pupcat::VarEnv().bind(pupcat::Scope::top(), "x", pupcat::intValue(1));
    after1.vars = *pupcat::VarEnv().bind(pupcat::Scope::top(), "x", pupcat::intValue(2));
    auto v1 = pupcat::checkMonotone(before1, after1);
    c.require(v1.has_value(), "changed-binding fault was accepted");
    if (v1)
        c.require(v1->find("changed value") != std::string::npos,
                  "changed-binding fault reported as: " + *v1);

    // Injected fault: a declared class reverts to an undeclared definition.
    pupcat::EvalState before2, after2;
    before2.defs = before2.defs.declare("c", pupcat::Scope::top());
    after2.defs = *pupcat::DefEnv().define("c", pupcat::ClassDefn{std::nullopt, {}, nullptr});
    auto v2 = pupcat::checkMonotone(before2, after2);
    c.require(v2.has_value(), "undeclared-class fault was accepted");
    if (v2)
        c.require(v2->find("was undone") != std::string::npos,
                  "undeclared-class fault reported as: " + *v2);

    report(6, "monotonicity audit", c.ok(), c.detail);
}

void check7NodeScopeDynamics() {
    Check c;

    const char* inNode = R"PP(
class c {
  $v = $nodevar
  notify { 'got':
    message => $v
  }
}
node 'n.example' {
  $nodevar = 'from-node'
  include c
}
)PP";
    RunResult ok = compileSource(inNode, "n.example");
    c.require(ok.ok, "node-scope include failed: " + ok.errWhat);
    if (ok.ok) {
        c.require(attrString(ok.catalog, "notify", "got", "message") == "from-node",
                  "notify['got'] message is " +
                      attrString(ok.catalog, "notify", "got", "message"));
        const pupcat::Definition* def = ok.defs.lookup("c");
        auto* declared = def ? std::get_if<pupcat::DeclaredClassDefn>(def) : nullptr;
        c.require(declared != nullptr, "class c was not declared");
        if (declared)
            c.require(declared->parentScope == pupcat::Scope::node(),
                      "class c parent scope is " + declared->parentScope.str() +
                          ", expected ::nd");
    }

    const char* atTop = R"PP(
class c {
  $v = $nodevar
  notify { 'got':
    message => $v
  }
}
node 'n.example' {
  $nodevar = 'from-node'
}
include c
)PP";
    RunResult bad = compileSource(atTop, "n.example");
    c.require(!bad.ok && !bad.parseFailed, "top-level include should fail");
    if (!bad.ok && !bad.parseFailed) {
        c.require(bad.errKind == pupcat::ErrKind::UndefinedVariable,
                  "top-level include raised " + std::string(pupcat::errKindName(bad.errKind)));
        c.require(bad.errWhat.find("$nodevar") != std::string::npos,
                  "error does not name $nodevar: " + bad.errWhat);
    }

    report(7, "node scope dynamics", c.ok(), c.detail);
}

void check8IdempotenceAndDuplicates() {
    Check c;

    const char* once = R"PP(
class a {
  notify { 'n':
    message => 'hello'
  }
}
include a
)PP";
    const char* twice = R"PP(
class a {
  notify { 'n':
    message => 'hello'
  }
}
include a
include a
)PP";
    RunResult r1 = compileSource(once, "h.example");
    RunResult r2 = compileSource(twice, "h.example");
    c.require(r1.ok && r2.ok, "include cases failed to compile");
    if (r1.ok && r2.ok) {
        std::string d1 = pupcat::catalogToJson(r1.catalog, "h.example").dump(2);
        std::string d2 = pupcat::catalogToJson(r2.catalog, "h.example").dump(2);
        c.require(d1 == d2, "double include produced a different catalog");
    }

    RunResult dupRes = compileSource(
        "file { 'f': owner => 'a' }\nfile { 'f': owner => 'a' }\n", "h.example");
    c.require(!dupRes.ok && dupRes.errKind == pupcat::ErrKind::DuplicateResource,
              "double resource raised " +
                  (dupRes.ok ? std::string("no error")
                             : std::string(pupcat::errKindName(dupRes.errKind))));

    RunResult redecl = compileSource(
        "class a { $x = 1 }\ninclude a\nclass { 'a': }\n", "h.example");
    c.require(!redecl.ok && redecl.errKind == pupcat::ErrKind::ClassAlreadyDeclared,
              "class redeclaration raised " +
                  (redecl.ok ? std::string("no error")
                             : std::string(pupcat::errKindName(redecl.errKind))));

    RunResult dupVar = compileSource("$x = 1\n$x = 2\n", "h.example");
    c.require(!dupVar.ok && dupVar.errKind == pupcat::ErrKind::DuplicateVariable,
              "double assignment raised " +
                  (dupVar.ok ? std::string("no error")
                             : std::string(pupcat::errKindName(dupVar.errKind))));

    report(8, "include idempotence and duplicate errors", c.ok(), c.detail);
}

void check9InheritanceCycles(const fs::path& tmp) {
    Check c;
    fs::path manifest = tmp / "cycle.pp";
    std::ofstream(manifest) << "class a inherits a {\n  $x = 1\n}\ninclude a\n";

    CliResult plain = runCli("compile " + manifest.string() + " --node n.example");
    c.require(plain.exitCode == 1,
              "default run exited " + std::to_string(plain.exitCode) + ": " + plain.output);
    c.require(plain.output.find("InheritanceCycle") != std::string::npos,
              "default run did not report InheritanceCycle: " + plain.output);

    CliResult diverged = runCli("compile " + manifest.string() +
                                " --node n.example --paper-divergence --max-steps 5000");
    c.require(diverged.exitCode == 1, "paper-divergence run exited " +
                                          std::to_string(diverged.exitCode) + ": " +
                                          diverged.output);
    c.require(diverged.output.find("StepLimitExceeded") != std::string::npos,
              "paper-divergence run did not hit the step limit: " + diverged.output);

    report(9, "inheritance cycle handling", c.ok(), c.detail);
}

void check10ByteIdenticalOutput(const fs::path& tmp) {
    Check c;
    const fs::path root = fs::path(PUPCAT_SOURCE_DIR) / "corpus";
    size_t compared = 0;
    for (const auto& dir : corpusCaseDirs(root)) {
        if (!fs::exists(dir / "expect.json"))
            continue;
        std::string node = firstLine(readWholeFile(dir / "node.txt"));
        while (!node.empty() && (node.back() == '\r' || node.back() == ' '))
            node.pop_back();

        fs::path outA = tmp / "a.json";
        fs::path outB = tmp / "b.json";
        std::string args = "compile " + (dir / "main.pp").string() + " --node " + node;
        if (fs::exists(dir / "facts.json"))
            args += " --facts " + (dir / "facts.json").string();

        CliResult runA = runCli(args + " --out " + outA.string());
        CliResult runB = runCli(args + " --out " + outB.string());
        if (runA.exitCode != 0 || runB.exitCode != 0) {
            c.require(false, dir.string() + " exited " + std::to_string(runA.exitCode) +
                                 "/" + std::to_string(runB.exitCode) + ": " + runA.output);
            break;
        }
        std::string bytesA = readWholeFile(outA);
        std::string bytesB = readWholeFile(outB);
        if (bytesA.empty() || bytesA != bytesB) {
            c.require(false, dir.string() + " recompilation bytes differ");
            break;
        }
        ++compared;
    }
    c.require(compared > 0, "no catalog cases were compared");
    report(10, "byte-identical recompilation (" + std::to_string(compared) + " catalogs)",
           c.ok(), c.detail);
}

} // namespace

int main() {
    fs::path tmp = fs::temp_directory_path() /
                   ("pupcat-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(tmp);

    check1SshExample();
    check2StrictModeDivergence();
    check3ResourceReference();
    check4CorpusCoverage();
    AuditTotals totals = runAuditSweep();
    check5Determinism(totals);
    check6Monotonicity(totals);
    check7NodeScopeDynamics();
    check8IdempotenceAndDuplicates();
    check9InheritanceCycles(tmp);
    check10ByteIdenticalOutput(tmp);

    fs::remove_all(tmp);
    if (failures == 0) {
        std::printf("acceptance: 10/10 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d of 10 criteria FAILED\n", failures);
    return 1;
}
