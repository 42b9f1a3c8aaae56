#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>
#include <vector>

#include "pupcat/errors.hpp"
#include "pupcat/eval.hpp"
#include "pupcat/parser.hpp"

using namespace pupcat;

namespace {

CompileError capture(const std::string& src, const std::string& node = "n",
                     const Facts& facts = {}, EvalOptions opts = {}) {
    try {
        compile(parseSource(src), node, facts, opts);
    } catch (const CompileError& e) {
        return e;
    }
    FAIL("compilation of '" + src + "' succeeded unexpectedly");
    return CompileError(ErrKind::InternalStuck, SourcePos{}, Scope::top(), "");
}

bool startsWith(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

bool endsWith(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

TEST_CASE("error kind names round-trip", "[errors]") {
    const ErrKind all[] = {
        ErrKind::UndefinedVariable,    ErrKind::DuplicateVariable,
        ErrKind::DuplicateResource,    ErrKind::UndefinedDefinition,
        ErrKind::ClassAlreadyDeclared, ErrKind::MissingParameter,
        ErrKind::UnknownParameter,     ErrKind::TypeMismatch,
        ErrKind::DivisionByZero,       ErrKind::SelectorNoMatch,
        ErrKind::BadDereference,       ErrKind::InheritanceCycle,
        ErrKind::StepLimitExceeded,    ErrKind::InternalStuck,
    };
    std::set<std::string> names;
    for (ErrKind k : all) {
        std::string name = errKindName(k);
        names.insert(name);
        auto back = errKindFromName(name);
        REQUIRE(back.has_value());
        REQUIRE(*back == k);
    }
    REQUIRE(names.size() == 14); // all names distinct

    REQUIRE_FALSE(errKindFromName("Bogus").has_value());
    REQUIRE_FALSE(errKindFromName("").has_value());
    REQUIRE_FALSE(errKindFromName("undefinedvariable").has_value()); // case-sensitive
    REQUIRE_FALSE(errKindFromName("UndefinedVariable ").has_value());
}

TEST_CASE("scope rendering", "[errors][scope]") {
    REQUIRE(Scope::top().str() == "::");
    REQUIRE(Scope::node().str() == "::nd");
    REQUIRE(Scope::forClass("apache").str() == "::apache");
    REQUIRE(Scope::defScope(Scope::top()).str() == "def(::)");
    REQUIRE(Scope::defScope(Scope::node()).str() == "def(::nd)");
    REQUIRE(Scope::defScope(Scope::forClass("a")).str() == "def(::a)");
    REQUIRE(Scope::defScope(Scope::defScope(Scope::top())).str() == "def(def(::))");
}

TEST_CASE("scope identity and ordering", "[errors][scope]") {
    REQUIRE(Scope::top() == Scope::top());
    REQUIRE(Scope() == Scope::top()); // default-constructed is top
    REQUIRE(Scope::node() == Scope::node());
    REQUIRE(Scope::forClass("a") == Scope::forClass("a"));
    REQUIRE(Scope::forClass("a") != Scope::forClass("b"));
    REQUIRE(Scope::defScope(Scope::top()) == Scope::defScope(Scope::top()));
    REQUIRE(Scope::defScope(Scope::top()) != Scope::defScope(Scope::node()));
    REQUIRE(Scope::top() != Scope::node());

    // usable as an ordered map key over every shape
    std::map<Scope, int> m;
    m[Scope::top()] = 1;
    m[Scope::node()] = 2;
    m[Scope::forClass("a")] = 3;
    m[Scope::forClass("b")] = 4;
    m[Scope::defScope(Scope::top())] = 5;
    m[Scope::defScope(Scope::forClass("a"))] = 6;
    REQUIRE(m.size() == 6);
    REQUIRE(m[Scope::forClass("a")] == 3);
    for (const auto& [k, v] : m)
        REQUIRE_FALSE(k < k);
}

TEST_CASE("compile errors format as kind, position, scope, message", "[errors]") {
    SECTION("constructed directly") {
        CompileError e(ErrKind::TypeMismatch, SourcePos{3, 7}, Scope::forClass("a"), "m");
        REQUIRE(std::string(e.what()) == "TypeMismatch at 3:7 in ::a: m");
        REQUIRE(e.kind == ErrKind::TypeMismatch);
        REQUIRE(e.pos.line == 3);
        REQUIRE(e.pos.column == 7);
        REQUIRE(e.scope == Scope::forClass("a"));
        REQUIRE(e.message == "m");
    }

    SECTION("a zero line suppresses the position") {
        CompileError e(ErrKind::DuplicateVariable, SourcePos{}, Scope::top(), "m");
        REQUIRE(std::string(e.what()) == "DuplicateVariable in ::: m");
    }

    SECTION("undefined variable, exact position") {
        CompileError e = capture("$y =\n$gone");
        REQUIRE(std::string(e.what()) ==
                "UndefinedVariable at 2:1 in ::: variable $gone is not defined");
    }

    SECTION("duplicate variable, exact position") {
        CompileError e = capture("$x = 1\n$x = 2");
        REQUIRE(std::string(e.what()) ==
                "DuplicateVariable at 2:1 in ::: variable $x is already bound in scope ::");
    }

    SECTION("node scope appears in messages raised inside node blocks") {
        CompileError e = capture("node default { $a = 1 $a = 2 }");
        REQUIRE(e.scope == Scope::node());
        REQUIRE(endsWith(e.what(), " in ::nd: variable $a is already bound in scope ::nd"));
    }

    SECTION("class scope") {
        CompileError e = capture("class a { $v = $gone } include a");
        REQUIRE(e.scope == Scope::forClass("a"));
        REQUIRE(startsWith(e.what(), "UndefinedVariable at "));
        REQUIRE(endsWith(e.what(), " in ::a: variable $gone is not defined"));
    }

    SECTION("def scope") {
        CompileError e = capture("define d() { $z = 1 + 'x' } d { 't': }");
        REQUIRE(e.scope == Scope::defScope(Scope::top()));
        REQUIRE(startsWith(e.what(), "TypeMismatch at "));
        REQUIRE(endsWith(e.what(),
                         " in def(::): right operand of '+' must be an integer"));
    }

    SECTION("def scope nested in a class") {
        CompileError e = capture("define d() { $z = $gone }"
                                 " class c { d { 't': } }"
                                 " include c");
        // the def scope names its declaring scope; lookups still climb to the base
        REQUIRE(e.scope.str() == "def(::c)");
    }

    SECTION("missing position on duplicate facts") {
        CompileError e = capture("$x = 1", "n", {{"f", intValue(1)}, {"f", intValue(2)}});
        REQUIRE(std::string(e.what()) == "DuplicateVariable in ::: duplicate fact 'f'");
    }
}

TEST_CASE("parse errors format as position and message", "[errors]") {
    SECTION("constructed directly") {
        ParseError e(SourcePos{2, 6}, "m");
        REQUIRE(std::string(e.what()) == "parse error at 2:6: m");
        REQUIRE(e.pos.line == 2);
        REQUIRE(e.pos.column == 6);
        REQUIRE(e.message == "m");
    }

    SECTION("from a real failure") {
        try {
            parseSource("$x =");
            FAIL("parse should fail");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()) == "parse error at 1:5: expected expression");
        }
        try {
            parseSource("include 5");
            FAIL("parse should fail");
        } catch (const ParseError& e) {
            REQUIRE(std::string(e.what()) ==
                    "parse error at 1:9: expected class name after 'include' (found '5')");
        }
    }
}

TEST_CASE("every raiseable kind has a witness program", "[errors]") {
    struct Case {
        ErrKind kind;
        std::string src;
    };
    const std::vector<Case> table = {
        {ErrKind::UndefinedVariable, "$a = $gone"},
        {ErrKind::DuplicateVariable, "$a = 1 $a = 2"},
        {ErrKind::DuplicateResource, "file { 'x': } file { 'x': }"},
        {ErrKind::UndefinedDefinition, "include ghost"},
        {ErrKind::ClassAlreadyDeclared, "class a { $v = 1 } include a class { 'a': }"},
        {ErrKind::MissingParameter, "class a($p) { $v = 1 } class { 'a': }"},
        {ErrKind::UnknownParameter, "class a { $v = 1 } class { 'a': q => 1 }"},
        {ErrKind::TypeMismatch, "$a = 1 + 'x'"},
        {ErrKind::DivisionByZero, "$a = 1 / 0"},
        {ErrKind::SelectorNoMatch, "$a = 1 ? { 2 => 3 }"},
        {ErrKind::BadDereference, "$a = [1][5]"},
        {ErrKind::InheritanceCycle, "class a inherits a { $v = 1 } include a"},
    };
    for (const auto& c : table) {
        INFO(c.src);
        REQUIRE(capture(c.src).kind == c.kind);
    }

    SECTION("fail() reports under the selector kind") {
        REQUIRE(capture("fail('stop')").kind == ErrKind::SelectorNoMatch);
    }

    SECTION("step limit") {
        EvalOptions opts;
        opts.maxSteps = 1;
        CompileError e = capture("$a = 1 $b = 2", "n", {}, opts);
        REQUIRE(e.kind == ErrKind::StepLimitExceeded);
        REQUIRE(endsWith(e.what(), "no normal form after 1 steps"));
    }

    SECTION("internal stuck marks evaluator misuse, not manifest faults") {
        try {
            stepManifest(EvalState{}, "n", parseSource(""), nullptr, EvalOptions{});
            FAIL("stepping a finished manifest should raise");
        } catch (const CompileError& e) {
            REQUIRE(e.kind == ErrKind::InternalStuck);
        }
    }
}

TEST_CASE("division and modulo by zero share one kind", "[errors]") {
    CompileError d = capture("$a = 4 / 0");
    REQUIRE(d.kind == ErrKind::DivisionByZero);
    REQUIRE(d.message == "division by zero");
    CompileError m = capture("$a = 4 % 0");
    REQUIRE(m.kind == ErrKind::DivisionByZero);
    REQUIRE(m.message == "modulo by zero");
}
