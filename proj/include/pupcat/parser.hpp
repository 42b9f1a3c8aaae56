#pragma once

#include <algorithm>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "ast.hpp"
#include "errors.hpp"
#include "lexer.hpp"
#include "value.hpp"

namespace pupcat {

struct ParserOptions {
    std::set<std::string> builtinTypes = defaultBuiltinTypes();
    int maxDepth = 512;
};

// Recursive descent over the token stream. Precedence, tightest first:
//   unary !   |   * / %   |   + -   |   == != < > <= >=   |   and   |   or
// and a trailing `? { ... }` selector binds the completed expression to its
// left. The parser records resource heads verbatim; whether a lowercase head
// is a built-in type or a defined resource is settled during evaluation.
class Parser {
public:
    explicit Parser(const std::string& source, ParserOptions opts = {})
        : opts_(std::move(opts)), toks_(Lexer(source).tokenize()) {}

    ManifestPtr parseManifest() {
        if (peek().kind == Tok::End)
            return makeManifest(MStmt{makeStmt(SkipStmt{})}, peek().pos);
        std::vector<ManifestPtr> items;
        while (peek().kind != Tok::End)
            items.push_back(parseManifestItem());
        ManifestPtr m = items.back();
        for (size_t i = items.size() - 1; i-- > 0;)
            m = makeManifest(MSeq{items[i], m}, items[i]->pos);
        return m;
    }

    // Test helpers: parse one form and insist the input ends there.
    ExprPtr parseExpressionOnly() {
        ExprPtr e = parseExpression();
        expect(Tok::End, "expected end of input");
        return e;
    }
    StmtPtr parseStatementOnly() {
        StmtPtr s = parseStatement();
        expect(Tok::End, "expected end of input");
        return s;
    }

private:
    ParserOptions opts_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
    int depth_ = 0;

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& p) : p(p) {
            if (++p.depth_ > p.opts_.maxDepth)
                throw ParseError(p.peek().pos, "nesting too deep");
        }
        ~DepthGuard() { --p.depth_; }
    };

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool check(Tok k) const { return peek().kind == k; }
    bool match(Tok k) {
        if (check(k)) {
            advance();
            return true;
        }
        return false;
    }
    const Token& expect(Tok k, const std::string& msg) {
        if (!check(k))
            throw ParseError(peek().pos, msg + " (found '" + describe(peek()) + "')");
        return advance();
    }
    static std::string describe(const Token& t) {
        return t.kind == Tok::End ? "end of input" : t.text;
    }
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(peek().pos, msg); }

    // ------------------------------------------------------------------
    // Manifest level
    // ------------------------------------------------------------------

    ManifestPtr parseManifestItem() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::KwNode:   return parseNodeDef();
        case Tok::KwDefine: return parseDefineDef();
        case Tok::KwClass:
            if (peek(1).kind == Tok::Bareword)
                return parseClassDef();
            [[fallthrough]];
        default:
            return makeManifest(MStmt{parseStatement()}, t.pos);
        }
    }

    ManifestPtr parseNodeDef() {
        SourcePos pos = advance().pos; // node
        NodeSpec spec;
        if (match(Tok::KwDefault)) {
            spec.isDefault = true;
            if (check(Tok::Comma))
                fail("'default' must be the only node specifier");
        } else if (check(Tok::Slash)) {
            fail("regular-expression node specifiers are not supported");
        } else {
            for (;;) {
                if (check(Tok::Str) || check(Tok::Bareword)) {
                    spec.names.push_back(advance().strValue);
                } else {
                    fail("expected node name");
                }
                if (!match(Tok::Comma))
                    break;
            }
        }
        StmtPtr body = parseBody();
        return makeManifest(NodeDef{std::move(spec), std::move(body)}, pos);
    }

    ManifestPtr parseDefineDef() {
        SourcePos pos = advance().pos; // define
        std::string name = expect(Tok::Bareword, "expected defined resource type name").strValue;
        if (opts_.builtinTypes.count(name))
            throw ParseError(pos, "cannot redefine built-in resource type '" + name + "'");
        expect(Tok::LParen, "expected '(' after defined resource type name");
        Params params = parseParams();
        StmtPtr body = parseBody();
        return makeManifest(DefineDef{std::move(name), std::move(params), std::move(body)},
                            pos);
    }

    ManifestPtr parseClassDef() {
        SourcePos pos = advance().pos; // class
        std::string name = expect(Tok::Bareword, "expected class name").strValue;
        ClassDef def;
        def.name = std::move(name);
        if (match(Tok::LParen))
            def.params = parseParams();
        if (match(Tok::KwInherits)) {
            def.parent = expect(Tok::Bareword, "expected parent class name").strValue;
            if (check(Tok::KwInherits))
                fail("a class can inherit from at most one parent");
        }
        def.body = parseBody();
        return makeManifest(std::move(def), pos);
    }

    // Parameter list; '(' already consumed. Requireds and defaults may mix.
    Params parseParams() {
        Params params;
        if (match(Tok::RParen))
            return params;
        for (;;) {
            const Token& v = expect(Tok::Var, "expected parameter name");
            if (v.varAbsolute || v.varSegments.size() != 1)
                throw ParseError(v.pos, "parameter names must be unqualified");
            Param p;
            p.name = v.varSegments[0];
            for (const Param& q : params)
                if (q.name == p.name)
                    throw ParseError(v.pos, "duplicate parameter '$" + p.name + "'");
            if (match(Tok::Assign))
                p.defaultValue = parseExpression();
            params.push_back(std::move(p));
            if (match(Tok::RParen))
                return params;
            expect(Tok::Comma, "expected ',' or ')' in parameter list");
        }
    }

    // ------------------------------------------------------------------
    // Statements
    // ------------------------------------------------------------------

    // '{' statement+ '}', right-folded into a sequence
    StmtPtr parseBody() {
        DepthGuard g(*this);
        expect(Tok::LBrace, "expected '{'");
        if (check(Tok::RBrace))
            fail("empty block; a body must contain at least one statement");
        std::vector<StmtPtr> stmts;
        while (!match(Tok::RBrace))
            stmts.push_back(parseStatement());
        StmtPtr s = stmts.back();
        for (size_t i = stmts.size() - 1; i-- > 0;)
            s = makeStmt(SeqStmt{stmts[i], s}, stmts[i]->pos);
        return s;
    }

    StmtPtr parseStatement() {
        DepthGuard g(*this);
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Var:
            if (peek(1).kind == Tok::Assign)
                return parseAssign();
            return parseExprStatement();
        case Tok::KwIf:     return parseIf();
        case Tok::KwUnless: return parseUnless();
        case Tok::KwCase:   return parseCase();
        case Tok::KwInclude: {
            SourcePos pos = advance().pos;
            std::string name = expect(Tok::Bareword, "expected class name after 'include'").strValue;
            return makeStmt(IncludeStmt{std::move(name)}, pos);
        }
        case Tok::KwFail: {
            SourcePos pos = advance().pos;
            expect(Tok::LParen, "expected '(' after 'fail'");
            ExprPtr msg = parseExpression();
            expect(Tok::RParen, "expected ')' after fail message");
            return makeStmt(FailStmt{std::move(msg)}, pos);
        }
        case Tok::KwClass:
            if (peek(1).kind == Tok::LBrace)
                return parseClassDecl();
            if (peek(1).kind == Tok::Bareword)
                fail("class definitions must appear at manifest top level");
            fail("expected '{' after 'class'");
        case Tok::KwNode:
            fail("node definitions must appear at manifest top level");
        case Tok::KwDefine:
            fail("resource type definitions must appear at manifest top level");
        case Tok::LBrace:
            fail("unexpected '{' at statement start (hash statements and resource "
                 "override/extension blocks are not supported)");
        case Tok::Bareword:
            if (peek(1).kind == Tok::LBrace)
                return parseResDecl();
            return parseExprStatement();
        default:
            return parseExprStatement();
        }
    }

    StmtPtr parseExprStatement() {
        SourcePos pos = peek().pos;
        return makeStmt(ExprStmt{parseExpression()}, pos);
    }

    StmtPtr parseAssign() {
        const Token& v = advance();
        if (v.varAbsolute || v.varSegments.size() != 1)
            throw ParseError(v.pos, "cannot assign to qualified variable '" + v.text + "'");
        advance(); // =
        ExprPtr value = parseExpression();
        return makeStmt(AssignStmt{v.varSegments[0], std::move(value)}, v.pos);
    }

    StmtPtr parseIf() {
        SourcePos pos = advance().pos; // if
        ExprPtr cond = parseExpression();
        StmtPtr thenBody = parseBody();
        if (!match(Tok::KwElse))
            fail("expected 'else' ('if' without 'else' is not supported)");
        if (check(Tok::KwIf))
            fail("'else if' is not supported; nest the 'if' inside braces");
        StmtPtr elseBody = parseBody();
        return makeStmt(IfStmt{std::move(cond), std::move(thenBody), std::move(elseBody)},
                        pos);
    }

    StmtPtr parseUnless() {
        SourcePos pos = advance().pos; // unless
        ExprPtr cond = parseExpression();
        StmtPtr body = parseBody();
        if (check(Tok::KwElse))
            fail("'unless' does not take an 'else' clause");
        return makeStmt(UnlessStmt{std::move(cond), std::move(body)}, pos);
    }

    StmtPtr parseCase() {
        SourcePos pos = advance().pos; // case
        ExprPtr control = parseExpression();
        expect(Tok::LBrace, "expected '{' after case expression");
        std::vector<CaseArm> arms;
        while (!match(Tok::RBrace)) {
            CaseArm arm;
            if (match(Tok::KwDefault))
                arm.guard = std::nullopt;
            else
                arm.guard = parseExpression();
            expect(Tok::Colon, "expected ':' after case guard");
            arm.body = parseBody();
            arms.push_back(std::move(arm));
        }
        return makeStmt(CaseStmt{std::move(control), std::move(arms)}, pos);
    }

    StmtPtr parseResDecl() {
        const Token& head = advance();
        advance(); // {
        ExprPtr title = parseExpression();
        expect(Tok::Colon, "expected ':' after resource title");
        std::vector<AttrPair> attrs = parseAttrs();
        return makeStmt(ResDecl{head.strValue, std::move(title), std::move(attrs)},
                        head.pos);
    }

    StmtPtr parseClassDecl() {
        SourcePos pos = advance().pos; // class
        advance();                     // {
        std::string name;
        if (check(Tok::Bareword) || check(Tok::Str))
            name = advance().strValue;
        else
            fail("expected class name");
        expect(Tok::Colon, "expected ':' after class name");
        std::vector<AttrPair> args = parseAttrs();
        return makeStmt(ClassDecl{std::move(name), std::move(args)}, pos);
    }

    // attribute list up to and including the closing '}'
    std::vector<AttrPair> parseAttrs() {
        std::vector<AttrPair> attrs;
        if (match(Tok::RBrace))
            return attrs;
        for (;;) {
            const Token& name = expect(Tok::Bareword, "expected attribute name");
            if (name.strValue.find("::") != std::string::npos)
                throw ParseError(name.pos, "invalid attribute name '" + name.strValue + "'");
            expect(Tok::FatArrow, "expected '=>' after attribute name");
            ExprPtr value = parseExpression();
            attrs.push_back(AttrPair{name.strValue, std::move(value)});
            if (match(Tok::RBrace))
                return attrs;
            expect(Tok::Comma, "expected ',' or '}' in attribute list");
            if (match(Tok::RBrace)) // trailing comma
                return attrs;
        }
    }

    // ------------------------------------------------------------------
    // Expressions
    // ------------------------------------------------------------------

    ExprPtr parseExpression() {
        DepthGuard g(*this);
        ExprPtr e = parseOr();
        while (check(Tok::Question))
            e = parseSelectorArms(std::move(e));
        return e;
    }

    ExprPtr parseSelectorArms(ExprPtr control) {
        SourcePos pos = advance().pos; // ?
        expect(Tok::LBrace, "expected '{' after '?'");
        std::vector<SelectArm> arms;
        while (!match(Tok::RBrace)) {
            SelectArm arm;
            if (match(Tok::KwDefault))
                arm.guard = std::nullopt;
            else
                arm.guard = parseExpression();
            expect(Tok::FatArrow, "expected '=>' in selector arm");
            arm.body = parseExpression();
            arms.push_back(std::move(arm));
            if (check(Tok::RBrace))
                continue;
            expect(Tok::Comma, "expected ',' or '}' in selector");
        }
        return makeExpr(Select{std::move(control), std::move(arms)}, pos);
    }

    ExprPtr parseOr() {
        ExprPtr e = parseAnd();
        while (check(Tok::KwOr)) {
            SourcePos pos = advance().pos;
            e = makeExpr(Binary{BinOp::Or, std::move(e), parseAnd()}, pos);
        }
        return e;
    }

    ExprPtr parseAnd() {
        ExprPtr e = parseComparison();
        while (check(Tok::KwAnd)) {
            SourcePos pos = advance().pos;
            e = makeExpr(Binary{BinOp::And, std::move(e), parseComparison()}, pos);
        }
        return e;
    }

    ExprPtr parseComparison() {
        ExprPtr e = parseAdditive();
        for (;;) {
            BinOp op;
            switch (peek().kind) {
            case Tok::EqEq:  op = BinOp::Eq; break;
            case Tok::NotEq: op = BinOp::Ne; break;
            case Tok::Gt:    op = BinOp::Gt; break;
            case Tok::Lt:    op = BinOp::Lt; break;
            case Tok::Ge:    op = BinOp::Ge; break;
            case Tok::Le:    op = BinOp::Le; break;
            default: return e;
            }
            SourcePos pos = advance().pos;
            e = makeExpr(Binary{op, std::move(e), parseAdditive()}, pos);
        }
    }

    ExprPtr parseAdditive() {
        ExprPtr e = parseMultiplicative();
        for (;;) {
            BinOp op;
            if (check(Tok::Plus))
                op = BinOp::Add;
            else if (check(Tok::Minus))
                op = BinOp::Sub;
            else
                return e;
            SourcePos pos = advance().pos;
            e = makeExpr(Binary{op, std::move(e), parseMultiplicative()}, pos);
        }
    }

    ExprPtr parseMultiplicative() {
        ExprPtr e = parseUnary();
        for (;;) {
            BinOp op;
            if (check(Tok::Star))
                op = BinOp::Mul;
            else if (check(Tok::Slash))
                op = BinOp::Div;
            else if (check(Tok::Percent))
                op = BinOp::Mod;
            else
                return e;
            SourcePos pos = advance().pos;
            e = makeExpr(Binary{op, std::move(e), parseUnary()}, pos);
        }
    }

    ExprPtr parseUnary() {
        DepthGuard g(*this);
        if (check(Tok::Bang)) {
            SourcePos pos = advance().pos;
            return makeExpr(UnaryNot{parseUnary()}, pos);
        }
        if (check(Tok::Minus)) {
            SourcePos pos = advance().pos;
            const Token& n = expect(Tok::Int, "unary '-' applies to integer literals only");
            return makeExpr(IntLit{negateMagnitude(n)}, pos);
        }
        return parsePostfix();
    }

    static long long negateMagnitude(const Token& n) {
        if (n.intMag == 9223372036854775808ULL)
            return std::numeric_limits<long long>::min();
        return -static_cast<long long>(n.intMag);
    }

    ExprPtr parsePostfix() {
        ExprPtr e = parsePrimary();
        while (check(Tok::LBracket)) {
            SourcePos pos = advance().pos;
            ExprPtr index = parseExpression();
            expect(Tok::RBracket, "expected ']'");
            e = makeExpr(Deref{std::move(e), std::move(index)}, pos);
        }
        return e;
    }

    ExprPtr parsePrimary() {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Int: {
            advance();
            if (t.intMag > 9223372036854775807ULL)
                throw ParseError(t.pos, "integer literal out of range");
            return makeExpr(IntLit{static_cast<long long>(t.intMag)}, t.pos);
        }
        case Tok::Str:
            advance();
            return makeExpr(StrLit{t.strValue}, t.pos);
        case Tok::KwTrue:
            advance();
            return makeExpr(BoolLit{true}, t.pos);
        case Tok::KwFalse:
            advance();
            return makeExpr(BoolLit{false}, t.pos);
        case Tok::Bareword:
            // an unquoted word in expression position is a string literal
            advance();
            return makeExpr(StrLit{t.strValue}, t.pos);
        case Tok::Var:
            advance();
            return varToExpr(t);
        case Tok::Capword:
            return parseResRef();
        case Tok::LBracket: {
            advance();
            ArrayLit arr;
            if (match(Tok::RBracket))
                return makeExpr(std::move(arr), t.pos);
            for (;;) {
                arr.elems.push_back(parseExpression());
                if (match(Tok::RBracket))
                    break;
                expect(Tok::Comma, "expected ',' or ']' in array");
                if (match(Tok::RBracket)) // trailing comma
                    break;
            }
            return makeExpr(std::move(arr), t.pos);
        }
        case Tok::LBrace: {
            advance();
            HashLit h;
            if (match(Tok::RBrace))
                return makeExpr(std::move(h), t.pos);
            for (;;) {
                HashPair p{parseHashKey(), nullptr};
                expect(Tok::FatArrow, "expected '=>' after hash key");
                p.value = parseExpression();
                h.pairs.push_back(std::move(p));
                if (match(Tok::RBrace))
                    break;
                expect(Tok::Comma, "expected ',' or '}' in hash");
                if (match(Tok::RBrace)) // trailing comma
                    break;
            }
            return makeExpr(std::move(h), t.pos);
        }
        case Tok::LParen: {
            advance();
            ExprPtr e = parseExpression();
            expect(Tok::RParen, "expected ')'");
            return e;
        }
        case Tok::KwDefault:
            fail("'default' is only allowed as a case or selector guard");
        default:
            fail("expected expression");
        }
    }

    ScalarKey parseHashKey() {
        const Token& t = peek();
        if (t.kind == Tok::Int) {
            advance();
            if (t.intMag > 9223372036854775807ULL)
                throw ParseError(t.pos, "integer literal out of range");
            return ScalarKey{static_cast<long long>(t.intMag)};
        }
        if (t.kind == Tok::Minus && peek(1).kind == Tok::Int) {
            advance();
            const Token& n = advance();
            return ScalarKey{negateMagnitude(n)};
        }
        if (t.kind == Tok::Str || t.kind == Tok::Bareword) {
            advance();
            return ScalarKey{t.strValue};
        }
        fail("hash keys must be integer or string literals");
    }

    ExprPtr varToExpr(const Token& t) {
        if (t.varSegments.size() == 1) {
            if (t.varAbsolute)
                return makeExpr(TopVar{t.varSegments[0]}, t.pos);
            return makeExpr(LocalVar{t.varSegments[0]}, t.pos);
        }
        // $a::b::x and $::a::b::x both name x in class a::b's scope
        std::string cls = t.varSegments[0];
        for (size_t i = 1; i + 1 < t.varSegments.size(); ++i)
            cls += "::" + t.varSegments[i];
        return makeExpr(ClassVar{std::move(cls), t.varSegments.back()}, t.pos);
    }

    ExprPtr parseResRef() {
        const Token& t = advance();
        std::string type = t.strValue;
        std::transform(type.begin(), type.end(), type.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (!opts_.builtinTypes.count(type))
            throw ParseError(t.pos, "unknown resource type '" + t.strValue + "'");
        if (!check(Tok::LBracket)) {
            if (check(Tok::LBrace))
                throw ParseError(peek().pos, "resource default statements are not supported");
            throw ParseError(peek().pos, "expected '[' after resource type name");
        }
        advance();
        ExprPtr title = parseExpression();
        expect(Tok::RBracket, "expected ']' after resource title");
        return makeExpr(ResRef{std::move(type), std::move(title)}, t.pos);
    }
};

inline ManifestPtr parseSource(const std::string& source, ParserOptions opts = {}) {
    return Parser(source, std::move(opts)).parseManifest();
}

} // namespace pupcat
