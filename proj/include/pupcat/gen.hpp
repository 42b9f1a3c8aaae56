#pragma once

#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ast.hpp"
#include "errors.hpp"
#include "eval.hpp"
#include "parser.hpp"
#include "pretty.hpp"
#include "value.hpp"

// Deterministic manifest generator for property tests.
//
// genSafeManifest produces manifests built only from constructions that are
// known to compile: fresh variable and title names, acyclic inheritance with
// fully defaulted parent parameters, guarded arithmetic, selectors with a
// default arm, dereferences with in-range indices and known keys. A given
// seed always yields the same manifest on every platform (the raw engine
// output is mapped with modulo instead of distributions, whose algorithms
// vary between standard libraries).
//
// genFaultyManifest grafts one known-bad fragment onto a safe manifest and
// reports the error kind the compiler must produce for it.

namespace pupcat {

struct GenOutput {
    ManifestPtr manifest;
    std::string source; // prettyManifest(manifest)
    std::string node;
    Facts facts;
    std::optional<ErrKind> expectError;
    long long maxSteps = 0; // 0: use the default
    bool paperDivergence = false;
};

namespace gen_detail {

enum class Ty { Int, Str, Bool, Arr, Hash };

struct ClassInfo {
    std::string name;
    std::optional<std::string> parent;
    std::vector<Param> params;
    bool includeSafe = false;          // all parameters carry defaults
    bool declareOnly = false;          // reserved for one class { c: } statement
    std::map<std::string, Ty> vars;    // assigned unconditionally in the body
};

struct DefInfo {
    std::string name;
    std::vector<Param> params; // first may lack a default
};

struct TrackedResource {
    std::string type;
    std::string title;
    std::map<std::string, Ty> attrs;
};

class Gen {
public:
    explicit Gen(unsigned long long seed) : eng_(seed) {}

    GenOutput run() {
        GenOutput out;
        out.node = "gen.node.example";
        out.facts.emplace_back("osfamily", strValue(pickOs()));
        out.facts.emplace_back("release", intValue(static_cast<long long>(pick(30))));
        out.facts.emplace_back("flag", boolValue(pick(2) == 0));
        factTys_ = {{"osfamily", Ty::Str}, {"release", Ty::Int}, {"flag", Ty::Bool}};

        std::vector<ManifestPtr> items;
        genClassDefs(items);
        genDefineDefs(items);

        // top-level statements; every one is its own manifest item, matching
        // how the parser folds a source file
        size_t nStmts = 2 + pick(6);
        topVars_ = {};
        for (size_t i = 0; i < nStmts; ++i)
            items.push_back(makeManifest(MStmt{genTopStmt(2)}, here()));

        genNodeDefs(items);

        ManifestPtr m = items.back();
        for (size_t i = items.size() - 1; i-- > 0;)
            m = makeManifest(MSeq{items[i], m}, here());
        out.manifest = m;
        out.source = prettyManifest(m);
        return out;
    }

private:
    std::mt19937_64 eng_;
    std::map<std::string, Ty> factTys_;
    std::vector<ClassInfo> classes_;
    std::vector<size_t> includePool_;   // classes reachable via include
    std::vector<size_t> declarePool_;   // classes reserved for class { c: }
    std::vector<bool> declared_;        // declarePool classes already used
    std::vector<DefInfo> defines_;
    std::vector<TrackedResource> resources_; // declared unconditionally so far
    std::vector<std::string> declaredClasses_; // declared for sure so far
    std::map<std::string, Ty> topVars_;
    int varCounter_ = 0;
    int titleCounter_ = 0;
    int strCounter_ = 0;

    // ---- randomness -----------------------------------------------------
    size_t pick(size_t n) { return n == 0 ? 0 : static_cast<size_t>(eng_() % n); }
    bool chance(int percent) { return pick(100) < static_cast<size_t>(percent); }
    SourcePos here() { return SourcePos{}; }

    std::string pickOs() {
        static const char* names[] = {"Debian", "RedHat", "Windows"};
        return names[pick(3)];
    }
    std::string freshVar() { return "v" + std::to_string(varCounter_++); }
    std::string freshTitle() { return "r" + std::to_string(titleCounter_++); }
    std::string freshStr() { return "s" + std::to_string(strCounter_++); }
    std::string builtinType() {
        static const char* types[] = {"file", "package", "service", "user", "notify"};
        return types[pick(5)];
    }
    std::string attrName(size_t i) {
        static const char* names[] = {"ensure", "mode", "owner", "path", "content", "port"};
        return names[i % 6];
    }
    Ty anyTy() {
        size_t r = pick(10);
        if (r < 4)
            return Ty::Int;
        if (r < 7)
            return Ty::Str;
        if (r < 9)
            return Ty::Bool;
        return r == 9 && chance(50) ? Ty::Hash : Ty::Arr;
    }
    Ty scalarTy() {
        switch (pick(3)) {
        case 0: return Ty::Int;
        case 1: return Ty::Str;
        default: return Ty::Bool;
        }
    }

    // ---- expressions -----------------------------------------------------
    ExprPtr literalOf(Ty ty) {
        switch (ty) {
        case Ty::Int:
            return makeExpr(IntLit{static_cast<long long>(pick(2001)) - 1000}, here());
        case Ty::Str: return makeExpr(StrLit{freshStr()}, here());
        case Ty::Bool: return makeExpr(BoolLit{pick(2) == 0}, here());
        case Ty::Arr: {
            std::vector<ExprPtr> elems;
            size_t n = pick(3);
            for (size_t i = 0; i < n; ++i)
                elems.push_back(literalOf(scalarTy()));
            return makeExpr(ArrayLit{std::move(elems)}, here());
        }
        case Ty::Hash: {
            HashLit h;
            size_t n = pick(3);
            for (size_t i = 0; i < n; ++i) {
                ScalarKey key;
                if (chance(50))
                    key = static_cast<long long>(i);
                else
                    key = "k" + std::to_string(i);
                h.pairs.push_back(HashPair{key, literalOf(scalarTy())});
            }
            return makeExpr(std::move(h), here());
        }
        }
        return makeExpr(IntLit{0}, here());
    }

    // a visible variable of the wanted type, if any
    ExprPtr varOf(const std::map<std::string, Ty>& scopeVars, Ty ty, bool inBody) {
        std::vector<ExprPtr> candidates;
        for (const auto& [name, t] : scopeVars)
            if (t == ty)
                candidates.push_back(makeExpr(LocalVar{name}, here()));
        for (const auto& [name, t] : factTys_)
            if (t == ty) {
                candidates.push_back(makeExpr(TopVar{name}, here()));
                if (inBody) // exercises the parent-scope chain
                    candidates.push_back(makeExpr(LocalVar{name}, here()));
            }
        for (const auto& cls : declaredClasses_)
            for (const auto& c : classes_)
                if (c.name == cls)
                    for (const auto& [name, t] : c.vars)
                        if (t == ty)
                            candidates.push_back(makeExpr(ClassVar{cls, name}, here()));
        if (candidates.empty())
            return nullptr;
        return candidates[pick(candidates.size())];
    }

    struct ExprCtx {
        const std::map<std::string, Ty>* vars;
        bool inBody = false;  // below the top scope (classes, defines, nodes)
        bool noVars = false;  // multiplication operands stay bounded literals
    };

    ExprPtr genExpr(const ExprCtx& ctx, Ty want, int depth) {
        if (depth <= 0 || chance(30)) {
            if (!ctx.noVars && chance(55))
                if (ExprPtr v = varOf(*ctx.vars, want, ctx.inBody))
                    return v;
            return literalOf(want);
        }
        switch (want) {
        case Ty::Int: return genIntExpr(ctx, depth);
        case Ty::Bool: return genBoolExpr(ctx, depth);
        case Ty::Str: return genStrExpr(ctx, depth);
        case Ty::Arr:
        case Ty::Hash: return literalOf(want);
        }
        return literalOf(want);
    }

    ExprPtr genIntExpr(const ExprCtx& ctx, int depth) {
        switch (pick(5)) {
        case 0: { // + - * keep |x| small enough to never overflow
            BinOp op = pick(3) == 0 ? BinOp::Add : (pick(2) == 0 ? BinOp::Sub : BinOp::Mul);
            ExprCtx operandCtx = ctx;
            if (op == BinOp::Mul)
                operandCtx.noVars = true;
            return makeExpr(Binary{op, genExpr(operandCtx, Ty::Int, depth - 1),
                                   genExpr(operandCtx, Ty::Int, depth - 1)},
                            here());
        }
        case 1: { // division and modulo by a nonzero literal
            BinOp op = pick(2) == 0 ? BinOp::Div : BinOp::Mod;
            auto divisor = makeExpr(IntLit{static_cast<long long>(1 + pick(9))}, here());
            return makeExpr(Binary{op, genExpr(ctx, Ty::Int, depth - 1), divisor}, here());
        }
        case 2: return genSelector(ctx, Ty::Int, depth);
        case 3: { // in-range dereference of a fresh array literal
            size_t len = 1 + pick(3);
            std::vector<ExprPtr> elems;
            for (size_t i = 0; i < len; ++i)
                elems.push_back(genExpr(ctx, Ty::Int, 0));
            auto arr = makeExpr(ArrayLit{std::move(elems)}, here());
            auto idx = makeExpr(IntLit{static_cast<long long>(pick(len))}, here());
            return makeExpr(Deref{std::move(arr), std::move(idx)}, here());
        }
        default: return genExpr(ctx, Ty::Int, 0);
        }
    }

    ExprPtr genBoolExpr(const ExprCtx& ctx, int depth) {
        switch (pick(5)) {
        case 0: {
            BinOp comps[] = {BinOp::Gt, BinOp::Lt, BinOp::Ge, BinOp::Le};
            return makeExpr(Binary{comps[pick(4)], genExpr(ctx, Ty::Int, depth - 1),
                                   genExpr(ctx, Ty::Int, depth - 1)},
                            here());
        }
        case 1: {
            Ty t = scalarTy();
            return makeExpr(Binary{pick(2) == 0 ? BinOp::Eq : BinOp::Ne,
                                   genExpr(ctx, t, depth - 1), genExpr(ctx, t, depth - 1)},
                            here());
        }
        case 2:
            return makeExpr(Binary{pick(2) == 0 ? BinOp::And : BinOp::Or,
                                   genExpr(ctx, Ty::Bool, depth - 1),
                                   genExpr(ctx, Ty::Bool, depth - 1)},
                            here());
        case 3: return makeExpr(UnaryNot{genExpr(ctx, Ty::Bool, depth - 1)}, here());
        default: return genExpr(ctx, Ty::Bool, 0);
        }
    }

    ExprPtr genStrExpr(const ExprCtx& ctx, int depth) {
        switch (pick(3)) {
        case 0: return genSelector(ctx, Ty::Str, depth);
        case 1: { // known-key dereference of a fresh hash literal
            HashLit h;
            size_t len = 1 + pick(2);
            for (size_t i = 0; i < len; ++i)
                h.pairs.push_back(
                    HashPair{ScalarKey{"k" + std::to_string(i)}, genExpr(ctx, Ty::Str, 0)});
            size_t chosen = pick(len);
            auto idx = makeExpr(StrLit{"k" + std::to_string(chosen)}, here());
            return makeExpr(Deref{makeExpr(std::move(h), here()), std::move(idx)}, here());
        }
        default: return genExpr(ctx, Ty::Str, 0);
        }
    }

    ExprPtr genSelector(const ExprCtx& ctx, Ty want, int depth) {
        Ty controlTy = scalarTy();
        Select sel;
        sel.control = genExpr(ctx, controlTy, depth - 1);
        size_t arms = 1 + pick(2);
        for (size_t i = 0; i < arms; ++i)
            sel.arms.push_back(
                SelectArm{genExpr(ctx, controlTy, 0), genExpr(ctx, want, depth - 1)});
        // the default arm keeps every selector total
        sel.arms.push_back(SelectArm{std::nullopt, genExpr(ctx, want, depth - 1)});
        return makeExpr(std::move(sel), here());
    }

    // ---- statements ------------------------------------------------------
    StmtPtr foldSeq(std::vector<StmtPtr> stmts) {
        if (stmts.empty())
            return makeStmt(SkipStmt{}, here());
        StmtPtr s = stmts.back();
        for (size_t i = stmts.size() - 1; i-- > 0;)
            s = makeStmt(SeqStmt{stmts[i], s}, here());
        return s;
    }

    std::vector<AttrPair> genAttrs(const ExprCtx& ctx, size_t minAttrs,
                                   std::map<std::string, Ty>* track) {
        size_t n = minAttrs + pick(3);
        size_t offset = pick(6);
        std::vector<AttrPair> attrs;
        for (size_t i = 0; i < n; ++i) {
            Ty ty = anyTy();
            std::string name = attrName(offset + i);
            attrs.push_back(AttrPair{name, genExpr(ctx, ty, 2)});
            if (track)
                track->emplace(name, ty);
        }
        return attrs;
    }

    StmtPtr genResource(const ExprCtx& ctx, bool trackIt) {
        ResDecl r;
        r.head = builtinType();
        std::string title = freshTitle();
        r.title = makeExpr(StrLit{title}, here());
        std::map<std::string, Ty> attrTys;
        r.attrs = genAttrs(ctx, 1, &attrTys);
        if (trackIt) {
            // only scalar attributes are later dereferenced, so the tracked
            // expression type must be exact
            std::map<std::string, Ty> scalars;
            for (auto& [name, ty] : attrTys)
                if (ty == Ty::Int || ty == Ty::Str || ty == Ty::Bool)
                    scalars.emplace(name, ty);
            resources_.push_back(TrackedResource{r.head, title, std::move(scalars)});
        }
        return makeStmt(std::move(r), here());
    }

    StmtPtr genDefineInstance(const ExprCtx& ctx) {
        const DefInfo& d = defines_[pick(defines_.size())];
        ResDecl r;
        r.head = d.name;
        r.title = makeExpr(StrLit{freshTitle()}, here());
        for (const auto& p : d.params)
            if (!p.defaultValue || chance(60))
                r.attrs.push_back(AttrPair{p.name, genExpr(ctx, anyTy(), 1)});
        return makeStmt(std::move(r), here());
    }

    void markDeclared(const std::string& name) {
        for (const auto& c : classes_)
            if (c.name == name) {
                declaredClasses_.push_back(name);
                if (c.parent)
                    markDeclared(*c.parent);
                return;
            }
    }

    // straightLine: statement runs unconditionally at the top level, so
    // resources and declarations can be tracked for later dereferences
    StmtPtr genTopStmt(int depth, bool straightLine = true) {
        ExprCtx ctx{&topVars_, false};
        size_t r = pick(12);
        switch (r) {
        case 0:
        case 1: { // assignment; conditional bindings are never referenced later
            Ty ty = anyTy();
            std::string name = freshVar();
            auto stmt = makeStmt(AssignStmt{name, genExpr(ctx, ty, 2)}, here());
            if (straightLine)
                topVars_.emplace(name, ty);
            return stmt;
        }
        case 2:
        case 3: return genResource(ctx, straightLine);
        case 4: {
            if (defines_.empty())
                return genResource(ctx, straightLine);
            return genDefineInstance(ctx);
        }
        case 5: { // include, idempotent for every include-safe class
            if (includePool_.empty())
                return genResource(ctx, straightLine);
            const ClassInfo& c = classes_[includePool_[pick(includePool_.size())]];
            if (straightLine)
                markDeclared(c.name);
            return makeStmt(IncludeStmt{c.name}, here());
        }
        case 6: { // resource-style class declaration, once per class
            if (!straightLine || declarePool_.empty())
                return genResource(ctx, straightLine);
            for (size_t i = 0; i < declarePool_.size(); ++i) {
                size_t slot = (pick(declarePool_.size()) + i) % declarePool_.size();
                if (declared_[slot])
                    continue;
                declared_[slot] = true;
                const ClassInfo& c = classes_[declarePool_[slot]];
                ClassDecl decl;
                decl.name = c.name;
                for (const auto& p : c.params)
                    if (!p.defaultValue || chance(50))
                        decl.args.push_back(AttrPair{p.name, genExpr(ctx, anyTy(), 1)});
                markDeclared(c.name);
                return makeStmt(std::move(decl), here());
            }
            return genResource(ctx, straightLine);
        }
        case 7: { // catalog dereference of a tracked resource
            if (resources_.empty())
                return genResource(ctx, straightLine);
            const TrackedResource& res = resources_[pick(resources_.size())];
            if (res.attrs.empty())
                return genResource(ctx, straightLine);
            auto it = res.attrs.begin();
            std::advance(it, pick(res.attrs.size()));
            auto ref = makeExpr(ResRef{res.type, makeExpr(StrLit{res.title}, here())}, here());
            auto deref =
                makeExpr(Deref{std::move(ref), makeExpr(StrLit{it->first}, here())}, here());
            std::string name = freshVar();
            auto stmt = makeStmt(AssignStmt{name, std::move(deref)}, here());
            if (straightLine)
                topVars_.emplace(name, it->second);
            return stmt;
        }
        case 8: {
            if (depth <= 0)
                return genResource(ctx, straightLine);
            auto cond = genExpr(ctx, Ty::Bool, 2);
            return makeStmt(IfStmt{std::move(cond), genBlock(depth - 1),
                                   genBlock(depth - 1)},
                            here());
        }
        case 9: {
            if (depth <= 0)
                return genResource(ctx, straightLine);
            return makeStmt(UnlessStmt{genExpr(ctx, Ty::Bool, 2), genBlock(depth - 1)},
                            here());
        }
        case 10: {
            if (depth <= 0)
                return genResource(ctx, straightLine);
            Ty controlTy = scalarTy();
            CaseStmt cs;
            cs.control = genExpr(ctx, controlTy, 2);
            size_t arms = 1 + pick(2);
            for (size_t i = 0; i < arms; ++i)
                cs.arms.push_back(CaseArm{genExpr(ctx, controlTy, 0), genBlock(depth - 1)});
            if (chance(70))
                cs.arms.push_back(CaseArm{std::nullopt, genBlock(depth - 1)});
            return makeStmt(std::move(cs), here());
        }
        default: { // expression statement
            ExprPtr e = genExpr(ctx, anyTy(), 2);
            // a statement-position expression must not begin with '-' or '['
            // (the parser would join it onto the previous expression) or '{'
            // (rejected at statement start)
            std::string text = prettyExpr(e);
            if (!text.empty() && (text[0] == '-' || text[0] == '[' || text[0] == '{'))
                e = makeExpr(BoolLit{true}, here());
            return makeStmt(ExprStmt{std::move(e)}, here());
        }
        }
    }

    // a nonempty brace body; nested statements are conditional, so they do
    // not register tracked resources or declarations
    StmtPtr genBlock(int depth) {
        std::vector<StmtPtr> stmts;
        size_t n = 1 + pick(2);
        for (size_t i = 0; i < n; ++i)
            stmts.push_back(genTopStmt(depth, false));
        return foldSeq(std::move(stmts));
    }

    // ---- definitions -----------------------------------------------------
    std::vector<Param> genParams(size_t n, bool allDefaulted) {
        std::vector<Param> params;
        for (size_t i = 0; i < n; ++i) {
            Param p;
            p.name = "p" + std::to_string(i);
            if (allDefaulted || i > 0 || chance(50))
                p.defaultValue = literalOf(scalarTy());
            params.push_back(std::move(p));
        }
        return params;
    }

    StmtPtr genClassBody(ClassInfo& info, const std::vector<Param>& params) {
        std::map<std::string, Ty> vars;
        // parameters are bound like local variables, but their argument types
        // are not tracked, so they are only used in untyped positions
        std::vector<StmtPtr> stmts;
        size_t n = 1 + pick(3);
        ExprCtx ctx{&vars, true};
        for (size_t i = 0; i < n; ++i) {
            if (chance(60)) {
                Ty ty = scalarTy();
                std::string name = freshVar();
                stmts.push_back(makeStmt(AssignStmt{name, genExpr(ctx, ty, 2)}, here()));
                vars.emplace(name, ty);
                info.vars.emplace(name, ty);
            } else {
                ResDecl r;
                r.head = builtinType();
                r.title = makeExpr(StrLit{freshTitle()}, here());
                r.attrs = genAttrs(ctx, 1, nullptr);
                if (!params.empty() && chance(60))
                    r.attrs.push_back(
                        AttrPair{"extra", makeExpr(LocalVar{params[pick(params.size())].name},
                                                   here())});
                stmts.push_back(makeStmt(std::move(r), here()));
            }
        }
        return foldSeq(std::move(stmts));
    }

    void genClassDefs(std::vector<ManifestPtr>& items) {
        size_t nClasses = pick(5);
        for (size_t i = 0; i < nClasses; ++i) {
            ClassInfo info;
            info.name = "c" + std::to_string(i);
            bool forInclude = i % 2 == 0;
            info.params = genParams(pick(3), forInclude);
            info.includeSafe = true;
            for (const auto& p : info.params)
                if (!p.defaultValue)
                    info.includeSafe = false;
            // parents must be include-safe (declaring a child includes the
            // parent with no arguments) and must not be reserved for an
            // explicit declaration, which the automatic one would collide with
            if (i > 0 && chance(40)) {
                std::vector<size_t> safeParents;
                for (size_t j = 0; j < i; ++j)
                    if (classes_[j].includeSafe && !classes_[j].declareOnly)
                        safeParents.push_back(j);
                if (!safeParents.empty())
                    info.parent = classes_[safeParents[pick(safeParents.size())]].name;
            }
            info.declareOnly = !(info.includeSafe && forInclude);
            ClassDef def;
            def.name = info.name;
            def.parent = info.parent;
            def.params = info.params;
            def.body = genClassBody(info, info.params);
            size_t index = classes_.size();
            classes_.push_back(info);
            if (info.declareOnly) {
                declarePool_.push_back(index);
                declared_.push_back(false);
            } else {
                includePool_.push_back(index);
            }
            items.push_back(makeManifest(std::move(def), here()));
        }
    }

    void genDefineDefs(std::vector<ManifestPtr>& items) {
        size_t nDefs = pick(3);
        for (size_t i = 0; i < nDefs; ++i) {
            DefInfo info;
            info.name = "d" + std::to_string(i);
            info.params = genParams(1 + pick(2), false);
            DefineDef def;
            def.name = info.name;
            def.params = info.params;

            std::map<std::string, Ty> vars{{"title", Ty::Str}};
            ExprCtx ctx{&vars, true};
            ResDecl r;
            r.head = builtinType();
            r.title = makeExpr(LocalVar{"title"}, here());
            r.attrs = genAttrs(ctx, 0, nullptr);
            r.attrs.push_back(
                AttrPair{"source", makeExpr(LocalVar{info.params[0].name}, here())});
            def.body = makeStmt(std::move(r), here());

            defines_.push_back(info);
            items.push_back(makeManifest(std::move(def), here()));
        }
    }

    void genNodeDefs(std::vector<ManifestPtr>& items) {
        if (chance(40)) { // a non-matching node: compiles to skip
            NodeDef nd;
            nd.spec.isDefault = false;
            nd.spec.names = {"other.example"};
            nd.body = genBlock(1);
            items.push_back(makeManifest(std::move(nd), here()));
        }
        if (chance(70)) {
            NodeDef nd;
            if (chance(30)) {
                nd.spec.isDefault = true;
            } else {
                nd.spec.isDefault = false;
                if (chance(30))
                    nd.spec.names = {"spare.example", "gen.node.example"};
                else
                    nd.spec.names = {"gen.node.example"};
            }
            nd.body = genBlock(1);
            items.push_back(makeManifest(std::move(nd), here()));
        }
    }
};

} // namespace gen_detail

inline GenOutput genSafeManifest(unsigned long long seed) {
    return gen_detail::Gen(seed).run();
}

// Grafts one failing fragment onto a safe manifest. The fragment names use a
// reserved suffix so they cannot collide with generated names.
inline GenOutput genFaultyManifest(unsigned long long seed) {
    GenOutput out = genSafeManifest(seed);
    static const ErrKind kinds[] = {
        ErrKind::UndefinedVariable,   ErrKind::DuplicateVariable,
        ErrKind::DuplicateResource,   ErrKind::UndefinedDefinition,
        ErrKind::ClassAlreadyDeclared, ErrKind::MissingParameter,
        ErrKind::UnknownParameter,    ErrKind::TypeMismatch,
        ErrKind::DivisionByZero,      ErrKind::SelectorNoMatch,
        ErrKind::BadDereference,      ErrKind::InheritanceCycle,
        ErrKind::StepLimitExceeded,
    };
    std::mt19937_64 eng(seed ^ 0x9e3779b97f4a7c15ULL);
    ErrKind kind = kinds[eng() % (sizeof(kinds) / sizeof(kinds[0]))];

    const char* fragment = nullptr;
    switch (kind) {
    case ErrKind::UndefinedVariable: fragment = "$x_flt = $missing_flt"; break;
    case ErrKind::DuplicateVariable: fragment = "$dup_flt = 1 $dup_flt = 2"; break;
    case ErrKind::DuplicateResource:
        fragment = "file { 'flt': } file { 'flt': }";
        break;
    case ErrKind::UndefinedDefinition: fragment = "include missing_flt"; break;
    case ErrKind::ClassAlreadyDeclared:
        fragment = "class flt_c { $a_flt = 1 } include flt_c class { flt_c: }";
        break;
    case ErrKind::MissingParameter:
        fragment = "define flt_d($req) { file { $title: } } flt_d { 'flt_t': }";
        break;
    case ErrKind::UnknownParameter:
        fragment = "define flt_e($opt = 1) { file { $title: } } "
                   "flt_e { 'flt_u': nosuch => 2 }";
        break;
    case ErrKind::TypeMismatch: fragment = "$t_flt = 1 + 'nope'"; break;
    case ErrKind::DivisionByZero: fragment = "$z_flt = 1 / 0"; break;
    case ErrKind::SelectorNoMatch: fragment = "$s_flt = 99 ? { 1 => 2 }"; break;
    case ErrKind::BadDereference: fragment = "$b_flt = [1, 2][7]"; break;
    case ErrKind::InheritanceCycle:
    case ErrKind::StepLimitExceeded:
        fragment = "class flt_a inherits flt_b { $qa_flt = 1 } "
                   "class flt_b inherits flt_a { $qb_flt = 1 } "
                   "include flt_a";
        break;
    default: fragment = "$x_flt = $missing_flt"; break;
    }

    // class and define definitions must precede the statements that use them,
    // so faulty fragments are prepended as a whole
    out.source = std::string(fragment) + "\n" + out.source;
    out.expectError = kind;
    out.manifest = parseSource(out.source);
    if (kind == ErrKind::StepLimitExceeded) {
        out.paperDivergence = true;
        out.maxSteps = 300;
    }
    return out;
}

} // namespace pupcat
