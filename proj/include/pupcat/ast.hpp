#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scope.hpp"

namespace pupcat {

struct SourcePos {
    int line = 0;
    int column = 0;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinOp { Add, Sub, Mul, Div, Mod, Gt, Lt, Ge, Le, Eq, Ne, And, Or };

inline const char* binOpName(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Gt:  return ">";
    case BinOp::Lt:  return "<";
    case BinOp::Ge:  return ">=";
    case BinOp::Le:  return "<=";
    case BinOp::Eq:  return "==";
    case BinOp::Ne:  return "!=";
    case BinOp::And: return "and";
    case BinOp::Or:  return "or";
    }
    return "?";
}

struct IntLit  { long long value = 0; };
struct StrLit  { std::string value; };
struct BoolLit { bool value = false; };

// $x: unqualified, resolved in the ambient scope then up the parent chain
struct LocalVar { std::string name; };
// $::x: top scope
struct TopVar { std::string name; };
// $a::x or $::a::x: class a's scope (a may itself contain ::)
struct ClassVar {
    std::string cls;
    std::string name;
};

struct UnaryNot { ExprPtr operand; };
struct Binary {
    BinOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct ArrayLit { std::vector<ExprPtr> elems; };

// Hash keys are scalars: integers or strings.
using ScalarKey = std::variant<long long, std::string>;

struct HashPair {
    ScalarKey key;
    ExprPtr value;
};
struct HashLit { std::vector<HashPair> pairs; };

// e1[e2]: array index, hash key, or declared-resource attribute access
struct Deref {
    ExprPtr head;
    ExprPtr index;
};

// T[e]: reference to a declared built-in resource (type stored lowercase)
struct ResRef {
    std::string type;
    ExprPtr title;
};

// control ? { guard => e, ..., default => e }; guard nullopt = default arm
struct SelectArm {
    std::optional<ExprPtr> guard;
    ExprPtr body;
};
struct Select {
    ExprPtr control;
    std::vector<SelectArm> arms;
};

struct Expr {
    SourcePos pos;
    std::variant<IntLit, StrLit, BoolLit, LocalVar, TopVar, ClassVar, UnaryNot,
                 Binary, ArrayLit, HashLit, Deref, ResRef, Select>
        node;
};

template <typename T>
ExprPtr makeExpr(T node, SourcePos pos = {}) {
    return std::make_shared<Expr>(Expr{pos, std::move(node)});
}

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

// Normal form; never produced by the parser (except for empty input, which
// parses directly to the already-finished manifest).
struct SkipStmt {};

struct ExprStmt { ExprPtr expr; };

struct SeqStmt {
    StmtPtr first;
    StmtPtr second;
};

struct AssignStmt {
    std::string name;
    ExprPtr value;
};

struct IfStmt {
    ExprPtr cond;
    StmtPtr thenBody;
    StmtPtr elseBody;
};

struct UnlessStmt {
    ExprPtr cond;
    StmtPtr body;
};

struct CaseArm {
    std::optional<ExprPtr> guard; // nullopt = default arm
    StmtPtr body;
};
struct CaseStmt {
    ExprPtr control;
    std::vector<CaseArm> arms;
};

// head { title-expr: attr => e, ... }
// The head word is resolved against the built-in type set at evaluation time,
// deciding between a catalog resource and a defined-resource instantiation.
struct AttrPair {
    std::string name;
    ExprPtr value;
};
struct ResDecl {
    std::string head;
    ExprPtr title;
    std::vector<AttrPair> attrs;
};

// class { name: attr => e, ... }
struct ClassDecl {
    std::string name;
    std::vector<AttrPair> args;
};

struct IncludeStmt { std::string name; };

// fail(e): evaluates e, then aborts compilation with its rendering
struct FailStmt { ExprPtr message; };

// Internal construct tracking the scope in effect; never parsed from source.
struct ScopeStmt {
    Scope scope;
    StmtPtr body;
};

struct Stmt {
    SourcePos pos;
    std::variant<SkipStmt, ExprStmt, SeqStmt, AssignStmt, IfStmt, UnlessStmt,
                 CaseStmt, ResDecl, ClassDecl, IncludeStmt, FailStmt, ScopeStmt>
        node;
};

template <typename T>
StmtPtr makeStmt(T node, SourcePos pos = {}) {
    return std::make_shared<Stmt>(Stmt{pos, std::move(node)});
}

inline bool isSkip(const Stmt& s) {
    return std::holds_alternative<SkipStmt>(s.node);
}
inline bool isSkip(const StmtPtr& s) { return s && isSkip(*s); }

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

struct Manifest;
using ManifestPtr = std::shared_ptr<const Manifest>;

// node default { ... }  or  node 'a.example.com', 'b.example.com' { ... }
struct NodeSpec {
    bool isDefault = false;
    std::vector<std::string> names;
};

struct Param {
    std::string name;
    ExprPtr defaultValue; // null = required parameter
};
using Params = std::vector<Param>;

struct MStmt { StmtPtr stmt; };
struct MSeq {
    ManifestPtr first;
    ManifestPtr second;
};
struct NodeDef {
    NodeSpec spec;
    StmtPtr body;
};
struct DefineDef {
    std::string name;
    Params params;
    StmtPtr body;
};
struct ClassDef {
    std::string name;
    std::optional<std::string> parent;
    Params params;
    StmtPtr body;
};

struct Manifest {
    SourcePos pos;
    std::variant<MStmt, MSeq, NodeDef, DefineDef, ClassDef> node;
};

template <typename T>
ManifestPtr makeManifest(T node, SourcePos pos = {}) {
    return std::make_shared<Manifest>(Manifest{pos, std::move(node)});
}

inline bool isManifestDone(const Manifest& m) {
    auto* ms = std::get_if<MStmt>(&m.node);
    return ms && isSkip(ms->stmt);
}
inline bool isManifestDone(const ManifestPtr& m) { return m && isManifestDone(*m); }

// ---------------------------------------------------------------------------
// Structural equality, ignoring source positions
// ---------------------------------------------------------------------------

bool equalExpr(const ExprPtr& a, const ExprPtr& b);
bool equalStmt(const StmtPtr& a, const StmtPtr& b);
bool equalManifest(const ManifestPtr& a, const ManifestPtr& b);

inline bool equalKey(const ScalarKey& a, const ScalarKey& b) { return a == b; }

inline bool equalParams(const Params& a, const Params& b) {
    if (a.size() != b.size())
        return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].name != b[i].name)
            return false;
        if (static_cast<bool>(a[i].defaultValue) != static_cast<bool>(b[i].defaultValue))
            return false;
        if (a[i].defaultValue && !equalExpr(a[i].defaultValue, b[i].defaultValue))
            return false;
    }
    return true;
}

inline bool equalAttrs(const std::vector<AttrPair>& a, const std::vector<AttrPair>& b) {
    if (a.size() != b.size())
        return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].name != b[i].name || !equalExpr(a[i].value, b[i].value))
            return false;
    return true;
}

inline bool equalExpr(const ExprPtr& a, const ExprPtr& b) {
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    if (a->node.index() != b->node.index())
        return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, IntLit>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<T, StrLit>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<T, BoolLit>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<T, LocalVar>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, TopVar>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, ClassVar>) {
                return x.cls == y.cls && x.name == y.name;
            } else if constexpr (std::is_same_v<T, UnaryNot>) {
                return equalExpr(x.operand, y.operand);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return x.op == y.op && equalExpr(x.lhs, y.lhs) && equalExpr(x.rhs, y.rhs);
            } else if constexpr (std::is_same_v<T, ArrayLit>) {
                if (x.elems.size() != y.elems.size())
                    return false;
                for (size_t i = 0; i < x.elems.size(); ++i)
                    if (!equalExpr(x.elems[i], y.elems[i]))
                        return false;
                return true;
            } else if constexpr (std::is_same_v<T, HashLit>) {
                if (x.pairs.size() != y.pairs.size())
                    return false;
                for (size_t i = 0; i < x.pairs.size(); ++i)
                    if (!equalKey(x.pairs[i].key, y.pairs[i].key) ||
                        !equalExpr(x.pairs[i].value, y.pairs[i].value))
                        return false;
                return true;
            } else if constexpr (std::is_same_v<T, Deref>) {
                return equalExpr(x.head, y.head) && equalExpr(x.index, y.index);
            } else if constexpr (std::is_same_v<T, ResRef>) {
                return x.type == y.type && equalExpr(x.title, y.title);
            } else if constexpr (std::is_same_v<T, Select>) {
                if (!equalExpr(x.control, y.control) || x.arms.size() != y.arms.size())
                    return false;
                for (size_t i = 0; i < x.arms.size(); ++i) {
                    const auto& p = x.arms[i];
                    const auto& q = y.arms[i];
                    if (p.guard.has_value() != q.guard.has_value())
                        return false;
                    if (p.guard && !equalExpr(*p.guard, *q.guard))
                        return false;
                    if (!equalExpr(p.body, q.body))
                        return false;
                }
                return true;
            }
        },
        a->node);
}

inline bool equalStmt(const StmtPtr& a, const StmtPtr& b) {
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    if (a->node.index() != b->node.index())
        return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, SkipStmt>) {
                return true;
            } else if constexpr (std::is_same_v<T, ExprStmt>) {
                return equalExpr(x.expr, y.expr);
            } else if constexpr (std::is_same_v<T, SeqStmt>) {
                return equalStmt(x.first, y.first) && equalStmt(x.second, y.second);
            } else if constexpr (std::is_same_v<T, AssignStmt>) {
                return x.name == y.name && equalExpr(x.value, y.value);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                return equalExpr(x.cond, y.cond) && equalStmt(x.thenBody, y.thenBody) &&
                       equalStmt(x.elseBody, y.elseBody);
            } else if constexpr (std::is_same_v<T, UnlessStmt>) {
                return equalExpr(x.cond, y.cond) && equalStmt(x.body, y.body);
            } else if constexpr (std::is_same_v<T, CaseStmt>) {
                if (!equalExpr(x.control, y.control) || x.arms.size() != y.arms.size())
                    return false;
                for (size_t i = 0; i < x.arms.size(); ++i) {
                    const auto& p = x.arms[i];
                    const auto& q = y.arms[i];
                    if (p.guard.has_value() != q.guard.has_value())
                        return false;
                    if (p.guard && !equalExpr(*p.guard, *q.guard))
                        return false;
                    if (!equalStmt(p.body, q.body))
                        return false;
                }
                return true;
            } else if constexpr (std::is_same_v<T, ResDecl>) {
                return x.head == y.head && equalExpr(x.title, y.title) &&
                       equalAttrs(x.attrs, y.attrs);
            } else if constexpr (std::is_same_v<T, ClassDecl>) {
                return x.name == y.name && equalAttrs(x.args, y.args);
            } else if constexpr (std::is_same_v<T, IncludeStmt>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, FailStmt>) {
                return equalExpr(x.message, y.message);
            } else if constexpr (std::is_same_v<T, ScopeStmt>) {
                return x.scope == y.scope && equalStmt(x.body, y.body);
            }
        },
        a->node);
}

inline bool equalManifest(const ManifestPtr& a, const ManifestPtr& b) {
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    if (a->node.index() != b->node.index())
        return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, MStmt>) {
                return equalStmt(x.stmt, y.stmt);
            } else if constexpr (std::is_same_v<T, MSeq>) {
                return equalManifest(x.first, y.first) && equalManifest(x.second, y.second);
            } else if constexpr (std::is_same_v<T, NodeDef>) {
                return x.spec.isDefault == y.spec.isDefault && x.spec.names == y.spec.names &&
                       equalStmt(x.body, y.body);
            } else if constexpr (std::is_same_v<T, DefineDef>) {
                return x.name == y.name && equalParams(x.params, y.params) &&
                       equalStmt(x.body, y.body);
            } else if constexpr (std::is_same_v<T, ClassDef>) {
                return x.name == y.name && x.parent == y.parent &&
                       equalParams(x.params, y.params) && equalStmt(x.body, y.body);
            }
        },
        a->node);
}

} // namespace pupcat
