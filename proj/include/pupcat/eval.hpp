#pragma once

#include <limits>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ast.hpp"
#include "env.hpp"
#include "errors.hpp"
#include "pretty.hpp"
#include "scope.hpp"
#include "value.hpp"

namespace pupcat {

// ---------------------------------------------------------------------------
// Rules and derivations
// ---------------------------------------------------------------------------

// One name per small-step rule. Congruence rules wrap the rule that fires
// inside them, so every step is described by a chain of these, outermost
// first; the last entry is the rule that did the work.
enum class Rule {
    // variables
    LVar, PVar, TVar, QVar,
    // arithmetic (+ - * / %)
    ArithLeft, ArithRight, ArithValue,
    // comparisons (> < >= <= == !=); ValueI yields true, ValueII false
    CompLeft, CompRight, CompValueI, CompValueII,
    // boolean connectives
    AndLeft, AndRightI, AndRightII, AndValue,
    OrLeft, OrRightI, OrRightII, OrValue,
    NotStep, NotValueI, NotValueII,
    // arrays and hash literals
    ArrExp, ArrEleI, ArrEleII,
    HaExp, HEleI, HEleII,
    // selectors
    SControl, SCase, SChooseI, SChooseII, SDefault,
    // dereferencing
    DeRefExp, DeRefIndex, DeRefArray, DeRefHash, RefRes, DeRefRes,
    // statements
    ExprStep, Expr,
    SeqStep, SeqSkip,
    AssignStep, Assign,
    IfStep, IfT, IfF,
    UnlessStep, UnlessT, UnlessF,
    CaseStep1, CaseStep2, CaseMatch, CaseNoMatch, CaseDone,
    ResStep, ResDecl, ResTitle, ResStepI, ResStepII, ResStepIII,
    DefStep, Def,
    IncU, IncD, IncPU, IncPD,
    CDecStep, CDecU, CDecPU, CDecPD,
    ScopeStep, DefScopeStep, ScopeDone, DefScopeDone,
    FailStep,
    // manifests
    TopScope, MSeqStep, MSeqSkip,
    NodeMatch, NodeNoMatch,
    RDef, CDef, CDefI, CDefP, CDefPI,
};

inline const char* ruleName(Rule r) {
    switch (r) {
    case Rule::LVar: return "LVar";
    case Rule::PVar: return "PVar";
    case Rule::TVar: return "TVar";
    case Rule::QVar: return "QVar";
    case Rule::ArithLeft: return "ArithLeft";
    case Rule::ArithRight: return "ArithRight";
    case Rule::ArithValue: return "ArithValue";
    case Rule::CompLeft: return "CompLeft";
    case Rule::CompRight: return "CompRight";
    case Rule::CompValueI: return "CompValueI";
    case Rule::CompValueII: return "CompValueII";
    case Rule::AndLeft: return "AndLeft";
    case Rule::AndRightI: return "AndRightI";
    case Rule::AndRightII: return "AndRightII";
    case Rule::AndValue: return "AndValue";
    case Rule::OrLeft: return "OrLeft";
    case Rule::OrRightI: return "OrRightI";
    case Rule::OrRightII: return "OrRightII";
    case Rule::OrValue: return "OrValue";
    case Rule::NotStep: return "NotStep";
    case Rule::NotValueI: return "NotValueI";
    case Rule::NotValueII: return "NotValueII";
    case Rule::ArrExp: return "ArrExp";
    case Rule::ArrEleI: return "ArrEleI";
    case Rule::ArrEleII: return "ArrEleII";
    case Rule::HaExp: return "HaExp";
    case Rule::HEleI: return "HEleI";
    case Rule::HEleII: return "HEleII";
    case Rule::SControl: return "SControl";
    case Rule::SCase: return "SCase";
    case Rule::SChooseI: return "SChooseI";
    case Rule::SChooseII: return "SChooseII";
    case Rule::SDefault: return "SDefault";
    case Rule::DeRefExp: return "DeRefExp";
    case Rule::DeRefIndex: return "DeRefIndex";
    case Rule::DeRefArray: return "DeRefArray";
    case Rule::DeRefHash: return "DeRefHash";
    case Rule::RefRes: return "RefRes";
    case Rule::DeRefRes: return "DeRefRes";
    case Rule::ExprStep: return "ExprStep";
    case Rule::Expr: return "Expr";
    case Rule::SeqStep: return "SeqStep";
    case Rule::SeqSkip: return "SeqSkip";
    case Rule::AssignStep: return "AssignStep";
    case Rule::Assign: return "Assign";
    case Rule::IfStep: return "IfStep";
    case Rule::IfT: return "IfT";
    case Rule::IfF: return "IfF";
    case Rule::UnlessStep: return "UnlessStep";
    case Rule::UnlessT: return "UnlessT";
    case Rule::UnlessF: return "UnlessF";
    case Rule::CaseStep1: return "CaseStep1";
    case Rule::CaseStep2: return "CaseStep2";
    case Rule::CaseMatch: return "CaseMatch";
    case Rule::CaseNoMatch: return "CaseNoMatch";
    case Rule::CaseDone: return "CaseDone";
    case Rule::ResStep: return "ResStep";
    case Rule::ResDecl: return "ResDecl";
    case Rule::ResTitle: return "ResTitle";
    case Rule::ResStepI: return "ResStepI";
    case Rule::ResStepII: return "ResStepII";
    case Rule::ResStepIII: return "ResStepIII";
    case Rule::DefStep: return "DefStep";
    case Rule::Def: return "Def";
    case Rule::IncU: return "IncU";
    case Rule::IncD: return "IncD";
    case Rule::IncPU: return "IncPU";
    case Rule::IncPD: return "IncPD";
    case Rule::CDecStep: return "CDecStep";
    case Rule::CDecU: return "CDecU";
    case Rule::CDecPU: return "CDecPU";
    case Rule::CDecPD: return "CDecPD";
    case Rule::ScopeStep: return "ScopeStep";
    case Rule::DefScopeStep: return "DefScopeStep";
    case Rule::ScopeDone: return "ScopeDone";
    case Rule::DefScopeDone: return "DefScopeDone";
    case Rule::FailStep: return "FailStep";
    case Rule::TopScope: return "TopScope";
    case Rule::MSeqStep: return "MSeqStep";
    case Rule::MSeqSkip: return "MSeqSkip";
    case Rule::NodeMatch: return "NodeMatch";
    case Rule::NodeNoMatch: return "NodeNoMatch";
    case Rule::RDef: return "RDef";
    case Rule::CDef: return "CDef";
    case Rule::CDefI: return "CDefI";
    case Rule::CDefP: return "CDefP";
    case Rule::CDefPI: return "CDefPI";
    }
    return "?";
}

// The three judgements of the semantics plus the auxiliary list judgements
// used inside array, hash and resource-body evaluation. The innermost rule of
// a derivation always lands in Expr, Stmt or Manifest.
enum class Judgement { Expr, Stmt, Manifest, ArrayElems, HashPairs, ResBody };

inline const char* judgementName(Judgement j) {
    switch (j) {
    case Judgement::Expr: return "EXPR";
    case Judgement::Stmt: return "STMT";
    case Judgement::Manifest: return "MANIFEST";
    case Judgement::ArrayElems: return "ARRAY";
    case Judgement::HashPairs: return "HASH";
    case Judgement::ResBody: return "RESBODY";
    }
    return "?";
}

using TermRef = std::variant<ExprPtr, StmtPtr, ManifestPtr>;

struct DerivEntry {
    Judgement judgement;
    Rule rule;
    Scope scope;
    TermRef term;
};
using Deriv = std::vector<DerivEntry>;

inline void record(Deriv* deriv, Judgement j, Rule r, const Scope& scope, TermRef term) {
    if (deriv)
        deriv->push_back(DerivEntry{j, r, scope, std::move(term)});
}

// ---------------------------------------------------------------------------
// Evaluation state and options
// ---------------------------------------------------------------------------

struct EvalState {
    VarEnv vars;
    DefEnv defs;
    Catalog catalog;
};

struct EvalOptions {
    long long maxSteps = 1000000;
    // Reproduce the reference behaviour of looping on inheritance cycles
    // (until the step limit) instead of reporting them eagerly.
    bool paperDivergence = false;
    std::set<std::string> builtinTypes = defaultBuiltinTypes();
};

[[noreturn]] inline void evalFail(ErrKind kind, SourcePos pos, const Scope& scope,
                                  const std::string& msg) {
    throw CompileError(kind, pos, scope, msg);
}

// ---------------------------------------------------------------------------
// Expression stepping (pure: reads state, never writes)
// ---------------------------------------------------------------------------

ExprPtr stepExpr(const EvalState& st, const Scope& scope, const ExprPtr& e, Deriv* deriv);

namespace detail {

inline bool caseMatches(const ValuePtr& control, const ValuePtr& guard) {
    return valueEquals(control, guard);
}

inline bool isIntExpr(const ExprPtr& e, long long& out) {
    if (auto* i = std::get_if<IntLit>(&e->node)) {
        out = i->value;
        return true;
    }
    return false;
}

inline bool isBoolExpr(const ExprPtr& e, bool& out) {
    if (auto* b = std::get_if<BoolLit>(&e->node)) {
        out = b->value;
        return true;
    }
    return false;
}

inline bool isArith(BinOp op) {
    return op == BinOp::Add || op == BinOp::Sub || op == BinOp::Mul || op == BinOp::Div ||
           op == BinOp::Mod;
}
inline bool isNumericComp(BinOp op) {
    return op == BinOp::Gt || op == BinOp::Lt || op == BinOp::Ge || op == BinOp::Le;
}
inline bool isEquality(BinOp op) { return op == BinOp::Eq || op == BinOp::Ne; }

inline long long arith(BinOp op, long long a, long long b, SourcePos pos,
                       const Scope& scope) {
    long long r = 0;
    bool overflow = false;
    switch (op) {
    case BinOp::Add: overflow = __builtin_add_overflow(a, b, &r); break;
    case BinOp::Sub: overflow = __builtin_sub_overflow(a, b, &r); break;
    case BinOp::Mul: overflow = __builtin_mul_overflow(a, b, &r); break;
    case BinOp::Div:
        if (b == 0)
            evalFail(ErrKind::DivisionByZero, pos, scope, "division by zero");
        if (a == std::numeric_limits<long long>::min() && b == -1)
            overflow = true;
        else
            r = a / b;
        break;
    case BinOp::Mod:
        if (b == 0)
            evalFail(ErrKind::DivisionByZero, pos, scope, "modulo by zero");
        if (a == std::numeric_limits<long long>::min() && b == -1)
            overflow = true;
        else
            r = a % b;
        break;
    default: break;
    }
    if (overflow)
        evalFail(ErrKind::TypeMismatch, pos, scope, "integer overflow");
    return r;
}

inline bool numericComp(BinOp op, long long a, long long b) {
    switch (op) {
    case BinOp::Gt: return a > b;
    case BinOp::Lt: return a < b;
    case BinOp::Ge: return a >= b;
    default:        return a <= b;
    }
}

// Looks up $x starting at `scope` and climbing parent scopes, recording the
// LVar/PVar chain. Implements the variable rules only; qualified forms are
// handled directly in stepExpr.
inline ExprPtr lookupLocalVar(const EvalState& st, const Scope& scope, const ExprPtr& e,
                              const LocalVar& var, Deriv* deriv) {
    Scope cur = scope;
    for (;;) {
        if (auto v = st.vars.lookup(cur, var.name)) {
            record(deriv, Judgement::Expr, Rule::LVar, cur, e);
            return valueToExpr(*v, e->pos);
        }
        auto parent = parentOf(cur, st.defs);
        if (!parent) {
            if (!cur.isTop())
                evalFail(ErrKind::InternalStuck, e->pos, cur,
                         "no parent scope for " + cur.str());
            evalFail(ErrKind::UndefinedVariable, e->pos, scope,
                     "variable $" + var.name + " is not defined");
        }
        record(deriv, Judgement::Expr, Rule::PVar, cur, e);
        cur = *parent;
    }
}

// One step of the array-element list A: step the first non-value element.
inline std::vector<ExprPtr> stepElems(const EvalState& st, const Scope& scope,
                                      const std::vector<ExprPtr>& elems, const ExprPtr& whole,
                                      Deriv* deriv) {
    std::vector<ExprPtr> out = elems;
    for (size_t i = 0; i < out.size(); ++i) {
        if (isValueExpr(out[i])) {
            record(deriv, Judgement::ArrayElems, Rule::ArrEleI, scope, whole);
            continue;
        }
        record(deriv, Judgement::ArrayElems, Rule::ArrEleII, scope, whole);
        out[i] = stepExpr(st, scope, out[i], deriv);
        return out;
    }
    evalFail(ErrKind::InternalStuck, whole->pos, scope, "array already fully evaluated");
}

// One step of a hash-literal pair list (HEle rules) or an attribute list
// (ResStep rules); the two relations share their shape.
template <typename Pairs, typename GetExpr, typename SetExpr>
void stepPairList(const EvalState& st, const Scope& scope, Pairs& pairs, GetExpr getExpr,
                  SetExpr setExpr, Rule skipRule, Rule stepRule, Judgement judgement,
                  TermRef whole, SourcePos pos, Deriv* deriv) {
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (isValueExpr(getExpr(pairs[i]))) {
            record(deriv, judgement, skipRule, scope, whole);
            continue;
        }
        record(deriv, judgement, stepRule, scope, whole);
        setExpr(pairs[i], stepExpr(st, scope, getExpr(pairs[i]), deriv));
        return;
    }
    evalFail(ErrKind::InternalStuck, pos, scope, "pair list already fully evaluated");
}

ExprPtr stepBinary(const EvalState& st, const Scope& scope, const ExprPtr& e,
                   const Binary& b, Deriv* deriv);
ExprPtr stepDeref(const EvalState& st, const Scope& scope, const ExprPtr& e, const Deref& d,
                  Deriv* deriv);
ExprPtr stepSelect(const EvalState& st, const Scope& scope, const ExprPtr& e,
                   const Select& sel, Deriv* deriv);

} // namespace detail

inline ExprPtr stepExpr(const EvalState& st, const Scope& scope, const ExprPtr& e,
                        Deriv* deriv) {
    using namespace detail;
    return std::visit(
        [&](const auto& x) -> ExprPtr {
            using T = std::decay_t<decltype(x)>;
            SourcePos pos = e->pos;
            if constexpr (std::is_same_v<T, IntLit> || std::is_same_v<T, StrLit> ||
                          std::is_same_v<T, BoolLit>) {
                evalFail(ErrKind::InternalStuck, pos, scope, "expression is already a value");
            } else if constexpr (std::is_same_v<T, LocalVar>) {
                return lookupLocalVar(st, scope, e, x, deriv);
            } else if constexpr (std::is_same_v<T, TopVar>) {
                if (auto v = st.vars.lookup(Scope::top(), x.name)) {
                    record(deriv, Judgement::Expr, Rule::TVar, scope, e);
                    return valueToExpr(*v, pos);
                }
                evalFail(ErrKind::UndefinedVariable, pos, scope,
                         "variable $::" + x.name + " is not defined");
            } else if constexpr (std::is_same_v<T, ClassVar>) {
                if (auto v = st.vars.lookup(Scope::forClass(x.cls), x.name)) {
                    record(deriv, Judgement::Expr, Rule::QVar, scope, e);
                    return valueToExpr(*v, pos);
                }
                evalFail(ErrKind::UndefinedVariable, pos, scope,
                         "variable $::" + x.cls + "::" + x.name + " is not defined");
            } else if constexpr (std::is_same_v<T, UnaryNot>) {
                if (!isValueExpr(x.operand)) {
                    record(deriv, Judgement::Expr, Rule::NotStep, scope, e);
                    return makeExpr(UnaryNot{stepExpr(st, scope, x.operand, deriv)}, pos);
                }
                bool b;
                if (!isBoolExpr(x.operand, b))
                    evalFail(ErrKind::TypeMismatch, pos, scope, "'!' expects a boolean");
                record(deriv, Judgement::Expr, b ? Rule::NotValueI : Rule::NotValueII, scope,
                       e);
                return makeExpr(BoolLit{!b}, pos);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return stepBinary(st, scope, e, x, deriv);
            } else if constexpr (std::is_same_v<T, ArrayLit>) {
                record(deriv, Judgement::Expr, Rule::ArrExp, scope, e);
                return makeExpr(ArrayLit{stepElems(st, scope, x.elems, e, deriv)}, pos);
            } else if constexpr (std::is_same_v<T, HashLit>) {
                record(deriv, Judgement::Expr, Rule::HaExp, scope, e);
                HashLit h = x;
                stepPairList(
                    st, scope, h.pairs, [](const HashPair& p) { return p.value; },
                    [](HashPair& p, ExprPtr v) { p.value = std::move(v); }, Rule::HEleI,
                    Rule::HEleII, Judgement::HashPairs, e, pos, deriv);
                return makeExpr(std::move(h), pos);
            } else if constexpr (std::is_same_v<T, Deref>) {
                return stepDeref(st, scope, e, x, deriv);
            } else if constexpr (std::is_same_v<T, ResRef>) {
                if (!isValueExpr(x.title)) {
                    record(deriv, Judgement::Expr, Rule::RefRes, scope, e);
                    return makeExpr(ResRef{x.type, stepExpr(st, scope, x.title, deriv)}, pos);
                }
                // a fully evaluated reference is a value unless the title
                // came out non-string
                evalFail(ErrKind::TypeMismatch, pos, scope,
                         "resource reference title must be a string");
            } else if constexpr (std::is_same_v<T, Select>) {
                return stepSelect(st, scope, e, x, deriv);
            }
        },
        e->node);
}

namespace detail {

inline ExprPtr stepBinary(const EvalState& st, const Scope& scope, const ExprPtr& e,
                          const Binary& b, Deriv* deriv) {
    SourcePos pos = e->pos;
    auto rebuildL = [&](Rule r) {
        record(deriv, Judgement::Expr, r, scope, e);
        return makeExpr(Binary{b.op, stepExpr(st, scope, b.lhs, deriv), b.rhs}, pos);
    };
    auto rebuildR = [&](Rule r) {
        record(deriv, Judgement::Expr, r, scope, e);
        return makeExpr(Binary{b.op, b.lhs, stepExpr(st, scope, b.rhs, deriv)}, pos);
    };

    if (isArith(b.op)) {
        if (!isValueExpr(b.lhs))
            return rebuildL(Rule::ArithLeft);
        long long a;
        if (!isIntExpr(b.lhs, a))
            evalFail(ErrKind::TypeMismatch, pos, scope,
                     std::string("left operand of '") + binOpName(b.op) +
                         "' must be an integer");
        if (!isValueExpr(b.rhs))
            return rebuildR(Rule::ArithRight);
        long long c;
        if (!isIntExpr(b.rhs, c))
            evalFail(ErrKind::TypeMismatch, pos, scope,
                     std::string("right operand of '") + binOpName(b.op) +
                         "' must be an integer");
        record(deriv, Judgement::Expr, Rule::ArithValue, scope, e);
        return makeExpr(IntLit{arith(b.op, a, c, pos, scope)}, pos);
    }

    if (isNumericComp(b.op) || isEquality(b.op)) {
        if (!isValueExpr(b.lhs))
            return rebuildL(Rule::CompLeft);
        if (!isValueExpr(b.rhs))
            return rebuildR(Rule::CompRight);
        bool result;
        if (isEquality(b.op)) {
            bool eq = valueEquals(*exprToValue(b.lhs), *exprToValue(b.rhs));
            result = b.op == BinOp::Eq ? eq : !eq;
        } else {
            long long a, c;
            if (!isIntExpr(b.lhs, a) || !isIntExpr(b.rhs, c))
                evalFail(ErrKind::TypeMismatch, pos, scope,
                         std::string("'") + binOpName(b.op) + "' compares integers");
            result = numericComp(b.op, a, c);
        }
        record(deriv, Judgement::Expr, result ? Rule::CompValueI : Rule::CompValueII, scope,
               e);
        return makeExpr(BoolLit{result}, pos);
    }

    // and / or
    bool isAnd = b.op == BinOp::And;
    if (!isValueExpr(b.lhs))
        return rebuildL(isAnd ? Rule::AndLeft : Rule::OrLeft);
    bool lv;
    if (!isBoolExpr(b.lhs, lv))
        evalFail(ErrKind::TypeMismatch, pos, scope,
                 std::string("left operand of '") + binOpName(b.op) + "' must be a boolean");
    // Short-circuit side: the pending operand is discarded unevaluated.
    if (isAnd && !lv) {
        record(deriv, Judgement::Expr, Rule::AndRightI, scope, e);
        return makeExpr(BoolLit{false}, pos);
    }
    if (!isAnd && lv) {
        record(deriv, Judgement::Expr, Rule::OrRightI, scope, e);
        return makeExpr(BoolLit{true}, pos);
    }
    if (!isValueExpr(b.rhs))
        return rebuildR(isAnd ? Rule::AndRightII : Rule::OrRightII);
    bool rv;
    if (!isBoolExpr(b.rhs, rv))
        evalFail(ErrKind::TypeMismatch, pos, scope,
                 std::string("right operand of '") + binOpName(b.op) + "' must be a boolean");
    record(deriv, Judgement::Expr, isAnd ? Rule::AndValue : Rule::OrValue, scope, e);
    return makeExpr(BoolLit{rv}, pos);
}

inline ExprPtr stepDeref(const EvalState& st, const Scope& scope, const ExprPtr& e,
                         const Deref& d, Deriv* deriv) {
    SourcePos pos = e->pos;
    if (!isValueExpr(d.head)) {
        record(deriv, Judgement::Expr, Rule::DeRefExp, scope, e);
        return makeExpr(Deref{stepExpr(st, scope, d.head, deriv), d.index}, pos);
    }
    if (!isValueExpr(d.index)) {
        record(deriv, Judgement::Expr, Rule::DeRefIndex, scope, e);
        return makeExpr(Deref{d.head, stepExpr(st, scope, d.index, deriv)}, pos);
    }

    if (auto* arr = std::get_if<ArrayLit>(&d.head->node)) {
        long long n;
        if (!isIntExpr(d.index, n))
            evalFail(ErrKind::TypeMismatch, pos, scope, "array index must be an integer");
        if (n < 0 || static_cast<unsigned long long>(n) >= arr->elems.size())
            evalFail(ErrKind::BadDereference, pos, scope,
                     "array index " + std::to_string(n) + " out of range (size " +
                         std::to_string(arr->elems.size()) + ")");
        record(deriv, Judgement::Expr, Rule::DeRefArray, scope, e);
        return arr->elems[static_cast<size_t>(n)];
    }

    if (auto* hash = std::get_if<HashLit>(&d.head->node)) {
        ScalarKey key;
        if (auto* i = std::get_if<IntLit>(&d.index->node))
            key = i->value;
        else if (auto* s = std::get_if<StrLit>(&d.index->node))
            key = s->value;
        else
            evalFail(ErrKind::TypeMismatch, pos, scope,
                     "hash key must be an integer or a string");
        for (const auto& p : hash->pairs)
            if (p.key == key) {
                record(deriv, Judgement::Expr, Rule::DeRefHash, scope, e);
                return p.value;
            }
        evalFail(ErrKind::BadDereference, pos, scope,
                 "hash has no key " + prettyKey(key));
    }

    if (auto* ref = std::get_if<ResRef>(&d.head->node)) {
        const std::string& title = std::get<StrLit>(ref->title->node).value;
        auto* attr = std::get_if<StrLit>(&d.index->node);
        if (!attr)
            evalFail(ErrKind::TypeMismatch, pos, scope,
                     "resource attribute name must be a string");
        if (auto v = st.catalog.lookup(ref->type, title, attr->value)) {
            record(deriv, Judgement::Expr, Rule::DeRefRes, scope, e);
            return valueToExpr(*v, pos);
        }
        if (!st.catalog.contains(ref->type, title))
            evalFail(ErrKind::BadDereference, pos, scope,
                     "resource " + capitalizeType(ref->type) + "[" + quoteString(title) +
                         "] is not in the catalog");
        evalFail(ErrKind::BadDereference, pos, scope,
                 "resource " + capitalizeType(ref->type) + "[" + quoteString(title) +
                     "] has no attribute '" + attr->value + "'");
    }

    evalFail(ErrKind::TypeMismatch, pos, scope,
             std::string("cannot index a ") + valueTypeName(**exprToValue(d.head)));
}

inline ExprPtr stepSelect(const EvalState& st, const Scope& scope, const ExprPtr& e,
                          const Select& sel, Deriv* deriv) {
    SourcePos pos = e->pos;
    if (!isValueExpr(sel.control)) {
        record(deriv, Judgement::Expr, Rule::SControl, scope, e);
        return makeExpr(Select{stepExpr(st, scope, sel.control, deriv), sel.arms}, pos);
    }
    if (sel.arms.empty())
        evalFail(ErrKind::SelectorNoMatch, pos, scope,
                 "no selector arm matches " + prettyExpr(sel.control));
    const SelectArm& head = sel.arms.front();
    if (!head.guard) {
        record(deriv, Judgement::Expr, Rule::SDefault, scope, e);
        return head.body;
    }
    if (!isValueExpr(*head.guard)) {
        record(deriv, Judgement::Expr, Rule::SCase, scope, e);
        Select next = sel;
        next.arms[0].guard = stepExpr(st, scope, *head.guard, deriv);
        return makeExpr(std::move(next), pos);
    }
    if (caseMatches(*exprToValue(sel.control), *exprToValue(*head.guard))) {
        record(deriv, Judgement::Expr, Rule::SChooseI, scope, e);
        return head.body;
    }
    record(deriv, Judgement::Expr, Rule::SChooseII, scope, e);
    Select next{sel.control, {sel.arms.begin() + 1, sel.arms.end()}};
    return makeExpr(std::move(next), pos);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Statement stepping
// ---------------------------------------------------------------------------

struct StmtStep {
    EvalState state;
    StmtPtr stmt;
};

StmtStep stepStmt(const EvalState& st, const Scope& scope, const StmtPtr& s, Deriv* deriv,
                  const EvalOptions& opts);

namespace detail {

// Attribute lists evaluate left to right into (name, value) pairs.
inline bool attrsFullyEvaluated(const std::vector<AttrPair>& attrs) {
    for (const auto& a : attrs)
        if (!isValueExpr(a.value))
            return false;
    return true;
}

inline std::vector<std::pair<std::string, ValuePtr>>
attrValues(const std::vector<AttrPair>& attrs) {
    std::vector<std::pair<std::string, ValuePtr>> out;
    out.reserve(attrs.size());
    for (const auto& a : attrs)
        out.emplace_back(a.name, *exprToValue(a.value));
    return out;
}

// Walk the ClassDef parent chain looking for a cycle; include/declare rules
// surface undefined or already-declared ancestors themselves.
inline void checkInheritanceChain(const DefEnv& defs, const std::string& start,
                                  SourcePos pos, const Scope& scope) {
    std::set<std::string> visited{start};
    const Definition* d = defs.lookup(start);
    while (d) {
        auto* cd = std::get_if<ClassDefn>(d);
        if (!cd || !cd->parent)
            return;
        if (visited.count(*cd->parent))
            evalFail(ErrKind::InheritanceCycle, pos, scope,
                     "inheritance cycle through class '" + *cd->parent + "'");
        visited.insert(*cd->parent);
        d = defs.lookup(*cd->parent);
    }
}

// scope ::a { merge(params, args) then body }, declaring a with the given
// parent scope. Shared tail of the include and class-declaration rules.
inline StmtStep enterClass(const EvalState& st, const std::string& name,
                           const ClassDefn& def, Scope parentScope,
                           const std::vector<std::pair<std::string, ValuePtr>>& args,
                           SourcePos pos) {
    Scope classScope = Scope::forClass(name);
    StmtPtr merged = mergeParams(def.params, args, name, classScope, pos);
    EvalState next = st;
    next.defs = st.defs.declare(name, std::move(parentScope));
    StmtPtr body = makeStmt(SeqStmt{std::move(merged), def.body}, pos);
    return {std::move(next), makeStmt(ScopeStmt{std::move(classScope), std::move(body)}, pos)};
}

inline StmtStep stepResDecl(const EvalState& st, const Scope& scope, const StmtPtr& s,
                            const ResDecl& r, Deriv* deriv, const EvalOptions& opts) {
    SourcePos pos = s->pos;
    bool builtin = opts.builtinTypes.count(r.head) != 0;
    Rule outer = builtin ? Rule::ResStep : Rule::DefStep;

    if (!isValueExpr(r.title)) {
        record(deriv, Judgement::Stmt, outer, scope, s);
        record(deriv, Judgement::ResBody, Rule::ResTitle, scope, s);
        ResDecl next = r;
        next.title = stepExpr(st, scope, r.title, deriv);
        return {st, makeStmt(std::move(next), pos)};
    }
    if (!attrsFullyEvaluated(r.attrs)) {
        record(deriv, Judgement::Stmt, outer, scope, s);
        record(deriv, Judgement::ResBody, Rule::ResStepI, scope, s);
        ResDecl next = r;
        stepPairList(
            st, scope, next.attrs, [](const AttrPair& a) { return a.value; },
            [](AttrPair& a, ExprPtr v) { a.value = std::move(v); }, Rule::ResStepIII,
            Rule::ResStepII, Judgement::HashPairs, s, pos, deriv);
        return {st, makeStmt(std::move(next), pos)};
    }

    auto* title = std::get_if<StrLit>(&r.title->node);
    if (!title)
        evalFail(ErrKind::TypeMismatch, pos, scope, "resource title must be a string");
    auto args = attrValues(r.attrs);

    if (builtin) {
        auto resource = std::make_shared<Resource>();
        resource->type = r.head;
        resource->title = title->value;
        for (auto& [name, value] : args) {
            if (resource->attr(name))
                evalFail(ErrKind::DuplicateResource, pos, scope,
                         "duplicate attribute '" + name + "' in resource " +
                             capitalizeType(r.head) + "[" + quoteString(title->value) + "]");
            resource->attrs.emplace_back(name, std::move(value));
        }
        auto appended = st.catalog.append(std::move(resource));
        if (!appended)
            evalFail(ErrKind::DuplicateResource, pos, scope,
                     "resource " + capitalizeType(r.head) + "[" + quoteString(title->value) +
                         "] is already declared");
        record(deriv, Judgement::Stmt, Rule::ResDecl, scope, s);
        EvalState next = st;
        next.catalog = std::move(*appended);
        return {std::move(next), makeStmt(SkipStmt{}, pos)};
    }

    const Definition* def = st.defs.lookup(r.head);
    if (!def)
        evalFail(ErrKind::UndefinedDefinition, pos, scope,
                 "resource type '" + r.head + "' is not defined");
    auto* rd = std::get_if<ResourceDefn>(def);
    if (!rd)
        evalFail(ErrKind::UndefinedDefinition, pos, scope,
                 "'" + r.head + "' is a class, not a resource type");

    Scope defScope = Scope::defScope(scope);
    StmtPtr merged = mergeParams(rd->params, args, r.head, defScope, pos);
    StmtPtr body = makeStmt(
        SeqStmt{makeStmt(AssignStmt{"title", makeExpr(StrLit{title->value}, pos)}, pos),
                makeStmt(SeqStmt{std::move(merged), rd->body}, pos)},
        pos);
    record(deriv, Judgement::Stmt, Rule::Def, scope, s);
    return {st, makeStmt(ScopeStmt{std::move(defScope), std::move(body)}, pos)};
}

inline StmtStep stepClassDecl(const EvalState& st, const Scope& scope, const StmtPtr& s,
                              const ClassDecl& c, Deriv* deriv, const EvalOptions& opts) {
    SourcePos pos = s->pos;
    const Definition* def = st.defs.lookup(c.name);
    if (!def)
        evalFail(ErrKind::UndefinedDefinition, pos, scope,
                 "class '" + c.name + "' is not defined");
    if (std::holds_alternative<ResourceDefn>(*def))
        evalFail(ErrKind::UndefinedDefinition, pos, scope,
                 "'" + c.name + "' is a resource type, not a class");
    if (std::holds_alternative<DeclaredClassDefn>(*def))
        evalFail(ErrKind::ClassAlreadyDeclared, pos, scope,
                 "class '" + c.name + "' has already been declared");
    const ClassDefn& cd = std::get<ClassDefn>(*def);

    if (!attrsFullyEvaluated(c.args)) {
        record(deriv, Judgement::Stmt, Rule::CDecStep, scope, s);
        ClassDecl next = c;
        stepPairList(
            st, scope, next.args, [](const AttrPair& a) { return a.value; },
            [](AttrPair& a, ExprPtr v) { a.value = std::move(v); }, Rule::ResStepIII,
            Rule::ResStepII, Judgement::HashPairs, s, pos, deriv);
        return {st, makeStmt(std::move(next), pos)};
    }

    auto args = attrValues(c.args);
    if (!cd.parent) {
        auto base = baseOf(scope, st.defs);
        if (!base)
            evalFail(ErrKind::InternalStuck, pos, scope, "no base scope for " + scope.str());
        record(deriv, Judgement::Stmt, Rule::CDecU, scope, s);
        return enterClass(st, c.name, cd, *base, args, pos);
    }

    const Definition* parent = st.defs.lookup(*cd.parent);
    if (!parent || std::holds_alternative<ResourceDefn>(*parent))
        evalFail(ErrKind::UndefinedDefinition, pos, scope,
                 "parent class '" + *cd.parent + "' of '" + c.name + "' is not defined");
    if (std::holds_alternative<ClassDefn>(*parent)) {
        if (!opts.paperDivergence)
            checkInheritanceChain(st.defs, c.name, pos, scope);
        record(deriv, Judgement::Stmt, Rule::CDecPU, scope, s);
        StmtPtr include = makeStmt(IncludeStmt{*cd.parent}, pos);
        return {st, makeStmt(SeqStmt{std::move(include), s}, pos)};
    }
    record(deriv, Judgement::Stmt, Rule::CDecPD, scope, s);
    return enterClass(st, c.name, cd, Scope::forClass(*cd.parent), args, pos);
}

inline StmtStep stepInclude(const EvalState& st, const Scope& scope, const StmtPtr& s,
                            const IncludeStmt& inc, Deriv* deriv, const EvalOptions& opts) {
    SourcePos pos = s->pos;
    const Definition* def = st.defs.lookup(inc.name);
    if (!def)
        evalFail(ErrKind::UndefinedDefinition, pos, scope,
                 "class '" + inc.name + "' is not defined");
    if (std::holds_alternative<ResourceDefn>(*def))
        evalFail(ErrKind::UndefinedDefinition, pos, scope,
                 "'" + inc.name + "' is a resource type, not a class");
    if (std::holds_alternative<DeclaredClassDefn>(*def)) {
        record(deriv, Judgement::Stmt, Rule::IncD, scope, s);
        return {st, makeStmt(SkipStmt{}, pos)};
    }
    const ClassDefn& cd = std::get<ClassDefn>(*def);

    if (!cd.parent) {
        auto base = baseOf(scope, st.defs);
        if (!base)
            evalFail(ErrKind::InternalStuck, pos, scope, "no base scope for " + scope.str());
        record(deriv, Judgement::Stmt, Rule::IncU, scope, s);
        return enterClass(st, inc.name, cd, *base, {}, pos);
    }

    const Definition* parent = st.defs.lookup(*cd.parent);
    if (!parent || std::holds_alternative<ResourceDefn>(*parent))
        evalFail(ErrKind::UndefinedDefinition, pos, scope,
                 "parent class '" + *cd.parent + "' of '" + inc.name + "' is not defined");
    if (std::holds_alternative<ClassDefn>(*parent)) {
        if (!opts.paperDivergence)
            checkInheritanceChain(st.defs, inc.name, pos, scope);
        record(deriv, Judgement::Stmt, Rule::IncPU, scope, s);
        StmtPtr includeParent = makeStmt(IncludeStmt{*cd.parent}, pos);
        return {st, makeStmt(SeqStmt{std::move(includeParent), s}, pos)};
    }
    record(deriv, Judgement::Stmt, Rule::IncPD, scope, s);
    return enterClass(st, inc.name, cd, Scope::forClass(*cd.parent), {}, pos);
}

} // namespace detail

inline StmtStep stepStmt(const EvalState& st, const Scope& scope, const StmtPtr& s,
                         Deriv* deriv, const EvalOptions& opts) {
    using namespace detail;
    return std::visit(
        [&](const auto& x) -> StmtStep {
            using T = std::decay_t<decltype(x)>;
            SourcePos pos = s->pos;
            if constexpr (std::is_same_v<T, SkipStmt>) {
                evalFail(ErrKind::InternalStuck, pos, scope, "skip does not step");
            } else if constexpr (std::is_same_v<T, ExprStmt>) {
                if (isValueExpr(x.expr)) {
                    record(deriv, Judgement::Stmt, Rule::Expr, scope, s);
                    return {st, makeStmt(SkipStmt{}, pos)};
                }
                record(deriv, Judgement::Stmt, Rule::ExprStep, scope, s);
                return {st, makeStmt(ExprStmt{stepExpr(st, scope, x.expr, deriv)}, pos)};
            } else if constexpr (std::is_same_v<T, SeqStmt>) {
                if (isSkip(x.first)) {
                    record(deriv, Judgement::Stmt, Rule::SeqSkip, scope, s);
                    return {st, x.second};
                }
                record(deriv, Judgement::Stmt, Rule::SeqStep, scope, s);
                StmtStep inner = stepStmt(st, scope, x.first, deriv, opts);
                return {std::move(inner.state),
                        makeStmt(SeqStmt{std::move(inner.stmt), x.second}, pos)};
            } else if constexpr (std::is_same_v<T, AssignStmt>) {
                if (!isValueExpr(x.value)) {
                    record(deriv, Judgement::Stmt, Rule::AssignStep, scope, s);
                    return {st, makeStmt(AssignStmt{x.name, stepExpr(st, scope, x.value, deriv)},
                                         pos)};
                }
                auto bound = st.vars.bind(scope, x.name, *exprToValue(x.value));
                if (!bound)
                    evalFail(ErrKind::DuplicateVariable, pos, scope,
                             "variable $" + x.name + " is already bound in scope " +
                                 scope.str());
                record(deriv, Judgement::Stmt, Rule::Assign, scope, s);
                EvalState next = st;
                next.vars = std::move(*bound);
                return {std::move(next), makeStmt(SkipStmt{}, pos)};
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                if (!isValueExpr(x.cond)) {
                    record(deriv, Judgement::Stmt, Rule::IfStep, scope, s);
                    return {st, makeStmt(IfStmt{stepExpr(st, scope, x.cond, deriv), x.thenBody,
                                                x.elseBody},
                                         pos)};
                }
                bool b;
                if (!isBoolExpr(x.cond, b))
                    evalFail(ErrKind::TypeMismatch, pos, scope,
                             "'if' condition must be a boolean");
                record(deriv, Judgement::Stmt, b ? Rule::IfT : Rule::IfF, scope, s);
                return {st, b ? x.thenBody : x.elseBody};
            } else if constexpr (std::is_same_v<T, UnlessStmt>) {
                if (!isValueExpr(x.cond)) {
                    record(deriv, Judgement::Stmt, Rule::UnlessStep, scope, s);
                    return {st, makeStmt(UnlessStmt{stepExpr(st, scope, x.cond, deriv), x.body},
                                         pos)};
                }
                bool b;
                if (!isBoolExpr(x.cond, b))
                    evalFail(ErrKind::TypeMismatch, pos, scope,
                             "'unless' condition must be a boolean");
                record(deriv, Judgement::Stmt, b ? Rule::UnlessT : Rule::UnlessF, scope, s);
                return {st, b ? makeStmt(SkipStmt{}, pos) : x.body};
            } else if constexpr (std::is_same_v<T, CaseStmt>) {
                if (!isValueExpr(x.control)) {
                    record(deriv, Judgement::Stmt, Rule::CaseStep1, scope, s);
                    return {st, makeStmt(CaseStmt{stepExpr(st, scope, x.control, deriv), x.arms},
                                         pos)};
                }
                if (x.arms.empty()) {
                    record(deriv, Judgement::Stmt, Rule::CaseDone, scope, s);
                    return {st, makeStmt(SkipStmt{}, pos)};
                }
                const CaseArm& head = x.arms.front();
                if (head.guard && !isValueExpr(*head.guard)) {
                    record(deriv, Judgement::Stmt, Rule::CaseStep2, scope, s);
                    CaseStmt next = x;
                    next.arms[0].guard = stepExpr(st, scope, *head.guard, deriv);
                    return {st, makeStmt(std::move(next), pos)};
                }
                bool matches = !head.guard || caseMatches(*exprToValue(x.control),
                                                          *exprToValue(*head.guard));
                if (matches) {
                    record(deriv, Judgement::Stmt, Rule::CaseMatch, scope, s);
                    return {st, head.body};
                }
                record(deriv, Judgement::Stmt, Rule::CaseNoMatch, scope, s);
                CaseStmt next{x.control, {x.arms.begin() + 1, x.arms.end()}};
                return {st, makeStmt(std::move(next), pos)};
            } else if constexpr (std::is_same_v<T, ResDecl>) {
                return stepResDecl(st, scope, s, x, deriv, opts);
            } else if constexpr (std::is_same_v<T, ClassDecl>) {
                return stepClassDecl(st, scope, s, x, deriv, opts);
            } else if constexpr (std::is_same_v<T, IncludeStmt>) {
                return stepInclude(st, scope, s, x, deriv, opts);
            } else if constexpr (std::is_same_v<T, FailStmt>) {
                if (!isValueExpr(x.message)) {
                    record(deriv, Judgement::Stmt, Rule::FailStep, scope, s);
                    return {st,
                            makeStmt(FailStmt{stepExpr(st, scope, x.message, deriv)}, pos)};
                }
                std::string msg;
                if (auto* str = std::get_if<StrLit>(&x.message->node))
                    msg = str->value;
                else
                    msg = prettyExpr(x.message);
                evalFail(ErrKind::SelectorNoMatch, pos, scope, msg);
            } else if constexpr (std::is_same_v<T, ScopeStmt>) {
                if (isSkip(x.body)) {
                    if (x.scope.isDef()) {
                        record(deriv, Judgement::Stmt, Rule::DefScopeDone, scope, s);
                        EvalState next = st;
                        next.vars = st.vars.clearScope(x.scope);
                        return {std::move(next), makeStmt(SkipStmt{}, pos)};
                    }
                    record(deriv, Judgement::Stmt, Rule::ScopeDone, scope, s);
                    return {st, makeStmt(SkipStmt{}, pos)};
                }
                record(deriv, Judgement::Stmt,
                       x.scope.isDef() ? Rule::DefScopeStep : Rule::ScopeStep, scope, s);
                StmtStep inner = stepStmt(st, x.scope, x.body, deriv, opts);
                return {std::move(inner.state),
                        makeStmt(ScopeStmt{x.scope, std::move(inner.stmt)}, pos)};
            }
        },
        s->node);
}

// ---------------------------------------------------------------------------
// Manifest stepping
// ---------------------------------------------------------------------------

struct ManifestStepOut {
    EvalState state;
    ManifestPtr manifest;
};

inline bool nodeMatches(const std::string& node, const NodeSpec& spec) {
    if (spec.isDefault)
        return true;
    for (const auto& n : spec.names)
        if (n == node)
            return true;
    return false;
}

inline ManifestStepOut stepManifest(const EvalState& st, const std::string& node,
                                    const ManifestPtr& m, Deriv* deriv,
                                    const EvalOptions& opts) {
    return std::visit(
        [&](const auto& x) -> ManifestStepOut {
            using T = std::decay_t<decltype(x)>;
            SourcePos pos = m->pos;
            if constexpr (std::is_same_v<T, MStmt>) {
                if (isSkip(x.stmt))
                    evalFail(ErrKind::InternalStuck, pos, Scope::top(),
                             "manifest is already fully compiled");
                record(deriv, Judgement::Manifest, Rule::TopScope, Scope::top(), m);
                StmtStep inner = stepStmt(st, Scope::top(), x.stmt, deriv, opts);
                return {std::move(inner.state), makeManifest(MStmt{std::move(inner.stmt)}, pos)};
            } else if constexpr (std::is_same_v<T, MSeq>) {
                if (isManifestDone(x.first)) {
                    record(deriv, Judgement::Manifest, Rule::MSeqSkip, Scope::top(), m);
                    return {st, x.second};
                }
                record(deriv, Judgement::Manifest, Rule::MSeqStep, Scope::top(), m);
                ManifestStepOut inner = stepManifest(st, node, x.first, deriv, opts);
                return {std::move(inner.state),
                        makeManifest(MSeq{std::move(inner.manifest), x.second}, pos)};
            } else if constexpr (std::is_same_v<T, NodeDef>) {
                if (nodeMatches(node, x.spec)) {
                    record(deriv, Judgement::Manifest, Rule::NodeMatch, Scope::top(), m);
                    return {st, makeManifest(
                                    MStmt{makeStmt(ScopeStmt{Scope::node(), x.body}, pos)},
                                    pos)};
                }
                record(deriv, Judgement::Manifest, Rule::NodeNoMatch, Scope::top(), m);
                return {st, makeManifest(MStmt{makeStmt(SkipStmt{}, pos)}, pos)};
            } else if constexpr (std::is_same_v<T, DefineDef>) {
                auto defined = st.defs.define(x.name, ResourceDefn{x.params, x.body});
                if (!defined)
                    evalFail(ErrKind::UndefinedDefinition, pos, Scope::top(),
                             "'" + x.name + "' is already defined");
                record(deriv, Judgement::Manifest, Rule::RDef, Scope::top(), m);
                EvalState next = st;
                next.defs = std::move(*defined);
                return {std::move(next), makeManifest(MStmt{makeStmt(SkipStmt{}, pos)}, pos)};
            } else if constexpr (std::is_same_v<T, ClassDef>) {
                auto defined =
                    st.defs.define(x.name, ClassDefn{x.parent, x.params, x.body});
                if (!defined)
                    evalFail(ErrKind::UndefinedDefinition, pos, Scope::top(),
                             "'" + x.name + "' is already defined");
                Rule rule = x.parent ? (x.params.empty() ? Rule::CDefI : Rule::CDefPI)
                                     : (x.params.empty() ? Rule::CDef : Rule::CDefP);
                record(deriv, Judgement::Manifest, rule, Scope::top(), m);
                EvalState next = st;
                next.defs = std::move(*defined);
                return {std::move(next), makeManifest(MStmt{makeStmt(SkipStmt{}, pos)}, pos)};
            }
        },
        m->node);
}

// ---------------------------------------------------------------------------
// Compilation driver
// ---------------------------------------------------------------------------

struct StepRecord {
    long long index = 0;
    Deriv deriv; // outermost first; back() is the rule that fired
    EvalState before;
    EvalState after;
    ManifestPtr termBefore;
    ManifestPtr termAfter;
};

class StepObserver {
public:
    virtual ~StepObserver() = default;
    virtual void onStep(const StepRecord& record) = 0;
};

struct CompileOutcome {
    Catalog catalog;
    long long steps = 0;
    EvalState finalState;
};

using Facts = std::vector<std::pair<std::string, ValuePtr>>;

inline CompileOutcome compile(const ManifestPtr& manifest, const std::string& node,
                              const Facts& facts = {}, const EvalOptions& opts = {},
                              StepObserver* observer = nullptr) {
    EvalState st;
    for (const auto& [name, value] : facts) {
        auto bound = st.vars.bind(Scope::top(), name, value);
        if (!bound)
            throw CompileError(ErrKind::DuplicateVariable, SourcePos{}, Scope::top(),
                               "duplicate fact '" + name + "'");
        st.vars = std::move(*bound);
    }

    ManifestPtr term = manifest;
    long long steps = 0;
    while (!isManifestDone(term)) {
        if (steps >= opts.maxSteps)
            throw CompileError(ErrKind::StepLimitExceeded, term->pos, Scope::top(),
                               "no normal form after " + std::to_string(opts.maxSteps) +
                                   " steps");
        Deriv deriv;
        ManifestStepOut out =
            stepManifest(st, node, term, observer ? &deriv : nullptr, opts);
        if (observer) {
            StepRecord rec;
            rec.index = steps;
            rec.deriv = std::move(deriv);
            rec.before = st;
            rec.after = out.state;
            rec.termBefore = term;
            rec.termAfter = out.manifest;
            observer->onStep(rec);
        }
        st = std::move(out.state);
        term = std::move(out.manifest);
        ++steps;
    }
    return {st.catalog, steps, st};
}

} // namespace pupcat
