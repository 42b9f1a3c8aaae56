#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eval.hpp"

// Independent checks over recorded step derivations.
//
// auditDeriv re-derives, for every expression, statement and manifest
// judgement in a derivation, the set of rules whose premises hold in the
// pre-step state. It never calls the stepper; applicability is decided by
// direct premise predicates. A step is deterministic when each audited
// judgement admits exactly the rule the stepper recorded and no other.
//
// checkMonotone verifies that a step only grows the state: variable bindings
// are never changed (a completed instantiation scope may drop its frame as a
// whole), definitions only move from defined to declared, and the catalog of
// the pre-step state is a prefix of the post-step catalog.

namespace pupcat {

namespace audit_detail {

using detail::isArith;
using detail::isEquality;
using detail::isNumericComp;

std::vector<Rule> applicableExprRules(const EvalState& st, const Scope& scope,
                                      const ExprPtr& e);
std::vector<Rule> applicableStmtRules(const EvalState& st, const Scope& scope,
                                      const StmtPtr& s, const EvalOptions& opts);
std::vector<Rule> applicableManifestRules(const EvalState& st, const std::string& node,
                                          const ManifestPtr& m, const EvalOptions& opts);

inline bool canStepExpr(const EvalState& st, const Scope& scope, const ExprPtr& e) {
    return !applicableExprRules(st, scope, e).empty();
}
inline bool canStepStmt(const EvalState& st, const Scope& scope, const StmtPtr& s,
                        const EvalOptions& opts) {
    return !applicableStmtRules(st, scope, s, opts).empty();
}
inline bool canStepManifest(const EvalState& st, const std::string& node,
                            const ManifestPtr& m, const EvalOptions& opts) {
    return !applicableManifestRules(st, node, m, opts).empty();
}

inline bool varResolvable(const EvalState& st, const Scope& scope, const std::string& name) {
    Scope cur = scope;
    for (;;) {
        if (st.vars.lookup(cur, name))
            return true;
        auto parent = parentOf(cur, st.defs);
        if (!parent)
            return false;
        cur = *parent;
    }
}

inline bool arithDefined(BinOp op, long long a, long long b) {
    long long r;
    switch (op) {
    case BinOp::Add: return !__builtin_add_overflow(a, b, &r);
    case BinOp::Sub: return !__builtin_sub_overflow(a, b, &r);
    case BinOp::Mul: return !__builtin_mul_overflow(a, b, &r);
    case BinOp::Div:
    case BinOp::Mod:
        return b != 0 && !(a == std::numeric_limits<long long>::min() && b == -1);
    default: return false;
    }
}

// The list judgements step their first non-value entry; the list can step
// exactly when that entry can.
inline bool canStepElems(const EvalState& st, const Scope& scope,
                         const std::vector<ExprPtr>& elems) {
    for (const auto& e : elems)
        if (!isValueExpr(e))
            return canStepExpr(st, scope, e);
    return false;
}

template <typename Pairs, typename GetExpr>
bool canStepPairs(const EvalState& st, const Scope& scope, const Pairs& pairs,
                  GetExpr getExpr) {
    for (const auto& p : pairs)
        if (!isValueExpr(getExpr(p)))
            return canStepExpr(st, scope, getExpr(p));
    return false;
}

inline bool pairsFullyEvaluated(const std::vector<AttrPair>& attrs) {
    for (const auto& a : attrs)
        if (!isValueExpr(a.value))
            return false;
    return true;
}

// merge(params, args) is defined when every argument names a parameter and
// every parameter gets an argument or carries a default.
inline bool mergeDefined(const std::vector<Param>& params,
                         const std::vector<AttrPair>& args) {
    for (const auto& a : args) {
        bool known = false;
        for (const auto& p : params)
            if (p.name == a.name)
                known = true;
        if (!known)
            return false;
    }
    for (const auto& p : params) {
        if (p.defaultValue)
            continue;
        bool supplied = false;
        for (const auto& a : args)
            if (a.name == p.name)
                supplied = true;
        if (!supplied)
            return false;
    }
    return true;
}

inline std::vector<Rule> applicableExprRules(const EvalState& st, const Scope& scope,
                                             const ExprPtr& e) {
    std::vector<Rule> out;
    auto add = [&](Rule r) { out.push_back(r); };
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, IntLit> || std::is_same_v<T, StrLit> ||
                          std::is_same_v<T, BoolLit>) {
                // values do not step
            } else if constexpr (std::is_same_v<T, LocalVar>) {
                if (st.vars.lookup(scope, x.name)) {
                    add(Rule::LVar);
                } else if (auto parent = parentOf(scope, st.defs)) {
                    if (varResolvable(st, *parent, x.name))
                        add(Rule::PVar);
                }
            } else if constexpr (std::is_same_v<T, TopVar>) {
                if (st.vars.lookup(Scope::top(), x.name))
                    add(Rule::TVar);
            } else if constexpr (std::is_same_v<T, ClassVar>) {
                if (st.vars.lookup(Scope::forClass(x.cls), x.name))
                    add(Rule::QVar);
            } else if constexpr (std::is_same_v<T, UnaryNot>) {
                bool b;
                if (canStepExpr(st, scope, x.operand))
                    add(Rule::NotStep);
                if (detail::isBoolExpr(x.operand, b))
                    add(b ? Rule::NotValueI : Rule::NotValueII);
            } else if constexpr (std::is_same_v<T, Binary>) {
                long long a, c;
                bool lb, rb;
                if (isArith(x.op)) {
                    if (canStepExpr(st, scope, x.lhs))
                        add(Rule::ArithLeft);
                    if (detail::isIntExpr(x.lhs, a)) {
                        if (canStepExpr(st, scope, x.rhs))
                            add(Rule::ArithRight);
                        if (detail::isIntExpr(x.rhs, c) && arithDefined(x.op, a, c))
                            add(Rule::ArithValue);
                    }
                } else if (isNumericComp(x.op) || isEquality(x.op)) {
                    if (canStepExpr(st, scope, x.lhs))
                        add(Rule::CompLeft);
                    else if (isValueExpr(x.lhs) && canStepExpr(st, scope, x.rhs))
                        add(Rule::CompRight);
                    else if (isValueExpr(x.lhs) && isValueExpr(x.rhs)) {
                        if (isEquality(x.op)) {
                            bool eq = valueEquals(*exprToValue(x.lhs), *exprToValue(x.rhs));
                            bool result = x.op == BinOp::Eq ? eq : !eq;
                            add(result ? Rule::CompValueI : Rule::CompValueII);
                        } else if (detail::isIntExpr(x.lhs, a) && detail::isIntExpr(x.rhs, c)) {
                            add(detail::numericComp(x.op, a, c) ? Rule::CompValueI
                                                                : Rule::CompValueII);
                        }
                    }
                } else if (x.op == BinOp::And) {
                    if (canStepExpr(st, scope, x.lhs))
                        add(Rule::AndLeft);
                    if (detail::isBoolExpr(x.lhs, lb)) {
                        if (!lb) {
                            add(Rule::AndRightI);
                        } else {
                            if (canStepExpr(st, scope, x.rhs))
                                add(Rule::AndRightII);
                            if (detail::isBoolExpr(x.rhs, rb))
                                add(Rule::AndValue);
                        }
                    }
                } else if (x.op == BinOp::Or) {
                    if (canStepExpr(st, scope, x.lhs))
                        add(Rule::OrLeft);
                    if (detail::isBoolExpr(x.lhs, lb)) {
                        if (lb) {
                            add(Rule::OrRightI);
                        } else {
                            if (canStepExpr(st, scope, x.rhs))
                                add(Rule::OrRightII);
                            if (detail::isBoolExpr(x.rhs, rb))
                                add(Rule::OrValue);
                        }
                    }
                }
            } else if constexpr (std::is_same_v<T, ArrayLit>) {
                if (canStepElems(st, scope, x.elems))
                    add(Rule::ArrExp);
            } else if constexpr (std::is_same_v<T, HashLit>) {
                if (canStepPairs(st, scope, x.pairs,
                                 [](const HashPair& p) { return p.value; }))
                    add(Rule::HaExp);
            } else if constexpr (std::is_same_v<T, Deref>) {
                long long n;
                if (canStepExpr(st, scope, x.head)) {
                    add(Rule::DeRefExp);
                } else if (isValueExpr(x.head)) {
                    if (canStepExpr(st, scope, x.index)) {
                        add(Rule::DeRefIndex);
                    } else if (isValueExpr(x.index)) {
                        if (auto* arr = std::get_if<ArrayLit>(&x.head->node)) {
                            if (detail::isIntExpr(x.index, n) && n >= 0 &&
                                static_cast<unsigned long long>(n) < arr->elems.size())
                                add(Rule::DeRefArray);
                        } else if (auto* hash = std::get_if<HashLit>(&x.head->node)) {
                            std::optional<ScalarKey> key;
                            if (auto* i = std::get_if<IntLit>(&x.index->node))
                                key = ScalarKey{i->value};
                            else if (auto* str = std::get_if<StrLit>(&x.index->node))
                                key = ScalarKey{str->value};
                            if (key)
                                for (const auto& p : hash->pairs)
                                    if (p.key == *key) {
                                        add(Rule::DeRefHash);
                                        break;
                                    }
                        } else if (auto* ref = std::get_if<ResRef>(&x.head->node)) {
                            auto* attr = std::get_if<StrLit>(&x.index->node);
                            auto* title = std::get_if<StrLit>(&ref->title->node);
                            if (attr && title &&
                                st.catalog.lookup(ref->type, title->value, attr->value))
                                add(Rule::DeRefRes);
                        }
                    }
                }
            } else if constexpr (std::is_same_v<T, ResRef>) {
                if (canStepExpr(st, scope, x.title))
                    add(Rule::RefRes);
            } else if constexpr (std::is_same_v<T, Select>) {
                if (canStepExpr(st, scope, x.control)) {
                    add(Rule::SControl);
                } else if (isValueExpr(x.control) && !x.arms.empty()) {
                    const SelectArm& head = x.arms.front();
                    if (!head.guard) {
                        add(Rule::SDefault);
                    } else if (canStepExpr(st, scope, *head.guard)) {
                        add(Rule::SCase);
                    } else if (isValueExpr(*head.guard)) {
                        bool match = detail::caseMatches(*exprToValue(x.control),
                                                         *exprToValue(*head.guard));
                        add(match ? Rule::SChooseI : Rule::SChooseII);
                    }
                }
            }
        },
        e->node);
    return out;
}

inline std::vector<Rule> applicableStmtRules(const EvalState& st, const Scope& scope,
                                             const StmtPtr& s, const EvalOptions& opts) {
    std::vector<Rule> out;
    auto add = [&](Rule r) { out.push_back(r); };
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, SkipStmt>) {
                // normal form
            } else if constexpr (std::is_same_v<T, ExprStmt>) {
                if (isValueExpr(x.expr))
                    add(Rule::Expr);
                if (canStepExpr(st, scope, x.expr))
                    add(Rule::ExprStep);
            } else if constexpr (std::is_same_v<T, SeqStmt>) {
                if (isSkip(x.first))
                    add(Rule::SeqSkip);
                if (canStepStmt(st, scope, x.first, opts))
                    add(Rule::SeqStep);
            } else if constexpr (std::is_same_v<T, AssignStmt>) {
                if (canStepExpr(st, scope, x.value))
                    add(Rule::AssignStep);
                if (isValueExpr(x.value) && !st.vars.has(scope, x.name))
                    add(Rule::Assign);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                bool b;
                if (canStepExpr(st, scope, x.cond))
                    add(Rule::IfStep);
                if (detail::isBoolExpr(x.cond, b))
                    add(b ? Rule::IfT : Rule::IfF);
            } else if constexpr (std::is_same_v<T, UnlessStmt>) {
                bool b;
                if (canStepExpr(st, scope, x.cond))
                    add(Rule::UnlessStep);
                if (detail::isBoolExpr(x.cond, b))
                    add(b ? Rule::UnlessT : Rule::UnlessF);
            } else if constexpr (std::is_same_v<T, CaseStmt>) {
                if (canStepExpr(st, scope, x.control)) {
                    add(Rule::CaseStep1);
                } else if (isValueExpr(x.control)) {
                    if (x.arms.empty()) {
                        add(Rule::CaseDone);
                    } else {
                        const CaseArm& head = x.arms.front();
                        if (head.guard && canStepExpr(st, scope, *head.guard)) {
                            add(Rule::CaseStep2);
                        } else if (!head.guard) {
                            add(Rule::CaseMatch);
                        } else if (isValueExpr(*head.guard)) {
                            bool match = detail::caseMatches(*exprToValue(x.control),
                                                             *exprToValue(*head.guard));
                            add(match ? Rule::CaseMatch : Rule::CaseNoMatch);
                        }
                    }
                }
            } else if constexpr (std::is_same_v<T, ResDecl>) {
                bool builtin = opts.builtinTypes.count(x.head) != 0;
                bool bodySteps =
                    canStepExpr(st, scope, x.title) ||
                    (isValueExpr(x.title) &&
                     canStepPairs(st, scope, x.attrs,
                                  [](const AttrPair& a) { return a.value; }));
                if (builtin) {
                    if (bodySteps)
                        add(Rule::ResStep);
                    auto* title = std::get_if<StrLit>(&x.title->node);
                    if (title && pairsFullyEvaluated(x.attrs) &&
                        !st.catalog.contains(x.head, title->value)) {
                        bool dupAttr = false;
                        for (size_t i = 0; i < x.attrs.size() && !dupAttr; ++i)
                            for (size_t j = i + 1; j < x.attrs.size(); ++j)
                                if (x.attrs[i].name == x.attrs[j].name) {
                                    dupAttr = true;
                                    break;
                                }
                        if (!dupAttr)
                            add(Rule::ResDecl);
                    }
                } else {
                    const Definition* def = st.defs.lookup(x.head);
                    auto* rd = def ? std::get_if<ResourceDefn>(def) : nullptr;
                    if (bodySteps)
                        add(Rule::DefStep);
                    auto* title = std::get_if<StrLit>(&x.title->node);
                    if (rd && title && pairsFullyEvaluated(x.attrs) &&
                        mergeDefined(rd->params, x.attrs))
                        add(Rule::Def);
                }
            } else if constexpr (std::is_same_v<T, ClassDecl>) {
                const Definition* def = st.defs.lookup(x.name);
                auto* cd = def ? std::get_if<ClassDefn>(def) : nullptr;
                if (cd) {
                    if (canStepPairs(st, scope, x.args,
                                     [](const AttrPair& a) { return a.value; }))
                        add(Rule::CDecStep);
                    if (pairsFullyEvaluated(x.args)) {
                        if (!cd->parent) {
                            if (mergeDefined(cd->params, x.args) && baseOf(scope, st.defs))
                                add(Rule::CDecU);
                        } else if (const Definition* p = st.defs.lookup(*cd->parent)) {
                            if (std::holds_alternative<ClassDefn>(*p))
                                add(Rule::CDecPU);
                            else if (std::holds_alternative<DeclaredClassDefn>(*p) &&
                                     mergeDefined(cd->params, x.args))
                                add(Rule::CDecPD);
                        }
                    }
                }
            } else if constexpr (std::is_same_v<T, IncludeStmt>) {
                const Definition* def = st.defs.lookup(x.name);
                if (def) {
                    if (std::holds_alternative<DeclaredClassDefn>(*def)) {
                        add(Rule::IncD);
                    } else if (auto* cd = std::get_if<ClassDefn>(def)) {
                        if (!cd->parent) {
                            if (mergeDefined(cd->params, {}) && baseOf(scope, st.defs))
                                add(Rule::IncU);
                        } else if (const Definition* p = st.defs.lookup(*cd->parent)) {
                            if (std::holds_alternative<ClassDefn>(*p))
                                add(Rule::IncPU);
                            else if (std::holds_alternative<DeclaredClassDefn>(*p) &&
                                     mergeDefined(cd->params, {}))
                                add(Rule::IncPD);
                        }
                    }
                }
            } else if constexpr (std::is_same_v<T, FailStmt>) {
                if (canStepExpr(st, scope, x.message))
                    add(Rule::FailStep);
            } else if constexpr (std::is_same_v<T, ScopeStmt>) {
                if (isSkip(x.body))
                    add(x.scope.isDef() ? Rule::DefScopeDone : Rule::ScopeDone);
                if (canStepStmt(st, x.scope, x.body, opts))
                    add(x.scope.isDef() ? Rule::DefScopeStep : Rule::ScopeStep);
            }
        },
        s->node);
    return out;
}

inline std::vector<Rule> applicableManifestRules(const EvalState& st, const std::string& node,
                                                 const ManifestPtr& m,
                                                 const EvalOptions& opts) {
    std::vector<Rule> out;
    auto add = [&](Rule r) { out.push_back(r); };
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, MStmt>) {
                if (canStepStmt(st, Scope::top(), x.stmt, opts))
                    add(Rule::TopScope);
            } else if constexpr (std::is_same_v<T, MSeq>) {
                if (isManifestDone(x.first))
                    add(Rule::MSeqSkip);
                if (canStepManifest(st, node, x.first, opts))
                    add(Rule::MSeqStep);
            } else if constexpr (std::is_same_v<T, NodeDef>) {
                add(nodeMatches(node, x.spec) ? Rule::NodeMatch : Rule::NodeNoMatch);
            } else if constexpr (std::is_same_v<T, DefineDef>) {
                if (!st.defs.lookup(x.name))
                    add(Rule::RDef);
            } else if constexpr (std::is_same_v<T, ClassDef>) {
                if (!st.defs.lookup(x.name))
                    add(x.parent ? (x.params.empty() ? Rule::CDefI : Rule::CDefPI)
                                 : (x.params.empty() ? Rule::CDef : Rule::CDefP));
            }
        },
        m->node);
    return out;
}

} // namespace audit_detail

// Checks one recorded derivation: every expression, statement and manifest
// judgement in it must admit exactly the recorded rule. Returns a description
// of the first violation, or nothing if the step is deterministic.
inline std::optional<std::string> auditDeriv(const EvalState& before, const std::string& node,
                                             const Deriv& deriv, const EvalOptions& opts) {
    using namespace audit_detail;
    if (deriv.empty())
        return "empty derivation";
    const DerivEntry& leaf = deriv.back();
    if (leaf.judgement != Judgement::Expr && leaf.judgement != Judgement::Stmt &&
        leaf.judgement != Judgement::Manifest)
        return std::string("derivation ends in auxiliary judgement ") +
               judgementName(leaf.judgement);
    for (const DerivEntry& entry : deriv) {
        std::vector<Rule> rules;
        switch (entry.judgement) {
        case Judgement::Expr:
            rules = applicableExprRules(before, entry.scope, std::get<ExprPtr>(entry.term));
            break;
        case Judgement::Stmt:
            rules = applicableStmtRules(before, entry.scope, std::get<StmtPtr>(entry.term),
                                        opts);
            break;
        case Judgement::Manifest:
            rules = applicableManifestRules(before, node, std::get<ManifestPtr>(entry.term),
                                            opts);
            break;
        default:
            continue; // list judgements are covered by their parent's premise
        }
        if (rules.size() != 1)
            return std::string("rule ") + ruleName(entry.rule) + " recorded but " +
                   std::to_string(rules.size()) + " rules apply";
        if (rules[0] != entry.rule)
            return std::string("rule ") + ruleName(entry.rule) + " recorded but " +
                   ruleName(rules[0]) + " applies";
    }
    return std::nullopt;
}

// Checks that a step grew the state monotonically. Definitions are shared,
// immutable structures, so bodies are compared by identity.
inline std::optional<std::string> checkMonotone(const EvalState& before,
                                                const EvalState& after) {
    std::optional<std::string> violation;

    before.vars.forEach([&](const Scope& scope, const std::string& name, const ValuePtr& v) {
        if (violation)
            return;
        if (auto w = after.vars.lookup(scope, name)) {
            if (!valueEquals(v, *w))
                violation = "binding $" + name + " in " + scope.str() + " changed value";
            return;
        }
        if (!scope.isDef()) {
            violation = "binding $" + name + " in " + scope.str() + " disappeared";
            return;
        }
        bool frameGone = true;
        after.vars.forEach([&](const Scope& s2, const std::string&, const ValuePtr&) {
            if (s2 == scope)
                frameGone = false;
        });
        if (!frameGone)
            violation = "binding $" + name + " in " + scope.str() +
                        " dropped while its scope kept other bindings";
    });
    if (violation)
        return violation;

    before.defs.forEach([&](const std::string& name, const Definition& d) {
        if (violation)
            return;
        const Definition* now = after.defs.lookup(name);
        if (!now) {
            violation = "definition '" + name + "' disappeared";
            return;
        }
        if (auto* cd = std::get_if<ClassDefn>(&d)) {
            if (auto* cd2 = std::get_if<ClassDefn>(now)) {
                if (cd->parent != cd2->parent || cd->body != cd2->body)
                    violation = "class definition '" + name + "' changed";
            } else if (!std::holds_alternative<DeclaredClassDefn>(*now)) {
                violation = "class '" + name + "' became a resource definition";
            }
        } else if (auto* dc = std::get_if<DeclaredClassDefn>(&d)) {
            auto* dc2 = std::get_if<DeclaredClassDefn>(now);
            if (!dc2)
                violation = "declared class '" + name + "' was undone";
            else if (!(dc->parentScope == dc2->parentScope))
                violation = "declared class '" + name + "' changed parent scope";
        } else {
            auto* rd = std::get_if<ResourceDefn>(&d);
            auto* rd2 = std::get_if<ResourceDefn>(now);
            if (!rd2 || rd->body != rd2->body)
                violation = "resource definition '" + name + "' changed";
        }
    });
    if (violation)
        return violation;

    if (!before.catalog.isPrefixOf(after.catalog))
        return std::string("catalog is not a prefix of the post-step catalog");
    return std::nullopt;
}

// Convenience observer running both checks on every step.
class AuditObserver : public StepObserver {
public:
    AuditObserver(std::string node, EvalOptions opts)
        : node_(std::move(node)), opts_(std::move(opts)) {}

    void onStep(const StepRecord& rec) override {
        ++steps_;
        if (firstViolation_)
            return;
        if (auto v = auditDeriv(rec.before, node_, rec.deriv, opts_))
            firstViolation_ = "step " + std::to_string(rec.index) + ": " + *v;
        else if (auto w = checkMonotone(rec.before, rec.after))
            firstViolation_ = "step " + std::to_string(rec.index) + ": " + *w;
    }

    long long steps() const { return steps_; }
    const std::optional<std::string>& firstViolation() const { return firstViolation_; }

private:
    std::string node_;
    EvalOptions opts_;
    long long steps_ = 0;
    std::optional<std::string> firstViolation_;
};

} // namespace pupcat
