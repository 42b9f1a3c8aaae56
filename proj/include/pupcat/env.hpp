#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "ast.hpp"
#include "errors.hpp"
#include "scope.hpp"
#include "value.hpp"

namespace pupcat {

// ---------------------------------------------------------------------------
// Variable environment: write-once (scope, name) -> value
// ---------------------------------------------------------------------------

// Persistent map with copy-on-write at both levels, so evaluation snapshots
// (kept per step for the trace checks) share storage instead of deep-copying.
class VarEnv {
    using Frame = std::map<std::string, ValuePtr>;
    using Table = std::map<Scope, std::shared_ptr<const Frame>>;

public:
    VarEnv() : table_(std::make_shared<Table>()) {}

    std::optional<ValuePtr> lookup(const Scope& scope, const std::string& name) const {
        auto it = table_->find(scope);
        if (it == table_->end())
            return std::nullopt;
        auto jt = it->second->find(name);
        if (jt == it->second->end())
            return std::nullopt;
        return jt->second;
    }

    bool has(const Scope& scope, const std::string& name) const {
        return lookup(scope, name).has_value();
    }

    // nullopt when (scope, name) is already bound: bindings are write-once
    std::optional<VarEnv> bind(const Scope& scope, const std::string& name,
                               ValuePtr value) const {
        auto it = table_->find(scope);
        std::shared_ptr<Frame> frame =
            it == table_->end() ? std::make_shared<Frame>() : std::make_shared<Frame>(*it->second);
        if (!frame->emplace(name, std::move(value)).second)
            return std::nullopt;
        auto table = std::make_shared<Table>(*table_);
        (*table)[scope] = std::move(frame);
        return VarEnv(std::move(table));
    }

    // Drop every binding of one (def) scope when its statement finishes.
    VarEnv clearScope(const Scope& scope) const {
        if (!table_->count(scope))
            return *this;
        auto table = std::make_shared<Table>(*table_);
        table->erase(scope);
        return VarEnv(std::move(table));
    }

    template <typename Fn> // Fn(const Scope&, const std::string&, const ValuePtr&)
    void forEach(Fn&& fn) const {
        for (const auto& [scope, frame] : *table_)
            for (const auto& [name, value] : *frame)
                fn(scope, name, value);
    }

    size_t bindingCount() const {
        size_t n = 0;
        for (const auto& [scope, frame] : *table_)
            n += frame->size();
        return n;
    }

    bool sameStorage(const VarEnv& other) const { return table_ == other.table_; }

private:
    explicit VarEnv(std::shared_ptr<const Table> table) : table_(std::move(table)) {}
    std::shared_ptr<const Table> table_;
};

// ---------------------------------------------------------------------------
// Definition environment: identifier -> definition
// ---------------------------------------------------------------------------

// Class known but not yet declared.
struct ClassDefn {
    std::optional<std::string> parent;
    Params params;
    StmtPtr body;
};
// Class declared; parentScope drives variable lookup from inside its scope.
struct DeclaredClassDefn {
    Scope parentScope;
};
// Defined resource type.
struct ResourceDefn {
    Params params;
    StmtPtr body;
};

using Definition = std::variant<ClassDefn, DeclaredClassDefn, ResourceDefn>;

class DefEnv {
    using Table = std::map<std::string, Definition>;

public:
    DefEnv() : table_(std::make_shared<Table>()) {}

    const Definition* lookup(const std::string& name) const {
        auto it = table_->find(name);
        return it == table_->end() ? nullptr : &it->second;
    }

    bool has(const std::string& name) const { return table_->count(name) != 0; }

    // nullopt when the name is already defined
    std::optional<DefEnv> define(const std::string& name, Definition def) const {
        if (has(name))
            return std::nullopt;
        auto table = std::make_shared<Table>(*table_);
        table->emplace(name, std::move(def));
        return DefEnv(std::move(table));
    }

    // The one in-place transition: ClassDefn -> DeclaredClassDefn.
    DefEnv declare(const std::string& name, Scope parentScope) const {
        auto table = std::make_shared<Table>(*table_);
        (*table)[name] = DeclaredClassDefn{std::move(parentScope)};
        return DefEnv(std::move(table));
    }

    template <typename Fn> // Fn(const std::string&, const Definition&)
    void forEach(Fn&& fn) const {
        for (const auto& [name, def] : *table_)
            fn(name, def);
    }

    bool sameStorage(const DefEnv& other) const { return table_ == other.table_; }

private:
    explicit DefEnv(std::shared_ptr<const Table> table) : table_(std::move(table)) {}
    std::shared_ptr<const Table> table_;
};

// ---------------------------------------------------------------------------
// Scope relations
// ---------------------------------------------------------------------------

// The base scope is the persistent scope (:: or ::nd) a declaration site
// belongs to: def scopes unwrap, class scopes follow their recorded parent.
// nullopt only if a class scope is not declared in defs, which evaluation
// never produces.
inline std::optional<Scope> baseOf(const Scope& scope, const DefEnv& defs) {
    switch (scope.kind()) {
    case Scope::Kind::Top:
    case Scope::Kind::Node:
        return scope;
    case Scope::Kind::Def:
        return baseOf(scope.inner(), defs);
    case Scope::Kind::Class: {
        const Definition* def = defs.lookup(scope.className());
        if (!def)
            return std::nullopt;
        auto* declared = std::get_if<DeclaredClassDefn>(def);
        if (!declared)
            return std::nullopt;
        return baseOf(declared->parentScope, defs);
    }
    }
    return std::nullopt;
}

// Parent scope for unqualified-variable lookup. Top scope has none; a class
// scope's parent is recorded at declaration; a def scope's parent is its base.
inline std::optional<Scope> parentOf(const Scope& scope, const DefEnv& defs) {
    switch (scope.kind()) {
    case Scope::Kind::Top:
        return std::nullopt;
    case Scope::Kind::Node:
        return Scope::top();
    case Scope::Kind::Def:
        return baseOf(scope, defs);
    case Scope::Kind::Class: {
        const Definition* def = defs.lookup(scope.className());
        if (!def)
            return std::nullopt;
        auto* declared = std::get_if<DeclaredClassDefn>(def);
        if (!declared)
            return std::nullopt;
        return declared->parentScope;
    }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parameter merge
// ---------------------------------------------------------------------------

// Builds the parameter-binding statements run on entry to a class body or
// defined-resource body: arguments become value assignments, absent parameters
// keep their default expression unevaluated (so defaults see the callee
// scope), and the sequence ends in skip. A parameter with neither argument nor
// default is MissingParameter; an argument not naming a parameter is
// UnknownParameter.
inline StmtPtr mergeParams(const Params& params,
                           const std::vector<std::pair<std::string, ValuePtr>>& args,
                           const std::string& owner, const Scope& scope, SourcePos pos) {
    for (const auto& [name, value] : args) {
        bool known = false;
        for (const Param& p : params)
            if (p.name == name) {
                known = true;
                break;
            }
        if (!known)
            throw CompileError(ErrKind::UnknownParameter, pos, scope,
                               "'" + owner + "' has no parameter '" + name + "'");
    }
    StmtPtr out = makeStmt(SkipStmt{}, pos);
    for (size_t i = params.size(); i-- > 0;) {
        const Param& p = params[i];
        const ValuePtr* arg = nullptr;
        for (const auto& [name, value] : args)
            if (name == p.name) { // first occurrence wins
                arg = &value;
                break;
            }
        ExprPtr rhs;
        if (arg)
            rhs = valueToExpr(*arg, pos);
        else if (p.defaultValue)
            rhs = p.defaultValue;
        else
            throw CompileError(ErrKind::MissingParameter, pos, scope,
                               "'" + owner + "' requires parameter '$" + p.name + "'");
        out = makeStmt(SeqStmt{makeStmt(AssignStmt{p.name, std::move(rhs)}, pos), out}, pos);
    }
    return out;
}

} // namespace pupcat
