#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ast.hpp"

namespace pupcat {

// ---------------------------------------------------------------------------
// Runtime values
// ---------------------------------------------------------------------------

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

// T['title'] as a first-class value
struct RefValue {
    std::string type;
    std::string title;
};

// Hash values keep insertion order and may carry duplicate keys;
// lookup returns the first match.
struct HashValEntry {
    ScalarKey key;
    ValuePtr value;
};

struct Value {
    std::variant<long long, std::string, bool,
                 std::vector<ValuePtr>,     // array
                 std::vector<HashValEntry>, // hash
                 RefValue>
        v;
};

inline ValuePtr makeValue(Value v) { return std::make_shared<Value>(std::move(v)); }
inline ValuePtr intValue(long long i) { return makeValue(Value{i}); }
inline ValuePtr strValue(std::string s) { return makeValue(Value{std::move(s)}); }
inline ValuePtr boolValue(bool b) { return makeValue(Value{b}); }
inline ValuePtr arrayValue(std::vector<ValuePtr> elems) {
    return makeValue(Value{std::move(elems)});
}
inline ValuePtr hashValue(std::vector<HashValEntry> entries) {
    return makeValue(Value{std::move(entries)});
}
inline ValuePtr refValue(std::string type, std::string title) {
    return makeValue(Value{RefValue{std::move(type), std::move(title)}});
}

inline const char* valueTypeName(const Value& v) {
    switch (v.v.index()) {
    case 0: return "integer";
    case 1: return "string";
    case 2: return "boolean";
    case 3: return "array";
    case 4: return "hash";
    case 5: return "resource reference";
    }
    return "?";
}

inline bool valueEquals(const Value& a, const Value& b) {
    if (a.v.index() != b.v.index())
        return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const T& y = std::get<T>(b.v);
            if constexpr (std::is_same_v<T, std::vector<ValuePtr>>) {
                if (x.size() != y.size())
                    return false;
                for (size_t i = 0; i < x.size(); ++i)
                    if (!valueEquals(*x[i], *y[i]))
                        return false;
                return true;
            } else if constexpr (std::is_same_v<T, std::vector<HashValEntry>>) {
                if (x.size() != y.size())
                    return false;
                for (size_t i = 0; i < x.size(); ++i)
                    if (x[i].key != y[i].key || !valueEquals(*x[i].value, *y[i].value))
                        return false;
                return true;
            } else if constexpr (std::is_same_v<T, RefValue>) {
                return x.type == y.type && x.title == y.title;
            } else {
                return x == y;
            }
        },
        a.v);
}

inline bool valueEquals(const ValuePtr& a, const ValuePtr& b) {
    if (a == b)
        return true;
    if (!a || !b)
        return false;
    return valueEquals(*a, *b);
}

// First matching entry wins; later duplicates are shadowed.
inline std::optional<ValuePtr> hashLookup(const std::vector<HashValEntry>& entries,
                                          const ScalarKey& key) {
    for (const auto& e : entries)
        if (e.key == key)
            return e.value;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Resources and the catalog
// ---------------------------------------------------------------------------

// Resource types understood without a matching `define`.
inline const std::set<std::string>& defaultBuiltinTypes() {
    static const std::set<std::string> types = {
        "exec", "file", "group", "host", "notify", "package", "service", "user",
    };
    return types;
}

struct Resource {
    std::string type;
    std::string title;
    // Attribute order is preserved from the declaration; names are unique.
    std::vector<std::pair<std::string, ValuePtr>> attrs;

    std::optional<ValuePtr> attr(const std::string& name) const {
        for (const auto& [k, v] : attrs)
            if (k == name)
                return v;
        return std::nullopt;
    }
};
using ResourcePtr = std::shared_ptr<const Resource>;

inline bool resourceEquals(const Resource& a, const Resource& b) {
    if (a.type != b.type || a.title != b.title || a.attrs.size() != b.attrs.size())
        return false;
    for (size_t i = 0; i < a.attrs.size(); ++i)
        if (a.attrs[i].first != b.attrs[i].first ||
            !valueEquals(*a.attrs[i].second, *b.attrs[i].second))
            return false;
    return true;
}

// Append-only ordered resource sequence with unique (type, title) pairs.
// Snapshots share storage, so keeping one per evaluation step stays cheap.
class Catalog {
public:
    Catalog() : items_(std::make_shared<std::vector<ResourcePtr>>()) {}

    size_t size() const { return items_->size(); }
    const ResourcePtr& at(size_t i) const { return (*items_)[i]; }
    const std::vector<ResourcePtr>& items() const { return *items_; }

    bool contains(const std::string& type, const std::string& title) const {
        return find(type, title) != nullptr;
    }

    const ResourcePtr* find(const std::string& type, const std::string& title) const {
        for (const auto& r : *items_)
            if (r->type == type && r->title == title)
                return &r;
        return nullptr;
    }

    // nullopt when (type, title) is already present
    std::optional<Catalog> append(ResourcePtr r) const {
        if (contains(r->type, r->title))
            return std::nullopt;
        auto next = std::make_shared<std::vector<ResourcePtr>>(*items_);
        next->push_back(std::move(r));
        return Catalog(std::move(next));
    }

    // Attribute k of the declared resource t[w]; nullopt when the resource or
    // the attribute is missing.
    std::optional<ValuePtr> lookup(const std::string& type, const std::string& title,
                                   const std::string& attrName) const {
        const ResourcePtr* r = find(type, title);
        if (!r)
            return std::nullopt;
        return (*r)->attr(attrName);
    }

    // True when *this is a (possibly equal) prefix of other. Shared storage
    // makes the common fast path a pointer comparison.
    bool isPrefixOf(const Catalog& other) const {
        if (items_ == other.items_)
            return true;
        if (size() > other.size())
            return false;
        for (size_t i = 0; i < size(); ++i) {
            if (at(i) == other.at(i))
                continue;
            if (!resourceEquals(*at(i), *other.at(i)))
                return false;
        }
        return true;
    }

    bool sameStorage(const Catalog& other) const { return items_ == other.items_; }

private:
    explicit Catalog(std::shared_ptr<const std::vector<ResourcePtr>> items)
        : items_(std::move(items)) {}

    std::shared_ptr<const std::vector<ResourcePtr>> items_;
};

// ---------------------------------------------------------------------------
// Expressions <-> values
// ---------------------------------------------------------------------------

inline bool isValueExpr(const ExprPtr& e);

inline bool isValueExpr(const Expr& e) {
    return std::visit(
        [](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, IntLit> || std::is_same_v<T, StrLit> ||
                          std::is_same_v<T, BoolLit>) {
                return true;
            } else if constexpr (std::is_same_v<T, ArrayLit>) {
                for (const auto& el : x.elems)
                    if (!isValueExpr(el))
                        return false;
                return true;
            } else if constexpr (std::is_same_v<T, HashLit>) {
                for (const auto& p : x.pairs)
                    if (!isValueExpr(p.value))
                        return false;
                return true;
            } else if constexpr (std::is_same_v<T, ResRef>) {
                // t[w] is a value once the title is a string
                return std::holds_alternative<StrLit>(x.title->node);
            } else {
                return false;
            }
        },
        e.node);
}

inline bool isValueExpr(const ExprPtr& e) { return e && isValueExpr(*e); }

// nullopt when the expression is not fully evaluated
inline std::optional<ValuePtr> exprToValue(const ExprPtr& e) {
    if (!e)
        return std::nullopt;
    return std::visit(
        [&](const auto& x) -> std::optional<ValuePtr> {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, IntLit>) {
                return intValue(x.value);
            } else if constexpr (std::is_same_v<T, StrLit>) {
                return strValue(x.value);
            } else if constexpr (std::is_same_v<T, BoolLit>) {
                return boolValue(x.value);
            } else if constexpr (std::is_same_v<T, ArrayLit>) {
                std::vector<ValuePtr> elems;
                elems.reserve(x.elems.size());
                for (const auto& el : x.elems) {
                    auto v = exprToValue(el);
                    if (!v)
                        return std::nullopt;
                    elems.push_back(std::move(*v));
                }
                return arrayValue(std::move(elems));
            } else if constexpr (std::is_same_v<T, HashLit>) {
                std::vector<HashValEntry> entries;
                entries.reserve(x.pairs.size());
                for (const auto& p : x.pairs) {
                    auto v = exprToValue(p.value);
                    if (!v)
                        return std::nullopt;
                    entries.push_back(HashValEntry{p.key, std::move(*v)});
                }
                return hashValue(std::move(entries));
            } else if constexpr (std::is_same_v<T, ResRef>) {
                if (auto* s = std::get_if<StrLit>(&x.title->node))
                    return refValue(x.type, s->value);
                return std::nullopt;
            } else {
                return std::nullopt;
            }
        },
        e->node);
}

inline ExprPtr valueToExpr(const ValuePtr& v, SourcePos pos = {}) {
    return std::visit(
        [&](const auto& x) -> ExprPtr {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, long long>) {
                return makeExpr(IntLit{x}, pos);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return makeExpr(StrLit{x}, pos);
            } else if constexpr (std::is_same_v<T, bool>) {
                return makeExpr(BoolLit{x}, pos);
            } else if constexpr (std::is_same_v<T, std::vector<ValuePtr>>) {
                ArrayLit arr;
                arr.elems.reserve(x.size());
                for (const auto& el : x)
                    arr.elems.push_back(valueToExpr(el, pos));
                return makeExpr(std::move(arr), pos);
            } else if constexpr (std::is_same_v<T, std::vector<HashValEntry>>) {
                HashLit h;
                h.pairs.reserve(x.size());
                for (const auto& e : x)
                    h.pairs.push_back(HashPair{e.key, valueToExpr(e.value, pos)});
                return makeExpr(std::move(h), pos);
            } else {
                return makeExpr(ResRef{x.type, makeExpr(StrLit{x.title}, pos)}, pos);
            }
        },
        v->v);
}

} // namespace pupcat
