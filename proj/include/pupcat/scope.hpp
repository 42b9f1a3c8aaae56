#pragma once

#include <cassert>
#include <memory>
#include <string>
#include <utility>

namespace pupcat {

// Evaluation scopes. Variables live in one of four scope shapes:
//   ::        top scope
//   ::nd      node scope, active inside a matched node block
//   ::a       class scope for class a
//   def(s)    transient scope of one defined-resource instantiation,
//             wrapping the scope s it was declared from
class Scope {
public:
    enum class Kind { Top, Node, Class, Def };

    Scope() : kind_(Kind::Top) {}

    static Scope top() { return Scope(Kind::Top, "", nullptr); }
    static Scope node() { return Scope(Kind::Node, "", nullptr); }
    static Scope forClass(std::string name) {
        return Scope(Kind::Class, std::move(name), nullptr);
    }
    static Scope defScope(const Scope& inner) {
        return Scope(Kind::Def, "", std::make_shared<Scope>(inner));
    }

    Kind kind() const { return kind_; }
    bool isTop() const { return kind_ == Kind::Top; }
    bool isNode() const { return kind_ == Kind::Node; }
    bool isClass() const { return kind_ == Kind::Class; }
    bool isDef() const { return kind_ == Kind::Def; }

    // Class scopes only.
    const std::string& className() const {
        assert(kind_ == Kind::Class);
        return name_;
    }

    // Def scopes only: the scope the defined resource was declared from.
    const Scope& inner() const {
        assert(kind_ == Kind::Def && inner_);
        return *inner_;
    }

    friend bool operator==(const Scope& a, const Scope& b) {
        if (a.kind_ != b.kind_)
            return false;
        switch (a.kind_) {
        case Kind::Class: return a.name_ == b.name_;
        case Kind::Def:   return *a.inner_ == *b.inner_;
        default:          return true;
        }
    }
    friend bool operator!=(const Scope& a, const Scope& b) { return !(a == b); }

    // Total order so scopes can key ordered maps (keeps iteration deterministic).
    friend bool operator<(const Scope& a, const Scope& b) {
        if (a.kind_ != b.kind_)
            return static_cast<int>(a.kind_) < static_cast<int>(b.kind_);
        switch (a.kind_) {
        case Kind::Class: return a.name_ < b.name_;
        case Kind::Def:   return *a.inner_ < *b.inner_;
        default:          return false;
        }
    }

    std::string str() const {
        switch (kind_) {
        case Kind::Top:   return "::";
        case Kind::Node:  return "::nd";
        case Kind::Class: return "::" + name_;
        case Kind::Def:   return "def(" + inner_->str() + ")";
        }
        return "";
    }

private:
    Scope(Kind kind, std::string name, std::shared_ptr<const Scope> inner)
        : kind_(kind), name_(std::move(name)), inner_(std::move(inner)) {}

    Kind kind_;
    std::string name_;
    std::shared_ptr<const Scope> inner_;
};

} // namespace pupcat
