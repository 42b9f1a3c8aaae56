#pragma once

#include <exception>
#include <optional>
#include <string>

#include "ast.hpp"
#include "scope.hpp"

namespace pupcat {

// Every way a well-formed manifest can fail to compile. InternalStuck marks a
// configuration no rule covers and no other kind explains; it indicates a bug
// in the evaluator, not in the manifest.
enum class ErrKind {
    UndefinedVariable,
    DuplicateVariable,
    DuplicateResource,
    UndefinedDefinition,
    ClassAlreadyDeclared,
    MissingParameter,
    UnknownParameter,
    TypeMismatch,
    DivisionByZero,
    SelectorNoMatch,
    BadDereference,
    InheritanceCycle,
    StepLimitExceeded,
    InternalStuck,
};

inline const char* errKindName(ErrKind k) {
    switch (k) {
    case ErrKind::UndefinedVariable:    return "UndefinedVariable";
    case ErrKind::DuplicateVariable:    return "DuplicateVariable";
    case ErrKind::DuplicateResource:    return "DuplicateResource";
    case ErrKind::UndefinedDefinition:  return "UndefinedDefinition";
    case ErrKind::ClassAlreadyDeclared: return "ClassAlreadyDeclared";
    case ErrKind::MissingParameter:     return "MissingParameter";
    case ErrKind::UnknownParameter:     return "UnknownParameter";
    case ErrKind::TypeMismatch:         return "TypeMismatch";
    case ErrKind::DivisionByZero:       return "DivisionByZero";
    case ErrKind::SelectorNoMatch:      return "SelectorNoMatch";
    case ErrKind::BadDereference:       return "BadDereference";
    case ErrKind::InheritanceCycle:     return "InheritanceCycle";
    case ErrKind::StepLimitExceeded:    return "StepLimitExceeded";
    case ErrKind::InternalStuck:        return "InternalStuck";
    }
    return "UnknownError";
}

inline std::optional<ErrKind> errKindFromName(const std::string& name) {
    static const ErrKind all[] = {
        ErrKind::UndefinedVariable,  ErrKind::DuplicateVariable,
        ErrKind::DuplicateResource,  ErrKind::UndefinedDefinition,
        ErrKind::ClassAlreadyDeclared, ErrKind::MissingParameter,
        ErrKind::UnknownParameter,   ErrKind::TypeMismatch,
        ErrKind::DivisionByZero,     ErrKind::SelectorNoMatch,
        ErrKind::BadDereference,     ErrKind::InheritanceCycle,
        ErrKind::StepLimitExceeded,  ErrKind::InternalStuck,
    };
    for (ErrKind k : all)
        if (name == errKindName(k))
            return k;
    return std::nullopt;
}

class CompileError : public std::exception {
public:
    CompileError(ErrKind kind, SourcePos pos, Scope scope, std::string message)
        : kind(kind), pos(pos), scope(std::move(scope)), message(std::move(message)) {
        formatted_ = std::string(errKindName(kind));
        if (pos.line > 0)
            formatted_ += " at " + std::to_string(pos.line) + ":" + std::to_string(pos.column);
        formatted_ += " in " + this->scope.str() + ": " + this->message;
    }

    const char* what() const noexcept override { return formatted_.c_str(); }

    ErrKind kind;
    SourcePos pos;
    Scope scope;
    std::string message;

private:
    std::string formatted_;
};

class ParseError : public std::exception {
public:
    ParseError(SourcePos pos, std::string message)
        : pos(pos), message(std::move(message)) {
        formatted_ = "parse error at " + std::to_string(pos.line) + ":" +
                     std::to_string(pos.column) + ": " + this->message;
    }

    const char* what() const noexcept override { return formatted_.c_str(); }

    SourcePos pos;
    std::string message;

private:
    std::string formatted_;
};

} // namespace pupcat
