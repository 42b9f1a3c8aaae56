#pragma once

#include <string>

#include "ast.hpp"
#include "value.hpp"

namespace pupcat {

// Operator precedence, low to high. Printing wraps a subexpression in
// parentheses whenever its level is below what its context requires.
//   0 selector   1 or   2 and   3 comparison   4 + -   5 * / %
//   6 unary !    7 postfix/primary
inline int binOpPrec(BinOp op) {
    switch (op) {
    case BinOp::Or:  return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Gt:
    case BinOp::Lt:
    case BinOp::Ge:
    case BinOp::Le:  return 3;
    case BinOp::Add:
    case BinOp::Sub: return 4;
    default:         return 5;
    }
}

inline std::string quoteString(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\'': out += "\\'"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:   out += c;
        }
    }
    out += "'";
    return out;
}

inline std::string capitalizeType(const std::string& type) {
    std::string out = type;
    if (!out.empty() && out[0] >= 'a' && out[0] <= 'z')
        out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out;
}

inline std::string prettyKey(const ScalarKey& k) {
    if (auto* i = std::get_if<long long>(&k))
        return std::to_string(*i);
    return quoteString(std::get<std::string>(k));
}

std::string prettyExpr(const ExprPtr& e, int minPrec = 0);

inline std::string prettyExprImpl(const Expr& e, int minPrec) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, IntLit>) {
                return std::to_string(x.value);
            } else if constexpr (std::is_same_v<T, StrLit>) {
                return quoteString(x.value);
            } else if constexpr (std::is_same_v<T, BoolLit>) {
                return x.value ? "true" : "false";
            } else if constexpr (std::is_same_v<T, LocalVar>) {
                return "$" + x.name;
            } else if constexpr (std::is_same_v<T, TopVar>) {
                return "$::" + x.name;
            } else if constexpr (std::is_same_v<T, ClassVar>) {
                return "$::" + x.cls + "::" + x.name;
            } else if constexpr (std::is_same_v<T, UnaryNot>) {
                std::string s = "!" + prettyExpr(x.operand, 6);
                return minPrec > 6 ? "(" + s + ")" : s;
            } else if constexpr (std::is_same_v<T, Binary>) {
                int prec = binOpPrec(x.op);
                std::string s = prettyExpr(x.lhs, prec) + " " + binOpName(x.op) + " " +
                                prettyExpr(x.rhs, prec + 1);
                return minPrec > prec ? "(" + s + ")" : s;
            } else if constexpr (std::is_same_v<T, ArrayLit>) {
                std::string s = "[";
                for (size_t i = 0; i < x.elems.size(); ++i) {
                    if (i)
                        s += ", ";
                    s += prettyExpr(x.elems[i]);
                }
                return s + "]";
            } else if constexpr (std::is_same_v<T, HashLit>) {
                std::string s = "{";
                for (size_t i = 0; i < x.pairs.size(); ++i) {
                    if (i)
                        s += ", ";
                    s += prettyKey(x.pairs[i].key) + " => " + prettyExpr(x.pairs[i].value);
                }
                return s + "}";
            } else if constexpr (std::is_same_v<T, Deref>) {
                std::string s = prettyExpr(x.head, 7) + "[" + prettyExpr(x.index) + "]";
                return s;
            } else if constexpr (std::is_same_v<T, ResRef>) {
                return capitalizeType(x.type) + "[" + prettyExpr(x.title) + "]";
            } else if constexpr (std::is_same_v<T, Select>) {
                std::string s = prettyExpr(x.control, 1) + " ? { ";
                for (size_t i = 0; i < x.arms.size(); ++i) {
                    if (i)
                        s += ", ";
                    s += x.arms[i].guard ? prettyExpr(*x.arms[i].guard) : "default";
                    s += " => " + prettyExpr(x.arms[i].body);
                }
                s += " }";
                return minPrec > 0 ? "(" + s + ")" : s;
            }
        },
        e.node);
}

inline std::string prettyExpr(const ExprPtr& e, int minPrec) {
    return e ? prettyExprImpl(*e, minPrec) : "<null>";
}

std::string prettyStmt(const StmtPtr& s, int indent = 0);

inline std::string prettyAttrBlock(const std::string& head,
                                   const std::vector<AttrPair>& attrs, int indent) {
    std::string pad(indent, ' ');
    if (attrs.empty())
        return head + " }";
    std::string out = head + "\n";
    for (const auto& a : attrs)
        out += pad + "  " + a.name + " => " + prettyExpr(a.value) + ",\n";
    out += pad + "}";
    return out;
}

inline std::string prettyStmtImpl(const Stmt& s, int indent) {
    std::string pad(indent, ' ');
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, SkipStmt>) {
                return pad + "skip";
            } else if constexpr (std::is_same_v<T, ExprStmt>) {
                return pad + prettyExpr(x.expr);
            } else if constexpr (std::is_same_v<T, SeqStmt>) {
                return prettyStmt(x.first, indent) + "\n" + prettyStmt(x.second, indent);
            } else if constexpr (std::is_same_v<T, AssignStmt>) {
                return pad + "$" + x.name + " = " + prettyExpr(x.value);
            } else if constexpr (std::is_same_v<T, IfStmt>) {
                return pad + "if " + prettyExpr(x.cond) + " {\n" +
                       prettyStmt(x.thenBody, indent + 2) + "\n" + pad + "} else {\n" +
                       prettyStmt(x.elseBody, indent + 2) + "\n" + pad + "}";
            } else if constexpr (std::is_same_v<T, UnlessStmt>) {
                return pad + "unless " + prettyExpr(x.cond) + " {\n" +
                       prettyStmt(x.body, indent + 2) + "\n" + pad + "}";
            } else if constexpr (std::is_same_v<T, CaseStmt>) {
                std::string out = pad + "case " + prettyExpr(x.control) + " {\n";
                for (const auto& arm : x.arms) {
                    out += pad + "  " + (arm.guard ? prettyExpr(*arm.guard) : "default") +
                           ": {\n" + prettyStmt(arm.body, indent + 4) + "\n" + pad + "  }\n";
                }
                return out + pad + "}";
            } else if constexpr (std::is_same_v<T, ResDecl>) {
                return prettyAttrBlock(
                    pad + x.head + " { " + prettyExpr(x.title) + ":", x.attrs, indent);
            } else if constexpr (std::is_same_v<T, ClassDecl>) {
                return prettyAttrBlock(pad + "class { " + x.name + ":", x.args, indent);
            } else if constexpr (std::is_same_v<T, IncludeStmt>) {
                return pad + "include " + x.name;
            } else if constexpr (std::is_same_v<T, FailStmt>) {
                return pad + "fail(" + prettyExpr(x.message) + ")";
            } else if constexpr (std::is_same_v<T, ScopeStmt>) {
                return pad + "scope " + x.scope.str() + " {\n" +
                       prettyStmt(x.body, indent + 2) + "\n" + pad + "}";
            }
        },
        s.node);
}

inline std::string prettyStmt(const StmtPtr& s, int indent) {
    return s ? prettyStmtImpl(*s, indent) : "<null>";
}

inline std::string prettyParams(const Params& params) {
    std::string out = "(";
    for (size_t i = 0; i < params.size(); ++i) {
        if (i)
            out += ", ";
        out += "$" + params[i].name;
        if (params[i].defaultValue)
            out += " = " + prettyExpr(params[i].defaultValue);
    }
    return out + ")";
}

std::string prettyManifest(const ManifestPtr& m);

inline std::string prettyManifestImpl(const Manifest& m) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, MStmt>) {
                return prettyStmt(x.stmt, 0);
            } else if constexpr (std::is_same_v<T, MSeq>) {
                return prettyManifest(x.first) + "\n" + prettyManifest(x.second);
            } else if constexpr (std::is_same_v<T, NodeDef>) {
                std::string head = "node ";
                if (x.spec.isDefault) {
                    head += "default";
                } else {
                    for (size_t i = 0; i < x.spec.names.size(); ++i) {
                        if (i)
                            head += ", ";
                        head += quoteString(x.spec.names[i]);
                    }
                }
                return head + " {\n" + prettyStmt(x.body, 2) + "\n}";
            } else if constexpr (std::is_same_v<T, DefineDef>) {
                return "define " + x.name + " " + prettyParams(x.params) + " {\n" +
                       prettyStmt(x.body, 2) + "\n}";
            } else if constexpr (std::is_same_v<T, ClassDef>) {
                std::string head = "class " + x.name;
                if (!x.params.empty())
                    head += " " + prettyParams(x.params);
                if (x.parent)
                    head += " inherits " + *x.parent;
                return head + " {\n" + prettyStmt(x.body, 2) + "\n}";
            }
        },
        m.node);
}

inline std::string prettyManifest(const ManifestPtr& m) {
    return m ? prettyManifestImpl(*m) : "<null>";
}

inline std::string prettyValue(const ValuePtr& v) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, long long>) {
                return std::to_string(x);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return quoteString(x);
            } else if constexpr (std::is_same_v<T, bool>) {
                return x ? "true" : "false";
            } else if constexpr (std::is_same_v<T, std::vector<ValuePtr>>) {
                std::string s = "[";
                for (size_t i = 0; i < x.size(); ++i) {
                    if (i)
                        s += ", ";
                    s += prettyValue(x[i]);
                }
                return s + "]";
            } else if constexpr (std::is_same_v<T, std::vector<HashValEntry>>) {
                std::string s = "{";
                for (size_t i = 0; i < x.size(); ++i) {
                    if (i)
                        s += ", ";
                    s += prettyKey(x[i].key) + " => " + prettyValue(x[i].value);
                }
                return s + "}";
            } else {
                return capitalizeType(x.type) + "[" + quoteString(x.title) + "]";
            }
        },
        v->v);
}

// Collapse to a single line and truncate; used for step-trace term summaries.
inline std::string oneLine(const std::string& text, size_t maxLen = 96) {
    std::string out;
    out.reserve(text.size());
    bool lastSpace = false;
    for (char c : text) {
        bool ws = (c == '\n' || c == '\t' || c == ' ' || c == '\r');
        if (ws) {
            if (!lastSpace && !out.empty())
                out += ' ';
            lastSpace = true;
        } else {
            out += c;
            lastSpace = false;
        }
    }
    while (!out.empty() && out.back() == ' ')
        out.pop_back();
    if (out.size() > maxLen) {
        out.resize(maxLen);
        out += "...";
    }
    return out;
}

} // namespace pupcat
