#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pupcat {

enum class Tok {
    End,
    Int,
    Str,
    Bareword, // lowercase word, possibly ::-qualified
    Capword,  // capitalized word (resource reference head)
    Var,      // $x, $::x, $a::b::x
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Comma,
    FatArrow,
    Question,
    Assign,
    EqEq,
    NotEq,
    Gt,
    Lt,
    Ge,
    Le,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Bang,
    KwNode,
    KwDefine,
    KwClass,
    KwInherits,
    KwInclude,
    KwIf,
    KwElse,
    KwUnless,
    KwCase,
    KwDefault,
    KwAnd,
    KwOr,
    KwTrue,
    KwFalse,
    KwFail,
};

struct Token {
    Tok kind = Tok::End;
    SourcePos pos;
    std::string text;             // raw spelling, for diagnostics
    unsigned long long intMag = 0; // Int: magnitude (sign applied by the parser)
    std::string strValue;          // Str value / word spelling
    bool varAbsolute = false;      // Var: leading ::
    std::vector<std::string> varSegments; // Var: name segments, last is the variable
};

// Produces the whole token stream up front. Constructs of full Puppet that the
// language subset leaves out are rejected here with targeted messages so a
// manifest using them fails loudly instead of misparsing.
class Lexer {
public:
    explicit Lexer(std::string source) : src_(std::move(source)) {}

    std::vector<Token> tokenize() {
        std::vector<Token> out;
        for (;;) {
            Token t = next();
            bool end = t.kind == Tok::End;
            out.push_back(std::move(t));
            if (end)
                return out;
        }
    }

private:
    std::string src_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;

    [[noreturn]] void fail(SourcePos pos, const std::string& msg) {
        throw ParseError(pos, msg);
    }

    SourcePos here() const { return SourcePos{line_, col_}; }
    bool done() const { return i_ >= src_.size(); }
    char peek(size_t ahead = 0) const {
        return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0';
    }
    char advance() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }
    bool match(char c) {
        if (!done() && peek() == c) {
            advance();
            return true;
        }
        return false;
    }

    static bool isWordStart(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
    static bool isWordChar(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '_';
    }

    void skipSpaceAndComments() {
        for (;;) {
            if (done())
                return;
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (!done() && peek() != '\n')
                    advance();
            } else if (c == '/' && peek(1) == '*') {
                fail(here(), "block comments are not supported; use '#'");
            } else {
                return;
            }
        }
    }

    Token simple(Tok kind, SourcePos pos, std::string text) {
        Token t;
        t.kind = kind;
        t.pos = pos;
        t.text = std::move(text);
        return t;
    }

    Token next() {
        skipSpaceAndComments();
        SourcePos pos = here();
        if (done())
            return simple(Tok::End, pos, "");
        char c = advance();
        switch (c) {
        case '{': return simple(Tok::LBrace, pos, "{");
        case '}': return simple(Tok::RBrace, pos, "}");
        case '[': return simple(Tok::LBracket, pos, "[");
        case ']': return simple(Tok::RBracket, pos, "]");
        case '(': return simple(Tok::LParen, pos, "(");
        case ')': return simple(Tok::RParen, pos, ")");
        case ',': return simple(Tok::Comma, pos, ",");
        case '?': return simple(Tok::Question, pos, "?");
        case '*': return simple(Tok::Star, pos, "*");
        case '%': return simple(Tok::Percent, pos, "%");
        case ';': fail(pos, "';' is not supported (one resource body per declaration)");
        case '@': fail(pos, "virtual resources are not supported");
        case ':':
            if (match(':')) {
                if (!done() && isWordStart(peek()))
                    fail(pos, "leading '::' on names is not supported");
                fail(pos, "unexpected '::'");
            }
            return simple(Tok::Colon, pos, ":");
        case '=':
            if (match('>'))
                return simple(Tok::FatArrow, pos, "=>");
            if (match('='))
                return simple(Tok::EqEq, pos, "==");
            if (match('~'))
                fail(pos, "regex match operators are not supported");
            return simple(Tok::Assign, pos, "=");
        case '!':
            if (match('='))
                return simple(Tok::NotEq, pos, "!=");
            if (match('~'))
                fail(pos, "regex match operators are not supported");
            return simple(Tok::Bang, pos, "!");
        case '<':
            if (match('<')) {
                if (match('|'))
                    fail(pos, "exported resource collectors are not supported");
                fail(pos, "operator '<<' is not supported");
            }
            if (match('|'))
                fail(pos, "resource collectors are not supported");
            if (match('='))
                return simple(Tok::Le, pos, "<=");
            return simple(Tok::Lt, pos, "<");
        case '>':
            if (match('>'))
                fail(pos, "operator '>>' is not supported");
            if (match('='))
                return simple(Tok::Ge, pos, ">=");
            return simple(Tok::Gt, pos, ">");
        case '|':
            if (match('>'))
                fail(pos, "resource collectors are not supported");
            fail(pos, "unexpected '|'");
        case '+':
            if (match('='))
                fail(pos, "appending assignment '+=' is not supported");
            return simple(Tok::Plus, pos, "+");
        case '-':
            if (match('>'))
                fail(pos, "resource ordering arrows are not supported");
            return simple(Tok::Minus, pos, "-");
        case '~':
            if (match('>'))
                fail(pos, "resource ordering arrows are not supported");
            fail(pos, "unexpected '~'");
        case '/': return simple(Tok::Slash, pos, "/");
        case '\'': return lexString(pos, '\'');
        case '"': return lexString(pos, '"');
        case '$': return lexVariable(pos);
        default:
            if (c >= '0' && c <= '9')
                return lexNumber(pos, c);
            if (isWordStart(c))
                return lexWord(pos, c);
            if (c >= 'A' && c <= 'Z')
                return lexCapword(pos, c);
            fail(pos, std::string("unexpected character '") + c + "'");
        }
    }

    Token lexString(SourcePos pos, char quote) {
        std::string value;
        for (;;) {
            if (done())
                fail(pos, "unterminated string literal");
            char c = advance();
            if (c == quote)
                break;
            if (c == '$' && quote == '"')
                fail(here(), "string interpolation is not supported; use single quotes");
            if (c != '\\') {
                value += c;
                continue;
            }
            if (done())
                fail(pos, "unterminated string literal");
            char esc = advance();
            if (quote == '\'') {
                // Single quotes only recognize \\ and \'
                if (esc == '\\' || esc == '\'')
                    value += esc;
                else {
                    value += '\\';
                    value += esc;
                }
                continue;
            }
            switch (esc) {
            case '\\': value += '\\'; break;
            case '"':  value += '"'; break;
            case '\'': value += '\''; break;
            case 'n':  value += '\n'; break;
            case 't':  value += '\t'; break;
            case 'r':  value += '\r'; break;
            case '$':  value += '$'; break;
            default:
                fail(here(), std::string("unknown escape '\\") + esc + "' in string");
            }
        }
        Token t = simple(Tok::Str, pos, value);
        t.strValue = std::move(value);
        return t;
    }

    Token lexNumber(SourcePos pos, char first) {
        unsigned long long mag = static_cast<unsigned long long>(first - '0');
        bool overflow = false;
        while (!done() && peek() >= '0' && peek() <= '9') {
            unsigned long long digit = static_cast<unsigned long long>(advance() - '0');
            if (mag > (~0ULL - digit) / 10)
                overflow = true;
            else
                mag = mag * 10 + digit;
        }
        // Magnitude may be INT64_MAX+1 so the parser can fold a leading minus
        // into INT64_MIN; anything further out of range is rejected there.
        if (overflow || mag > 9223372036854775808ULL)
            fail(pos, "integer literal out of range");
        if (!done() && (isWordChar(peek()) || peek() == '.'))
            fail(here(), "malformed number");
        Token t = simple(Tok::Int, pos, std::to_string(mag));
        t.intMag = mag;
        return t;
    }

    std::string lexWordTail(char first) {
        std::string word(1, first);
        while (!done() && isWordChar(peek()))
            word += advance();
        return word;
    }

    // Lowercase words: keywords, attribute names and resource/class names.
    // Qualified names (a::b) are read as one token.
    Token lexWord(SourcePos pos, char first) {
        std::string word = lexWordTail(first);
        while (peek() == ':' && peek(1) == ':' && isWordStart(peek(2))) {
            advance();
            advance();
            word += "::";
            word += lexWordTail(advance());
        }
        if (word.find("::") == std::string::npos) {
            if (word == "node") return simple(Tok::KwNode, pos, word);
            if (word == "define") return simple(Tok::KwDefine, pos, word);
            if (word == "class") return simple(Tok::KwClass, pos, word);
            if (word == "inherits") return simple(Tok::KwInherits, pos, word);
            if (word == "include") return simple(Tok::KwInclude, pos, word);
            if (word == "if") return simple(Tok::KwIf, pos, word);
            if (word == "else") return simple(Tok::KwElse, pos, word);
            if (word == "unless") return simple(Tok::KwUnless, pos, word);
            if (word == "case") return simple(Tok::KwCase, pos, word);
            if (word == "default") return simple(Tok::KwDefault, pos, word);
            if (word == "and") return simple(Tok::KwAnd, pos, word);
            if (word == "or") return simple(Tok::KwOr, pos, word);
            if (word == "true") return simple(Tok::KwTrue, pos, word);
            if (word == "false") return simple(Tok::KwFalse, pos, word);
            if (word == "fail") return simple(Tok::KwFail, pos, word);
            if (word == "elsif")
                fail(pos, "'elsif' is not supported; nest 'if' inside 'else'");
            if (word == "undef")
                fail(pos, "'undef' is not supported");
            if (word == "import")
                fail(pos, "'import' is not supported");
            if (word == "scope" || word == "skip")
                fail(pos, "'" + word + "' is a reserved word");
        }
        Token t = simple(Tok::Bareword, pos, word);
        t.strValue = word;
        return t;
    }

    Token lexCapword(SourcePos pos, char first) {
        std::string word(1, first);
        while (!done() && isWordChar(peek()))
            word += advance();
        if (peek() == ':' && peek(1) == ':')
            fail(pos, "qualified resource references are not supported");
        Token t = simple(Tok::Capword, pos, word);
        t.strValue = word;
        return t;
    }

    Token lexVariable(SourcePos pos) {
        Token t;
        t.kind = Tok::Var;
        t.pos = pos;
        if (peek() == ':' && peek(1) == ':') {
            advance();
            advance();
            t.varAbsolute = true;
        }
        if (done() || !isWordStart(peek()))
            fail(here(), "expected variable name after '$'");
        t.varSegments.push_back(lexWordTail(advance()));
        while (peek() == ':' && peek(1) == ':') {
            if (!isWordStart(peek(2)))
                fail(here(), "malformed qualified variable name");
            advance();
            advance();
            t.varSegments.push_back(lexWordTail(advance()));
        }
        t.text = "$";
        if (t.varAbsolute)
            t.text += "::";
        for (size_t k = 0; k < t.varSegments.size(); ++k) {
            if (k)
                t.text += "::";
            t.text += t.varSegments[k];
        }
        return t;
    }
};

} // namespace pupcat
