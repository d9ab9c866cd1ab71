#pragma once

#include <cctype>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Łukasiewicz propositional formulas: AST, parser, printer, semantics.
//
// Concrete syntax:   ~  &  |  ->  <->   with constants 0, 1 and
// identifiers [A-Za-z][A-Za-z0-9_.]*.  Precedence (tightest first):
// ~, &, |, ->, <->.  '&' and '|' associate to the left, '->' and '<->'
// to the right.

namespace lnn {

enum class Conn { Var, Const, Not, Fusion, StrongDisj, Implies, Iff };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    Conn kind;
    std::string name;          // Var
    int value = 0;             // Const: 0 or 1
    FormulaPtr left, right;    // Not uses left only
};

inline FormulaPtr var(std::string name) {
    auto f = std::make_shared<Formula>();
    f->kind = Conn::Var;
    f->name = std::move(name);
    return f;
}

inline FormulaPtr cnst(int value) {
    if (value != 0 && value != 1) throw std::invalid_argument("constant must be 0 or 1");
    auto f = std::make_shared<Formula>();
    f->kind = Conn::Const;
    f->value = value;
    return f;
}

inline FormulaPtr lnot(FormulaPtr child) {
    auto f = std::make_shared<Formula>();
    f->kind = Conn::Not;
    f->left = std::move(child);
    return f;
}

inline FormulaPtr binary(Conn kind, FormulaPtr l, FormulaPtr r) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->left = std::move(l);
    f->right = std::move(r);
    return f;
}

inline FormulaPtr fusion(FormulaPtr l, FormulaPtr r)      { return binary(Conn::Fusion, std::move(l), std::move(r)); }
inline FormulaPtr strong_disj(FormulaPtr l, FormulaPtr r) { return binary(Conn::StrongDisj, std::move(l), std::move(r)); }
inline FormulaPtr implies(FormulaPtr l, FormulaPtr r)     { return binary(Conn::Implies, std::move(l), std::move(r)); }
inline FormulaPtr iff(FormulaPtr l, FormulaPtr r)         { return binary(Conn::Iff, std::move(l), std::move(r)); }

inline bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case Conn::Var:   return a->name == b->name;
        case Conn::Const: return a->value == b->value;
        case Conn::Not:   return structurally_equal(a->left, b->left);
        default:          return structurally_equal(a->left, b->left) &&
                                 structurally_equal(a->right, b->right);
    }
}

namespace detail {
inline void collect_vars(const FormulaPtr& f, std::vector<std::string>& out) {
    switch (f->kind) {
        case Conn::Var:
            for (const auto& v : out)
                if (v == f->name) return;
            out.push_back(f->name);
            return;
        case Conn::Const: return;
        case Conn::Not:   collect_vars(f->left, out); return;
        default:
            collect_vars(f->left, out);
            collect_vars(f->right, out);
    }
}
}  // namespace detail

// Distinct variable names in first-occurrence (document) order.
inline std::vector<std::string> variables(const FormulaPtr& f) {
    std::vector<std::string> out;
    detail::collect_vars(f, out);
    return out;
}

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Łukasiewicz semantics: x⊗y = max(0,x+y−1), x⇒y = min(1,1−x+y),
// ¬x = 1−x, x⊕y = min(1,x+y), x⇔y = (x⇒y)⊗(y⇒x).
inline double eval_formula(const FormulaPtr& f, const std::map<std::string, double>& assignment) {
    switch (f->kind) {
        case Conn::Var: {
            auto it = assignment.find(f->name);
            if (it == assignment.end()) throw EvalError("unbound variable: " + f->name);
            return it->second;
        }
        case Conn::Const: return f->value;
        case Conn::Not:   return 1.0 - eval_formula(f->left, assignment);
        case Conn::Fusion: {
            double x = eval_formula(f->left, assignment), y = eval_formula(f->right, assignment);
            return std::max(0.0, x + y - 1.0);
        }
        case Conn::StrongDisj: {
            double x = eval_formula(f->left, assignment), y = eval_formula(f->right, assignment);
            return std::min(1.0, x + y);
        }
        case Conn::Implies: {
            double x = eval_formula(f->left, assignment), y = eval_formula(f->right, assignment);
            return std::min(1.0, 1.0 - x + y);
        }
        case Conn::Iff: {
            double x = eval_formula(f->left, assignment), y = eval_formula(f->right, assignment);
            double fwd = std::min(1.0, 1.0 - x + y);
            double bwd = std::min(1.0, 1.0 - y + x);
            return std::max(0.0, fwd + bwd - 1.0);
        }
    }
    throw EvalError("corrupt formula node");
}

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(const std::string& what, std::size_t off)
        : std::runtime_error(what + " at offset " + std::to_string(off)), offset(off) {}
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    FormulaPtr run() {
        auto f = parse_iff();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return f;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool match(std::string_view tok) {
        skip_ws();
        if (text_.substr(pos_, tok.size()) == tok) {
            // '-' must not eat the prefix of '->'; '<->' handled by ordering.
            if (tok == "-" && text_.substr(pos_, 2) == "->") return false;
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    // iff := imp ('<->' iff)?     right-associative
    FormulaPtr parse_iff() {
        auto l = parse_imp();
        if (match("<->")) return iff(std::move(l), parse_iff());
        return l;
    }

    // imp := disj ('->' imp)?     right-associative
    FormulaPtr parse_imp() {
        auto l = parse_disj();
        if (match("->")) return implies(std::move(l), parse_imp());
        return l;
    }

    // disj := conj ('|' conj)*    left-associative
    FormulaPtr parse_disj() {
        auto l = parse_conj();
        while (match("|")) l = strong_disj(std::move(l), parse_conj());
        return l;
    }

    // conj := unary ('&' unary)*  left-associative
    FormulaPtr parse_conj() {
        auto l = parse_unary();
        while (match("&")) l = fusion(std::move(l), parse_unary());
        return l;
    }

    FormulaPtr parse_unary() {
        if (match("~")) return lnot(parse_unary());
        return parse_atom();
    }

    FormulaPtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto f = parse_iff();
            skip_ws();
            if (pos_ >= text_.size() || text_[pos_] != ')')
                throw ParseError("expected ')'", pos_);
            ++pos_;
            return f;
        }
        if (c == '0' || c == '1') {
            ++pos_;
            return cnst(c - '0');
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            ++pos_;
            while (pos_ < text_.size()) {
                char d = text_[pos_];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') ++pos_;
                else break;
            }
            return var(std::string(text_.substr(start, pos_ - start)));
        }
        throw ParseError(std::string("syntax error near '") + c + "'", pos_);
    }
};

inline int precedence(Conn k) {
    switch (k) {
        case Conn::Iff:        return 0;
        case Conn::Implies:    return 1;
        case Conn::StrongDisj: return 2;
        case Conn::Fusion:     return 3;
        case Conn::Not:        return 4;
        default:               return 5;  // atoms
    }
}

inline void format_rec(const FormulaPtr& f, int min_prec, std::string& out) {
    int p = precedence(f->kind);
    bool parens = p < min_prec;
    if (parens) out += '(';
    switch (f->kind) {
        case Conn::Var:   out += f->name; break;
        case Conn::Const: out += char('0' + f->value); break;
        case Conn::Not:
            out += '~';
            format_rec(f->left, precedence(Conn::Not), out);
            break;
        case Conn::Fusion:
            format_rec(f->left, p, out);
            out += " & ";
            format_rec(f->right, p + 1, out);
            break;
        case Conn::StrongDisj:
            format_rec(f->left, p, out);
            out += " | ";
            format_rec(f->right, p + 1, out);
            break;
        case Conn::Implies:
            format_rec(f->left, p + 1, out);
            out += " -> ";
            format_rec(f->right, p, out);
            break;
        case Conn::Iff:
            format_rec(f->left, p + 1, out);
            out += " <-> ";
            format_rec(f->right, p, out);
            break;
    }
    if (parens) out += ')';
}

}  // namespace detail

inline FormulaPtr parse_formula(std::string_view text) {
    return detail::Parser(text).run();
}

// Minimal-parenthesis text; parse_formula(format_formula(f)) == f structurally.
inline std::string format_formula(const FormulaPtr& f) {
    std::string out;
    detail::format_rec(f, 0, out);
    return out;
}

}  // namespace lnn
