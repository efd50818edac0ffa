#include "retreet/lang.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace retreet {

namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
    Tok kind;
    std::string text;
    Span span;
};

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t n) {
        for (size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
    };
    static const char* two[] = {"==", "!=", ">=", "<=", "&&", "||"};
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) { adv(1); continue; }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') adv(1);
            continue;
        }
        Span sp{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Tok::Ident, src.substr(i, j - i), sp});
            adv(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Tok::Int, src.substr(i, j - i), sp});
            adv(j - i);
            continue;
        }
        bool matched = false;
        for (auto* t : two) {
            if (src.compare(i, 2, t) == 0) {
                out.push_back({Tok::Punct, t, sp});
                adv(2);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string("(){}[],=<>+-!.;").find(c) != std::string::npos) {
            out.push_back({Tok::Punct, std::string(1, c), sp});
            adv(1);
            continue;
        }
        throw Error("ParseError", std::to_string(line) + ":" + std::to_string(col) + ": unexpected character '" +
                                      std::string(1, c) + "'",
                    sp);
    }
    out.push_back({Tok::End, "", {line, col}});
    return out;
}

bool is_keyword(const std::string& s) {
    return s == "if" || s == "else" || s == "return" || s == "nil" || s == "true" || s == "false";
}

class Parser {
public:
    explicit Parser(std::vector<Token> t) : toks_(std::move(t)) {}

    Program program() {
        Program p;
        while (peek().kind != Tok::End) {
            const Token& t = peek();
            Function f = function();
            if (p.find(f.name)) fail("duplicate function '" + f.name + "'", t);
            p.functions.push_back(std::move(f));
        }
        return p;
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    std::string loc_param_;

    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool is(const std::string& s, size_t k = 0) const {
        auto& t = peek(k);
        return (t.kind == Tok::Punct || t.kind == Tok::Ident) && t.text == s;
    }
    [[noreturn]] void fail(const std::string& msg, const Token& t) const {
        throw Error("ParseError", std::to_string(t.span.line) + ":" + std::to_string(t.span.col) + ": " + msg, t.span);
    }
    Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    Token expect(const std::string& s) {
        if (!is(s)) fail("expected '" + s + "' but found '" + peek().text + "'", peek());
        return take();
    }
    std::string ident() {
        if (peek().kind != Tok::Ident || is_keyword(peek().text))
            fail("expected identifier but found '" + peek().text + "'", peek());
        return take().text;
    }

    Function function() {
        Function f;
        f.span = peek().span;
        f.name = ident();
        expect("(");
        f.loc_param = ident();
        while (is(",")) {
            take();
            f.int_params.push_back(ident());
        }
        expect(")");
        loc_param_ = f.loc_param;
        expect("{");
        f.body = stmt_list();
        expect("}");
        f.return_arity = arity_of(f.body);
        return f;
    }

    static int arity_of(const Stmt& s) {
        int a = 0;
        if (s.kind == Stmt::BlockS && s.block.kind == Block::Straight) {
            for (auto& as : s.block.assigns) {
                if (as.kind == Assgn::Return) a = std::max(a, static_cast<int>(as.values.size()));
                if (as.kind == Assgn::SetRet) a = std::max(a, as.slot + 1);
            }
        }
        for (auto& k : s.kids) a = std::max(a, arity_of(k));
        return a;
    }

    // Parses statements until '}' or a statement-level '||'.
    Stmt stmt_list() {
        Stmt seq;
        seq.kind = Stmt::Seq;
        seq.span = peek().span;
        Stmt* straight = nullptr;
        while (!is("}") && !is("||") && peek().kind != Tok::End) {
            if (is(";")) { take(); continue; }
            Assgn as;
            Stmt st;
            if (statement(st, as)) {
                if (!straight) {
                    Stmt b;
                    b.kind = Stmt::BlockS;
                    b.span = as.span;
                    b.block.kind = Block::Straight;
                    b.block.span = as.span;
                    seq.kids.push_back(std::move(b));
                    straight = &seq.kids.back();
                }
                straight->block.assigns.push_back(std::move(as));
            } else {
                seq.kids.push_back(std::move(st));
                straight = nullptr;
            }
        }
        return seq;
    }

    // Returns true when the statement is a plain assignment.
    bool statement(Stmt& st, Assgn& as) {
        const Token& t = peek();
        st.span = t.span;
        as.span = t.span;
        if (is("if")) {
            st = if_stmt();
            return false;
        }
        if (is("{")) {
            take();
            Stmt left = stmt_list();
            if (is("||")) {
                st = par_rest(std::move(left), t.span);
            } else {
                st = std::move(left);
                st.span = t.span;
            }
            expect("}");
            return false;
        }
        if (is("return")) {
            take();
            return_stmt(as);
            return true;
        }
        if (is("(")) {
            take();
            std::vector<std::string> res{ident()};
            while (is(",")) {
                take();
                res.push_back(ident());
            }
            expect(")");
            expect("=");
            st = call_stmt(std::move(res), t.span);
            return false;
        }
        if (peek().kind != Tok::Ident || is_keyword(t.text)) fail("unexpected '" + t.text + "'", t);
        if (is("(", 1)) {
            st = call_stmt({}, t.span);
            return false;
        }
        if (is(".", 1)) {
            LExpr target;
            target.span = t.span;
            target.base = ident();
            std::string last;
            while (is(".")) {
                take();
                std::string comp = ident();
                if (!last.empty()) {
                    if (last != "l" && last != "r") fail("field '" + last + "' used as a node", t);
                    target.path += last;
                }
                last = comp;
            }
            expect("=");
            if (last == "l" || last == "r") {
                as.kind = Assgn::SetLoc;
                target.path += last;
                as.loc = target;
                as.rhs = aexpr();
            } else {
                as.kind = Assgn::SetField;
                as.loc = target;
                as.name = last;
                as.rhs = aexpr();
            }
            return true;
        }
        std::vector<std::string> lhs{ident()};
        while (is(",")) {
            take();
            lhs.push_back(ident());
        }
        expect("=");
        if (peek().kind == Tok::Ident && !is_keyword(peek().text) && is("(", 1)) {
            st = call_stmt(std::move(lhs), t.span);
            return false;
        }
        if (lhs.size() != 1) fail("multiple targets require a call on the right-hand side", t);
        as.kind = Assgn::SetVar;
        as.name = lhs[0];
        as.rhs = aexpr();
        return true;
    }

    Stmt par_rest(Stmt left, Span sp) {
        expect("||");
        Stmt right = stmt_list();
        if (is("||")) {
            Stmt inner = par_rest(std::move(right), right.span);
            right = Stmt{};
            right.kind = Stmt::Seq;
            right.span = inner.span;
            right.kids.push_back(std::move(inner));
        }
        Stmt p;
        p.kind = Stmt::Par;
        p.span = sp;
        p.kids.push_back(std::move(left));
        p.kids.push_back(std::move(right));
        return p;
    }

    void return_stmt(Assgn& as) {
        if (is("[")) {
            take();
            if (peek().kind != Tok::Int) fail("expected return slot index", peek());
            as.kind = Assgn::SetRet;
            as.slot = std::stoi(take().text);
            expect("]");
            expect("=");
            as.rhs = aexpr();
            return;
        }
        as.kind = Assgn::Return;
        if (bare_return()) return;
        if (is("(")) {
            size_t save = pos_;
            take();
            std::vector<AExprP> vals{aexpr()};
            while (is(",")) {
                take();
                vals.push_back(aexpr());
            }
            if (vals.size() > 1 && is(")")) {
                take();
                as.values = std::move(vals);
                return;
            }
            pos_ = save;
        }
        as.values.push_back(aexpr());
        while (is(",")) {
            take();
            as.values.push_back(aexpr());
        }
    }

    bool bare_return() const {
        if (is("}") || is(";") || is("||") || is("if") || is("return") || is("{") || peek().kind == Tok::End)
            return true;
        if (peek().kind == Tok::Ident && !is_keyword(peek().text)) {
            size_t k = 1;
            while (is(",", k) && peek(k + 1).kind == Tok::Ident) k += 2;
            if (is("=", k)) return true;
            while (is(".", k) && peek(k + 1).kind == Tok::Ident) k += 2;
            if (is("=", k)) return true;
        }
        if (is("(") && peek(1).kind == Tok::Ident) {
            size_t k = 2;
            while (is(",", k) && peek(k + 1).kind == Tok::Ident) k += 2;
            if (is(")", k) && is("=", k + 1)) return true;
        }
        return false;
    }

    Stmt call_stmt(std::vector<std::string> results, Span sp) {
        Stmt st;
        st.kind = Stmt::BlockS;
        st.span = sp;
        Block& b = st.block;
        b.kind = Block::Call;
        b.span = sp;
        b.results = std::move(results);
        b.callee = ident();
        expect("(");
        b.loc_arg = lexpr();
        while (is(",")) {
            take();
            b.int_args.push_back(aexpr());
        }
        expect(")");
        return st;
    }

    LExpr lexpr() {
        LExpr l;
        l.span = peek().span;
        l.base = ident();
        while (is(".")) {
            take();
            const Token& c = peek();
            std::string d = ident();
            if (d != "l" && d != "r") fail("expected child selector l or r", c);
            l.path += d;
        }
        return l;
    }

    Stmt if_stmt() {
        Stmt st;
        st.kind = Stmt::If;
        st.span = take().span;
        expect("(");
        st.cond = bexpr();
        expect(")");
        expect("{");
        st.kids.push_back(stmt_list());
        expect("}");
        Stmt els;
        els.kind = Stmt::Seq;
        els.span = peek().span;
        if (is("else")) {
            take();
            if (is("if")) {
                els.kids.push_back(if_stmt());
            } else {
                expect("{");
                els = stmt_list();
                expect("}");
            }
        }
        st.kids.push_back(std::move(els));
        return st;
    }

    AExprP aexpr() {
        AExprP e = aterm();
        while (is("+") || is("-")) {
            Span sp = peek().span;
            auto k = take().text == "+" ? AExpr::Add : AExpr::Sub;
            auto n = std::make_shared<AExpr>();
            n->kind = k;
            n->a = e;
            n->b = aterm();
            n->span = sp;
            e = n;
        }
        return e;
    }

    AExprP aterm() {
        const Token& t = peek();
        if (is("-")) {
            take();
            auto n = std::make_shared<AExpr>();
            n->kind = AExpr::Neg;
            n->a = aterm();
            n->span = t.span;
            return n;
        }
        if (is("(")) {
            take();
            AExprP e = aexpr();
            expect(")");
            return e;
        }
        if (t.kind == Tok::Int) {
            auto n = std::make_shared<AExpr>();
            n->kind = AExpr::Const;
            n->value = std::stoll(take().text);
            n->span = t.span;
            return n;
        }
        if (t.kind != Tok::Ident || is_keyword(t.text)) fail("expected expression but found '" + t.text + "'", t);
        auto n = std::make_shared<AExpr>();
        n->span = t.span;
        std::string base = take().text;
        std::vector<std::string> comps;
        while (is(".")) {
            take();
            comps.push_back(ident());
        }
        if (comps.empty()) {
            if (base == loc_param_) {
                n->kind = AExpr::Loc;
                n->loc = LExpr{base, "", t.span};
            } else {
                n->kind = AExpr::Var;
                n->name = base;
            }
            return n;
        }
        LExpr l{base, "", t.span};
        for (size_t i = 0; i + 1 < comps.size(); ++i) {
            if (comps[i] != "l" && comps[i] != "r") fail("field '" + comps[i] + "' used as a node", t);
            l.path += comps[i];
        }
        const std::string& last = comps.back();
        if (last == "l" || last == "r") {
            l.path += last;
            n->kind = AExpr::Loc;
            n->loc = l;
        } else {
            n->kind = AExpr::Field;
            n->loc = l;
            n->name = last;
        }
        return n;
    }

    CondP bexpr() {
        CondP c = band();
        while (is("||")) {
            Span sp = take().span;
            auto n = std::make_shared<Cond>();
            n->kind = Cond::Or;
            n->a = c;
            n->b = band();
            n->span = sp;
            c = n;
        }
        return c;
    }

    CondP band() {
        CondP c = bnot();
        while (is("&&")) {
            Span sp = take().span;
            auto n = std::make_shared<Cond>();
            n->kind = Cond::And;
            n->a = c;
            n->b = bnot();
            n->span = sp;
            c = n;
        }
        return c;
    }

    CondP bnot() {
        if (is("!")) {
            Span sp = take().span;
            auto n = std::make_shared<Cond>();
            n->kind = Cond::Not;
            n->a = bnot();
            n->span = sp;
            return n;
        }
        return batom();
    }

    CondP batom() {
        const Token& t = peek();
        if (is("true") || is("false")) {
            auto n = std::make_shared<Cond>();
            n->kind = take().text == "true" ? Cond::True : Cond::False;
            n->span = t.span;
            return n;
        }
        if (is("(")) {
            size_t save = pos_;
            try {
                take();
                CondP c = bexpr();
                expect(")");
                if (!is("+") && !is("-") && !is(">") && !is("<") && !is(">=") && !is("<=") && !is("==") && !is("!="))
                    return c;
            } catch (const Error&) {
            }
            pos_ = save;
        }
        AExprP lhs = aexpr();
        if (!(is(">") || is(">=") || is("<") || is("<=") || is("==") || is("!=")))
            fail("expected comparison operator but found '" + peek().text + "'", peek());
        std::string op = take().text;
        auto n = std::make_shared<Cond>();
        n->span = t.span;
        if (is("nil")) {
            take();
            if (lhs->kind != AExpr::Loc) fail("nil comparison requires a node expression", t);
            if (op != "==" && op != "!=") fail("nil supports only == and !=", t);
            n->kind = Cond::IsNil;
            n->loc = lhs->loc;
            if (op == "==") return n;
            auto neg = std::make_shared<Cond>();
            neg->kind = Cond::Not;
            neg->a = n;
            neg->span = t.span;
            return neg;
        }
        AExprP rhs = aexpr();
        if (op == ">" && rhs->kind == AExpr::Const && rhs->value == 0) {
            n->kind = Cond::Pos;
            n->e = lhs;
            return n;
        }
        n->kind = Cond::Cmp;
        n->op = op;
        n->lhs = lhs;
        n->rhs = rhs;
        return n;
    }
};

}  // namespace

Program parse_program(const std::string& source) {
    Parser p(lex(source));
    return p.program();
}

Program load_program(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IOError", "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_program(ss.str());
}

}  // namespace retreet
