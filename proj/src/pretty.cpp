#include "retreet/lang.hpp"

#include <sstream>

namespace retreet {

std::string print_lexpr(const LExpr& l) {
    std::string s = l.base;
    for (char c : l.path) {
        s += '.';
        s += c;
    }
    return s;
}

namespace {

// ctx: 0 top, 1 right operand of +/-, 2 operand of unary minus
std::string pa(const AExprP& e, int ctx) {
    switch (e->kind) {
    case AExpr::Const:
        if (e->value < 0) return ctx > 0 ? "(" + std::to_string(e->value) + ")" : std::to_string(e->value);
        return std::to_string(e->value);
    case AExpr::Var: return e->name;
    case AExpr::Field: return print_lexpr(e->loc) + "." + e->name;
    case AExpr::Loc: return print_lexpr(e->loc);
    case AExpr::Neg: return "-" + pa(e->a, 2);
    case AExpr::Add:
    case AExpr::Sub: {
        std::string s = pa(e->a, 0) + (e->kind == AExpr::Add ? " + " : " - ") + pa(e->b, 1);
        return ctx > 0 ? "(" + s + ")" : s;
    }
    }
    return "?";
}

std::string pc(const CondP& c, bool nested) {
    std::string s;
    switch (c->kind) {
    case Cond::True: return "true";
    case Cond::False: return "false";
    case Cond::IsNil: return print_lexpr(c->loc) + " == nil";
    case Cond::Pos: return pa(c->e, 0) + " > 0";
    case Cond::Cmp: return pa(c->lhs, 0) + " " + c->op + " " + pa(c->rhs, 0);
    case Cond::Not:
        if (c->a->kind == Cond::IsNil) return print_lexpr(c->a->loc) + " != nil";
        return "!(" + pc(c->a, false) + ")";
    case Cond::And:
    case Cond::Or:
        s = pc(c->a, true) + (c->kind == Cond::And ? " && " : " || ") + pc(c->b, true);
        return nested ? "(" + s + ")" : s;
    }
    return "?";
}

std::string print_assgn(const Assgn& a) {
    switch (a.kind) {
    case Assgn::SetVar: return a.name + " = " + print_aexpr(a.rhs);
    case Assgn::SetField: return print_lexpr(a.loc) + "." + a.name + " = " + print_aexpr(a.rhs);
    case Assgn::SetLoc: return print_lexpr(a.loc) + " = " + print_aexpr(a.rhs);
    case Assgn::SetRet: return "return[" + std::to_string(a.slot) + "] = " + print_aexpr(a.rhs);
    case Assgn::Return: {
        std::string s = "return";
        for (size_t i = 0; i < a.values.size(); ++i) s += (i ? ", " : " ") + print_aexpr(a.values[i]);
        return s;
    }
    }
    return "?";
}

void ind(std::ostringstream& os, int d) {
    for (int i = 0; i < d; ++i) os << "  ";
}

void print_items(std::ostringstream& os, const Stmt& seq, int d);

void print_stmt(std::ostringstream& os, const Stmt& s, int d) {
    switch (s.kind) {
    case Stmt::BlockS:
        if (s.block.kind == Block::Call) {
            ind(os, d);
            os << print_block(s.block) << "\n";
        } else {
            for (auto& a : s.block.assigns) {
                ind(os, d);
                os << print_assgn(a) << "\n";
            }
        }
        break;
    case Stmt::If:
        ind(os, d);
        os << "if (" << pc(s.cond, false) << ") {\n";
        print_items(os, s.kids[0], d + 1);
        ind(os, d);
        if (s.kids.size() > 1 && !s.kids[1].kids.empty()) {
            os << "} else {\n";
            print_items(os, s.kids[1], d + 1);
            ind(os, d);
        }
        os << "}\n";
        break;
    case Stmt::Par:
        ind(os, d);
        os << "{\n";
        print_items(os, s.kids[0], d + 1);
        ind(os, d);
        os << "||\n";
        print_items(os, s.kids[1], d + 1);
        ind(os, d);
        os << "}\n";
        break;
    case Stmt::Seq:
        ind(os, d);
        os << "{\n";
        print_items(os, s, d + 1);
        ind(os, d);
        os << "}\n";
        break;
    }
}

void print_items(std::ostringstream& os, const Stmt& seq, int d) {
    if (seq.kind != Stmt::Seq) {
        print_stmt(os, seq, d);
        return;
    }
    for (auto& k : seq.kids) print_stmt(os, k, d);
}

}  // namespace

std::string print_aexpr(const AExprP& e) { return pa(e, 0); }

std::string print_cond(const CondP& c) { return pc(c, false); }

std::string print_block(const Block& b) {
    if (b.kind == Block::Straight) {
        std::string s;
        for (size_t i = 0; i < b.assigns.size(); ++i) s += (i ? "; " : "") + print_assgn(b.assigns[i]);
        return s;
    }
    std::string s;
    for (size_t i = 0; i < b.results.size(); ++i) s += (i ? ", " : "") + b.results[i];
    if (!s.empty()) s += " = ";
    s += b.callee + "(" + print_lexpr(b.loc_arg);
    for (auto& a : b.int_args) s += ", " + print_aexpr(a);
    return s + ")";
}

std::string pretty_print(const Program& p) {
    std::ostringstream os;
    for (size_t i = 0; i < p.functions.size(); ++i) {
        auto& f = p.functions[i];
        if (i) os << "\n";
        os << f.name << "(" << f.loc_param;
        for (auto& q : f.int_params) os << ", " << q;
        os << ") {";
        if (f.body.kids.empty()) {
            os << " }\n";
            continue;
        }
        os << "\n";
        print_items(os, f.body, 1);
        os << "}\n";
    }
    return os.str();
}

}  // namespace retreet
