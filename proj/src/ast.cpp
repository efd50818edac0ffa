#include "retreet/ast.hpp"

namespace retreet {

AExprP mk_const(long long v) {
    auto e = std::make_shared<AExpr>();
    e->kind = AExpr::Const;
    e->value = v;
    return e;
}

AExprP mk_var(const std::string& n) {
    auto e = std::make_shared<AExpr>();
    e->kind = AExpr::Var;
    e->name = n;
    return e;
}

AExprP mk_field(const LExpr& l, const std::string& f) {
    auto e = std::make_shared<AExpr>();
    e->kind = AExpr::Field;
    e->loc = l;
    e->name = f;
    return e;
}

AExprP mk_bin(AExpr::Kind k, AExprP a, AExprP b) {
    auto e = std::make_shared<AExpr>();
    e->kind = k;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

AExprP mk_neg(AExprP a) {
    auto e = std::make_shared<AExpr>();
    e->kind = AExpr::Neg;
    e->a = std::move(a);
    return e;
}

const Function* Program::find(const std::string& name) const {
    for (auto& f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

Function* Program::find(const std::string& name) {
    for (auto& f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

static bool equal(const LExpr& a, const LExpr& b) { return a.base == b.base && a.path == b.path; }

bool equal(const AExprP& a, const AExprP& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case AExpr::Const: return a->value == b->value;
    case AExpr::Var: return a->name == b->name;
    case AExpr::Field: return a->name == b->name && equal(a->loc, b->loc);
    case AExpr::Loc: return equal(a->loc, b->loc);
    case AExpr::Neg: return equal(a->a, b->a);
    default: return equal(a->a, b->a) && equal(a->b, b->b);
    }
}

bool equal(const CondP& a, const CondP& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Cond::True:
    case Cond::False: return true;
    case Cond::IsNil: return equal(a->loc, b->loc);
    case Cond::Pos: return equal(a->e, b->e);
    case Cond::Cmp: return a->op == b->op && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case Cond::Not: return equal(a->a, b->a);
    default: return equal(a->a, b->a) && equal(a->b, b->b);
    }
}

static bool equal(const Assgn& a, const Assgn& b) {
    if (a.kind != b.kind || a.name != b.name || a.slot != b.slot) return false;
    if (!equal(a.loc, b.loc) || !equal(a.rhs, b.rhs)) return false;
    if (a.values.size() != b.values.size()) return false;
    for (size_t i = 0; i < a.values.size(); ++i)
        if (!equal(a.values[i], b.values[i])) return false;
    return true;
}

static bool equal(const Block& a, const Block& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == Block::Call) {
        if (a.results != b.results || a.callee != b.callee || !equal(a.loc_arg, b.loc_arg)) return false;
        if (a.int_args.size() != b.int_args.size()) return false;
        for (size_t i = 0; i < a.int_args.size(); ++i)
            if (!equal(a.int_args[i], b.int_args[i])) return false;
        return true;
    }
    if (a.assigns.size() != b.assigns.size()) return false;
    for (size_t i = 0; i < a.assigns.size(); ++i)
        if (!equal(a.assigns[i], b.assigns[i])) return false;
    return true;
}

bool equal(const Stmt& a, const Stmt& b) {
    if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
    if (a.kind == Stmt::BlockS && !equal(a.block, b.block)) return false;
    if (a.kind == Stmt::If && !equal(a.cond, b.cond)) return false;
    for (size_t i = 0; i < a.kids.size(); ++i)
        if (!equal(a.kids[i], b.kids[i])) return false;
    return true;
}

bool equal(const Program& a, const Program& b) {
    if (a.functions.size() != b.functions.size() || a.entry != b.entry) return false;
    for (size_t i = 0; i < a.functions.size(); ++i) {
        auto& f = a.functions[i];
        auto& g = b.functions[i];
        if (f.name != g.name || f.loc_param != g.loc_param || f.int_params != g.int_params) return false;
        if (f.return_arity != g.return_arity || !equal(f.body, g.body)) return false;
    }
    return true;
}

}  // namespace retreet
