#include "retreet/lang.hpp"

#include <functional>
#include <map>
#include <set>

namespace retreet {

const char* violation_name(Violation::Kind k) {
    switch (k) {
    case Violation::SelfCall: return "SelfCall";
    case Violation::MultiLocParam: return "MultiLocParam";
    case Violation::NonAtomicCond: return "NonAtomicCond";
    case Violation::UnguardedDeref: return "UnguardedDeref";
    case Violation::TreeMutation: return "TreeMutation";
    case Violation::UnresolvedCall: return "UnresolvedCall";
    case Violation::ArityMismatch: return "ArityMismatch";
    }
    return "?";
}

namespace {

AExprP sub(AExprP a, AExprP b) {
    if (b->kind == AExpr::Const && b->value == 0) return a;
    if (a->kind == AExpr::Const && a->value == 0) return mk_neg(b);
    return mk_bin(AExpr::Sub, a, b);
}

AExprP plus1(AExprP e) { return mk_bin(AExpr::Add, e, mk_const(1)); }

CondP pos(AExprP e, Span sp) {
    auto c = std::make_shared<Cond>();
    c->kind = Cond::Pos;
    c->e = std::move(e);
    c->span = sp;
    return c;
}

CondP binc(Cond::Kind k, CondP a, CondP b, Span sp) {
    auto c = std::make_shared<Cond>();
    c->kind = k;
    c->a = std::move(a);
    c->b = std::move(b);
    c->span = sp;
    return c;
}

CondP desugar_cmp(const Cond& c) {
    auto& a = c.lhs;
    auto& b = c.rhs;
    if (c.op == ">") return pos(sub(a, b), c.span);
    if (c.op == ">=") return pos(plus1(sub(a, b)), c.span);
    if (c.op == "<") return pos(sub(b, a), c.span);
    if (c.op == "<=") return pos(plus1(sub(b, a)), c.span);
    if (c.op == "==") return binc(Cond::And, pos(plus1(sub(a, b)), c.span), pos(plus1(sub(b, a)), c.span), c.span);
    return binc(Cond::Or, pos(sub(a, b), c.span), pos(sub(b, a), c.span), c.span);
}

Stmt as_seq(Stmt s) {
    if (s.kind == Stmt::Seq) return s;
    Stmt q;
    q.kind = Stmt::Seq;
    q.span = s.span;
    q.kids.push_back(std::move(s));
    return q;
}

Stmt mk_if(CondP c, Stmt a, Stmt b, Span sp) {
    Stmt s;
    s.kind = Stmt::If;
    s.span = sp;
    s.cond = std::move(c);
    s.kids.push_back(as_seq(std::move(a)));
    s.kids.push_back(as_seq(std::move(b)));
    return s;
}

Stmt expand(const CondP& c, const Stmt& a, const Stmt& b, Span sp) {
    switch (c->kind) {
    case Cond::True:
    case Cond::IsNil:
    case Cond::Pos: return mk_if(c, a, b, sp);
    case Cond::False: {
        auto t = std::make_shared<Cond>();
        t->kind = Cond::True;
        t->span = c->span;
        return mk_if(t, b, a, sp);
    }
    case Cond::Cmp: return expand(desugar_cmp(*c), a, b, sp);
    case Cond::Not: return expand(c->a, b, a, sp);
    case Cond::And: return expand(c->a, expand(c->b, a, b, sp), b, sp);
    case Cond::Or: return expand(c->a, a, expand(c->b, a, b, sp), sp);
    }
    return mk_if(c, a, b, sp);
}

bool has_loc(const AExprP& e) {
    if (!e) return false;
    if (e->kind == AExpr::Loc) return true;
    return has_loc(e->a) || has_loc(e->b);
}

bool cond_has_loc_arith(const CondP& c) {
    if (!c) return false;
    switch (c->kind) {
    case Cond::Pos: return has_loc(c->e);
    case Cond::Cmp: return has_loc(c->lhs) || has_loc(c->rhs);
    case Cond::Not: return cond_has_loc_arith(c->a);
    case Cond::And:
    case Cond::Or: return cond_has_loc_arith(c->a) || cond_has_loc_arith(c->b);
    default: return false;
    }
}

}  // namespace

// Rewrites every non-atomic condition into nested ifs over atomic tests.
Stmt expand_conditions(const Stmt& s) {
    Stmt out = s;
    out.kids.clear();
    for (auto& k : s.kids) out.kids.push_back(expand_conditions(k));
    if (s.kind == Stmt::If && !s.cond->atomic() && !cond_has_loc_arith(s.cond))
        return expand(s.cond, out.kids[0], out.kids[1], s.span);
    return out;
}

namespace {

struct Guards {
    std::set<NodePath> nonnil;
    bool known_nonnil(const NodePath& p) const {
        for (auto& q : nonnil)
            if (q.compare(0, p.size(), p) == 0) return true;
        return false;
    }
};

void check_guards(const Function& f, const Stmt& s, Guards g, std::vector<Violation>& out) {
    auto deref = [&](const NodePath& p, Span sp, const std::string& what) {
        if (!g.known_nonnil(p))
            out.push_back({Violation::UnguardedDeref, sp,
                           f.name + ": " + what + " without a dominating guard " + print_lexpr({f.loc_param, p, sp}) +
                               " != nil"});
    };
    std::function<void(const AExprP&)> expr = [&](const AExprP& e) {
        if (!e) return;
        if (e->kind == AExpr::Field) deref(e->loc.path, e->span, "field read " + print_aexpr(e));
        if (e->kind == AExpr::Loc && !e->loc.path.empty())
            deref(e->loc.path.substr(0, e->loc.path.size() - 1), e->span, "dereference " + print_lexpr(e->loc));
        expr(e->a);
        expr(e->b);
    };
    switch (s.kind) {
    case Stmt::BlockS:
        if (s.block.kind == Block::Call) {
            auto& p = s.block.loc_arg.path;
            if (!p.empty()) deref(p.substr(0, p.size() - 1), s.block.span, "call argument " + print_lexpr(s.block.loc_arg));
            for (auto& a : s.block.int_args) expr(a);
        } else {
            for (auto& as : s.block.assigns) {
                expr(as.rhs);
                for (auto& v : as.values) expr(v);
                if (as.kind == Assgn::SetField) deref(as.loc.path, as.span, "field write " + as.name);
            }
        }
        return;
    case Stmt::If: {
        auto& c = s.cond;
        if (c->kind == Cond::IsNil) {
            auto& p = c->loc.path;
            if (!p.empty()) deref(p.substr(0, p.size() - 1), c->span, "nil test on " + print_lexpr(c->loc));
            check_guards(f, s.kids[0], g, out);
            Guards e = g;
            e.nonnil.insert(p);
            check_guards(f, s.kids[1], e, out);
            return;
        }
        if (c->kind == Cond::Pos) expr(c->e);
        check_guards(f, s.kids[0], g, out);
        check_guards(f, s.kids[1], g, out);
        return;
    }
    default:
        for (auto& k : s.kids) check_guards(f, k, g, out);
    }
}

void walk_blocks(const Stmt& s, const std::function<void(const Stmt&)>& fn) {
    fn(s);
    for (auto& k : s.kids) walk_blocks(k, fn);
}

}  // namespace

std::vector<Violation> guard_violations(const Program& p) {
    std::vector<Violation> out;
    for (auto& f : p.functions) check_guards(f, expand_conditions(f.body), Guards{}, out);
    return out;
}

std::vector<Violation> validate_restrictions(const Program& p) {
    std::vector<Violation> out;
    struct Edge {
        std::string from, to;
        bool empty;
        Span span;
    };
    std::vector<Edge> edges;
    for (auto& f : p.functions) {
        auto check_lexpr = [&](const LExpr& l) {
            if (l.base != f.loc_param)
                out.push_back({Violation::MultiLocParam, l.span,
                               f.name + ": '" + l.base + "' used as a node, but the only Loc parameter is '" +
                                   f.loc_param + "'"});
        };
        std::function<void(const AExprP&, bool)> expr = [&](const AExprP& e, bool arith) {
            if (!e) return;
            if (e->kind == AExpr::Field || e->kind == AExpr::Loc) check_lexpr(e->loc);
            if (e->kind == AExpr::Loc && arith)
                out.push_back({Violation::TreeMutation, e->span,
                               f.name + ": node value " + print_lexpr(e->loc) + " used as an integer"});
            expr(e->a, true);
            expr(e->b, true);
        };
        std::function<void(const CondP&)> cond = [&](const CondP& c) {
            if (!c) return;
            if (c->kind == Cond::IsNil) check_lexpr(c->loc);
            if (c->kind == Cond::Pos || c->kind == Cond::Cmp) {
                if (has_loc(c->e) || has_loc(c->lhs) || has_loc(c->rhs))
                    out.push_back({Violation::NonAtomicCond, c->span,
                                   f.name + ": condition '" + print_cond(c) +
                                       "' compares node values and has no atomic form"});
                for (auto* e : {&c->e, &c->lhs, &c->rhs}) {
                    std::function<void(const AExprP&)> lx = [&](const AExprP& x) {
                        if (!x) return;
                        if (x->kind == AExpr::Field) check_lexpr(x->loc);
                        lx(x->a);
                        lx(x->b);
                    };
                    lx(*e);
                }
            }
            cond(c->a);
            cond(c->b);
        };
        walk_blocks(f.body, [&](const Stmt& s) {
            if (s.kind == Stmt::If) cond(s.cond);
            if (s.kind != Stmt::BlockS) return;
            auto& b = s.block;
            if (b.kind == Block::Call) {
                check_lexpr(b.loc_arg);
                for (auto& a : b.int_args) expr(a, true);
                const Function* g = p.find(b.callee);
                if (!g) {
                    out.push_back({Violation::UnresolvedCall, b.span, f.name + ": call to undefined function '" + b.callee + "'"});
                    return;
                }
                edges.push_back({f.name, g->name, b.loc_arg.path.empty(), b.span});
                if (b.int_args.size() != g->int_params.size())
                    out.push_back({Violation::ArityMismatch, b.span,
                                   f.name + ": " + g->name + " expects " + std::to_string(g->int_params.size()) +
                                       " integer arguments, got " + std::to_string(b.int_args.size())});
                if (!b.results.empty() && static_cast<int>(b.results.size()) != g->return_arity)
                    out.push_back({Violation::ArityMismatch, b.span,
                                   f.name + ": " + g->name + " returns " + std::to_string(g->return_arity) +
                                       " values, " + std::to_string(b.results.size()) + " targets given"});
                return;
            }
            for (auto& as : b.assigns) {
                switch (as.kind) {
                case Assgn::SetLoc:
                    out.push_back({Violation::TreeMutation, as.span,
                                   f.name + ": assignment to pointer field " + print_lexpr(as.loc)});
                    check_lexpr(as.loc);
                    break;
                case Assgn::SetField:
                    check_lexpr(as.loc);
                    expr(as.rhs, false);
                    if (as.rhs && as.rhs->kind == AExpr::Loc)
                        out.push_back({Violation::TreeMutation, as.span, f.name + ": node value stored in field " + as.name});
                    break;
                case Assgn::SetVar:
                case Assgn::SetRet:
                    expr(as.rhs, false);
                    if (as.rhs && as.rhs->kind == AExpr::Loc)
                        out.push_back({Violation::TreeMutation, as.span,
                                       f.name + ": node value " + print_lexpr(as.rhs->loc) + " stored in a variable"});
                    break;
                case Assgn::Return:
                    for (auto& v : as.values) {
                        expr(v, false);
                        if (v->kind == AExpr::Loc)
                            out.push_back({Violation::TreeMutation, as.span, f.name + ": node value returned"});
                    }
                    if (!as.values.empty() && static_cast<int>(as.values.size()) != f.return_arity)
                        out.push_back({Violation::ArityMismatch, as.span,
                                       f.name + ": return of " + std::to_string(as.values.size()) +
                                           " values in a function of arity " + std::to_string(f.return_arity)});
                    break;
                }
            }
        });
    }

    // Same-node edges: a cycle made only of them is a self call on the same node.
    std::map<std::string, std::vector<std::string>> g;
    for (auto& e : edges)
        if (e.empty) g[e.from].push_back(e.to);
    auto reaches = [&](const std::string& a, const std::string& b) {
        std::set<std::string> seen;
        std::vector<std::string> st{a};
        while (!st.empty()) {
            auto x = st.back();
            st.pop_back();
            for (auto& y : g[x]) {
                if (y == b) return true;
                if (seen.insert(y).second) st.push_back(y);
            }
        }
        return false;
    };
    for (auto& e : edges)
        if (e.empty && (e.to == e.from || reaches(e.to, e.from)))
            out.push_back({Violation::SelfCall, e.span,
                           e.from + ": call to " + e.to + " on the same node closes a same-node call cycle"});

    auto guards = guard_violations(p);
    out.insert(out.end(), guards.begin(), guards.end());
    return out;
}

Program normalize(const Program& p, const LangOptions& opt) {
    Program out = p;
    for (auto& f : out.functions) f.body = expand_conditions(f.body);
    auto gv = guard_violations(out);
    if (!gv.empty()) throw Error("NormalizeError", gv.front().message, gv.front().span);
    for (auto& f : out.functions) {
        walk_blocks(f.body, [&](const Stmt& s) {
            if (s.kind != Stmt::BlockS || s.block.kind != Block::Call) return;
            auto& path = s.block.loc_arg.path;
            if (path.size() > 1 && !opt.allow_deep_loc)
                throw Error("NormalizeError",
                            f.name + ": call argument " + print_lexpr(s.block.loc_arg) +
                                " descends more than one level (use --allow-deep-loc)",
                            s.block.span);
            if (path.empty() && f.name != p.entry && !opt.allow_same_node)
                throw Error("NormalizeError",
                            f.name + ": call to " + s.block.callee + " on the same node outside " + p.entry +
                                " (use --allow-same-node)",
                            s.block.span);
        });
    }
    return out;
}

}  // namespace retreet
