#include "retreet/semantics.hpp"

#include "retreet/lang.hpp"

#include <algorithm>

namespace retreet {

std::string field_symbol(const NodePath& p, const std::string& f, const std::string& node) {
    std::string s = node;
    for (char c : p) {
        s += '.';
        s += c;
    }
    return s + "." + f;
}

std::string ghost_symbol(const std::string& val, int block, int slot) {
    return val + "(s" + std::to_string(block) + (slot ? "." + std::to_string(slot) : "") + ")";
}

std::string param_symbol(const std::string& val, const std::string& p) { return val + "(" + p + ")"; }

LinTerm term_of(const AExprP& e) {
    switch (e->kind) {
    case AExpr::Const: return LinTerm::constant(e->value);
    case AExpr::Var: return LinTerm::symbol(e->name);
    case AExpr::Field: return LinTerm::symbol(field_symbol(e->loc.path, e->name));
    case AExpr::Loc: throw Error("NotArithmetic", "node expression " + print_lexpr(e->loc) + " used as an integer");
    case AExpr::Add: return term_of(e->a) + term_of(e->b);
    case AExpr::Sub: return term_of(e->a) - term_of(e->b);
    case AExpr::Neg: return term_of(e->a) * -1;
    }
    return {};
}

FormulaP formula_of(const CondP& c) {
    switch (c->kind) {
    case Cond::True:
    case Cond::IsNil: return f_true();
    case Cond::Pos: return f_gt(term_of(c->e));
    default: throw Error("NonAtomicCond", "condition '" + print_cond(c) + "' is not atomic; normalize first");
    }
}

static std::map<std::string, LinTerm> assign_map(const Assgn& a) {
    std::map<std::string, LinTerm> m;
    switch (a.kind) {
    case Assgn::SetVar: m[a.name] = term_of(a.rhs); break;
    case Assgn::SetField: m[field_symbol(a.loc.path, a.name)] = term_of(a.rhs); break;
    case Assgn::SetRet: m["ret:" + std::to_string(a.slot)] = term_of(a.rhs); break;
    case Assgn::Return:
        for (size_t i = 0; i < a.values.size(); ++i) m["ret:" + std::to_string(i)] = term_of(a.values[i]);
        break;
    case Assgn::SetLoc: break;
    }
    return m;
}

FormulaP wp_assign(const Assgn& a, const FormulaP& phi) { return substitute(phi, assign_map(a)); }

// Code-level symbols written by a block.
static void targets(const Block& b, std::set<std::string>& out) {
    if (b.kind == Block::Call) {
        for (auto& r : b.results) out.insert(r);
        return;
    }
    for (auto& a : b.assigns)
        for (auto& [s, t] : assign_map(a)) out.insert(s);
}

template <class Sub>
static void wp_walk(const BlockTable& t, const Path& code, const std::string& val, Sub&& apply) {
    for (size_t i = code.size(); i-- > 0;) {
        auto& e = code[i];
        switch (e.kind) {
        case PathEntry::StraightCode: {
            auto& as = t.block(e.block).block->assigns;
            for (size_t j = as.size(); j-- > 0;) apply(assign_map(as[j]));
            break;
        }
        case PathEntry::SpeculatedCall: {
            auto& b = *t.block(e.block).block;
            std::map<std::string, LinTerm> m;
            for (size_t k = 0; k < b.results.size(); ++k)
                m[b.results[k]] = LinTerm::symbol(ghost_symbol(val, e.block, static_cast<int>(k)));
            apply(m);
            break;
        }
        case PathEntry::Assume: break;
        case PathEntry::Havoc: {
            std::set<std::string> ts;
            for (int b : e.blocks) targets(*t.block(b).block, ts);
            std::map<std::string, LinTerm> m;
            for (auto& s : ts) m[s] = LinTerm::symbol(s + "~" + std::to_string(i));
            apply(m);
            break;
        }
        }
    }
}

FormulaP wp(const BlockTable& t, const Path& code, const FormulaP& phi, const std::string& val) {
    FormulaP f = phi;
    wp_walk(t, code, val, [&](const std::map<std::string, LinTerm>& m) { f = substitute(f, m); });
    return f;
}

LinTerm wp_term(const BlockTable& t, const Path& code, const LinTerm& e, const std::string& val) {
    LinTerm r = e;
    wp_walk(t, code, val, [&](const std::map<std::string, LinTerm>& m) { r = r.substitute(m); });
    return r;
}

static bool plain_local(const std::string& s) {
    return s.find_first_of(".(~:") == std::string::npos;
}

static std::map<std::string, LinTerm> closing(const Function& f, const std::set<std::string>& syms,
                                              const std::string& val) {
    std::map<std::string, LinTerm> m;
    for (auto& s : syms) {
        bool param = false;
        for (auto& p : f.int_params) param = param || p == s;
        if (param) m[s] = LinTerm::symbol(param_symbol(val, s));
        else if (plain_local(s) || s.rfind("ret:", 0) == 0) m[s] = LinTerm::constant(0);
    }
    return m;
}

FormulaP close_over(const Function& f, const FormulaP& phi, const std::string& val) {
    std::set<std::string> syms;
    free_symbols(phi, syms);
    return substitute(phi, closing(f, syms, val));
}

LinTerm close_over(const Function& f, const LinTerm& e, const std::string& val) {
    std::set<std::string> syms;
    for (auto& [s, c] : e.coef) syms.insert(s);
    return e.substitute(closing(f, syms, val));
}

FormulaP wp_condition(const BlockTable& t, int c, bool polarity, const std::string& val) {
    auto& ci = t.cond(c);
    if (ci.cond->kind == Cond::IsNil) return f_true();
    FormulaP f = formula_of(ci.cond);
    if (!polarity) f = f_not(f);
    return close_over(*t.program().find(ci.func), wp(t, ci.path, f, val), val);
}

Match match_constraint(const BlockTable& t, int s, int q) {
    auto cs = t.callees(s);
    if (std::find(cs.begin(), cs.end(), q) == cs.end())
        throw Error("NotCallee", block_name(q) + " is not a callee block of " + block_name(s));
    return match_of(t, q);
}

Match match_of(const BlockTable& t, int q) {
    Match m;
    m.eqs = f_true();
    auto& b = t.block(q);
    if (!b.is_call) return m;
    m.dir = b.block->loc_arg.path;
    const Function& g = *t.program().find(b.block->callee);
    const Function& f = t.function_of(q);
    std::vector<FormulaP> eqs;
    for (size_t i = 0; i < g.int_params.size() && i < b.block->int_args.size(); ++i) {
        LinTerm arg = close_over(f, wp_term(t, b.path, term_of(b.block->int_args[i])));
        eqs.push_back(f_eq(LinTerm::symbol(param_symbol("N", g.int_params[i])) - arg));
    }
    m.eqs = f_and(std::move(eqs));
    return m;
}

PathCondition path_condition(const BlockTable& t, int s, int q) {
    match_constraint(t, s, q);
    return path_condition_of(t, q);
}

PathCondition path_condition_of(const BlockTable& t, int q) {
    Match m = match_of(t, q);
    PathCondition pc;
    pc.dir = m.dir;
    std::vector<FormulaP> parts{m.eqs};
    for (auto& e : t.block(q).path) {
        if (e.kind != PathEntry::Assume) continue;
        auto& c = t.cond(e.cond).cond;
        if (c->kind == Cond::IsNil) pc.nil.push_back({c->loc.path, e.polarity});
        else parts.push_back(wp_condition(t, e.cond, e.polarity));
    }
    pc.arith = f_and(std::move(parts));
    return pc;
}

std::string print_direction(const NodePath& dir) {
    std::string s = "v = u";
    for (char c : dir) s += std::string(".") + c;
    return s;
}

std::string print_path_condition(const PathCondition& pc) {
    std::vector<std::string> parts;
    if (pc.arith->kind != Formula::True) parts.push_back(print_formula(pc.arith));
    parts.push_back(print_direction(pc.dir));
    for (auto& a : pc.nil) {
        std::string u = "u";
        for (char c : a.path) u += std::string(".") + c;
        parts.push_back((a.nil ? "isNil(" : "!isNil(") + u + ")");
    }
    std::string s;
    for (auto& p : parts) s += (s.empty() ? "" : " && ") + p;
    return s;
}

bool SpecTrace::operator==(const SpecTrace& o) const {
    if (records.size() != o.records.size() || returns != o.returns || writes != o.writes) return false;
    for (size_t i = 0; i < records.size(); ++i)
        if (records[i].block != o.records[i].block || records[i].disp != o.records[i].disp ||
            records[i].vals != o.records[i].vals)
            return false;
    return true;
}

namespace {

struct Spec {
    const BlockTable& t;
    const std::map<std::string, long long>& ghosts;
    const SpecContext& ctx;
    std::map<const Block*, int> ids;
    std::map<std::string, long long> locals;
    SpecTrace out;

    long long field(const NodePath& p, const std::string& f) {
        auto it = out.writes.find({p, f});
        return it != out.writes.end() ? it->second : ctx.field(p, f);
    }

    long long eval(const AExprP& e) {
        switch (e->kind) {
        case AExpr::Const: return e->value;
        case AExpr::Var: {
            auto it = locals.find(e->name);
            return it == locals.end() ? 0 : it->second;
        }
        case AExpr::Field: return field(e->loc.path, e->name);
        case AExpr::Add: return eval(e->a) + eval(e->b);
        case AExpr::Sub: return eval(e->a) - eval(e->b);
        case AExpr::Neg: return -eval(e->a);
        case AExpr::Loc: break;
        }
        throw Error("NotArithmetic", "node expression evaluated as an integer");
    }

    void ret(size_t k, long long v) {
        if (out.returns.size() <= k) out.returns.resize(k + 1, 0);
        out.returns[k] = v;
    }

    void run(const Stmt& s) {
        switch (s.kind) {
        case Stmt::BlockS: {
            int id = ids.at(&s.block);
            auto& b = s.block;
            if (b.kind == Block::Call) {
                for (size_t k = 0; k < b.results.size(); ++k) {
                    std::string key = block_name(id) + (k ? "." + std::to_string(k) : "");
                    auto it = ghosts.find(key);
                    if (it == ghosts.end()) throw Error("MissingGhost", "no ghost value for " + key);
                    locals[b.results[k]] = it->second;
                }
                out.records.push_back({id, b.loc_arg.path, locals});
                return;
            }
            for (auto& a : b.assigns) {
                switch (a.kind) {
                case Assgn::SetVar: locals[a.name] = eval(a.rhs); break;
                case Assgn::SetField: out.writes[{a.loc.path, a.name}] = eval(a.rhs); break;
                case Assgn::SetRet: ret(a.slot, eval(a.rhs)); break;
                case Assgn::Return:
                    for (size_t i = 0; i < a.values.size(); ++i) ret(i, eval(a.values[i]));
                    break;
                case Assgn::SetLoc: break;
                }
            }
            out.records.push_back({id, "", locals});
            return;
        }
        case Stmt::If: {
            bool c = true;
            if (s.cond->kind == Cond::IsNil) c = ctx.is_nil(s.cond->loc.path);
            else if (s.cond->kind == Cond::Pos) c = eval(s.cond->e) > 0;
            run(s.kids[c ? 0 : 1]);
            return;
        }
        default:
            for (auto& k : s.kids) run(k);
        }
    }
};

}  // namespace

SpecTrace speculative_execute(const BlockTable& t, const std::string& f, const std::map<std::string, long long>& in,
                              const std::map<std::string, long long>& ghosts, const SpecContext& ctx) {
    const Function* fn = t.program().find(f);
    if (!fn) throw Error("UnknownFunction", "no function named " + f);
    Spec sp{t, ghosts, ctx, {}, {}, {}};
    for (auto& b : t.blocks()) sp.ids[b.block] = b.id;
    for (auto& p : fn->int_params) {
        auto it = in.find(p);
        sp.locals[p] = it == in.end() ? 0 : it->second;
    }
    sp.out.returns.assign(fn->return_arity, 0);
    sp.run(fn->body);
    return sp.out;
}

}  // namespace retreet
