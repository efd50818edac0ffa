#include "retreet/mso.hpp"

#include <algorithm>
#include <sstream>

namespace retreet {

static std::shared_ptr<Mso> mk(Mso::Kind k) {
    auto f = std::make_shared<Mso>();
    f->kind = k;
    return f;
}

MsoP m_true() {
    static MsoP t = mk(Mso::True);
    return t;
}

MsoP m_false() {
    static MsoP f = mk(Mso::False);
    return f;
}

MsoP m_in(const PosTerm& t, const std::string& set) {
    auto f = std::make_shared<Mso>();
    f->kind = Mso::In;
    f->a = t;
    f->set = set;
    return f;
}

MsoP m_eq(const PosTerm& a, const PosTerm& b) {
    if (a == b) return m_true();
    // x.p = x.q with p != q never holds
    if (a.var == b.var) return m_false();
    auto f = std::make_shared<Mso>();
    f->kind = Mso::Eq;
    f->a = a;
    f->b = b;
    return f;
}

MsoP m_isnil(const PosTerm& t) {
    auto f = std::make_shared<Mso>();
    f->kind = Mso::IsNil;
    f->a = t;
    return f;
}

MsoP m_reach(const PosTerm& a, const PosTerm& b) {
    auto f = std::make_shared<Mso>();
    f->kind = Mso::Reach;
    f->a = a;
    f->b = b;
    return f;
}

MsoP m_not(const MsoP& a) {
    if (a->kind == Mso::True) return m_false();
    if (a->kind == Mso::False) return m_true();
    if (a->kind == Mso::Not) return a->kids[0];
    auto f = mk(Mso::Not);
    f->kids.push_back(a);
    return f;
}

static MsoP junction(Mso::Kind k, std::vector<MsoP> fs) {
    Mso::Kind unit = k == Mso::And ? Mso::True : Mso::False;
    Mso::Kind zero = k == Mso::And ? Mso::False : Mso::True;
    std::vector<MsoP> out;
    for (auto& f : fs) {
        if (f->kind == unit) continue;
        if (f->kind == zero) return f;
        if (f->kind == k) out.insert(out.end(), f->kids.begin(), f->kids.end());
        else out.push_back(f);
    }
    if (out.empty()) return unit == Mso::True ? m_true() : m_false();
    if (out.size() == 1) return out[0];
    auto f = std::make_shared<Mso>();
    f->kind = k;
    f->kids = std::move(out);
    return f;
}

MsoP m_and(std::vector<MsoP> fs) { return junction(Mso::And, std::move(fs)); }
MsoP m_or(std::vector<MsoP> fs) { return junction(Mso::Or, std::move(fs)); }

MsoP m_implies(const MsoP& a, const MsoP& b) {
    if (a->kind == Mso::False || b->kind == Mso::True) return m_true();
    if (a->kind == Mso::True) return b;
    if (b->kind == Mso::False) return m_not(a);
    auto f = mk(Mso::Implies);
    f->kids = {a, b};
    return f;
}

MsoP m_iff(const MsoP& a, const MsoP& b) {
    if (a->kind == Mso::True) return b;
    if (b->kind == Mso::True) return a;
    auto f = mk(Mso::Iff);
    f->kids = {a, b};
    return f;
}

static MsoP quant(Mso::Kind k, const std::vector<std::string>& vs, const MsoP& body) {
    if (body->kind == Mso::True || body->kind == Mso::False) return body;
    auto f = mk(k);
    f->vars = vs;
    f->kids = {body};
    return f;
}

MsoP m_ex1(const std::vector<std::string>& vs, const MsoP& f) { return quant(Mso::Ex1, vs, f); }
MsoP m_all1(const std::vector<std::string>& vs, const MsoP& f) { return quant(Mso::All1, vs, f); }
MsoP m_ex2(const std::vector<std::string>& vs, const MsoP& f) { return quant(Mso::Ex2, vs, f); }
MsoP m_all2(const std::vector<std::string>& vs, const MsoP& f) { return quant(Mso::All2, vs, f); }

size_t mso_size(const MsoP& f) {
    size_t n = 1;
    for (auto& k : f->kids) n += mso_size(k);
    return n;
}

std::string LabelFamily::block(int s) const { return prefix + "L_" + (s < 0 ? std::string("main") : "s" + std::to_string(s)); }
std::string LabelFamily::cond(int c) const { return prefix + "C_c" + std::to_string(c); }

static PosTerm ext(const PosTerm& t, const NodePath& p) { return {t.var, t.path + p}; }
static const PosTerm kRoot{"root", ""};

Encoder::Encoder(const BlockTable& t, const CondSetFamily& cs, EncodeOptions opt) : t_(t), cs_(cs), opt_(opt) {
    for (auto& g : cs_.groups)
        if (g.name != "nil") int_conds_.insert(int_conds_.end(), g.conds.begin(), g.conds.end());
}

std::string Encoder::fresh(const std::string& base) { return base + std::to_string(++fresh_); }

std::vector<int> Encoder::callers(int t) const {
    std::vector<int> out;
    auto& f = t_.block(t).func;
    if (f == t_.program().entry) out.push_back(-1);
    for (int s : t_.all_calls())
        if (t_.block(s).block->callee == f) out.push_back(s);
    return out;
}

std::vector<int> Encoder::entered(int s) const {
    if (s < 0) return t_.blocks_of(t_.program().entry);
    return t_.callees(s);
}

static NodePath dir_of(const BlockTable& t, int b) {
    auto& bi = t.block(b);
    return bi.is_call ? bi.block->loc_arg.path : NodePath{};
}

MsoP Encoder::path_cond(const LabelFamily& f, int s, int t, const PosTerm& u, const PosTerm& v) const {
    std::vector<MsoP> parts;
    if (s < 0) parts.push_back(m_eq(u, kRoot));
    parts.push_back(m_eq(v, ext(u, dir_of(t_, t))));
    for (auto& e : t_.block(t).path) {
        if (e.kind != PathEntry::Assume) continue;
        auto& c = t_.cond(e.cond).cond;
        MsoP atom;
        if (c->kind == Cond::IsNil) atom = m_isnil(ext(u, c->loc.path));
        else if (c->kind == Cond::Pos) atom = m_in(u, f.cond(e.cond));
        else continue;
        parts.push_back(e.polarity ? atom : m_not(atom));
    }
    return m_and(std::move(parts));
}

MsoP Encoder::next(const LabelFamily& f, const PosTerm& u, int s, int t) {
    // v is determined by u, so the existential is folded into the term
    PosTerm v = ext(u, dir_of(t_, t));
    auto pc = path_cond(f, s, t, u, v);
    return m_and({m_in(v, f.block(t)), pc});
}

MsoP Encoder::prev(const LabelFamily& f, const PosTerm& u, int t) {
    std::string v = fresh("v");
    PosTerm vt{v, ""};
    std::vector<MsoP> alts;
    auto cs = callers(t);
    for (int s : cs) {
        std::vector<MsoP> parts{m_in(vt, f.block(s)), path_cond(f, s, t, vt, u)};
        for (int s2 : cs)
            if (s2 != s) parts.push_back(m_not(m_and({m_in(vt, f.block(s2)), path_cond(f, s2, t, vt, u)})));
        alts.push_back(m_and(std::move(parts)));
    }
    return m_ex1({v}, m_or(std::move(alts)));
}

MsoP Encoder::configuration(const LabelFamily& f, int q, const PosTerm& v) {
    std::vector<MsoP> parts;
    parts.push_back(m_in(kRoot, f.block(-1)));
    {
        std::string u = fresh("u");
        parts.push_back(m_all1({u}, m_implies(m_in({u, ""}, f.block(-1)), m_eq({u, ""}, kRoot))));
    }
    std::vector<MsoP> current{m_in(v, f.block(q))};
    for (int q2 : t_.all_non_calls())
        if (q2 != q) current.push_back(m_not(m_in(v, f.block(q2))));
    parts.push_back(m_and(std::move(current)));
    {
        std::string u = fresh("u");
        PosTerm ut{u, ""};
        std::vector<MsoP> none;
        for (int s : t_.all_non_calls()) none.push_back(m_not(m_in(ut, f.block(s))));
        auto ne = m_not(m_eq(ut, v));
        parts.push_back(m_all1({u}, m_implies(ne, m_and(std::move(none)))));
    }
    {
        std::string u = fresh("u");
        PosTerm ut{u, ""};
        std::vector<MsoP> each;
        std::vector<int> calls{-1};
        for (int s : t_.all_calls()) calls.push_back(s);
        for (int s : calls) {
            auto ts = entered(s);
            std::vector<MsoP> alts;
            for (int t : ts) {
                std::vector<MsoP> a{next(f, ut, s, t)};
                for (int t2 : ts)
                    if (t2 != t) a.push_back(m_not(next(f, ut, s, t2)));
                alts.push_back(m_and(std::move(a)));
            }
            each.push_back(m_implies(m_in(ut, f.block(s)), m_or(std::move(alts))));
        }
        parts.push_back(m_all1({u}, m_and(std::move(each))));
    }
    {
        std::string u = fresh("u");
        PosTerm ut{u, ""};
        std::vector<MsoP> each;
        for (auto& b : t_.blocks()) each.push_back(m_implies(m_in(ut, f.block(b.id)), prev(f, ut, b.id)));
        parts.push_back(m_all1({u}, m_and(std::move(each))));
    }
    {
        std::string u = fresh("u");
        PosTerm ut{u, ""};
        std::vector<MsoP> groups;
        for (auto& g : cs_.groups) {
            if (g.name == "nil") continue;
            std::vector<MsoP> members;
            for (auto& m : g.members) {
                std::vector<MsoP> lits;
                for (int c : g.conds) {
                    bool in = std::find(m.begin(), m.end(), c) != m.end();
                    lits.push_back(in ? m_in(ut, f.cond(c)) : m_not(m_in(ut, f.cond(c))));
                }
                members.push_back(m_and(std::move(lits)));
            }
            groups.push_back(m_or(std::move(members)));
        }
        std::vector<MsoP> labeled{m_in(ut, f.block(-1))};
        for (auto& b : t_.blocks()) labeled.push_back(m_in(ut, f.block(b.id)));
        parts.push_back(m_all1({u}, m_implies(m_or(std::move(labeled)), m_and(std::move(groups)))));
    }
    return m_and(std::move(parts));
}

MsoP Encoder::consistent(const LabelFamily& a, const LabelFamily& b, int s, int t1, int t2) {
    std::string z = fresh("z"), v = fresh("v");
    PosTerm zt{z, ""}, vt{v, ""};
    std::vector<MsoP> agree;
    agree.push_back(m_iff(m_in(vt, a.block(-1)), m_in(vt, b.block(-1))));
    for (auto& bl : t_.blocks()) agree.push_back(m_iff(m_in(vt, a.block(bl.id)), m_in(vt, b.block(bl.id))));
    for (int c : int_conds_) agree.push_back(m_iff(m_in(vt, a.cond(c)), m_in(vt, b.cond(c))));
    std::vector<MsoP> at_z;
    for (int c : int_conds_) at_z.push_back(m_iff(m_in(zt, a.cond(c)), m_in(zt, b.cond(c))));
    std::vector<MsoP> parts;
    parts.push_back(m_all1({v}, m_implies(m_reach(vt, zt), m_and(std::move(agree)))));
    parts.push_back(m_and(std::move(at_z)));
    parts.push_back(m_in(zt, a.block(s)));
    parts.push_back(m_in(zt, b.block(s)));
    parts.push_back(next(a, zt, s, t1));
    parts.push_back(next(b, zt, s, t2));
    return m_ex1({z}, m_and(std::move(parts)));
}

static MsoP related(Encoder& e, const LabelFamily& a, const LabelFamily& b, Relation want) {
    std::vector<MsoP> alts;
    std::vector<int> calls{-1};
    for (int s : e.table().all_calls()) calls.push_back(s);
    for (int s : calls) {
        auto ts = e.entered(s);
        for (int t1 : ts)
            for (int t2 : ts)
                if (t1 != t2 && e.table().relation(t1, t2) == want) alts.push_back(e.consistent(a, b, s, t1, t2));
    }
    return m_or(std::move(alts));
}

MsoP Encoder::ordered(const LabelFamily& a, const LabelFamily& b) { return related(*this, a, b, Relation::Precedes); }
MsoP Encoder::parallel(const LabelFamily& a, const LabelFamily& b) { return related(*this, a, b, Relation::Parallel); }

MsoP Encoder::overlap(int q1, const PosTerm& x1, int q2, const PosTerm& x2) const {
    auto r1 = t_.read_write_sets(q1), r2 = t_.read_write_sets(q2);
    std::set<Access> a1 = r1.reads, a2 = r2.reads;
    a1.insert(r1.writes.begin(), r1.writes.end());
    a2.insert(r2.writes.begin(), r2.writes.end());
    std::set<std::pair<NodePath, NodePath>> disps;
    for (auto& x : a1)
        for (auto& y : a2) {
            if (!r1.writes.count(x) && !r2.writes.count(y)) continue;
            if (!opt_.node_level && x.name != y.name) continue;
            disps.insert({x.disp, y.disp});
        }
    std::vector<MsoP> alts;
    for (auto& [d1, d2] : disps) alts.push_back(m_eq(ext(x1, d1), ext(x2, d2)));
    return m_or(std::move(alts));
}

bool Encoder::conflicting(int q1, int q2) const {
    return overlap(q1, {"x1", ""}, q2, {"x2", ""})->kind != Mso::False;
}

MsoP Encoder::dependence(int q1, int q2, const PosTerm& x1, const PosTerm& x2, const LabelFamily& a,
                         const LabelFamily& b) {
    return m_and({configuration(a, q1, x1), configuration(b, q2, x2), overlap(q1, x1, q2, x2)});
}

static bool has_parallel(const BlockTable& t) {
    for (auto& a : t.blocks())
        for (auto& b : t.blocks())
            if (a.id < b.id && t.relation(a.id, b.id) == Relation::Parallel) return true;
    return false;
}

Query build_datarace(const BlockTable& t, const CondSetFamily& cs, EncodeOptions opt) {
    Query q;
    q.kind = "race";
    q.programs = {&t};
    q.cond_families = {cs};
    q.families = {{{"A1"}, 0, "x1"}, {{"A2"}, 0, "x2"}};
    q.first_order = {"x1", "x2"};
    q.options = opt;
    if (!has_parallel(t)) return q;
    Encoder e(t, cs, opt);
    PosTerm x1{"x1", ""}, x2{"x2", ""};
    auto& A1 = q.families[0].labels;
    auto& A2 = q.families[1].labels;
    auto nc = t.all_non_calls();
    for (size_t i = 0; i < nc.size(); ++i)
        for (size_t j = i; j < nc.size(); ++j) {
            int q1 = nc[i], q2 = nc[j];
            auto ov = e.overlap(q1, x1, q2, x2);
            if (ov->kind == Mso::False) continue;
            Disjunct d;
            d.name = block_name(q1) + "|" + block_name(q2);
            d.current = {q1, q2};
            d.conjuncts = {e.configuration(A1, q1, x1), e.configuration(A2, q2, x2), ov, e.parallel(A1, A2)};
            d.needs = {{0}, {1}, {}, {0, 1}};
            q.disjuncts.push_back(std::move(d));
        }
    return q;
}

Query build_conflict(const BlockTable& p, const CondSetFamily& cp, const BlockTable& p2, const CondSetFamily& cp2,
                     const BisimRelation* r, EncodeOptions opt) {
    if (!r) throw Error("BisimMissing", "a conflict query needs a verified bisimulation relation");
    Query q;
    q.kind = "conflict";
    q.programs = {&p, &p2};
    q.cond_families = {cp, cp2};
    q.families = {{{"A1"}, 0, "x1"}, {{"A2"}, 0, "x2"}, {{"B1"}, 1, "x1"}, {{"B2"}, 1, "x2"}};
    q.first_order = {"x1", "x2"};
    q.options = opt;
    Encoder e(p, cp, opt), e2(p2, cp2, opt);
    PosTerm x1{"x1", ""}, x2{"x2", ""};
    auto& A1 = q.families[0].labels;
    auto& A2 = q.families[1].labels;
    auto& B1 = q.families[2].labels;
    auto& B2 = q.families[3].labels;
    for (int q1 : p.all_non_calls())
        for (int q2 : p.all_non_calls()) {
            auto i1 = r->noncalls.find(q1), i2 = r->noncalls.find(q2);
            if (i1 == r->noncalls.end() || i2 == r->noncalls.end())
                throw Error("BisimMissing", "relation lacks a partner for a non-call block");
            int p1 = i1->second, p2b = i2->second;
            auto ov = e.overlap(q1, x1, q2, x2);
            auto ov2 = e2.overlap(p1, x1, p2b, x2);
            if (ov->kind == Mso::False || ov2->kind == Mso::False) continue;
            auto ord = e.ordered(A1, A2);
            auto ord2 = e2.ordered(B2, B1);
            if (ord->kind == Mso::False || ord2->kind == Mso::False) continue;
            Disjunct d;
            d.name = block_name(q1) + "|" + block_name(q2);
            d.current = {q1, q2, p1, p2b};
            d.conjuncts = {e.configuration(A1, q1, x1), e.configuration(A2, q2, x2), ov, ord,
                           e2.configuration(B1, p1, x1), e2.configuration(B2, p2b, x2), ov2, ord2};
            d.needs = {{0}, {1}, {}, {0, 1}, {2}, {3}, {}, {2, 3}};
            q.disjuncts.push_back(std::move(d));
        }
    return q;
}

MsoP Query::formula() const {
    std::vector<MsoP> alts;
    for (auto& d : disjuncts) alts.push_back(m_and(d.conjuncts));
    return m_or(std::move(alts));
}

std::vector<std::string> Query::set_vars() const {
    std::vector<std::string> out{alloc};
    for (auto& f : families) {
        auto& t = *programs[f.program];
        out.push_back(f.labels.block(-1));
        for (auto& b : t.blocks()) out.push_back(f.labels.block(b.id));
        for (auto& g : cond_families[f.program].groups) {
            if (g.name == "nil") continue;
            for (int c : g.conds) out.push_back(f.labels.cond(c));
        }
    }
    return out;
}

namespace {

std::string term(const PosTerm& t) {
    std::string s = t.var;
    for (char c : t.path) s += c == 'l' ? ".0" : ".1";
    return s;
}

struct Printer {
    std::string alloc;
    std::ostringstream out;

    void print(const MsoP& f) {
        switch (f->kind) {
        case Mso::True: out << "true"; return;
        case Mso::False: out << "false"; return;
        case Mso::In: out << term(f->a) << " in " << f->set; return;
        case Mso::Eq: out << term(f->a) << " = " << term(f->b); return;
        case Mso::IsNil: out << term(f->a) << " notin " << alloc; return;
        case Mso::Reach: out << "reach(" << term(f->a) << ", " << term(f->b) << ")"; return;
        case Mso::Not:
            out << "~(";
            print(f->kids[0]);
            out << ")";
            return;
        case Mso::And:
        case Mso::Or: {
            const char* op = f->kind == Mso::And ? " & " : " | ";
            for (size_t i = 0; i < f->kids.size(); ++i) {
                if (i) out << op;
                paren(f->kids[i]);
            }
            return;
        }
        case Mso::Implies:
        case Mso::Iff:
            paren(f->kids[0]);
            out << (f->kind == Mso::Implies ? " => " : " <=> ");
            paren(f->kids[1]);
            return;
        default: {
            const char* q = f->kind == Mso::Ex1 ? "ex1" : f->kind == Mso::All1 ? "all1" : f->kind == Mso::Ex2 ? "ex2" : "all2";
            out << q << " ";
            for (size_t i = 0; i < f->vars.size(); ++i) out << (i ? ", " : "") << f->vars[i];
            out << ": ";
            paren(f->kids[0]);
        }
        }
    }

    void paren(const MsoP& f) {
        bool atom = f->kind == Mso::True || f->kind == Mso::False || f->kind == Mso::In || f->kind == Mso::Reach;
        if (atom) {
            print(f);
            return;
        }
        out << "(";
        print(f);
        out << ")";
    }
};

}  // namespace

std::string print_mso(const MsoP& f) {
    Printer p{"T", {}};
    p.print(f);
    return p.out.str();
}

std::string emit_ws2s(const Query& q) {
    std::ostringstream o;
    o << "ws2s;\n";
    o << "# " << q.kind << " query, " << q.disjuncts.size() << " disjuncts\n";
    auto sets = q.set_vars();
    o << "var2 ";
    for (size_t i = 0; i < sets.size(); ++i) o << (i ? ", " : "") << sets[i];
    o << ";\n";
    o << "var1 ";
    for (size_t i = 0; i < q.first_order.size(); ++i) o << (i ? ", " : "") << q.first_order[i];
    o << ";\n";
    o << "pred reach(var1 x, var1 y) = ex1 c: (c = x.0 | c = x.1) & "
         "(all2 R: (c in R & (all1 w: w in R => (w.0 in R & w.1 in R))) => y in R);\n";
    o << "pred alloc(var2 " << q.alloc << ") = all1 w: (w.0 in " << q.alloc << " | w.1 in " << q.alloc << ") => w in "
      << q.alloc << ";\n";
    o << "\n~(alloc(" << q.alloc << ")";
    if (q.disjuncts.empty()) {
        o << " & false);\n";
        return o.str();
    }
    o << " & (\n";
    for (size_t i = 0; i < q.disjuncts.size(); ++i) {
        auto& d = q.disjuncts[i];
        o << (i ? "| " : "  ") << "# " << d.name << "\n  (";
        Printer p{q.alloc, {}};
        p.print(m_and(d.conjuncts));
        o << p.out.str() << ")\n";
    }
    o << "));\n";
    return o.str();
}

}  // namespace retreet
