#include "retreet/bisim.hpp"

#include "retreet/lang.hpp"
#include "retreet/semantics.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

namespace retreet {

namespace {

struct Renamer {
    std::map<std::string, std::string> names;
    std::string var(const std::string& v) {
        auto it = names.find(v);
        if (it != names.end()) return it->second;
        return names[v] = "v" + std::to_string(names.size());
    }
};

std::string loc_text(const LExpr& l) {
    std::string s = "n";
    for (char c : l.path) s += std::string(".") + c;
    return s;
}

std::string expr_text(const AExprP& e, Renamer& r) {
    switch (e->kind) {
    case AExpr::Const: return std::to_string(e->value);
    case AExpr::Var: return r.var(e->name);
    case AExpr::Field: return loc_text(e->loc) + "." + e->name;
    case AExpr::Loc: return loc_text(e->loc);
    case AExpr::Add: return "(" + expr_text(e->a, r) + " + " + expr_text(e->b, r) + ")";
    case AExpr::Sub: return "(" + expr_text(e->a, r) + " - " + expr_text(e->b, r) + ")";
    case AExpr::Neg: return "-" + expr_text(e->a, r);
    }
    return "?";
}

NodePath dir_of(const BlockTable& t, int b) {
    if (b < 0) return "";
    auto& bi = t.block(b);
    return bi.is_call ? bi.block->loc_arg.path : NodePath{};
}

// Blocks entered by call s (-1: main).
std::vector<int> entered(const BlockTable& t, int s) {
    if (s < 0) return t.blocks_of(t.program().entry);
    return t.callees(s);
}

std::vector<int> callers_of(const BlockTable& t, int q) {
    std::vector<int> out;
    for (int s : t.all_calls()) {
        auto cs = t.callees(s);
        if (std::find(cs.begin(), cs.end(), q) != cs.end()) out.push_back(s);
    }
    return out;
}

void add(std::vector<std::pair<int, int>>& r, int a, int b, bool& grew) {
    std::pair<int, int> x{a, b};
    if (std::find(r.begin(), r.end(), x) == r.end()) {
        r.push_back(x);
        grew = true;
    }
}

bool related(const BisimRelation& r, int a, int b) {
    if (a < 0 && b < 0) return true;
    return std::find(r.calls.begin(), r.calls.end(), std::make_pair(a, b)) != r.calls.end();
}

// Renames the symbols of one side's PathCond so both sides share a vocabulary:
// parameters by position, ghosts of related calls by P's block, havocked
// values read as the value at the test.
FormulaP rename(const BlockTable& t, int q, const FormulaP& f, const BisimRelation& r, bool primed) {
    std::set<std::string> syms;
    free_symbols(f, syms);
    const Function& fn = t.function_of(q);
    const Function* callee = nullptr;
    if (t.block(q).is_call) callee = t.program().find(t.block(q).block->callee);
    static const std::regex app(R"(^([MN])\((.*)\)$)");
    static const std::regex ghost(R"(^s(\d+)(\.\d+)?$)");
    std::map<std::string, LinTerm> m;
    for (auto& s : syms) {
        std::smatch mt;
        std::string to = s;
        if (std::regex_match(s, mt, app)) {
            std::string val = mt[1], inner = mt[2];
            std::smatch g;
            if (std::regex_match(inner, g, ghost)) {
                int b = std::stoi(g[1]);
                std::string slot = g[2];
                if (primed) {
                    std::vector<int> back;
                    for (auto& [a, c] : r.calls)
                        if (c == b) back.push_back(a);
                    to = back.size() == 1 ? "G(s" + std::to_string(back[0]) + slot + ")" : "G'(" + inner + ")";
                } else {
                    to = "G(" + inner + ")";
                }
            } else {
                const Function* owner = val == "N" ? callee : &fn;
                if (owner)
                    for (size_t i = 0; i < owner->int_params.size(); ++i)
                        if (owner->int_params[i] == inner) to = val + "#" + std::to_string(i);
            }
        } else if (auto tl = s.find('~'); tl != std::string::npos) {
            to = s.substr(0, tl);
        }
        if (to != s) m[s] = LinTerm::symbol(to);
    }
    return substitute(f, m);
}

std::string pc_text(const PathCondition& pc) { return print_path_condition(pc); }

}  // namespace

std::string canonical_body(const BlockTable& t, int q) {
    auto& b = *t.block(q).block;
    if (b.kind == Block::Call) throw Error("NotStraight", block_name(q) + " is a call block");
    Renamer r;
    std::ostringstream o;
    for (auto& a : b.assigns) {
        switch (a.kind) {
        case Assgn::SetVar: {
            auto rhs = expr_text(a.rhs, r);
            o << r.var(a.name) << " := " << rhs;
            break;
        }
        case Assgn::SetField: o << loc_text(a.loc) << "." << a.name << " := " << expr_text(a.rhs, r); break;
        case Assgn::SetRet: o << "ret := " << expr_text(a.rhs, r); break;
        case Assgn::Return:
            if (a.values.size() == 1) o << "ret := " << expr_text(a.values[0], r);
            else {
                o << "ret := (";
                for (size_t i = 0; i < a.values.size(); ++i) o << (i ? ", " : "") << expr_text(a.values[i], r);
                o << ")";
            }
            break;
        case Assgn::SetLoc: o << "loc := " << expr_text(a.rhs, r); break;
        }
        o << "; ";
    }
    return o.str();
}

std::vector<std::map<int, int>> noncall_matchings(const BlockTable& p, const BlockTable& p2, size_t cap) {
    std::map<std::string, std::vector<int>> a, b;
    for (int q : p.all_non_calls()) a[canonical_body(p, q)].push_back(q);
    for (int q : p2.all_non_calls()) b[canonical_body(p2, q)].push_back(q);
    std::vector<std::string> bad;
    std::set<std::string> keys;
    for (auto& [k, v] : a) keys.insert(k);
    for (auto& [k, v] : b) keys.insert(k);
    for (auto& k : keys) {
        size_t na = a.count(k) ? a[k].size() : 0, nb = b.count(k) ? b[k].size() : 0;
        if (na != nb) bad.push_back("'" + k + "' x" + std::to_string(na) + " vs x" + std::to_string(nb));
    }
    if (!bad.empty()) {
        std::string msg = "non-call blocks differ:";
        for (auto& x : bad) msg += " " + x;
        throw Error("NonCallMismatch", msg);
    }
    // odometer over one permutation per class; sorted order first
    std::vector<std::pair<std::vector<int>, std::vector<int>>> classes;
    for (auto& [k, v] : a) classes.push_back({v, b[k]});
    std::vector<std::map<int, int>> out;
    while (out.size() < cap) {
        std::map<int, int> m;
        for (auto& [x, y] : classes)
            for (size_t i = 0; i < x.size(); ++i) m[x[i]] = y[i];
        out.push_back(std::move(m));
        size_t i = 0;
        for (; i < classes.size(); ++i)
            if (std::next_permutation(classes[i].second.begin(), classes[i].second.end())) break;
        if (i == classes.size()) break;
    }
    return out;
}

BisimRelation close_relation(const BlockTable& p, const BlockTable& p2, const std::map<int, int>& noncalls) {
    BisimRelation r;
    r.noncalls = noncalls;
    bool grew = false;
    for (auto& [q, q2] : noncalls)
        for (int s : callers_of(p, q))
            for (int s2 : callers_of(p2, q2))
                if (dir_of(p, s) == dir_of(p2, s2)) add(r.calls, s, s2, grew);
    do {
        grew = false;
        auto cur = r.calls;
        for (auto& [t, t2] : cur)
            for (int s : callers_of(p, t))
                for (int s2 : callers_of(p2, t2))
                    if (dir_of(p, s) == dir_of(p2, s2)) add(r.calls, s, s2, grew);
    } while (grew);
    std::sort(r.calls.begin(), r.calls.end());
    r.provenance = "closure";
    return r;
}

bool is_closed(const BlockTable& p, const BlockTable& p2, const BisimRelation& r) {
    auto has = [&](int a, int b) { return related(r, a, b); };
    for (auto& [q, q2] : r.noncalls)
        for (int s : callers_of(p, q))
            for (int s2 : callers_of(p2, q2))
                if (dir_of(p, s) == dir_of(p2, s2) && !has(s, s2)) return false;
    for (auto& [t, t2] : r.calls)
        for (int s : callers_of(p, t))
            for (int s2 : callers_of(p2, t2))
                if (dir_of(p, s) == dir_of(p2, s2) && !has(s, s2)) return false;
    return true;
}

BisimCheck check_bisimulation(const BlockTable& p, const BlockTable& p2, const BisimRelation& r,
                              const LiaOptions& opt) {
    BisimCheck out;
    if (!is_closed(p, p2, r)) out.reasons.push_back("relation is not closed under the anchor and caller clauses");
    // every non-call block needs a related pair of callers, or both in main
    for (auto& [q, q2] : r.noncalls) {
        bool main = p.block(q).func == p.program().entry && p2.block(q2).func == p2.program().entry;
        bool reached = main;
        for (int s : callers_of(p, q))
            for (int s2 : callers_of(p2, q2)) reached = reached || related(r, s, s2);
        if (!reached) out.reasons.push_back(block_name(q) + " and " + block_name(q2) + " have no related callers");
    }
    std::vector<std::pair<int, int>> pairs{{-1, -1}};
    pairs.insert(pairs.end(), r.calls.begin(), r.calls.end());
    for (auto [s, s2] : pairs)
        for (int t : entered(p, s))
            for (int t2 : entered(p2, s2)) {
                bool rel;
                if (p.block(t).is_call != p2.block(t2).is_call) continue;
                if (p.block(t).is_call) rel = related(r, t, t2);
                else {
                    auto it = r.noncalls.find(t);
                    rel = it != r.noncalls.end() && it->second == t2;
                }
                if (!rel) continue;
                auto a = path_condition_of(p, t), b = path_condition_of(p2, t2);
                std::string where = "PathCond(" + (s < 0 ? std::string("main") : block_name(s)) + ", " +
                                    block_name(t) + ") vs PathCond(" +
                                    (s2 < 0 ? std::string("main") : block_name(s2)) + ", " + block_name(t2) + ")";
                if (a.dir != b.dir) {
                    out.reasons.push_back(where + ": directions " + print_direction(a.dir) + " and " +
                                          print_direction(b.dir));
                    continue;
                }
                auto na = a.nil, nb = b.nil;
                auto less = [](const NilAtom& x, const NilAtom& y) {
                    return std::tie(x.path, x.nil) < std::tie(y.path, y.nil);
                };
                std::sort(na.begin(), na.end(), less);
                std::sort(nb.begin(), nb.end(), less);
                na.erase(std::unique(na.begin(), na.end()), na.end());
                nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
                if (na != nb) {
                    out.reasons.push_back(where + ": nil tests differ (" + pc_text(a) + " / " + pc_text(b) + ")");
                    continue;
                }
                auto fa = rename(p, t, a.arith, r, false), fb = rename(p2, t2, b.arith, r, true);
                auto eq = lia_equivalent(fa, fb, opt);
                if (eq.kind == EquivVerdict::NotEquivalent)
                    out.reasons.push_back(where + ": integer conditions differ (" + print_formula(fa) + " / " +
                                          print_formula(fb) + ")");
                else if (eq.kind == EquivVerdict::Unknown)
                    out.reasons.push_back(where + ": equivalence unknown (" + eq.reason + ")");
            }
    out.accepted = out.reasons.empty();
    return out;
}

std::vector<BisimRelation> enumerate_bisimulations(const BlockTable& p, const BlockTable& p2, size_t cap) {
    std::vector<BisimRelation> out;
    for (auto& m : noncall_matchings(p, p2, cap)) {
        auto r = close_relation(p, p2, m);
        r.provenance = out.empty() ? "order-preserving" : "permuted";
        out.push_back(std::move(r));
    }
    return out;
}

BisimSearch find_bisimulation(const BlockTable& p, const BlockTable& p2, size_t cap, const LiaOptions& opt) {
    BisimSearch s;
    auto cands = enumerate_bisimulations(p, p2, cap + 1);
    if (cands.size() > cap) {
        cands.resize(cap);
        s.exhausted = false;
    }
    for (auto& r : cands) {
        ++s.tried;
        auto c = check_bisimulation(p, p2, r, opt);
        if (c.accepted) {
            s.accepted = r;
            return s;
        }
        s.rejected.push_back({r, c.reasons});
    }
    return s;
}

std::string print_relation(const BisimRelation& r) {
    std::ostringstream o;
    o << "calls:";
    for (auto& [a, b] : r.calls) o << " " << block_name(a) << "~" << block_name(b);
    o << "\nnoncalls:";
    for (auto& [a, b] : r.noncalls) o << " " << block_name(a) << "=" << block_name(b);
    o << "\n";
    return o.str();
}

}  // namespace retreet
