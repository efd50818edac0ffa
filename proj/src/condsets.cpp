#include "retreet/logic.hpp"
#include "retreet/semantics.hpp"

#include <algorithm>

namespace retreet {

namespace {

bool extends(const NodePath& q, const NodePath& p) { return q.size() >= p.size() && q.compare(0, p.size(), p) == 0; }

// Nil tests with the same path are one predicate; a nil node has nil descendants.
CondGroup nil_group(const BlockTable& t) {
    CondGroup g;
    g.name = "nil";
    std::vector<NodePath> paths;
    for (auto& c : t.conds()) {
        if (c.cond->kind != Cond::IsNil) continue;
        g.conds.push_back(c.id);
        if (std::find(paths.begin(), paths.end(), c.cond->loc.path) == paths.end()) paths.push_back(c.cond->loc.path);
    }
    std::sort(paths.begin(), paths.end());
    size_t n = paths.size();
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        bool ok = true;
        for (size_t i = 0; i < n && ok; ++i)
            for (size_t j = 0; j < n && ok; ++j)
                if ((mask >> i & 1) && !(mask >> j & 1) && extends(paths[j], paths[i])) ok = false;
        if (!ok) continue;
        std::vector<int> m;
        for (int c : g.conds) {
            size_t i = std::find(paths.begin(), paths.end(), t.cond(c).cond->loc.path) - paths.begin();
            if (mask >> i & 1) m.push_back(c);
        }
        g.members.push_back(m);
    }
    std::sort(g.members.begin(), g.members.end());
    return g;
}

void dfs(const std::vector<int>& conds, const std::vector<FormulaP>& pos, size_t i, std::vector<FormulaP>& acc,
         std::vector<int>& chosen, std::vector<std::vector<int>>& out, const LiaOptions& opt) {
    if (i == conds.size()) {
        out.push_back(chosen);
        return;
    }
    for (bool take : {false, true}) {
        acc.push_back(take ? pos[i] : f_not(pos[i]));
        auto v = lia_satisfiable(f_and(acc), opt);
        // Unknown keeps the branch: the family may only over-approximate.
        if (v.kind != SatVerdict::Unsat) {
            if (take) chosen.push_back(conds[i]);
            dfs(conds, pos, i + 1, acc, chosen, out, opt);
            if (take) chosen.pop_back();
        }
        acc.pop_back();
    }
}

}  // namespace

CondSetFamily consistent_condition_sets(const BlockTable& t, const LiaOptions& opt) {
    CondSetFamily fam;
    auto ng = nil_group(t);
    if (!ng.conds.empty()) fam.groups.push_back(ng);
    for (auto& f : t.program().functions) {
        CondGroup g;
        g.name = f.name;
        std::vector<FormulaP> pos;
        for (int c : t.conds_of(f.name)) {
            if (t.cond(c).cond->kind == Cond::IsNil) continue;
            g.conds.push_back(c);
            pos.push_back(wp_condition(t, c, true));
        }
        if (g.conds.empty()) continue;
        std::vector<FormulaP> acc;
        std::vector<int> chosen;
        dfs(g.conds, pos, 0, acc, chosen, g.members, opt);
        std::sort(g.members.begin(), g.members.end());
        fam.groups.push_back(std::move(g));
    }
    return fam;
}

std::vector<std::vector<int>> CondSetFamily::expand(size_t limit) const {
    std::vector<std::vector<int>> out{{}};
    for (auto& g : groups) {
        std::vector<std::vector<int>> next;
        for (auto& base : out)
            for (auto& m : g.members) {
                if (next.size() >= limit) throw Error("BudgetExceeded", "condition set family too large");
                auto x = base;
                x.insert(x.end(), m.begin(), m.end());
                std::sort(x.begin(), x.end());
                next.push_back(std::move(x));
            }
        out = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<int>> consistent_condition_sets_brute(const BlockTable& t, const LiaOptions& opt) {
    size_t n = t.conds().size();
    if (n > 20) throw Error("BudgetExceeded", "too many conditions for brute force");
    std::vector<std::vector<int>> out;
    for (size_t mask = 0; mask < (size_t(1) << n); ++mask) {
        bool ok = true;
        // nil part: a nil-true path forces every extension to be nil-true
        for (size_t i = 0; i < n && ok; ++i)
            for (size_t j = 0; j < n && ok; ++j) {
                auto& a = *t.cond(static_cast<int>(i)).cond;
                auto& b = *t.cond(static_cast<int>(j)).cond;
                if (a.kind != Cond::IsNil || b.kind != Cond::IsNil) continue;
                if ((mask >> i & 1) && !(mask >> j & 1) && extends(b.loc.path, a.loc.path)) ok = false;
            }
        for (auto& f : t.program().functions) {
            if (!ok) break;
            std::vector<FormulaP> parts;
            for (int c : t.conds_of(f.name)) {
                if (t.cond(c).cond->kind == Cond::IsNil) continue;
                parts.push_back(wp_condition(t, c, mask >> c & 1));
            }
            if (lia_satisfiable(f_and(parts), opt).kind == SatVerdict::Unsat) ok = false;
        }
        if (!ok) continue;
        std::vector<int> s;
        for (size_t i = 0; i < n; ++i)
            if (mask >> i & 1) s.push_back(static_cast<int>(i));
        out.push_back(s);
    }
    return out;
}

}  // namespace retreet
