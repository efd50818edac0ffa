#include "retreet/logic.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

namespace retreet {

namespace {

using i128 = __int128;
constexpr long long LIM = 1LL << 40;

struct Overflow {};

long long narrow(i128 v) {
    if (v <= -LIM || v >= LIM) throw Overflow{};
    return static_cast<long long>(v);
}

long long floordiv(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

long long ceildiv(long long a, long long b) { return -floordiv(-a, b); }

// sum a_i x_i + c, read as >= 0 or == 0 depending on the list it sits in.
struct Con {
    std::vector<long long> a;
    long long c = 0;
};

struct Problem {
    int nv = 0;
    std::vector<Con> eqs, geqs;
};

enum Res { SAT, UNSAT, UNK };
enum Norm { KEEP, TRIV, CONTRA };

Norm normalize(Con& x, bool eq) {
    long long g = 0;
    for (long long v : x.a) g = std::gcd(g, v < 0 ? -v : v);
    if (g == 0) return (eq ? x.c == 0 : x.c >= 0) ? TRIV : CONTRA;
    if (eq) {
        if (x.c % g != 0) return CONTRA;
        for (auto& v : x.a) v /= g;
        x.c /= g;
        return KEEP;
    }
    for (auto& v : x.a) v /= g;
    x.c = floordiv(x.c, g);
    return KEEP;
}

// Replaces x_k by d.a . x + d.c in x.
void subst(Con& x, int k, const Con& d) {
    long long ak = x.a[k];
    if (ak == 0) return;
    x.a[k] = 0;
    for (size_t i = 0; i < x.a.size(); ++i)
        if (d.a[i]) x.a[i] = narrow(static_cast<i128>(x.a[i]) + static_cast<i128>(ak) * d.a[i]);
    x.c = narrow(static_cast<i128>(x.c) + static_cast<i128>(ak) * d.c);
}

long long modhat(long long a, long long m) { return a - m * floordiv(2 * a + m, 2 * m); }

void add_var(Problem& p) {
    ++p.nv;
    for (auto& e : p.eqs) e.a.push_back(0);
    for (auto& e : p.geqs) e.a.push_back(0);
}

long long eval_rest(const Con& x, int skip, const std::vector<long long>& m) {
    i128 s = x.c;
    for (size_t i = 0; i < x.a.size(); ++i)
        if (static_cast<int>(i) != skip && x.a[i]) s += static_cast<i128>(x.a[i]) * m[i];
    return narrow(s);
}

// Picks a value for x_j inside the bounds of the constraints mentioning it.
bool choose(int j, const std::vector<Con>& cons, std::vector<long long>& m) {
    bool has_lo = false, has_hi = false;
    long long lo = 0, hi = 0;
    for (auto& x : cons) {
        long long a = x.a[j];
        if (a == 0) continue;
        long long r = eval_rest(x, j, m);
        if (a > 0) {
            long long b = ceildiv(-r, a);
            lo = has_lo ? std::max(lo, b) : b;
            has_lo = true;
        } else {
            long long b = floordiv(r, -a);
            hi = has_hi ? std::min(hi, b) : b;
            has_hi = true;
        }
    }
    if (has_lo && has_hi && lo > hi) return false;
    m[j] = has_lo ? lo : has_hi ? hi : 0;
    return true;
}

Res solve(Problem p, std::vector<long long>& m, int depth = 0) {
    if (depth > 400) return UNK;
    for (;;) {
        for (size_t i = 0; i < p.eqs.size();) {
            Norm n = normalize(p.eqs[i], true);
            if (n == CONTRA) return UNSAT;
            if (n == TRIV) p.eqs.erase(p.eqs.begin() + i);
            else ++i;
        }
        for (size_t i = 0; i < p.geqs.size();) {
            Norm n = normalize(p.geqs[i], false);
            if (n == CONTRA) return UNSAT;
            if (n == TRIV) p.geqs.erase(p.geqs.begin() + i);
            else ++i;
        }
        if (!p.eqs.empty()) {
            Con e = p.eqs.back();
            int k = -1;
            for (int i = 0; i < p.nv; ++i)
                if (e.a[i] && (k < 0 || std::llabs(e.a[i]) < std::llabs(e.a[k]))) k = i;
            Con d;
            if (std::llabs(e.a[k]) == 1) {
                long long s = e.a[k];
                d.a.assign(p.nv, 0);
                for (int i = 0; i < p.nv; ++i)
                    if (i != k) d.a[i] = -s * e.a[i];
                d.c = -s * e.c;
                p.eqs.pop_back();
            } else {
                long long mm = std::llabs(e.a[k]) + 1;
                long long s = e.a[k] > 0 ? 1 : -1;
                add_var(p);
                int sigma = p.nv - 1;
                e.a.push_back(0);
                d.a.assign(p.nv, 0);
                for (int i = 0; i < p.nv - 1; ++i)
                    if (i != k) d.a[i] = s * modhat(e.a[i], mm);
                d.a[sigma] = -s * mm;
                d.c = s * modhat(e.c, mm);
            }
            for (auto& x : p.eqs) subst(x, k, d);
            for (auto& x : p.geqs) subst(x, k, d);
            Res r = solve(p, m, depth + 1);
            if (r == SAT) {
                if (static_cast<int>(m.size()) < p.nv) m.resize(p.nv, 0);
                i128 v = d.c;
                for (int i = 0; i < p.nv; ++i)
                    if (d.a[i]) v += static_cast<i128>(d.a[i]) * m[i];
                m[k] = narrow(v);
            }
            return r;
        }
        // Tighten parallel constraints; opposite pairs may collapse into equalities.
        std::map<std::vector<long long>, long long> best;
        for (auto& x : p.geqs) {
            auto it = best.find(x.a);
            if (it == best.end() || x.c < it->second) best[x.a] = x.c;
        }
        p.geqs.clear();
        bool new_eq = false;
        for (auto& [a, c] : best) {
            std::vector<long long> neg(a.size());
            for (size_t i = 0; i < a.size(); ++i) neg[i] = -a[i];
            auto it = best.find(neg);
            if (it != best.end()) {
                if (c + it->second < 0) return UNSAT;
                if (c + it->second == 0) {
                    if (a < neg) {
                        p.eqs.push_back({a, c});
                        new_eq = true;
                    }
                    continue;
                }
            }
            p.geqs.push_back({a, c});
        }
        if (new_eq) continue;
        break;
    }
    if (static_cast<int>(m.size()) < p.nv) m.resize(p.nv, 0);
    if (p.geqs.empty()) return SAT;

    // Variable with one-sided bounds: drop its constraints.
    int pick = -1;
    bool exact_pick = false;
    long long pick_cost = 0;
    for (int j = 0; j < p.nv; ++j) {
        long long lo = 0, hi = 0;
        bool lo1 = true, hi1 = true;
        for (auto& x : p.geqs) {
            if (x.a[j] > 0) {
                ++lo;
                lo1 = lo1 && x.a[j] == 1;
            } else if (x.a[j] < 0) {
                ++hi;
                hi1 = hi1 && x.a[j] == -1;
            }
        }
        if (lo + hi == 0) continue;
        if (lo == 0 || hi == 0) {
            std::vector<Con> with, rest;
            for (auto& x : p.geqs) (x.a[j] ? with : rest).push_back(x);
            Problem q = p;
            q.geqs = rest;
            Res r = solve(q, m, depth + 1);
            if (r == SAT && !choose(j, with, m)) return UNK;
            return r;
        }
        bool exact = lo1 || hi1;
        long long cost = lo * hi - lo - hi;
        if (pick < 0 || (exact && !exact_pick) || (exact == exact_pick && cost < pick_cost)) {
            pick = j;
            exact_pick = exact;
            pick_cost = cost;
        }
    }
    int j = pick;
    std::vector<Con> lows, ups, rest;
    for (auto& x : p.geqs) {
        if (x.a[j] > 0) lows.push_back(x);
        else if (x.a[j] < 0) ups.push_back(x);
        else rest.push_back(x);
    }
    auto shadow = [&](bool dark) {
        Problem q;
        q.nv = p.nv;
        q.geqs = rest;
        for (auto& l : lows)
            for (auto& u : ups) {
                long long a = l.a[j], b = -u.a[j];
                Con x;
                x.a.assign(p.nv, 0);
                for (int i = 0; i < p.nv; ++i)
                    x.a[i] = narrow(static_cast<i128>(b) * l.a[i] + static_cast<i128>(a) * u.a[i]);
                x.a[j] = 0;
                i128 c = static_cast<i128>(b) * l.c + static_cast<i128>(a) * u.c;
                if (dark) c -= static_cast<i128>(a - 1) * (b - 1);
                x.c = narrow(c);
                q.geqs.push_back(x);
            }
        return q;
    };
    std::vector<Con> bounds = lows;
    bounds.insert(bounds.end(), ups.begin(), ups.end());
    if (exact_pick) {
        Res r = solve(shadow(false), m, depth + 1);
        if (r == SAT && !choose(j, bounds, m)) return UNK;
        return r;
    }
    std::vector<long long> mr = m;
    Res real = solve(shadow(false), mr, depth + 1);
    if (real == UNSAT) return UNSAT;
    Res dark = solve(shadow(true), m, depth + 1);
    if (dark == SAT) {
        if (!choose(j, bounds, m)) return UNK;
        return SAT;
    }
    bool unknown = real == UNK || dark == UNK;
    long long bmax = 0;
    for (auto& u : ups) bmax = std::max(bmax, -u.a[j]);
    for (auto& l : lows) {
        long long a = l.a[j];
        long long top = floordiv(a * bmax - a - bmax, bmax);
        for (long long i = 0; i <= top; ++i) {
            Problem q = p;
            Con e = l;
            e.c -= i;
            q.eqs.push_back(e);
            std::vector<long long> ms = m;
            Res r = solve(q, ms, depth + 1);
            if (r == SAT) {
                m = ms;
                return SAT;
            }
            if (r == UNK) unknown = true;
        }
    }
    return unknown ? UNK : UNSAT;
}

// Atom of a disjunct: t >= 0 or t == 0.
struct Lit {
    LinTerm t;
    bool eq;
};

struct Dnf {
    const LiaOptions& opt;
    std::vector<std::string> syms;
    std::map<std::string, int> index;
    size_t leaves = 0;
    bool unknown = false;
    std::string reason;
    Valuation model;

    Res conj(const std::vector<Lit>& lits) {
        Problem p;
        p.nv = static_cast<int>(syms.size());
        for (auto& l : lits) {
            Con c;
            c.a.assign(p.nv, 0);
            for (auto& [s, v] : l.t.coef) c.a[index.at(s)] = v;
            c.c = l.t.k;
            (l.eq ? p.eqs : p.geqs).push_back(std::move(c));
        }
        std::vector<long long> m(p.nv, 0);
        Res r;
        try {
            r = solve(p, m);
        } catch (const Overflow&) {
            r = UNK;
            reason = "coefficient overflow";
        }
        if (r == SAT) {
            model.clear();
            for (size_t i = 0; i < syms.size(); ++i) model[syms[i]] = m[i];
        }
        return r;
    }

    // goals are in negation normal form with polarity tracked separately.
    Res run(std::vector<std::pair<FormulaP, bool>> goals, std::vector<Lit> lits) {
        while (!goals.empty()) {
            auto [f, pos] = goals.back();
            goals.pop_back();
            switch (f->kind) {
            case Formula::True:
                if (!pos) return UNSAT;
                break;
            case Formula::False:
                if (pos) return UNSAT;
                break;
            case Formula::Ge:
                if (pos) lits.push_back({f->t, false});
                else lits.push_back({f->t * -1 - LinTerm::constant(1), false});
                break;
            case Formula::Eq:
                if (pos) {
                    lits.push_back({f->t, true});
                } else {
                    auto a = goals, b = goals;
                    a.push_back({f_gt(f->t), true});
                    b.push_back({f_gt(f->t * -1), true});
                    Res r = run(a, lits);
                    if (r == SAT) return r;
                    Res s = run(b, lits);
                    if (s == SAT) return s;
                    return (r == UNK || s == UNK) ? UNK : UNSAT;
                }
                break;
            case Formula::Not: goals.push_back({f->kids[0], !pos}); break;
            case Formula::And:
            case Formula::Or: {
                bool conj = (f->kind == Formula::And) == pos;
                if (conj) {
                    for (auto& k : f->kids) goals.push_back({k, pos});
                    break;
                }
                bool unk = false;
                for (auto& k : f->kids) {
                    auto g = goals;
                    g.push_back({k, pos});
                    Res r = run(g, lits);
                    if (r == SAT) return r;
                    if (r == UNK) unk = true;
                }
                return unk ? UNK : UNSAT;
            }
            }
        }
        if (++leaves > opt.max_disjuncts) {
            reason = "disjunct budget exhausted";
            return UNK;
        }
        return conj(lits);
    }
};

}  // namespace

SatVerdict lia_satisfiable(const FormulaP& f, const LiaOptions& opt) {
    if (!opt.smt_solver.empty()) return smt_satisfiable(f, opt);
    Dnf d{opt, {}, {}, 0, false, {}, {}};
    std::set<std::string> syms;
    free_symbols(f, syms);
    for (auto& s : syms) {
        d.index[s] = static_cast<int>(d.syms.size());
        d.syms.push_back(s);
    }
    SatVerdict v;
    Res r = d.run({{f, true}}, {});
    if (r == UNSAT) {
        v.kind = SatVerdict::Unsat;
    } else if (r == SAT) {
        v.kind = SatVerdict::Sat;
        v.model = d.model;
        if (!eval(f, v.model)) {
            v.kind = SatVerdict::Unknown;
            v.reason = "model failed re-evaluation";
        }
    } else {
        v.kind = SatVerdict::Unknown;
        v.reason = d.reason.empty() ? "omega test gave up" : d.reason;
    }
    return v;
}

EquivVerdict lia_equivalent(const FormulaP& f, const FormulaP& g, const LiaOptions& opt) {
    EquivVerdict out;
    for (auto q : {f_and(f, f_not(g)), f_and(f_not(f), g)}) {
        auto v = lia_satisfiable(q, opt);
        if (v.kind == SatVerdict::Sat) {
            out.kind = EquivVerdict::NotEquivalent;
            out.witness = v.model;
            return out;
        }
        if (v.kind == SatVerdict::Unknown) {
            out.kind = EquivVerdict::Unknown;
            out.reason = v.reason;
            return out;
        }
    }
    out.kind = EquivVerdict::Equivalent;
    return out;
}

static std::string smt_sym(const std::string& s) { return "|" + s + "|"; }

static std::string smt_term(const LinTerm& t) {
    std::vector<std::string> parts;
    for (auto& [s, c] : t.coef) {
        std::string cs = c < 0 ? "(- " + std::to_string(-c) + ")" : std::to_string(c);
        parts.push_back(c == 1 ? smt_sym(s) : "(* " + cs + " " + smt_sym(s) + ")");
    }
    parts.push_back(t.k < 0 ? "(- " + std::to_string(-t.k) + ")" : std::to_string(t.k));
    if (parts.size() == 1) return parts[0];
    std::string r = "(+";
    for (auto& p : parts) r += " " + p;
    return r + ")";
}

static std::string smt_formula(const FormulaP& f) {
    switch (f->kind) {
    case Formula::True: return "true";
    case Formula::False: return "false";
    case Formula::Ge: return "(>= " + smt_term(f->t) + " 0)";
    case Formula::Eq: return "(= " + smt_term(f->t) + " 0)";
    case Formula::Not: return "(not " + smt_formula(f->kids[0]) + ")";
    default: {
        std::string r = f->kind == Formula::And ? "(and" : "(or";
        for (auto& k : f->kids) r += " " + smt_formula(k);
        return r + ")";
    }
    }
}

std::string to_smtlib(const FormulaP& f) {
    std::ostringstream os;
    os << "(set-logic QF_LIA)\n(set-option :produce-models true)\n";
    std::set<std::string> syms;
    free_symbols(f, syms);
    for (auto& s : syms) os << "(declare-fun " << smt_sym(s) << " () Int)\n";
    os << "(assert " << smt_formula(f) << ")\n(check-sat)\n";
    if (!syms.empty()) {
        os << "(get-value (";
        for (auto& s : syms) os << " " << smt_sym(s);
        os << "))\n";
    }
    return os.str();
}

SatVerdict smt_satisfiable(const FormulaP& f, const LiaOptions& opt) {
    SatVerdict v;
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path();
    auto file = dir / ("retreet_" + std::to_string(reinterpret_cast<uintptr_t>(f.get())) + ".smt2");
    {
        std::ofstream o(file);
        o << to_smtlib(f);
    }
    std::string cmd = "timeout " + std::to_string(opt.timeout_s) + " " + opt.smt_solver + " " + file.string() + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        v.reason = "cannot start " + opt.smt_solver;
        return v;
    }
    std::string out;
    char buf[4096];
    while (size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    int rc = pclose(pipe);
    fs::remove(file);
    std::istringstream is(out);
    std::string first;
    is >> first;
    if (first == "unsat") {
        v.kind = SatVerdict::Unsat;
        return v;
    }
    if (first != "sat") {
        v.reason = "solver said '" + first + "' (exit " + std::to_string(rc) + ")";
        return v;
    }
    v.kind = SatVerdict::Sat;
    std::regex pair(R"(\(\|([^|]*)\|\s+(\(\s*-\s*(\d+)\s*\)|-?\d+)\))");
    for (auto it = std::sregex_iterator(out.begin(), out.end(), pair); it != std::sregex_iterator(); ++it) {
        auto& mt = *it;
        long long val = mt[3].matched ? -std::stoll(mt[3]) : std::stoll(mt[2]);
        v.model[mt[1]] = val;
    }
    return v;
}

}  // namespace retreet
