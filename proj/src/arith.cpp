#include "retreet/arith.hpp"

namespace retreet {

LinTerm LinTerm::constant(long long v) {
    LinTerm t;
    t.k = v;
    return t;
}

LinTerm LinTerm::symbol(const std::string& s, long long c) {
    LinTerm t;
    if (c) t.coef[s] = c;
    return t;
}

LinTerm LinTerm::operator+(const LinTerm& o) const {
    LinTerm r = *this;
    r.k += o.k;
    for (auto& [s, c] : o.coef) {
        long long v = (r.coef[s] += c);
        if (v == 0) r.coef.erase(s);
    }
    return r;
}

LinTerm LinTerm::operator-(const LinTerm& o) const { return *this + o * -1; }

LinTerm LinTerm::operator*(long long c) const {
    LinTerm r;
    if (c == 0) return r;
    r.k = k * c;
    for (auto& [s, v] : coef) r.coef[s] = v * c;
    return r;
}

LinTerm LinTerm::substitute(const std::map<std::string, LinTerm>& m) const {
    LinTerm r = constant(k);
    for (auto& [s, c] : coef) {
        auto it = m.find(s);
        r = r + (it == m.end() ? symbol(s, c) : it->second * c);
    }
    return r;
}

long long LinTerm::eval(const std::map<std::string, long long>& v) const {
    long long r = k;
    for (auto& [s, c] : coef) {
        auto it = v.find(s);
        if (it != v.end()) r += c * it->second;
    }
    return r;
}

static std::string side(const std::vector<std::pair<std::string, long long>>& terms, long long k) {
    std::string s;
    for (auto& [n, c] : terms) {
        if (!s.empty()) s += " + ";
        if (c != 1) s += std::to_string(c) + "*";
        s += n;
    }
    if (k != 0 || s.empty()) {
        if (!s.empty()) s += " + ";
        s += std::to_string(k);
    }
    return s;
}

std::string print_term(const LinTerm& t) {
    std::string s;
    for (auto& [n, c] : t.coef) {
        if (s.empty()) {
            if (c == -1) s += "-";
            else if (c != 1) s += std::to_string(c) + "*";
        } else {
            s += c < 0 ? " - " : " + ";
            if (c != 1 && c != -1) s += std::to_string(c < 0 ? -c : c) + "*";
        }
        s += n;
    }
    if (s.empty()) return std::to_string(t.k);
    if (t.k > 0) s += " + " + std::to_string(t.k);
    if (t.k < 0) s += " - " + std::to_string(-t.k);
    return s;
}

static std::string print_rel(const LinTerm& t, const char* op) {
    std::vector<std::pair<std::string, long long>> lhs, rhs;
    for (auto& [n, c] : t.coef) (c > 0 ? lhs : rhs).push_back({n, c > 0 ? c : -c});
    return side(lhs, t.k > 0 ? t.k : 0) + " " + op + " " + side(rhs, t.k < 0 ? -t.k : 0);
}

static FormulaP mk(Formula::Kind k) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    return f;
}

FormulaP f_true() {
    static FormulaP t = mk(Formula::True);
    return t;
}

FormulaP f_false() {
    static FormulaP f = mk(Formula::False);
    return f;
}

FormulaP f_ge(const LinTerm& t) {
    if (t.is_const()) return t.k >= 0 ? f_true() : f_false();
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Ge;
    f->t = t;
    return f;
}

FormulaP f_gt(const LinTerm& t) { return f_ge(t - LinTerm::constant(1)); }

FormulaP f_eq(const LinTerm& t) {
    if (t.is_const()) return t.k == 0 ? f_true() : f_false();
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Eq;
    f->t = t;
    return f;
}

FormulaP f_not(const FormulaP& a) {
    if (a->kind == Formula::True) return f_false();
    if (a->kind == Formula::False) return f_true();
    if (a->kind == Formula::Not) return a->kids[0];
    auto f = std::make_shared<Formula>();
    f->kind = Formula::Not;
    f->kids.push_back(a);
    return f;
}

static FormulaP junction(Formula::Kind k, std::vector<FormulaP> kids) {
    Formula::Kind unit = k == Formula::And ? Formula::True : Formula::False;
    Formula::Kind zero = k == Formula::And ? Formula::False : Formula::True;
    std::vector<FormulaP> out;
    for (auto& x : kids) {
        if (x->kind == unit) continue;
        if (x->kind == zero) return x;
        if (x->kind == k) out.insert(out.end(), x->kids.begin(), x->kids.end());
        else out.push_back(x);
    }
    if (out.empty()) return unit == Formula::True ? f_true() : f_false();
    if (out.size() == 1) return out[0];
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->kids = std::move(out);
    return f;
}

FormulaP f_and(std::vector<FormulaP> kids) { return junction(Formula::And, std::move(kids)); }
FormulaP f_or(std::vector<FormulaP> kids) { return junction(Formula::Or, std::move(kids)); }
FormulaP f_and(const FormulaP& a, const FormulaP& b) { return f_and(std::vector<FormulaP>{a, b}); }
FormulaP f_or(const FormulaP& a, const FormulaP& b) { return f_or(std::vector<FormulaP>{a, b}); }

FormulaP substitute(const FormulaP& f, const std::map<std::string, LinTerm>& m) {
    switch (f->kind) {
    case Formula::True:
    case Formula::False: return f;
    case Formula::Ge: return f_ge(f->t.substitute(m));
    case Formula::Eq: return f_eq(f->t.substitute(m));
    case Formula::Not: return f_not(substitute(f->kids[0], m));
    default: {
        std::vector<FormulaP> kids;
        for (auto& k : f->kids) kids.push_back(substitute(k, m));
        return junction(f->kind, std::move(kids));
    }
    }
}

FormulaP rename(const FormulaP& f, const std::map<std::string, std::string>& m) {
    std::set<std::string> syms;
    free_symbols(f, syms);
    std::map<std::string, LinTerm> sub;
    for (auto& s : syms) {
        auto it = m.find(s);
        if (it != m.end()) sub[s] = LinTerm::symbol(it->second);
    }
    return substitute(f, sub);
}

bool eval(const FormulaP& f, const std::map<std::string, long long>& v) {
    switch (f->kind) {
    case Formula::True: return true;
    case Formula::False: return false;
    case Formula::Ge: return f->t.eval(v) >= 0;
    case Formula::Eq: return f->t.eval(v) == 0;
    case Formula::Not: return !eval(f->kids[0], v);
    case Formula::And:
        for (auto& k : f->kids)
            if (!eval(k, v)) return false;
        return true;
    case Formula::Or:
        for (auto& k : f->kids)
            if (eval(k, v)) return true;
        return false;
    }
    return false;
}

void free_symbols(const FormulaP& f, std::set<std::string>& out) {
    for (auto& [s, c] : f->t.coef) out.insert(s);
    for (auto& k : f->kids) free_symbols(k, out);
}

bool has_atoms(const FormulaP& f) {
    if (f->kind == Formula::Ge || f->kind == Formula::Eq) return true;
    for (auto& k : f->kids)
        if (has_atoms(k)) return true;
    return false;
}

std::string print_formula(const FormulaP& f) {
    switch (f->kind) {
    case Formula::True: return "true";
    case Formula::False: return "false";
    case Formula::Ge: return print_rel(f->t, ">=");
    case Formula::Eq: return print_rel(f->t, "=");
    case Formula::Not: {
        auto& a = f->kids[0];
        if (a->kind == Formula::Eq) return print_rel(a->t, "!=");
        if (a->kind == Formula::Ge) return print_rel(a->t * -1 - LinTerm::constant(1), ">=");
        return "!(" + print_formula(a) + ")";
    }
    default: {
        std::string s;
        for (auto& k : f->kids) {
            if (!s.empty()) s += f->kind == Formula::And ? " && " : " || ";
            bool paren = k->kind == Formula::And || k->kind == Formula::Or;
            s += paren ? "(" + print_formula(k) + ")" : print_formula(k);
        }
        return s;
    }
    }
}

bool same_formula(const FormulaP& a, const FormulaP& b) {
    if (a->kind != b->kind || !(a->t == b->t) || a->kids.size() != b->kids.size()) return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (!same_formula(a->kids[i], b->kids[i])) return false;
    return true;
}

}  // namespace retreet
