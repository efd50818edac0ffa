#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace retreet {

// Linear term: sum of coef * symbol plus a constant.
struct LinTerm {
    std::map<std::string, long long> coef;
    long long k = 0;

    static LinTerm constant(long long v);
    static LinTerm symbol(const std::string& s, long long c = 1);

    LinTerm operator+(const LinTerm& o) const;
    LinTerm operator-(const LinTerm& o) const;
    LinTerm operator*(long long c) const;
    LinTerm substitute(const std::map<std::string, LinTerm>& m) const;
    long long eval(const std::map<std::string, long long>& v) const;
    bool is_const() const { return coef.empty(); }
    bool operator==(const LinTerm& o) const { return coef == o.coef && k == o.k; }
    bool operator<(const LinTerm& o) const { return coef != o.coef ? coef < o.coef : k < o.k; }
};

std::string print_term(const LinTerm& t);

struct Formula;
using FormulaP = std::shared_ptr<const Formula>;

// Quantifier-free linear integer arithmetic. Ge means t >= 0, Eq means t == 0.
struct Formula {
    enum Kind { True, False, Ge, Eq, Not, And, Or };
    Kind kind = True;
    LinTerm t;
    std::vector<FormulaP> kids;
};

FormulaP f_true();
FormulaP f_false();
FormulaP f_ge(const LinTerm& t);  // t >= 0
FormulaP f_gt(const LinTerm& t);  // t > 0
FormulaP f_eq(const LinTerm& t);  // t == 0
FormulaP f_not(const FormulaP& a);
FormulaP f_and(std::vector<FormulaP> kids);
FormulaP f_or(std::vector<FormulaP> kids);
FormulaP f_and(const FormulaP& a, const FormulaP& b);
FormulaP f_or(const FormulaP& a, const FormulaP& b);

FormulaP substitute(const FormulaP& f, const std::map<std::string, LinTerm>& m);
FormulaP rename(const FormulaP& f, const std::map<std::string, std::string>& m);
bool eval(const FormulaP& f, const std::map<std::string, long long>& v);
void free_symbols(const FormulaP& f, std::set<std::string>& out);
bool has_atoms(const FormulaP& f);
std::string print_formula(const FormulaP& f);
bool same_formula(const FormulaP& a, const FormulaP& b);

}  // namespace retreet
