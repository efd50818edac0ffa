#pragma once

#include "retreet/arith.hpp"
#include "retreet/blocks.hpp"
#include "retreet/logic.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace retreet {

// Symbol naming inside ArithFormula:
//   code level:  plain variable names, fields "u.f" / "u.l.f", return slots "ret:k"
//   valuations:  "M(p)", "M(s5)" (slot 0), "M(s5.1)" (slot 1), and "N(...)" likewise
std::string field_symbol(const NodePath& p, const std::string& f, const std::string& node = "u");
std::string ghost_symbol(const std::string& val, int block, int slot);
std::string param_symbol(const std::string& val, const std::string& p);

LinTerm term_of(const AExprP& e);
// Arithmetic content of an atomic condition (true for nil tests).
FormulaP formula_of(const CondP& c);

// Weakest precondition of phi over one assignment / a path prefix. Call blocks
// substitute their ghost M(s); havoc entries replace their targets with fresh
// versioned symbols (x~k).
FormulaP wp_assign(const Assgn& a, const FormulaP& phi);
FormulaP wp(const BlockTable& t, const Path& code, const FormulaP& phi, const std::string& val = "M");
LinTerm wp_term(const BlockTable& t, const Path& code, const LinTerm& e, const std::string& val = "M");

// Closes a code-level formula over function f: parameters become val(p),
// uninitialized locals become 0, fields stay u.f.
FormulaP close_over(const Function& f, const FormulaP& phi, const std::string& val = "M");
LinTerm close_over(const Function& f, const LinTerm& e, const std::string& val = "M");

// WP(c, M) for condition c, in the given polarity.
FormulaP wp_condition(const BlockTable& t, int c, bool polarity = true, const std::string& val = "M");

struct NilAtom {
    NodePath path;  // relative to u
    bool nil;
    bool operator==(const NilAtom& o) const { return path == o.path && nil == o.nil; }
};

struct Match {
    NodePath dir;  // v = u.dir; empty means v = u
    FormulaP eqs;  // N(p_i) = argument_i
};

struct PathCondition {
    NodePath dir;
    std::vector<NilAtom> nil;  // structural atoms from nil tests on Path(q)
    FormulaP arith;            // Match equations and integer WP conditions
};

Match match_constraint(const BlockTable& t, int s, int q);
PathCondition path_condition(const BlockTable& t, int s, int q);
// Without the caller check; s only selects which record the condition hangs off.
Match match_of(const BlockTable& t, int q);
PathCondition path_condition_of(const BlockTable& t, int q);
std::string print_direction(const NodePath& dir);
std::string print_path_condition(const PathCondition& pc);

// Concrete context for speculative execution: the function's node is the
// root of the context, paths are relative to it.
struct SpecContext {
    std::function<bool(const NodePath&)> is_nil;
    std::function<long long(const NodePath&, const std::string&)> field;
};

struct SpecRecord {
    int block;
    NodePath disp;
    std::map<std::string, long long> vals;  // locals after the block
};

struct SpecTrace {
    std::vector<SpecRecord> records;
    std::vector<long long> returns;
    std::map<std::pair<NodePath, std::string>, long long> writes;
    bool operator==(const SpecTrace& o) const;
};

// Ghost keys: "s5" for slot 0, "s5.1" for slot 1. Throws Error("MissingGhost").
SpecTrace speculative_execute(const BlockTable& t, const std::string& f, const std::map<std::string, long long>& in,
                              const std::map<std::string, long long>& ghosts, const SpecContext& ctx);

}  // namespace retreet
