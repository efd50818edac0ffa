#pragma once

#include "retreet/arith.hpp"

#include <map>
#include <string>
#include <vector>

namespace retreet {

class BlockTable;

using Valuation = std::map<std::string, long long>;

struct SatVerdict {
    enum Kind { Sat, Unsat, Unknown };
    Kind kind = Unknown;
    Valuation model;  // Sat
    std::string reason;  // Unknown
};

struct LiaOptions {
    std::string smt_solver;  // optional SMT-LIB2 binary; empty uses the internal procedure
    int timeout_s = 10;
    size_t max_disjuncts = 1u << 16;
};

SatVerdict lia_satisfiable(const FormulaP& f, const LiaOptions& opt = {});

struct EquivVerdict {
    enum Kind { Equivalent, NotEquivalent, Unknown };
    Kind kind = Unknown;
    Valuation witness;
    std::string reason;
};

EquivVerdict lia_equivalent(const FormulaP& f, const FormulaP& g, const LiaOptions& opt = {});

// SMT-LIB2 text of a satisfiability query (QF_LIA).
std::string to_smtlib(const FormulaP& f);
// Runs an external solver on the query; Unknown on timeout or failure.
SatVerdict smt_satisfiable(const FormulaP& f, const LiaOptions& opt);

// One group of conditions whose truth values are chosen together at a node.
struct CondGroup {
    std::string name;    // "nil" or a function name
    std::vector<int> conds;
    std::vector<std::vector<int>> members;  // each a sorted subset of conds that holds
};

struct CondSetFamily {
    std::vector<CondGroup> groups;
    // Every consistent set: one member chosen per group. Capped at `limit`.
    std::vector<std::vector<int>> expand(size_t limit = 1u << 20) const;
};

CondSetFamily consistent_condition_sets(const BlockTable& t, const LiaOptions& opt = {});
// Subset-by-subset reference used to cross-check the grouped computation.
std::vector<std::vector<int>> consistent_condition_sets_brute(const BlockTable& t, const LiaOptions& opt = {});

}  // namespace retreet
