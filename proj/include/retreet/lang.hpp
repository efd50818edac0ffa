#pragma once

#include "retreet/ast.hpp"

#include <string>
#include <vector>

namespace retreet {

struct Violation {
    enum Kind { SelfCall, MultiLocParam, NonAtomicCond, UnguardedDeref, TreeMutation, UnresolvedCall, ArityMismatch };
    Kind kind;
    Span span;
    std::string message;
};

const char* violation_name(Violation::Kind k);

struct LangOptions {
    bool allow_deep_loc = false;   // calls on n.l.r and deeper
    bool allow_same_node = false;  // calls on n itself outside Main
};

Program parse_program(const std::string& source);
Program load_program(const std::string& path);

std::vector<Violation> validate_restrictions(const Program& p);

// Splits non-atomic conditions into nested ifs, checks nil guards and the
// Loc-argument lint. Throws Error("NormalizeError") on failure.
Program normalize(const Program& p, const LangOptions& opt = {});

std::string pretty_print(const Program& p);
std::string print_aexpr(const AExprP& e);
std::string print_cond(const CondP& c);
std::string print_lexpr(const LExpr& l);
std::string print_block(const Block& b);

}  // namespace retreet
