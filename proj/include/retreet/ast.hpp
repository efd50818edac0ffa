#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace retreet {

struct Span {
    int line = 0;
    int col = 0;
};

// Every failure raised by the core carries a kind tag and, when known, a span.
struct Error : std::runtime_error {
    std::string kind;
    Span span;
    Error(std::string k, const std::string& msg, Span s = {})
        : std::runtime_error(msg), kind(std::move(k)), span(s) {}
};

// Node path below the function's Loc parameter: a string over {'l','r'}.
using NodePath = std::string;

struct LExpr {
    std::string base;  // identifier the path starts from
    NodePath path;
    Span span;
};

struct AExpr;
using AExprP = std::shared_ptr<const AExpr>;

struct AExpr {
    enum Kind { Const, Var, Field, Loc, Add, Sub, Neg };
    Kind kind = Const;
    long long value = 0;  // Const
    std::string name;     // Var name, Field name
    LExpr loc;            // Field / Loc
    AExprP a, b;
    Span span;
};

AExprP mk_const(long long v);
AExprP mk_var(const std::string& n);
AExprP mk_field(const LExpr& l, const std::string& f);
AExprP mk_bin(AExpr::Kind k, AExprP a, AExprP b);
AExprP mk_neg(AExprP a);

struct Cond;
using CondP = std::shared_ptr<const Cond>;

struct Cond {
    // IsNil and Pos are the atomic forms; the rest is sugar removed by normalize.
    enum Kind { True, False, IsNil, Pos, Cmp, Not, And, Or };
    Kind kind = True;
    LExpr loc;           // IsNil
    AExprP e;            // Pos
    std::string op;      // Cmp: > >= < <= == !=
    AExprP lhs, rhs;     // Cmp
    CondP a, b;          // Not / And / Or
    Span span;

    bool atomic() const { return kind == True || kind == IsNil || kind == Pos; }
};

struct Assgn {
    enum Kind { SetVar, SetField, SetRet, Return, SetLoc };
    Kind kind = SetVar;
    std::string name;            // SetVar target, SetField field name
    LExpr loc;                   // SetField / SetLoc target node
    int slot = 0;                // SetRet
    AExprP rhs;                  // SetVar / SetField / SetRet / SetLoc
    std::vector<AExprP> values;  // Return (empty for a bare return)
    Span span;
};

struct Block {
    enum Kind { Call, Straight };
    Kind kind = Straight;
    std::vector<std::string> results;  // Call
    std::string callee;
    LExpr loc_arg;
    std::vector<AExprP> int_args;
    std::vector<Assgn> assigns;  // Straight
    Span span;
};

struct Stmt {
    enum Kind { BlockS, If, Seq, Par };
    Kind kind = Seq;
    Block block;              // BlockS
    CondP cond;               // If
    std::vector<Stmt> kids;   // If: {then, else}; Par: {left, right}; Seq: items
    Span span;
};

struct Function {
    std::string name;
    std::string loc_param;
    std::vector<std::string> int_params;
    Stmt body;  // always a Seq
    int return_arity = 0;
    Span span;
};

struct Program {
    std::vector<Function> functions;  // source order
    std::string entry = "Main";

    const Function* find(const std::string& name) const;
    Function* find(const std::string& name);
};

// Structural equality that ignores spans.
bool equal(const AExprP& a, const AExprP& b);
bool equal(const CondP& a, const CondP& b);
bool equal(const Stmt& a, const Stmt& b);
bool equal(const Program& a, const Program& b);

}  // namespace retreet
