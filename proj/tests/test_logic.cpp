#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "retreet/blocks.hpp"
#include "retreet/lang.hpp"
#include "retreet/logic.hpp"

using namespace retreet;

static LinTerm S(const std::string& s, long long c = 1) { return LinTerm::symbol(s, c); }
static LinTerm K(long long k) { return LinTerm::constant(k); }

TEST_CASE("satisfiable path condition with model") {
    auto f = f_ge(S("M(p)") + K(1) - S("M(r0)"));
    auto v = lia_satisfiable(f);
    REQUIRE(v.kind == SatVerdict::Sat);
    CHECK(eval(f, v.model));
}

TEST_CASE("integer gap") {
    auto f = f_and(f_gt(S("x")), f_gt(K(1) - S("x")));
    CHECK(lia_satisfiable(f).kind == SatVerdict::Unsat);
}

TEST_CASE("parity conflict through equalities") {
    auto f = f_and({f_eq(S("x", 2) - S("y")), f_eq(S("y") - S("z", 2) - K(1)), f_eq(S("x") - S("z"))});
    CHECK(lia_satisfiable(f).kind == SatVerdict::Unsat);
}

TEST_CASE("non-unit equalities need the mod step") {
    // 3x + 5y = 7, 0 <= x <= 10
    auto f = f_and({f_eq(S("x", 3) + S("y", 5) - K(7)), f_ge(S("x")), f_ge(K(10) - S("x"))});
    auto v = lia_satisfiable(f);
    REQUIRE(v.kind == SatVerdict::Sat);
    CHECK(eval(f, v.model));
    // 6x + 10y = 7 has no integer solution
    CHECK(lia_satisfiable(f_eq(S("x", 6) + S("y", 10) - K(7))).kind == SatVerdict::Unsat);
}

TEST_CASE("inexact elimination uses dark and grey shadows") {
    // 2 <= 3x - 2y... classic: 27 <= 11x + 13y <= 45, -10 <= 7x - 9y <= 4 has no integer point
    auto a = S("x", 11) + S("y", 13);
    auto b = S("x", 7) - S("y", 9);
    auto f = f_and({f_ge(a - K(27)), f_ge(K(45) - a), f_ge(b + K(10)), f_ge(K(4) - b)});
    CHECK(lia_satisfiable(f).kind == SatVerdict::Unsat);
    auto g = f_and({f_ge(a - K(27)), f_ge(K(60) - a), f_ge(b + K(10)), f_ge(K(4) - b)});
    auto v = lia_satisfiable(g);
    REQUIRE(v.kind == SatVerdict::Sat);
    CHECK(eval(g, v.model));
}

TEST_CASE("disjunctions and negations") {
    auto f = f_and(f_or(f_eq(S("x") - K(3)), f_eq(S("x") - K(5))), f_not(f_eq(S("x") - K(3))));
    auto v = lia_satisfiable(f);
    REQUIRE(v.kind == SatVerdict::Sat);
    CHECK(v.model["x"] == 5);
    CHECK(lia_satisfiable(f_and(f, f_not(f_eq(S("x") - K(5))))).kind == SatVerdict::Unsat);
}

TEST_CASE("equivalence") {
    auto f = f_gt(S("x"));
    CHECK(lia_equivalent(f, f).kind == EquivVerdict::Equivalent);
    CHECK(lia_equivalent(f_gt(S("x")), f_ge(S("x") - K(1))).kind == EquivVerdict::Equivalent);
    auto r = lia_equivalent(f_ge(S("x")), f_gt(S("x")));
    REQUIRE(r.kind == EquivVerdict::NotEquivalent);
    CHECK(r.witness["x"] == 0);
}

TEST_CASE("smtlib rendering") {
    auto s = to_smtlib(f_ge(S("M(p)") - S("x", 2) + K(-3)));
    CHECK(s.find("(declare-fun |M(p)| () Int)") != std::string::npos);
    CHECK(s.find("(check-sat)") != std::string::npos);
    CHECK(s.find("(* (- 2) |x|)") != std::string::npos);
}

TEST_CASE("external solver failure is Unknown") {
    LiaOptions o;
    o.smt_solver = "/nonexistent/solver";
    CHECK(lia_satisfiable(f_gt(S("x")), o).kind == SatVerdict::Unknown);
}

static BlockTable table(const std::string& src) { return BlockTable(normalize(parse_program(src), {false, true})); }

TEST_CASE("odd/even condition sets unify nil tests") {
    BlockTable t(normalize(load_program(std::string(CORPUS_DIR) + "/odd_even.rtt"), {false, true}));
    auto fam = consistent_condition_sets(t);
    auto all = fam.expand();
    std::vector<std::vector<int>> want{{}, {0, 1}};
    CHECK(all == want);
    CHECK(consistent_condition_sets_brute(t) == want);
}

TEST_CASE("no conditions gives the empty set only") {
    auto t = table("Main(n) { return 0 }");
    std::vector<std::vector<int>> want{{}};
    CHECK(consistent_condition_sets(t).expand() == want);
}

TEST_CASE("both polarities of the pathcond example are consistent") {
    BlockTable t(normalize(load_program(std::string(CORPUS_DIR) + "/pathcond.rtt"), {false, true}));
    auto fam = consistent_condition_sets(t);
    const CondGroup* g = nullptr;
    for (auto& x : fam.groups)
        if (x.name == "func") g = &x;
    REQUIRE(g);
    REQUIRE(g->conds.size() == 1);
    CHECK(g->members.size() == 2);
}

TEST_CASE("contradictory conditions are pruned") {
    auto t = table("Main(n, a) { if (a > 0) { if (0 - a > 0) { a = 1 } } }");
    auto all = consistent_condition_sets(t).expand();
    // c0 and c1 never hold together
    for (auto& s : all) CHECK(s != std::vector<int>{0, 1});
    CHECK(all == consistent_condition_sets_brute(t));
}
