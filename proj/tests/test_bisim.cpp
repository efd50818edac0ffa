#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "retreet/bisim.hpp"
#include "retreet/lang.hpp"
#include "retreet/oracle.hpp"

using namespace retreet;

static BlockTable corpus(const std::string& name) {
    return BlockTable(normalize(load_program(std::string(CORPUS_DIR) + "/" + name), {false, true}));
}

static BlockTable source(const std::string& text) {
    return BlockTable(normalize(parse_program(text), {false, true}));
}

using Pairs = std::vector<std::pair<int, int>>;

TEST_CASE("canonical bodies") {
    auto p = corpus("odd_even_seq.rtt");
    auto f = corpus("fused_good.rtt");
    CHECK(canonical_body(p, 3) == canonical_body(f, 4));  // return ls + rs + 1 / return[0] = le + re + 1
    CHECK(canonical_body(p, 7) == canonical_body(f, 5));
    CHECK(canonical_body(p, 0) == canonical_body(p, 4));
    CHECK(canonical_body(p, 3) != canonical_body(p, 7));
    CHECK_THROWS_AS(canonical_body(p, 1), Error);
}

TEST_CASE("identity relation comes first") {
    for (auto name : {"odd_even.rtt", "odd_even_seq.rtt", "css.rtt", "swap_incrm.rtt", "cycletree.rtt"}) {
        auto p = corpus(name);
        auto q = corpus(name);
        auto cands = enumerate_bisimulations(p, q);
        REQUIRE_FALSE(cands.empty());
        CAPTURE(name);
        for (auto& [a, b] : cands[0].noncalls) CHECK(a == b);
        auto c = check_bisimulation(p, q, cands[0]);
        CHECK(c.accepted);
        auto s = find_bisimulation(p, q);
        CHECK(s.tried == 1);
    }
    // odd/even has one call per direction and function, so the identity is exact
    auto p = corpus("odd_even.rtt");
    auto r = enumerate_bisimulations(p, p)[0];
    for (auto& [a, b] : r.calls) CHECK(a == b);
    CHECK(r.calls.size() == p.all_calls().size());
}

TEST_CASE("odd/even against the valid fusion") {
    auto p = corpus("odd_even_seq.rtt");
    auto f = corpus("fused_good.rtt");
    auto s = find_bisimulation(p, f);
    REQUIRE(s.accepted);
    // {s1,s5} to the left call, {s2,s6} to the right call, {s8,s9} to Main's call
    CHECK(s.accepted->calls == Pairs{{1, 2}, {2, 3}, {5, 2}, {6, 3}, {8, 6}, {9, 6}});
    CHECK(s.accepted->noncalls == std::map<int, int>{{0, 0}, {3, 4}, {4, 1}, {7, 5}, {10, 7}});
    CHECK(is_closed(p, f, *s.accepted));
    CHECK(print_relation(*s.accepted).find("s8~s6") != std::string::npos);
}

TEST_CASE("corpus equivalence pairs bisimulate") {
    std::vector<std::pair<std::string, std::string>> pairs{{"odd_even_seq.rtt", "fused_bad.rtt"},
                                                           {"odd_even_seq.rtt", "odd_even.rtt"},
                                                           {"swap_incrm.rtt", "swap_incrm_fused.rtt"},
                                                           {"css.rtt", "css_fused.rtt"},
                                                           {"cycletree.rtt", "cycletree_fused.rtt"}};
    for (auto& [a, b] : pairs) {
        auto p = corpus(a), q = corpus(b);
        auto s = find_bisimulation(p, q);
        CAPTURE(a);
        CAPTURE(b);
        REQUIRE(s.accepted);
        CHECK(is_closed(p, q, *s.accepted));
        CHECK(check_bisimulation(p, q, *s.accepted).accepted);
    }
}

TEST_CASE("non-call mismatch") {
    auto p = corpus("odd_even.rtt");
    auto q = corpus("par_write.rtt");
    CHECK_THROWS_AS(enumerate_bisimulations(p, q), Error);
    try {
        noncall_matchings(p, q);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("ret := 0") != std::string::npos);
    }
}

TEST_CASE("relations with crossed directions are rejected") {
    auto p = corpus("odd_even_seq.rtt");
    auto f = corpus("fused_good.rtt");
    auto good = *find_bisimulation(p, f).accepted;
    // Odd's left call paired with Fused's right call
    auto bad = good;
    bad.calls.push_back({5, 3});
    auto c = check_bisimulation(p, f, bad);
    CHECK_FALSE(c.accepted);
    bool directions = false;
    for (auto& r : c.reasons) directions = directions || r.find("directions") != std::string::npos;
    CHECK(directions);

    // dropping a forced pair breaks closure
    auto open = good;
    open.calls.erase(open.calls.begin());
    CHECK_FALSE(is_closed(p, f, open));
    CHECK_FALSE(check_bisimulation(p, f, open).accepted);
}

TEST_CASE("swapped subtrees have no bisimulation") {
    auto p = source(R"(
        L(n) { if (n != nil) { n.f = 1 } }
        R(n) { if (n != nil) { n.g = 2 } }
        Main(n) { if (n != nil) { L(n.l) R(n.r) } })");
    auto q = source(R"(
        L(n) { if (n != nil) { n.f = 1 } }
        R(n) { if (n != nil) { n.g = 2 } }
        Main(n) { if (n != nil) { L(n.r) R(n.l) } })");
    auto s = find_bisimulation(p, q);
    CHECK_FALSE(s.accepted);
    CHECK(s.exhausted);
    REQUIRE(s.rejected.size() == 1);
    // and the programs do differ
    EquivSweep e = sweep_equivalent(p, q);
    CHECK(e.result.kind == EquivResult::Differ);
}

TEST_CASE("integer path conditions are compared") {
    auto p = source(R"(
        F(n, k) { if (n != nil) { if (k > 0) { n.f = 1 } } }
        Main(n) { if (n != nil) { F(n.l, 1) } })");
    auto same = source(R"(
        G(n, j) { if (n != nil) { if (j >= 1) { n.f = 1 } } }
        Main(n) { if (n != nil) { G(n.l, 1) } })");
    auto other = source(R"(
        F(n, k) { if (n != nil) { if (k > 1) { n.f = 1 } } }
        Main(n) { if (n != nil) { F(n.l, 1) } })");
    CHECK(find_bisimulation(p, same).accepted);
    auto s = find_bisimulation(p, other);
    REQUIRE_FALSE(s.accepted);
    CHECK(s.rejected[0].second[0].find("integer conditions differ") != std::string::npos);
}

TEST_CASE("enumeration cap") {
    // four numbering blocks with equal bodies: 24 candidate maps
    auto p = corpus("cycletree.rtt");
    auto q = corpus("cycletree_fused.rtt");
    CHECK(noncall_matchings(p, q).size() == 24);
    CHECK(noncall_matchings(p, q, 5).size() == 5);

    auto a = source(R"(
        A(n) { if (n != nil) { n.f = 1 } }
        B(n) { if (n != nil) { n.f = 1 } }
        C(n) { if (n != nil) { n.f = 1 } }
        Main(n) { if (n != nil) { A(n.l) B(n.r) C(n.l) } })");
    auto b = source(R"(
        A(n) { if (n != nil) { n.f = 1 } }
        B(n) { if (n != nil) { n.f = 1 } }
        C(n) { if (n != nil) { n.f = 1 } }
        Main(n) { if (n != nil) { A(n.r) B(n.r) C(n.r) } })");
    auto s = find_bisimulation(a, b, 2);
    CHECK_FALSE(s.accepted);
    CHECK(s.tried == 2);
    CHECK_FALSE(s.exhausted);
    auto all = find_bisimulation(a, b);
    CHECK(all.tried == 6);
    CHECK(all.exhausted);
}

// Every subset of call pairs that is closed and passes the check would be found
// by the search, on small pairs.
TEST_CASE("search agrees with brute force over relations") {
    std::vector<std::pair<std::string, std::string>> toys{
        {"A(n) { if (n != nil) { n.f = 1 } }\nMain(n) { if (n != nil) { A(n.l) A(n.r) } }",
         "A(n) { if (n != nil) { n.f = 1 } }\nMain(n) { if (n != nil) { A(n.r) A(n.l) } }"},
        {"A(n) { if (n != nil) { n.f = 1 } }\nB(n) { if (n != nil) { n.g = 1 } }\nMain(n) { if (n != nil) { A(n.l) B(n.l) } }",
         "A(n) { if (n != nil) { n.f = 1 } }\nB(n) { if (n != nil) { n.g = 1 } }\nMain(n) { if (n != nil) { B(n.l) A(n.l) } }"},
        {"A(n) { if (n != nil) { n.f = 1 } }\nB(n) { if (n != nil) { n.f = 1 } }\nMain(n) { if (n != nil) { A(n.l) B(n.r) } }",
         "A(n) { if (n != nil) { n.f = 1 } }\nB(n) { if (n != nil) { n.f = 1 } }\nMain(n) { if (n != nil) { B(n.l) A(n.r) } }"},
        {"A(n) { if (n != nil) { n.f = 1 A(n.l) } }\nMain(n) { A(n) }",
         "A(n) { if (n != nil) { A(n.l) n.f = 1 } }\nMain(n) { A(n) }"},
        {"A(n) { if (n != nil) { n.f = 1 } }\nMain(n) { if (n != nil) { A(n.l) } }",
         "A(n) { if (n != nil) { n.f = 1 } }\nMain(n) { if (n != nil) { A(n.r) } }"},
    };
    for (auto& [sa, sb] : toys) {
        auto p = source(sa), q = source(sb);
        auto pc = p.all_calls(), qc = q.all_calls();
        Pairs universe;
        for (int a : pc)
            for (int b : qc) universe.push_back({a, b});
        REQUIRE(universe.size() <= 12);
        bool brute = false;
        for (auto& m : noncall_matchings(p, q))
            for (size_t mask = 0; mask < (size_t(1) << universe.size()) && !brute; ++mask) {
                BisimRelation r;
                r.noncalls = m;
                for (size_t k = 0; k < universe.size(); ++k)
                    if (mask >> k & 1) r.calls.push_back(universe[k]);
                brute = is_closed(p, q, r) && check_bisimulation(p, q, r).accepted;
            }
        CAPTURE(sa);
        CAPTURE(sb);
        CHECK(brute == find_bisimulation(p, q).accepted.has_value());
    }
}
