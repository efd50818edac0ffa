#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gen.hpp"
#include "retreet/lang.hpp"
#include "retreet/logic.hpp"
#include "retreet/oracle.hpp"
#include "retreet/semantics.hpp"

#include <algorithm>
#include <filesystem>

using namespace retreet;

static Program random_program(unsigned seed, bool par = true, int funcs = 3, bool linear = false) {
    ProgramGen g(seed);
    g.par = par;
    g.funcs = funcs;
    g.linear = linear;
    return parse_program(g.program());
}

static BlockTable table(const Program& p) { return BlockTable(normalize(p, {false, true})); }

TEST_CASE("parse and pretty print round trip") {
    for (auto& e : std::filesystem::directory_iterator(CORPUS_DIR)) {
        if (e.path().extension() != ".rtt") continue;
        auto p = load_program(e.path().string());
        auto text = pretty_print(p);
        CHECK_MESSAGE(equal(parse_program(text), p), e.path().filename().string());
        CHECK(pretty_print(parse_program(text)) == text);
    }
    for (unsigned s = 0; s < 300; ++s) {
        auto p = random_program(s);
        auto text = pretty_print(p);
        REQUIRE_MESSAGE(equal(parse_program(text), p), text);
        auto n = normalize(p, {false, true});
        CHECK(equal(parse_program(pretty_print(n)), n));
    }
}

static Relation converse(Relation r) {
    if (r == Relation::Precedes) return Relation::Follows;
    if (r == Relation::Follows) return Relation::Precedes;
    return r;
}

TEST_CASE("relation trichotomy") {
    int pairs = 0;
    for (unsigned s = 1000; s < 1500; ++s) {
        auto t = table(random_program(s));
        for (auto& a : t.blocks())
            for (auto& b : t.blocks()) {
                if (a.id == b.id) continue;
                auto r = t.relation(a.id, b.id);
                CHECK(r == converse(t.relation(b.id, a.id)));
                CHECK((r == Relation::DifferentFunctions) == (a.func != b.func));
                ++pairs;
            }
    }
    CHECK(pairs > 1000);
}

// Independent evaluator for straight-line code over a symbol valuation.
static long long value(const AExprP& e, const Valuation& v) {
    switch (e->kind) {
    case AExpr::Const: return e->value;
    case AExpr::Var: return v.count(e->name) ? v.at(e->name) : 0;
    case AExpr::Field: {
        std::string k = "u";
        for (char c : e->loc.path) k += std::string(".") + c;
        k += "." + e->name;
        return v.count(k) ? v.at(k) : 0;
    }
    case AExpr::Add: return value(e->a, v) + value(e->b, v);
    case AExpr::Sub: return value(e->a, v) - value(e->b, v);
    case AExpr::Neg: return -value(e->a, v);
    default: return 0;
    }
}

static void run(const Assgn& a, Valuation& v) {
    switch (a.kind) {
    case Assgn::SetVar: v[a.name] = value(a.rhs, v); break;
    case Assgn::SetField: v["u." + a.name] = value(a.rhs, v); break;
    case Assgn::SetRet: v["ret:" + std::to_string(a.slot)] = value(a.rhs, v); break;
    case Assgn::Return: {
        std::vector<long long> xs;
        for (auto& e : a.values) xs.push_back(value(e, v));
        for (size_t i = 0; i < xs.size(); ++i) v["ret:" + std::to_string(i)] = xs[i];
        break;
    }
    default: break;
    }
}

static const std::vector<std::string> kSyms{"x", "y", "z", "p0", "u.f", "u.g", "u.h", "ret:0"};

static FormulaP random_formula(std::mt19937& rng, const std::vector<std::string>& syms, int depth, int coef = 4) {
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    if (depth == 0 || pick(3) == 0) {
        LinTerm t = LinTerm::constant(pick(2 * coef + 1) - coef);
        int n = 1 + pick(3);
        for (int i = 0; i < n; ++i)
            t = t + LinTerm::symbol(syms[pick(static_cast<int>(syms.size()))], pick(2 * coef + 1) - coef);
        return pick(4) == 0 ? f_eq(t) : f_ge(t);
    }
    switch (pick(3)) {
    case 0: return f_not(random_formula(rng, syms, depth - 1, coef));
    case 1: return f_and(random_formula(rng, syms, depth - 1, coef), random_formula(rng, syms, depth - 1, coef));
    default: return f_or(random_formula(rng, syms, depth - 1, coef), random_formula(rng, syms, depth - 1, coef));
    }
}

TEST_CASE("wp is sound on random triples") {
    std::mt19937 rng(7);
    int checked = 0;
    for (unsigned s = 0; checked < 1000; ++s) {
        ProgramGen g(s + 5000);
        g.arity = {1};
        std::string src = "Main(n, p0) { if (n != nil) { " + g.straight({"p0"}, 0) + " } }";
        auto p = normalize(parse_program(src));
        auto& as = p.functions[0].body.kids[0].kids[1].kids[0].block.assigns;
        auto phi = random_formula(rng, kSyms, 2);
        FormulaP w = phi;
        for (size_t i = as.size(); i-- > 0;) w = wp_assign(as[i], w);
        for (int k = 0; k < 4; ++k) {
            Valuation v;
            for (auto& x : kSyms) v[x] = std::uniform_int_distribution<int>(-6, 6)(rng);
            Valuation after = v;
            for (auto& a : as) run(a, after);
            REQUIRE_MESSAGE(eval(w, v) == eval(phi, after), src << " / " << print_formula(phi));
            ++checked;
        }
    }
}

TEST_CASE("speculative execution is deterministic") {
    std::mt19937 rng(11);
    for (unsigned s = 0; s < 200; ++s) {
        auto t = table(random_program(s + 2000));
        SpecContext ctx{[](const NodePath& p) { return p.size() > 0; },
                        [](const NodePath& p, const std::string& f) { return static_cast<long long>(p.size() + f[0] % 3) - 1; }};
        for (auto& f : t.program().functions) {
            std::map<std::string, long long> ghosts, in;
            for (int b : t.blocks_of(f.name))
                if (t.block(b).is_call) ghosts[block_name(b)] = std::uniform_int_distribution<int>(-3, 3)(rng);
            for (auto& p : f.int_params) in[p] = std::uniform_int_distribution<int>(-3, 3)(rng);
            auto a = speculative_execute(t, f.name, in, ghosts, ctx);
            auto b = speculative_execute(t, f.name, in, ghosts, ctx);
            CHECK(a == b);
            for (auto& r : a.records) CHECK(t.block(r.block).func == f.name);
        }
    }
}

static ConcreteTree random_tree(std::mt19937& rng, int height) {
    auto shapes = tree_shapes(height);
    ConcreteTree t;
    t.nodes = shapes[std::uniform_int_distribution<size_t>(0, shapes.size() - 1)(rng)];
    for (auto& n : t.nodes)
        for (auto f : {"f", "g", "h"}) t.fields[{n, f}] = std::uniform_int_distribution<int>(0, 1)(rng);
    return t;
}

TEST_CASE("traces respect the step bound") {
    std::mt19937 rng(13);
    for (unsigned s = 0; s < 200; ++s) {
        auto t = table(random_program(s + 3000, true, 3, true));
        for (int k = 0; k < 4; ++k) {
            auto tree = random_tree(rng, 3);
            auto tr = interpret(t, tree);
            std::set<std::pair<int, NodePath>> seen;
            for (auto& i : tr.iterations) CHECK(seen.insert({i.block, i.node}).second);
            CHECK(tr.iterations.size() <= t.blocks().size() * (2 * tree.nodes.size() + 1));
        }
    }
}

TEST_CASE("repeated activations exceed the step bound") {
    auto t = table(parse_program("G(n) { if (n != nil) { n.f = n.f + 1 } } F(n) { if (n != nil) { G(n.l) G(n.l) } } "
                                 "Main(n) { F(n) }"));
    auto tree = parse_tree("(. (. - -) -)");
    auto tr = interpret(t, tree);
    CHECK(tr.store.at({"l", "f"}) == 2);
    size_t g_on_l = 0;
    for (auto& i : tr.iterations) g_on_l += t.block(i.block).func == "G" && i.node == "l";
    CHECK(g_on_l == 2);
}

TEST_CASE("race-free programs are confluent") {
    std::mt19937 rng(17);
    OracleOptions opt;
    opt.max_traces = 2048;
    int racefree = 0, racy = 0, skipped = 0;
    for (unsigned s = 0; s < 150; ++s) {
        auto t = table(random_program(s + 4000, true, 2, true));
        auto tree = random_tree(rng, 2);
        try {
            if (oracle_datarace(t, tree)) {
                ++racy;
                continue;
            }
            auto outcomes = reachable_outcomes(t, tree, opt);
            ++racefree;
            CHECK(outcomes.size() == 1);
            auto tr = interpret(t, tree);
            CHECK(outcomes.begin()->first == tr.store);
        } catch (Error& e) {
            REQUIRE(e.kind == "BudgetExceeded");
            ++skipped;
        }
    }
    for (unsigned s = 0; s < 100; ++s) {
        auto t = table(random_program(s + 4500, false));
        CHECK(interpret_all(t, random_tree(rng, 2)).size() == 1);
    }
    CHECK(racefree > 20);
    CHECK(racy > 5);
    CHECK(skipped < 10);
}

static std::vector<Valuation> box(const std::vector<std::string>& syms, int r) {
    std::vector<Valuation> out{{}};
    for (auto& s : syms) {
        std::vector<Valuation> next;
        for (auto& v : out)
            for (int x = -r; x <= r; ++x) {
                auto w = v;
                w[s] = x;
                next.push_back(std::move(w));
            }
        out = std::move(next);
    }
    return out;
}

TEST_CASE("lia verdicts agree with evaluation") {
    std::mt19937 rng(19);
    const std::vector<std::string> syms{"a", "b", "c"};
    auto points = box(syms, 16);
    int sat = 0, unsat = 0;
    for (int i = 0; i < 300; ++i) {
        auto f = random_formula(rng, syms, 3, 6);
        auto v = lia_satisfiable(f);
        REQUIRE(v.kind != SatVerdict::Unknown);
        if (v.kind == SatVerdict::Sat) {
            ++sat;
            CHECK(eval(f, v.model));
        } else {
            ++unsat;
            bool any = std::any_of(points.begin(), points.end(), [&](const Valuation& p) { return eval(f, p); });
            CHECK_MESSAGE(!any, print_formula(f));
        }
    }
    CHECK(sat > 30);
    CHECK(unsat > 30);
}

TEST_CASE("lia equivalence is an equivalence relation") {
    std::mt19937 rng(23);
    const std::vector<std::string> syms{"a", "b"};
    std::vector<FormulaP> fs;
    for (int i = 0; i < 25; ++i) fs.push_back(random_formula(rng, syms, 2, 3));
    for (auto& f : fs) {
        CHECK(lia_equivalent(f, f).kind == EquivVerdict::Equivalent);
        CHECK(lia_equivalent(f, f_not(f_not(f))).kind == EquivVerdict::Equivalent);
    }
    std::vector<std::vector<int>> eq(fs.size(), std::vector<int>(fs.size()));
    for (size_t i = 0; i < fs.size(); ++i)
        for (size_t j = 0; j < fs.size(); ++j) {
            auto v = lia_equivalent(fs[i], fs[j]);
            REQUIRE(v.kind != EquivVerdict::Unknown);
            eq[i][j] = v.kind == EquivVerdict::Equivalent;
            if (!eq[i][j]) CHECK(eval(fs[i], v.witness) != eval(fs[j], v.witness));
        }
    for (size_t i = 0; i < fs.size(); ++i)
        for (size_t j = 0; j < fs.size(); ++j) {
            CHECK(eq[i][j] == eq[j][i]);
            for (size_t k = 0; k < fs.size(); ++k)
                if (eq[i][j] && eq[j][k]) CHECK(eq[i][k]);
        }
}

TEST_CASE("condition sets equal brute force") {
    int tried = 0;
    for (unsigned s = 0; tried < 150 && s < 5000; ++s) {
        auto t = table(random_program(s + 6000, true, 2));
        if (t.conds().size() > 6 || t.conds().empty()) continue;
        ++tried;
        auto fam = consistent_condition_sets(t).expand();
        auto brute = consistent_condition_sets_brute(t);
        std::sort(fam.begin(), fam.end());
        std::sort(brute.begin(), brute.end());
        CHECK_MESSAGE(fam == brute, pretty_print(t.program()));
    }
    CHECK(tried == 150);
}
