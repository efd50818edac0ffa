#pragma once

#include "retreet/blocks.hpp"
#include "retreet/logic.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace retreet {

// Position term: a first-order variable (or "root") followed by l/r steps.
struct PosTerm {
    std::string var;
    NodePath path;
    bool operator==(const PosTerm& o) const { return var == o.var && path == o.path; }
};

struct Mso;
using MsoP = std::shared_ptr<const Mso>;

struct Mso {
    enum Kind { True, False, In, Eq, IsNil, Reach, Not, And, Or, Implies, Iff, Ex1, All1, Ex2, All2 };
    Kind kind = True;
    PosTerm a, b;    // In: a; Eq: a = b; IsNil: a; Reach: a strictly above b
    std::string set;  // In
    std::vector<MsoP> kids;
    std::vector<std::string> vars;  // quantifiers
};

MsoP m_true();
MsoP m_false();
MsoP m_in(const PosTerm& t, const std::string& set);
MsoP m_eq(const PosTerm& a, const PosTerm& b);
MsoP m_isnil(const PosTerm& t);
MsoP m_reach(const PosTerm& a, const PosTerm& b);
MsoP m_not(const MsoP& f);
MsoP m_and(std::vector<MsoP> fs);
MsoP m_or(std::vector<MsoP> fs);
MsoP m_implies(const MsoP& a, const MsoP& b);
MsoP m_iff(const MsoP& a, const MsoP& b);
MsoP m_ex1(const std::vector<std::string>& vs, const MsoP& f);
MsoP m_all1(const std::vector<std::string>& vs, const MsoP& f);
MsoP m_ex2(const std::vector<std::string>& vs, const MsoP& f);
MsoP m_all2(const std::vector<std::string>& vs, const MsoP& f);

size_t mso_size(const MsoP& f);

// Set-variable names for one configuration: <prefix>L_<block>, <prefix>C_<cond>.
struct LabelFamily {
    std::string prefix;
    std::string block(int s) const;  // -1 is main
    std::string cond(int c) const;
};

struct EncodeOptions {
    bool node_level = false;  // literal node-overlap Dependence instead of name-sensitive
};

// One configuration family of a query: which program it ranges over and the
// first-order variable naming its current node.
struct FamilyRef {
    LabelFamily labels;
    int program;  // index into Query::programs
    std::string anchor;
};

// One disjunct of a query, kept as separate conjuncts so the bounded backend
// can check partial assignments.
struct Disjunct {
    std::string name;  // "s3|s7"
    std::vector<int> current;  // non-call block per family, same order as families
    std::vector<MsoP> conjuncts;
    std::vector<std::vector<int>> needs;  // families each conjunct mentions
};

struct Query {
    std::string kind;  // "race" or "conflict"
    std::vector<const BlockTable*> programs;
    std::vector<CondSetFamily> cond_families;  // per program
    std::vector<FamilyRef> families;
    std::vector<std::string> first_order;  // x1, x2
    std::vector<Disjunct> disjuncts;
    std::string alloc = "T";
    EncodeOptions options;

    MsoP formula() const;  // the disjunction; the property holds iff it is unsatisfiable
    std::vector<std::string> set_vars() const;
};

class Encoder {
public:
    Encoder(const BlockTable& t, const CondSetFamily& cs, EncodeOptions opt = {});

    MsoP path_cond(const LabelFamily& f, int s, int t, const PosTerm& u, const PosTerm& v) const;
    MsoP next(const LabelFamily& f, const PosTerm& u, int s, int t);
    MsoP prev(const LabelFamily& f, const PosTerm& u, int t);
    MsoP configuration(const LabelFamily& f, int q, const PosTerm& v);
    MsoP consistent(const LabelFamily& a, const LabelFamily& b, int s, int t1, int t2);
    MsoP ordered(const LabelFamily& a, const LabelFamily& b);
    MsoP parallel(const LabelFamily& a, const LabelFamily& b);
    MsoP overlap(int q1, const PosTerm& x1, int q2, const PosTerm& x2) const;
    MsoP dependence(int q1, int q2, const PosTerm& x1, const PosTerm& x2, const LabelFamily& a, const LabelFamily& b);

    // Callers of t: call blocks whose callee contains t, and -1 for Main's blocks.
    std::vector<int> callers(int t) const;
    // Blocks of the function a call (or main, -1) enters.
    std::vector<int> entered(int s) const;
    bool conflicting(int q1, int q2) const;
    const BlockTable& table() const { return t_; }

private:
    const BlockTable& t_;
    CondSetFamily cs_;
    EncodeOptions opt_;
    std::vector<int> int_conds_;
    int fresh_ = 0;
    std::string fresh(const std::string& base);
};

Query build_datarace(const BlockTable& t, const CondSetFamily& cs, EncodeOptions opt = {});

// Correspondence used by Conflict: non-call blocks of P to those of P', and the
// call relation R.
struct BisimRelation {
    std::vector<std::pair<int, int>> calls;
    std::map<int, int> noncalls;
    std::string provenance;
};

// Throws Error("BisimMissing") when r is null.
Query build_conflict(const BlockTable& p, const CondSetFamily& cp, const BlockTable& p2, const CondSetFamily& cp2,
                     const BisimRelation* r, EncodeOptions opt = {});

// MONA input (tree mode). The emitted formula is the negated query, so
// "valid" means the property holds and a counter-example is a witness.
std::string emit_ws2s(const Query& q);
std::string print_mso(const MsoP& f);

// Finite structure for evaluation: positions are node paths.
struct Structure {
    std::set<NodePath> tree;  // allocated nodes
    std::map<std::string, std::set<NodePath>> sets;
    std::map<std::string, NodePath> firsts;
    std::vector<NodePath> universe() const;  // tree, its children, and the root
};

bool evaluate(const MsoP& f, const Structure& s);

struct Record {
    int block;  // -1 main
    NodePath node;
};

struct Witness {
    std::set<NodePath> tree;
    std::vector<std::vector<Record>> configurations;  // one per family
    std::string disjunct;
    int q1 = -1, q2 = -1;
    NodePath x1, x2;
    std::optional<NodePath> shared;  // accessed node, when decodable
    std::map<std::string, std::set<NodePath>> labels;
};

struct Verdict {
    enum Kind { FormulaInvalid, Counterexample, SolverError, NoCounterexampleWithinBound };
    Kind kind = SolverError;
    std::optional<Witness> witness;
    std::string text;
};

// Rebuilds record stacks from a model. Throws Error("DecodeError").
Witness decode_witness(const Structure& model, const Query& q, int depth_cap = 12);

// Parses MONA output; Counterexample verdicts carry the decoded structure.
struct SolverOutput {
    Verdict::Kind kind;
    std::optional<Structure> model;
    std::string text;
};
SolverOutput parse_solver_output(const std::string& text);

struct SolverOptions {
    std::string binary;  // empty: $RETREET_MONA, then "mona" on PATH
    std::string work_dir = ".";
    std::string name = "query";
    int timeout_s = 3600;
};

std::string find_solver(const SolverOptions& opt);
Verdict run_solver(const Query& q, const SolverOptions& opt);

struct BoundedOptions {
    int max_height = 2;
    size_t max_candidates = 5'000'000;
};

// Enumerates stack-shaped labelings on small trees and re-checks each with
// evaluate(). Finding nothing proves nothing beyond the bound.
Verdict bounded_search(const Query& q, const BoundedOptions& opt = {});

// Every configuration (record stack plus condition labels) ending at a
// non-call block on the given node of the tree shape.
struct AbstractConfig {
    std::vector<Record> records;
    std::map<std::string, std::set<NodePath>> labels;  // L and C sets for a family
};
std::vector<AbstractConfig> enumerate_configurations(const BlockTable& t, const CondSetFamily& cs,
                                                     const LabelFamily& f, const std::set<NodePath>& tree,
                                                     const NodePath& at, int q = -1);

std::string witness_json(const Witness& w, const Query& q);
std::string print_witness(const Witness& w, const Query& q);

}  // namespace retreet
