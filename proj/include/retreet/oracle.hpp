#pragma once

#include "retreet/blocks.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace retreet {

using Cell = std::pair<NodePath, std::string>;  // (node from the root, field)
using Store = std::map<Cell, long long>;

// Nodes are paths from the root; an empty node set is the nil tree.
struct ConcreteTree {
    std::set<NodePath> nodes;
    Store fields;  // missing entries read as 0

    bool has(const NodePath& p) const { return nodes.count(p) > 0; }
    int height() const;
    bool operator==(const ConcreteTree& o) const { return nodes == o.nodes && fields == o.fields; }
};

// "(. (.) -)" style: "-" is nil, "." a node, fields as {f=1}.
std::string print_tree(const ConcreteTree& t);
ConcreteTree parse_tree(const std::string& s);

std::vector<std::set<NodePath>> tree_shapes(int max_height);
// Exhaustive, deterministic. Throws Error("BudgetExceeded") past `budget` trees.
std::vector<ConcreteTree> enumerate_trees(int max_height, const std::vector<long long>& domain,
                                          const std::vector<std::string>& fields, size_t budget = 1u << 20);
std::vector<std::string> field_names(const Program& p);

struct Iteration {
    int block;
    NodePath node;
    size_t pre_hash;
};

struct Trace {
    std::vector<Iteration> iterations;
    Store store;  // final fields of present nodes, written or read
    std::vector<long long> returns;
    bool same_run(const Trace& o) const;
};

struct OracleOptions {
    bool stmt_atomic = false;     // interleave single assignments instead of blocks
    size_t max_steps = 1u << 20;  // per run
    size_t max_traces = 1u << 16;
};

// Every interleaving of Par branches; duplicates removed.
std::vector<Trace> interpret_all(const BlockTable& t, const ConcreteTree& tree, const OracleOptions& opt = {});
// The leftmost-first schedule.
Trace interpret(const BlockTable& t, const ConcreteTree& tree, const OracleOptions& opt = {});
// Distinct (store, returns) outcomes over all interleavings, by memoized search.
std::set<std::pair<Store, std::vector<long long>>> reachable_outcomes(const BlockTable& t, const ConcreteTree& tree,
                                                                      const OracleOptions& opt = {});

struct SharedCell {
    NodePath node;
    std::string name;  // field name or "F.v" / "F.ret:k" for activation locals
};

struct RaceWitness {
    ConcreteTree tree;
    Iteration a, b;
    SharedCell shared;
    Trace a_first, b_first;
};

std::optional<RaceWitness> oracle_datarace(const BlockTable& t, const ConcreteTree& tree, const OracleOptions& opt = {});

struct EquivResult {
    enum Kind { Equal, Differ, NotApplicable };
    Kind kind = Equal;
    ConcreteTree tree;
    Trace left, right;  // Differ
    std::string reason;
};

EquivResult oracle_equivalent(const BlockTable& a, const BlockTable& b, const ConcreteTree& tree,
                              const OracleOptions& opt = {});

// Sweeps over all trees up to a height. Field values are enumerated lazily:
// only cells some run actually reads are branched on, the rest keep one value.
struct SweepOptions {
    int max_height = 2;
    std::vector<long long> domain{0, 1};
    size_t budget = 1u << 22;  // runs
    OracleOptions oracle;
};

struct RaceSweep {
    std::optional<RaceWitness> witness;
    size_t runs = 0;
};

struct EquivSweep {
    EquivResult result;
    size_t runs = 0;
};

RaceSweep sweep_datarace(const BlockTable& t, const SweepOptions& opt = {});
EquivSweep sweep_equivalent(const BlockTable& a, const BlockTable& b, const SweepOptions& opt = {});

// Reordering: block_a@node_a runs before block_b@node_b in p, while their
// counterparts block_a2@node_a and block_b2@node_b run in the opposite order in p2.
struct ReplayClaim {
    enum Kind { Race, Inequivalence, Reordering };
    Kind kind = Race;
    ConcreteTree tree;
    int block_a = -1, block_b = -1;  // Race: optional blocks the race must involve
    NodePath node_a, node_b;
    int block_a2 = -1, block_b2 = -1;
};

enum class ReplayVerdict { Confirmed, Unconfirmed };

ReplayVerdict replay(const ReplayClaim& c, const BlockTable& p, const BlockTable* p2 = nullptr,
                     const OracleOptions& opt = {});

}  // namespace retreet
