#pragma once

#include "retreet/ast.hpp"

#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace retreet {

struct PathEntry {
    enum Kind { StraightCode, SpeculatedCall, Assume, Havoc };
    Kind kind;
    int block = -1;           // StraightCode / SpeculatedCall
    int cond = -1;            // Assume
    bool polarity = true;     // Assume: true when the then-branch is taken
    std::vector<int> blocks;  // Havoc: every block of the skipped statement
};

using Path = std::vector<PathEntry>;

// One step of the ancestor chain of a block: statement node, its kind and the
// child index taken towards the block.
struct Anc {
    int node;
    Stmt::Kind kind;
    int child;
};

struct BlockInfo {
    int id;
    std::string func;
    const Block* block;
    bool is_call;
    std::vector<Anc> chain;
    Path path;
};

struct CondInfo {
    int id;
    std::string func;
    CondP cond;  // atomic
    int node;    // owning If node
    std::vector<Anc> chain;
    Path path;  // entries executed before the test
};

// (displacement from the activation node, name). Fields use their own name,
// locals "F.v" and return slots "ret:F:k".
struct Access {
    NodePath disp;
    std::string name;
    bool operator<(const Access& o) const { return std::tie(disp, name) < std::tie(o.disp, o.name); }
    bool operator==(const Access& o) const { return disp == o.disp && name == o.name; }
};

struct RWSets {
    std::set<Access> reads, writes;
};

enum class Relation { Precedes, Follows, Branches, Parallel, DifferentFunctions };
const char* relation_name(Relation r);

class BlockTable {
public:
    explicit BlockTable(Program p);
    BlockTable(const BlockTable&) = delete;
    BlockTable& operator=(const BlockTable&) = delete;
    BlockTable(BlockTable&&) = default;

    const Program& program() const { return prog_; }
    const std::vector<BlockInfo>& blocks() const { return blocks_; }
    const std::vector<CondInfo>& conds() const { return conds_; }
    const BlockInfo& block(int s) const { return blocks_.at(s); }
    const CondInfo& cond(int c) const { return conds_.at(c); }

    std::vector<int> all_calls() const;
    std::vector<int> all_non_calls() const;
    std::vector<int> blocks_of(const std::string& func) const;
    std::vector<int> conds_of(const std::string& func) const;
    const Function& function_of(int s) const;

    Relation relation(int s, int q) const;
    // Throws Error("NotACall") for non-call blocks.
    std::vector<int> callees(int s) const;
    // Throws Error("NotStraight") for call blocks.
    RWSets read_write_sets(int s) const;
    // Call blocks of s's function that bind variable v.
    std::vector<int> binders(const std::string& func, const std::string& v) const;

private:
    Program prog_;
    std::vector<BlockInfo> blocks_;
    std::vector<CondInfo> conds_;
    std::vector<const Stmt*> nodes_;

    void number(const Function& f, const Stmt& s, std::vector<Anc>& chain);
    void collect_blocks(const Stmt& s, std::vector<int>& out) const;
    void linearize(const Stmt& s, Path& out) const;
    Path compute_path(const std::vector<Anc>& chain) const;
    int block_of(const Stmt* s) const;
};

std::string block_name(int s);
std::string cond_name(int c);
std::string access_name(const Access& a);
std::string print_path(const BlockTable& t, const Path& p);
std::string dump_block_table(const BlockTable& t);

}  // namespace retreet
