#include "retreet/blocks.hpp"

#include "retreet/lang.hpp"

#include <functional>
#include <sstream>

namespace retreet {

const char* relation_name(Relation r) {
    switch (r) {
    case Relation::Precedes: return "precedes";
    case Relation::Follows: return "follows";
    case Relation::Branches: return "branches";
    case Relation::Parallel: return "parallel";
    case Relation::DifferentFunctions: return "different-functions";
    }
    return "?";
}

std::string block_name(int s) { return s < 0 ? std::string("main") : "s" + std::to_string(s); }
std::string cond_name(int c) { return "c" + std::to_string(c); }

std::string access_name(const Access& a) {
    std::string s = "self";
    if (!a.disp.empty()) {
        s.clear();
        for (char c : a.disp) s += s.empty() ? std::string(1, c) : std::string(".") + c;
    }
    return s + ":" + a.name;
}

BlockTable::BlockTable(Program p) : prog_(std::move(p)) {
    for (auto& f : prog_.functions) {
        std::vector<Anc> chain;
        number(f, f.body, chain);
    }
    for (auto& b : blocks_) b.path = compute_path(b.chain);
    for (auto& c : conds_) c.path = compute_path(c.chain);
}

void BlockTable::number(const Function& f, const Stmt& s, std::vector<Anc>& chain) {
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(&s);
    if (s.kind == Stmt::BlockS) {
        blocks_.push_back({static_cast<int>(blocks_.size()), f.name, &s.block, s.block.kind == Block::Call, chain, {}});
        return;
    }
    if (s.kind == Stmt::If) conds_.push_back({static_cast<int>(conds_.size()), f.name, s.cond, id, chain, {}});
    for (size_t i = 0; i < s.kids.size(); ++i) {
        chain.push_back({id, s.kind, static_cast<int>(i)});
        number(f, s.kids[i], chain);
        chain.pop_back();
    }
}

int BlockTable::block_of(const Stmt* s) const {
    for (auto& b : blocks_)
        if (b.block == &s->block) return b.id;
    return -1;
}

void BlockTable::collect_blocks(const Stmt& s, std::vector<int>& out) const {
    if (s.kind == Stmt::BlockS) {
        out.push_back(block_of(&s));
        return;
    }
    for (auto& k : s.kids) collect_blocks(k, out);
}

static bool contains_if(const Stmt& s) {
    if (s.kind == Stmt::If) return true;
    for (auto& k : s.kids)
        if (contains_if(k)) return true;
    return false;
}

void BlockTable::linearize(const Stmt& s, Path& out) const {
    switch (s.kind) {
    case Stmt::BlockS: {
        int b = block_of(&s);
        out.push_back({blocks_[b].is_call ? PathEntry::SpeculatedCall : PathEntry::StraightCode, b, -1, true, {}});
        return;
    }
    case Stmt::Seq:
        for (auto& k : s.kids) linearize(k, out);
        return;
    case Stmt::Par:
        if (!contains_if(s)) {
            for (auto& k : s.kids) linearize(k, out);
            return;
        }
        [[fallthrough]];
    case Stmt::If: {
        PathEntry h{PathEntry::Havoc, -1, -1, true, {}};
        collect_blocks(s, h.blocks);
        out.push_back(std::move(h));
        return;
    }
    }
}

Path BlockTable::compute_path(const std::vector<Anc>& chain) const {
    Path out;
    for (auto& a : chain) {
        const Stmt& s = *nodes_[a.node];
        if (s.kind == Stmt::Seq) {
            for (int j = 0; j < a.child; ++j) linearize(s.kids[j], out);
        } else if (s.kind == Stmt::If) {
            int c = -1;
            for (auto& ci : conds_)
                if (ci.node == a.node) c = ci.id;
            out.push_back({PathEntry::Assume, -1, c, a.child == 0, {}});
        }
    }
    return out;
}

std::vector<int> BlockTable::all_calls() const {
    std::vector<int> out;
    for (auto& b : blocks_)
        if (b.is_call) out.push_back(b.id);
    return out;
}

std::vector<int> BlockTable::all_non_calls() const {
    std::vector<int> out;
    for (auto& b : blocks_)
        if (!b.is_call) out.push_back(b.id);
    return out;
}

std::vector<int> BlockTable::blocks_of(const std::string& func) const {
    std::vector<int> out;
    for (auto& b : blocks_)
        if (b.func == func) out.push_back(b.id);
    return out;
}

std::vector<int> BlockTable::conds_of(const std::string& func) const {
    std::vector<int> out;
    for (auto& c : conds_)
        if (c.func == func) out.push_back(c.id);
    return out;
}

const Function& BlockTable::function_of(int s) const { return *prog_.find(blocks_.at(s).func); }

Relation BlockTable::relation(int s, int q) const {
    auto& a = blocks_.at(s);
    auto& b = blocks_.at(q);
    if (a.func != b.func) return Relation::DifferentFunctions;
    size_t n = std::min(a.chain.size(), b.chain.size());
    for (size_t i = 0; i < n; ++i) {
        if (a.chain[i].child == b.chain[i].child) continue;
        switch (a.chain[i].kind) {
        case Stmt::Seq: return a.chain[i].child < b.chain[i].child ? Relation::Precedes : Relation::Follows;
        case Stmt::If: return Relation::Branches;
        case Stmt::Par: return Relation::Parallel;
        default: break;
        }
    }
    throw Error("InternalError", "blocks " + block_name(s) + " and " + block_name(q) + " share a position");
}

std::vector<int> BlockTable::callees(int s) const {
    auto& b = blocks_.at(s);
    if (!b.is_call) throw Error("NotACall", block_name(s) + " is not a call block");
    return blocks_of(b.block->callee);
}

std::vector<int> BlockTable::binders(const std::string& func, const std::string& v) const {
    std::vector<int> out;
    for (auto& b : blocks_) {
        if (b.func != func || !b.is_call) continue;
        for (auto& r : b.block->results)
            if (r == v) out.push_back(b.id);
    }
    return out;
}

RWSets BlockTable::read_write_sets(int s) const {
    auto& b = blocks_.at(s);
    if (b.is_call) throw Error("NotStraight", block_name(s) + " is a call block");
    RWSets rw;
    const std::string& F = b.func;
    auto read_var = [&](const std::string& v) {
        rw.reads.insert({"", F + "." + v});
        for (int c : binders(F, v)) {
            auto& cb = *blocks_[c].block;
            for (size_t k = 0; k < cb.results.size(); ++k)
                if (cb.results[k] == v)
                    rw.reads.insert({cb.loc_arg.path, "ret:" + cb.callee + ":" + std::to_string(k)});
        }
    };
    std::function<void(const AExprP&)> read = [&](const AExprP& e) {
        if (!e) return;
        if (e->kind == AExpr::Field) rw.reads.insert({e->loc.path, e->name});
        if (e->kind == AExpr::Var) read_var(e->name);
        read(e->a);
        read(e->b);
    };
    // Conditions evaluated since the previous block of the function.
    size_t from = 0;
    for (size_t i = 0; i < b.path.size(); ++i)
        if (b.path[i].kind != PathEntry::Assume) from = i + 1;
    for (size_t i = from; i < b.path.size(); ++i) {
        auto& c = conds_[b.path[i].cond].cond;
        if (c->kind == Cond::Pos) read(c->e);
    }
    for (auto& as : b.block->assigns) {
        read(as.rhs);
        for (auto& v : as.values) read(v);
        switch (as.kind) {
        case Assgn::SetVar: rw.writes.insert({"", F + "." + as.name}); break;
        case Assgn::SetField: rw.writes.insert({as.loc.path, as.name}); break;
        case Assgn::SetRet: rw.writes.insert({"", "ret:" + F + ":" + std::to_string(as.slot)}); break;
        case Assgn::Return:
            for (size_t k = 0; k < as.values.size(); ++k) rw.writes.insert({"", "ret:" + F + ":" + std::to_string(k)});
            break;
        case Assgn::SetLoc: break;
        }
    }
    return rw;
}

std::string print_path(const BlockTable& t, const Path& p) {
    std::string s;
    for (auto& e : p) {
        if (!s.empty()) s += "; ";
        switch (e.kind) {
        case PathEntry::StraightCode:
        case PathEntry::SpeculatedCall: s += block_name(e.block); break;
        case PathEntry::Assume:
            s += std::string("assume(") + (e.polarity ? "" : "!") + cond_name(e.cond) + ": " +
                 print_cond(t.cond(e.cond).cond) + ")";
            break;
        case PathEntry::Havoc: {
            s += "havoc(";
            for (size_t i = 0; i < e.blocks.size(); ++i) s += (i ? " " : "") + block_name(e.blocks[i]);
            s += ")";
            break;
        }
        }
    }
    return s;
}

static std::string join_ids(const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += " " + block_name(x);
    return s;
}

std::string dump_block_table(const BlockTable& t) {
    std::ostringstream os;
    for (auto& f : t.program().functions) {
        os << "function " << f.name << " params " << f.loc_param;
        for (auto& p : f.int_params) os << " " << p;
        os << " arity " << f.return_arity << " blocks" << join_ids(t.blocks_of(f.name)) << "\n";
    }
    os << "calls" << join_ids(t.all_calls()) << "\n";
    os << "noncalls" << join_ids(t.all_non_calls()) << "\n";
    for (auto& c : t.conds()) os << "cond " << cond_name(c.id) << " " << c.func << " " << print_cond(c.cond) << "\n";
    for (auto& b : t.blocks()) {
        os << "block " << block_name(b.id) << " " << b.func << " " << (b.is_call ? "call" : "straight") << " "
           << print_block(*b.block) << "\n";
        os << "path " << block_name(b.id) << " [" << print_path(t, b.path) << "]\n";
    }
    for (auto& b : t.blocks())
        if (b.is_call) os << "callees " << block_name(b.id) << join_ids(t.callees(b.id)) << "\n";
    for (auto& a : t.blocks())
        for (auto& b : t.blocks())
            if (a.id < b.id && a.func == b.func)
                os << "relation " << block_name(a.id) << " " << block_name(b.id) << " "
                   << relation_name(t.relation(a.id, b.id)) << "\n";
    for (auto& b : t.blocks()) {
        if (b.is_call) continue;
        auto rw = t.read_write_sets(b.id);
        os << "rw " << block_name(b.id) << " reads";
        for (auto& a : rw.reads) os << " " << access_name(a);
        os << " writes";
        for (auto& a : rw.writes) os << " " << access_name(a);
        os << "\n";
    }
    return os.str();
}

}  // namespace retreet
