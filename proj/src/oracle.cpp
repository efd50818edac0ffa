#include "retreet/oracle.hpp"

#include "retreet/lang.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace retreet {

int ConcreteTree::height() const {
    size_t h = 0;
    for (auto& p : nodes) h = std::max(h, p.size() + 1);
    return static_cast<int>(h);
}

static void print_node(const ConcreteTree& t, const NodePath& p, std::string& out) {
    if (!t.has(p)) {
        out += "-";
        return;
    }
    out += "(";
    std::string label;
    for (auto it = t.fields.lower_bound({p, ""}); it != t.fields.end() && it->first.first == p; ++it)
        label += (label.empty() ? "" : ",") + it->first.second + "=" + std::to_string(it->second);
    out += label.empty() ? "." : "{" + label + "}";
    out += " ";
    print_node(t, p + "l", out);
    out += " ";
    print_node(t, p + "r", out);
    out += ")";
}

std::string print_tree(const ConcreteTree& t) {
    std::string s;
    print_node(t, "", s);
    return s;
}

namespace {

struct TreeReader {
    const std::string& s;
    size_t i = 0;
    ConcreteTree t;

    void ws() {
        while (i < s.size() && isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw Error("ParseError", "tree text, column " + std::to_string(i + 1) + ": " + what);
    }
    void expect(char c) {
        ws();
        if (i >= s.size() || s[i] != c) fail(std::string("expected '") + c + "'");
        ++i;
    }
    void node(const NodePath& p) {
        ws();
        if (i < s.size() && s[i] == '-') {
            ++i;
            return;
        }
        expect('(');
        t.nodes.insert(p);
        ws();
        if (i < s.size() && s[i] == '.') {
            ++i;
        } else {
            expect('{');
            while (true) {
                ws();
                size_t b = i;
                while (i < s.size() && (isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
                if (b == i) fail("expected a field name");
                std::string f = s.substr(b, i - b);
                expect('=');
                ws();
                size_t e = i;
                if (i < s.size() && s[i] == '-') ++i;
                while (i < s.size() && isdigit(static_cast<unsigned char>(s[i]))) ++i;
                if (e == i) fail("expected a value");
                t.fields[{p, f}] = std::stoll(s.substr(e, i - e));
                ws();
                if (i < s.size() && s[i] == ',') {
                    ++i;
                    continue;
                }
                expect('}');
                break;
            }
        }
        node(p + "l");
        node(p + "r");
        expect(')');
    }
};

}  // namespace

ConcreteTree parse_tree(const std::string& s) {
    TreeReader r{s, 0, {}};
    r.node("");
    r.ws();
    if (r.i != s.size()) r.fail("trailing text");
    return r.t;
}

static void shapes_below(int h, const NodePath& p, std::vector<std::set<NodePath>>& out) {
    out.push_back({});
    if (h == 0) return;
    std::vector<std::set<NodePath>> ls, rs;
    shapes_below(h - 1, p + "l", ls);
    shapes_below(h - 1, p + "r", rs);
    for (auto& l : ls)
        for (auto& r : rs) {
            std::set<NodePath> s{p};
            s.insert(l.begin(), l.end());
            s.insert(r.begin(), r.end());
            out.push_back(std::move(s));
        }
}

std::vector<std::set<NodePath>> tree_shapes(int max_height) {
    std::vector<std::set<NodePath>> out;
    shapes_below(std::max(max_height, 0), "", out);
    return out;
}

std::vector<ConcreteTree> enumerate_trees(int max_height, const std::vector<long long>& domain,
                                          const std::vector<std::string>& fields, size_t budget) {
    std::vector<ConcreteTree> out;
    for (auto& shape : tree_shapes(max_height)) {
        std::vector<Cell> cells;
        for (auto& n : shape)
            for (auto& f : fields) cells.push_back({n, f});
        std::vector<size_t> digit(cells.size(), 0);
        while (true) {
            if (out.size() >= budget) throw Error("BudgetExceeded", "more than " + std::to_string(budget) + " trees");
            ConcreteTree t;
            t.nodes = shape;
            for (size_t i = 0; i < cells.size(); ++i) t.fields[cells[i]] = domain[digit[i]];
            out.push_back(std::move(t));
            size_t i = 0;
            while (i < digit.size() && ++digit[i] == domain.size()) digit[i++] = 0;
            if (i == digit.size()) break;
        }
    }
    return out;
}

static void fields_in(const AExprP& e, std::set<std::string>& out) {
    if (!e) return;
    if (e->kind == AExpr::Field) out.insert(e->name);
    fields_in(e->a, out);
    fields_in(e->b, out);
}

static void fields_in(const CondP& c, std::set<std::string>& out) {
    if (!c) return;
    fields_in(c->e, out);
    fields_in(c->lhs, out);
    fields_in(c->rhs, out);
    fields_in(c->a, out);
    fields_in(c->b, out);
}

static void fields_in(const Stmt& s, std::set<std::string>& out) {
    fields_in(s.cond, out);
    for (auto& a : s.block.int_args) fields_in(a, out);
    for (auto& a : s.block.assigns) {
        if (a.kind == Assgn::SetField) out.insert(a.name);
        fields_in(a.rhs, out);
        for (auto& v : a.values) fields_in(v, out);
    }
    for (auto& k : s.kids) fields_in(k, out);
}

std::vector<std::string> field_names(const Program& p) {
    std::set<std::string> out;
    for (auto& f : p.functions) fields_in(f.body, out);
    return {out.begin(), out.end()};
}

bool Trace::same_run(const Trace& o) const {
    if (iterations.size() != o.iterations.size() || store != o.store || returns != o.returns) return false;
    for (size_t i = 0; i < iterations.size(); ++i)
        if (iterations[i].block != o.iterations[i].block || iterations[i].node != o.iterations[i].node) return false;
    return true;
}

namespace {

struct NeedCell {
    Cell cell;
};

// Static statement numbering shared by every run of one program.
struct Ctx {
    const BlockTable& t;
    std::vector<const Stmt*> stmts;
    std::vector<std::vector<Anc>> chain;
    std::map<const Stmt*, int> id;
    std::map<const Block*, int> block_id;
    std::map<const Cond*, int> cond_id;
    std::map<std::string, int> body;

    explicit Ctx(const BlockTable& tb) : t(tb) {
        for (auto& b : t.blocks()) block_id[b.block] = b.id;
        for (auto& c : t.conds()) cond_id[c.cond.get()] = c.id;
        for (auto& f : t.program().functions) {
            std::vector<Anc> ch;
            body[f.name] = walk(f.body, ch);
        }
    }

    int walk(const Stmt& s, std::vector<Anc>& ch) {
        int me = static_cast<int>(stmts.size());
        stmts.push_back(&s);
        chain.push_back(ch);
        id[&s] = me;
        for (size_t i = 0; i < s.kids.size(); ++i) {
            ch.push_back({me, s.kind, static_cast<int>(i)});
            walk(s.kids[i], ch);
            ch.pop_back();
        }
        return me;
    }

    // True when two positions in one activation lie in different Par branches.
    bool parallel(int a, int b) const {
        auto& ca = chain[a];
        auto& cb = chain[b];
        for (size_t i = 0; i < ca.size() && i < cb.size(); ++i) {
            if (ca[i].node != cb[i].node) return false;
            if (ca[i].child != cb[i].child) return ca[i].kind == Stmt::Par;
        }
        return false;
    }

    // Whether position p sits inside child k of Par node par.
    bool inside(int p, int par, int k) const {
        for (auto& a : chain[p])
            if (a.node == par) return a.child == k;
        return false;
    }
};

struct Event {
    std::vector<int> stack;
    int pos;
    int block;
    NodePath node;
    std::vector<std::string> reads, writes;
};

bool events_parallel(const Ctx& c, const Event& a, const Event& b) {
    for (size_t i = 0;; ++i) {
        bool ea = i >= a.stack.size(), eb = i >= b.stack.size();
        int x = ea ? a.pos : a.stack[i];
        int y = eb ? b.pos : b.stack[i];
        if (x != y) return c.parallel(x, y);
        if (ea || eb) return false;
    }
}

struct Frame {
    NodePath node;
    const Function* fn;
    std::map<std::string, long long> locals;
    std::vector<long long> ret;
    std::vector<int> stack;
    std::string act;
    int caller = -1;
};

struct Item {
    bool ret;  // binding of a finished call's results
    int node;
    int frame;
    int idx;
};

struct Task {
    std::vector<Item> cont;
    int parent = -1;
    int waiting = 0;
    bool done = false;
    std::vector<int> spawn_stack;
    int spawn_par = -1;
    int spawn_child = 0;
};

std::string field_key(const NodePath& p, const std::string& f) { return "n" + p + "." + f; }

SharedCell describe(const std::string& key) {
    if (key[0] == 'n') {
        auto dot = key.find('.');
        return {key.substr(1, dot - 1), key.substr(dot + 1)};
    }
    auto a = key.find('|'), b = key.find('|', a + 1);
    return {key.substr(a + 1, b - a - 1), key.substr(b + 1)};
}

struct Machine {
    const Ctx* c;
    const ConcreteTree* tree;
    const OracleOptions* opt;
    bool lazy = false;
    Store written;
    std::vector<Frame> frames;
    std::vector<Task> tasks;
    std::vector<Iteration> its;
    std::vector<Event> events;
    Event* cur = nullptr;
    size_t steps = 0;

    Machine(const Ctx& ctx, const ConcreteTree& t, const OracleOptions& o, bool lz) : c(&ctx), tree(&t), opt(&o), lazy(lz) {
        const Function* m = ctx.t.program().find(ctx.t.program().entry);
        if (!m) throw Error("UnknownFunction", "program has no Main");
        Frame f;
        f.node = "";
        f.fn = m;
        for (auto& p : m->int_params) f.locals[p] = 0;
        f.ret.assign(m->return_arity, 0);
        frames.push_back(std::move(f));
        Task root;
        root.cont.push_back({false, ctx.body.at(m->name), 0, 0});
        tasks.push_back(std::move(root));
        settle(0);
    }

    long long read_cell(const NodePath& p, const std::string& f) {
        if (!tree->has(p)) throw Error("NilDereference", "read of field " + f + " on a nil node");
        if (cur) cur->reads.push_back(field_key(p, f));
        auto w = written.find({p, f});
        if (w != written.end()) return w->second;
        auto in = tree->fields.find({p, f});
        if (in != tree->fields.end()) return in->second;
        if (lazy) throw NeedCell{{p, f}};
        return 0;
    }

    std::string local_key(const Frame& fr, const std::string& v) const {
        return "a" + fr.act + "|" + fr.node + "|" + fr.fn->name + "." + v;
    }

    long long eval(const Frame& fr, const AExprP& e) {
        switch (e->kind) {
        case AExpr::Const: return e->value;
        case AExpr::Var: {
            if (cur) cur->reads.push_back(local_key(fr, e->name));
            auto it = fr.locals.find(e->name);
            return it == fr.locals.end() ? 0 : it->second;
        }
        case AExpr::Field: return read_cell(fr.node + e->loc.path, e->name);
        case AExpr::Add: return eval(fr, e->a) + eval(fr, e->b);
        case AExpr::Sub: return eval(fr, e->a) - eval(fr, e->b);
        case AExpr::Neg: return -eval(fr, e->a);
        case AExpr::Loc: break;
        }
        throw Error("NotArithmetic", "node expression evaluated as an integer");
    }

    bool test(const Frame& fr, const CondP& cd) {
        switch (cd->kind) {
        case Cond::True: return true;
        case Cond::False: return false;
        case Cond::IsNil: return !tree->has(fr.node + cd->loc.path);
        case Cond::Pos: return eval(fr, cd->e) > 0;
        default: throw Error("NonAtomicCond", "program must be normalized before interpretation");
        }
    }

    void set_ret(int fi, size_t k, long long v) {
        Frame& fr = frames[fi];
        if (fr.ret.size() <= k) fr.ret.resize(k + 1, 0);
        fr.ret[k] = v;
        if (cur) cur->writes.push_back(local_key(fr, "ret:" + std::to_string(k)));
    }

    void assign(int fi, const Assgn& a) {
        switch (a.kind) {
        case Assgn::SetVar: {
            long long v = eval(frames[fi], a.rhs);
            frames[fi].locals[a.name] = v;
            if (cur) cur->writes.push_back(local_key(frames[fi], a.name));
            break;
        }
        case Assgn::SetField: {
            NodePath p = frames[fi].node + a.loc.path;
            long long v = eval(frames[fi], a.rhs);
            if (!tree->has(p)) throw Error("NilDereference", "write of field " + a.name + " on a nil node");
            written[{p, a.name}] = v;
            if (cur) cur->writes.push_back(field_key(p, a.name));
            break;
        }
        case Assgn::SetRet: set_ret(fi, a.slot, eval(frames[fi], a.rhs)); break;
        case Assgn::Return: {
            std::vector<long long> vs;
            for (auto& e : a.values) vs.push_back(eval(frames[fi], e));
            for (size_t i = 0; i < vs.size(); ++i) set_ret(fi, i, vs[i]);
            break;
        }
        case Assgn::SetLoc: throw Error("TreeMutation", "location assignment cannot be interpreted");
        }
    }

    // Runs silent moves (sequencing, forks, joins) until the task faces an action.
    void settle(int ti) {
        while (true) {
            if (tasks[ti].done || tasks[ti].waiting > 0) return;
            if (tasks[ti].cont.empty()) {
                tasks[ti].done = true;
                int p = tasks[ti].parent;
                if (p >= 0 && --tasks[p].waiting == 0) settle(p);
                return;
            }
            Item it = tasks[ti].cont.back();
            if (it.ret) return;
            const Stmt& s = *c->stmts[it.node];
            if (s.kind == Stmt::Seq) {
                tasks[ti].cont.pop_back();
                for (size_t k = s.kids.size(); k-- > 0;) tasks[ti].cont.push_back({false, c->id.at(&s.kids[k]), it.frame, 0});
            } else if (s.kind == Stmt::Par) {
                tasks[ti].cont.pop_back();
                tasks[ti].waiting = 2;
                int first = static_cast<int>(tasks.size());
                for (int k = 0; k < 2; ++k) {
                    Task ch;
                    ch.parent = ti;
                    ch.cont.push_back({false, c->id.at(&s.kids[k]), it.frame, 0});
                    ch.spawn_stack = frames[it.frame].stack;
                    ch.spawn_par = it.node;
                    ch.spawn_child = k;
                    tasks.push_back(std::move(ch));
                }
                settle(first);
                settle(first + 1);
            } else {
                return;
            }
        }
    }

    std::vector<int> enabled() const {
        std::vector<int> out;
        for (size_t i = 0; i < tasks.size(); ++i)
            if (!tasks[i].done && tasks[i].waiting == 0 && !tasks[i].cont.empty()) out.push_back(static_cast<int>(i));
        return out;
    }

    size_t store_hash() const {
        std::string s;
        for (auto& [k, v] : written) s += k.first + "." + k.second + "=" + std::to_string(v) + ";";
        return std::hash<std::string>{}(s);
    }

    // One scheduling step: silent control actions up to and including one
    // straight block (one assignment under stmt_atomic).
    void act(int ti) {
        while (true) {
            bool block = micro(ti);
            if (block) return;
            auto& tk = tasks[ti];
            if (tk.done || tk.waiting > 0 || tk.cont.empty()) return;
        }
    }

    bool micro(int ti) {
        if (++steps > opt->max_steps) throw Error("BudgetExceeded", "run exceeded " + std::to_string(opt->max_steps) + " steps");
        Item it = tasks[ti].cont.back();
        tasks[ti].cont.pop_back();
        Event ev;
        ev.stack = frames[it.frame].stack;
        ev.pos = it.node;
        ev.block = -1;
        ev.node = frames[it.frame].node;
        cur = &ev;
        const Stmt& s = *c->stmts[it.node];
        if (it.ret) {
            int callee = it.frame, caller = frames[callee].caller;
            ev.stack = frames[caller].stack;
            ev.node = frames[caller].node;
            ev.block = c->block_id.at(&s.block);
            for (size_t k = 0; k < s.block.results.size(); ++k) {
                auto& r = frames[callee].ret;
                long long v = k < r.size() ? r[k] : 0;
                ev.reads.push_back(local_key(frames[callee], "ret:" + std::to_string(k)));
                frames[caller].locals[s.block.results[k]] = v;
                ev.writes.push_back(local_key(frames[caller], s.block.results[k]));
            }
        } else if (s.kind == Stmt::If) {
            bool v = test(frames[it.frame], s.cond);
            tasks[ti].cont.push_back({false, c->id.at(&s.kids[v ? 0 : 1]), it.frame, 0});
        } else if (s.block.kind == Block::Straight) {
            ev.block = c->block_id.at(&s.block);
            if (it.idx == 0) its.push_back({ev.block, ev.node, store_hash()});
            auto& as = s.block.assigns;
            if (opt->stmt_atomic) {
                if (!as.empty()) assign(it.frame, as[it.idx]);
                if (it.idx + 1 < static_cast<int>(as.size())) tasks[ti].cont.push_back({false, it.node, it.frame, it.idx + 1});
            } else {
                for (auto& a : as) assign(it.frame, a);
            }
        } else {
            ev.block = c->block_id.at(&s.block);
            const Function* g = c->t.program().find(s.block.callee);
            if (!g) throw Error("UnresolvedCall", "call to unknown function " + s.block.callee);
            if (frames.size() > 100000) throw Error("BudgetExceeded", "too many activations");
            Frame nf;
            nf.node = frames[it.frame].node + s.block.loc_arg.path;
            nf.fn = g;
            for (size_t i = 0; i < g->int_params.size(); ++i)
                nf.locals[g->int_params[i]] = i < s.block.int_args.size() ? eval(frames[it.frame], s.block.int_args[i]) : 0;
            nf.ret.assign(g->return_arity, 0);
            nf.stack = frames[it.frame].stack;
            nf.stack.push_back(it.node);
            for (int x : nf.stack) nf.act += std::to_string(x) + ",";
            nf.caller = it.frame;
            int fi = static_cast<int>(frames.size());
            frames.push_back(std::move(nf));
            tasks[ti].cont.push_back({true, it.node, fi, 0});
            tasks[ti].cont.push_back({false, c->body.at(g->name), fi, 0});
        }
        cur = nullptr;
        bool block = !it.ret && s.kind == Stmt::BlockS && s.block.kind == Block::Straight;
        events.push_back(std::move(ev));
        settle(ti);
        return block;
    }

    bool contains(const Task& tk, const Event& target) const {
        if (tk.spawn_par < 0) return true;
        auto& S = tk.spawn_stack;
        if (target.stack.size() < S.size() || !std::equal(S.begin(), S.end(), target.stack.begin())) return false;
        int p = target.stack.size() > S.size() ? target.stack[S.size()] : target.pos;
        return c->inside(p, tk.spawn_par, tk.spawn_child);
    }

    // Leftmost-first; with a target, its branch runs first until it fires.
    void run(const Event* target = nullptr) {
        bool hit = target == nullptr;
        while (true) {
            auto en = enabled();
            if (en.empty()) break;
            int pick = en[0];
            if (!hit)
                for (int ti : en)
                    if (contains(tasks[ti], *target)) {
                        pick = ti;
                        break;
                    }
            size_t from = events.size();
            act(pick);
            for (size_t i = from; i < events.size() && !hit; ++i)
                hit = events[i].stack == target->stack && events[i].pos == target->pos;
        }
    }

    Trace trace() const {
        Trace t;
        t.iterations = its;
        for (auto& [k, v] : tree->fields)
            if (tree->has(k.first) && v != 0) t.store[k] = v;
        for (auto& [k, v] : written) {
            if (v != 0) t.store[k] = v;
            else t.store.erase(k);
        }
        t.returns = frames[0].ret;
        return t;
    }

    // Canonical: frames named by call stack, tasks by spawn point, so the same
    // state reached through different interleavings gets one key.
    std::string state_key() const {
        auto task_name = [&](const Task& t) {
            std::string n;
            for (int x : t.spawn_stack) n += std::to_string(x) + ",";
            return n + "^" + std::to_string(t.spawn_par) + "." + std::to_string(t.spawn_child);
        };
        std::set<int> live;
        std::map<std::string, std::string> ts;
        for (auto& t : tasks) {
            if (t.done) continue;
            std::ostringstream o;
            o << t.waiting << ':';
            for (auto& i : t.cont) {
                live.insert(i.frame);
                o << i.ret << ',' << i.node << ',' << frames[i.frame].act << ',' << i.idx << ' ';
            }
            ts[task_name(t)] = o.str();
        }
        std::ostringstream o;
        for (auto& [k, v] : written) o << k.first << '.' << k.second << '=' << v << ';';
        o << '#';
        std::map<std::string, std::string> fs;
        for (int f : live) {
            std::ostringstream x;
            for (auto& [k, v] : frames[f].locals) x << k << '=' << v << ',';
            for (auto v : frames[f].ret) x << v << ',';
            fs[frames[f].act] = x.str();
        }
        for (auto& [k, v] : fs) o << k << '{' << v << '}';
        o << '#';
        for (auto& [k, v] : ts) o << k << '{' << v << '}';
        o << '#';
        for (auto v : frames[0].ret) o << v << ',';
        return o.str();
    }
};

// First conflicting pair of parallel events, by event order.
std::optional<std::pair<size_t, size_t>> find_race(const Ctx& c, const std::vector<Event>& evs, std::string* key) {
    std::map<std::string, std::vector<std::pair<size_t, bool>>> by;
    for (size_t i = 0; i < evs.size(); ++i) {
        for (auto& r : evs[i].reads) by[r].push_back({i, false});
        for (auto& w : evs[i].writes) by[w].push_back({i, true});
    }
    std::optional<std::pair<size_t, size_t>> best;
    for (auto& [k, acc] : by)
        for (size_t x = 0; x < acc.size(); ++x)
            for (size_t y = x + 1; y < acc.size(); ++y) {
                if (!acc[x].second && !acc[y].second) continue;
                size_t a = std::min(acc[x].first, acc[y].first), b = std::max(acc[x].first, acc[y].first);
                if (a == b || !events_parallel(c, evs[a], evs[b])) continue;
                if (!best || std::make_pair(a, b) < *best) {
                    best = std::make_pair(a, b);
                    if (key) *key = k;
                }
            }
    return best;
}

void explore_all(Machine m, std::vector<Trace>& out, std::set<std::string>& seen, const OracleOptions& opt) {
    auto en = m.enabled();
    if (en.empty()) {
        Trace t = m.trace();
        std::ostringstream k;
        for (auto& i : t.iterations) k << i.block << '@' << i.node << ' ';
        for (auto& [c, v] : t.store) k << c.first << '.' << c.second << '=' << v << ';';
        for (auto v : t.returns) k << v << ',';
        if (seen.insert(k.str()).second) {
            if (out.size() >= opt.max_traces)
                throw Error("BudgetExceeded", "more than " + std::to_string(opt.max_traces) + " traces");
            out.push_back(std::move(t));
        }
        return;
    }
    for (int ti : en) {
        Machine n = m;
        n.act(ti);
        explore_all(std::move(n), out, seen, opt);
    }
}

}  // namespace

std::vector<Trace> interpret_all(const BlockTable& t, const ConcreteTree& tree, const OracleOptions& opt) {
    Ctx c(t);
    std::vector<Trace> out;
    std::set<std::string> seen;
    explore_all(Machine(c, tree, opt, false), out, seen, opt);
    return out;
}

Trace interpret(const BlockTable& t, const ConcreteTree& tree, const OracleOptions& opt) {
    Ctx c(t);
    Machine m(c, tree, opt, false);
    m.run();
    return m.trace();
}

std::set<std::pair<Store, std::vector<long long>>> reachable_outcomes(const BlockTable& t, const ConcreteTree& tree,
                                                                      const OracleOptions& opt) {
    Ctx c(t);
    std::set<std::pair<Store, std::vector<long long>>> out;
    std::set<std::string> seen;
    std::function<void(Machine)> go = [&](Machine m) {
        if (!seen.insert(m.state_key()).second) return;
        if (seen.size() > opt.max_traces * 16) throw Error("BudgetExceeded", "state space too large");
        auto en = m.enabled();
        if (en.empty()) {
            Trace tr = m.trace();
            out.insert({tr.store, tr.returns});
            return;
        }
        for (int ti : en) {
            Machine n = m;
            n.act(ti);
            go(std::move(n));
        }
    };
    go(Machine(c, tree, opt, false));
    return out;
}

namespace {

std::optional<RaceWitness> race_on(const Ctx& c, const ConcreteTree& tree, const OracleOptions& opt) {
    Machine m(c, tree, opt, false);
    m.run();
    std::string key;
    auto r = find_race(c, m.events, &key);
    if (!r) return std::nullopt;
    const Event& a = m.events[r->first];
    const Event& b = m.events[r->second];
    RaceWitness w;
    w.tree = tree;
    w.a = {a.block, a.node, 0};
    w.b = {b.block, b.node, 0};
    w.shared = describe(key);
    Machine ma(c, tree, opt, false);
    ma.run(&a);
    w.a_first = ma.trace();
    Machine mb(c, tree, opt, false);
    mb.run(&b);
    w.b_first = mb.trace();
    return w;
}

}  // namespace

std::optional<RaceWitness> oracle_datarace(const BlockTable& t, const ConcreteTree& tree, const OracleOptions& opt) {
    Ctx c(t);
    return race_on(c, tree, opt);
}

EquivResult oracle_equivalent(const BlockTable& a, const BlockTable& b, const ConcreteTree& tree,
                              const OracleOptions& opt) {
    Ctx ca(a), cb(b);
    EquivResult r;
    r.tree = tree;
    Machine ma(ca, tree, opt, false), mb(cb, tree, opt, false);
    ma.run();
    mb.run();
    if (find_race(ca, ma.events, nullptr) || find_race(cb, mb.events, nullptr)) {
        r.kind = EquivResult::NotApplicable;
        r.reason = "a program has a data race on this tree";
        return r;
    }
    r.left = ma.trace();
    r.right = mb.trace();
    if (r.left.store != r.right.store || r.left.returns != r.right.returns) r.kind = EquivResult::Differ;
    return r;
}

namespace {

// Calls check(tree) on every shape, branching on input cells as they are read.
// check returns true to stop the sweep.
size_t lazy_sweep(const SweepOptions& opt, const std::function<bool(const ConcreteTree&)>& check) {
    size_t runs = 0;
    bool stop = false;
    std::function<void(ConcreteTree&)> go = [&](ConcreteTree& t) {
        if (stop) return;
        if (++runs > opt.budget) throw Error("BudgetExceeded", "sweep exceeded " + std::to_string(opt.budget) + " runs");
        try {
            stop = check(t);
        } catch (NeedCell& n) {
            for (long long v : opt.domain) {
                t.fields[n.cell] = v;
                go(t);
                if (stop) break;
            }
            t.fields.erase(n.cell);
        }
    };
    for (auto& shape : tree_shapes(opt.max_height)) {
        ConcreteTree t;
        t.nodes = shape;
        go(t);
        if (stop) break;
    }
    return runs;
}

}  // namespace

RaceSweep sweep_datarace(const BlockTable& t, const SweepOptions& opt) {
    Ctx c(t);
    RaceSweep out;
    out.runs = lazy_sweep(opt, [&](const ConcreteTree& tree) {
        Machine m(c, tree, opt.oracle, true);
        m.run();
        if (!find_race(c, m.events, nullptr)) return false;
        out.witness = race_on(c, tree, opt.oracle);
        return true;
    });
    return out;
}

EquivSweep sweep_equivalent(const BlockTable& a, const BlockTable& b, const SweepOptions& opt) {
    Ctx ca(a), cb(b);
    EquivSweep out;
    out.runs = lazy_sweep(opt, [&](const ConcreteTree& tree) {
        Machine ma(ca, tree, opt.oracle, true), mb(cb, tree, opt.oracle, true);
        ma.run();
        mb.run();
        bool racy = find_race(ca, ma.events, nullptr) || find_race(cb, mb.events, nullptr);
        bool differ = !racy && ma.frames[0].ret != mb.frames[0].ret;
        if (!racy && !differ) {
            std::set<Cell> cells;
            for (auto& [k, v] : ma.written) cells.insert(k);
            for (auto& [k, v] : mb.written) cells.insert(k);
            for (auto& k : cells) {
                // an unwritten cell keeps its input value, which may need a branch
                auto value = [&](Machine& m) {
                    auto w = m.written.find(k);
                    return w != m.written.end() ? w->second : m.read_cell(k.first, k.second);
                };
                if (value(ma) != value(mb)) {
                    differ = true;
                    break;
                }
            }
        }
        if (!racy && !differ) return false;
        out.result = oracle_equivalent(a, b, tree, opt.oracle);
        return true;
    });
    return out;
}

ReplayVerdict replay(const ReplayClaim& cl, const BlockTable& p, const BlockTable* p2, const OracleOptions& opt) {
    if (cl.kind == ReplayClaim::Inequivalence) {
        if (!p2) throw Error("UsageError", "inequivalence replay needs two programs");
        return oracle_equivalent(p, *p2, cl.tree, opt).kind == EquivResult::Differ ? ReplayVerdict::Confirmed
                                                                                    : ReplayVerdict::Unconfirmed;
    }
    if (cl.kind == ReplayClaim::Reordering) {
        if (!p2) throw Error("UsageError", "reordering replay needs two programs");
        auto first = [&](const BlockTable& t, int b, const NodePath& n) -> long {
            auto tr = interpret(t, cl.tree, opt);
            for (size_t i = 0; i < tr.iterations.size(); ++i)
                if (tr.iterations[i].block == b && tr.iterations[i].node == n) return long(i);
            return -1;
        };
        long a = first(p, cl.block_a, cl.node_a), b = first(p, cl.block_b, cl.node_b);
        long a2 = first(*p2, cl.block_a2, cl.node_a), b2 = first(*p2, cl.block_b2, cl.node_b);
        bool ok = a >= 0 && b >= 0 && a2 >= 0 && b2 >= 0 && a < b && b2 < a2;
        return ok ? ReplayVerdict::Confirmed : ReplayVerdict::Unconfirmed;
    }
    Ctx c(p);
    Machine m(c, cl.tree, opt, false);
    m.run();
    // any racing pair will do unless the claim names blocks
    std::map<std::string, std::vector<size_t>> by;
    for (size_t i = 0; i < m.events.size(); ++i) {
        for (auto& k : m.events[i].reads) by[k].push_back(i);
        for (auto& k : m.events[i].writes) by[k].push_back(i);
    }
    auto writes = [&](size_t i, const std::string& k) {
        auto& w = m.events[i].writes;
        return std::find(w.begin(), w.end(), k) != w.end();
    };
    for (auto& [k, es] : by)
        for (size_t x : es)
            for (size_t y : es) {
                if (x >= y || !(writes(x, k) || writes(y, k))) continue;
                if (!events_parallel(c, m.events[x], m.events[y])) continue;
                int bx = m.events[x].block, by_ = m.events[y].block;
                bool named = cl.block_a < 0 || (bx == cl.block_a && by_ == cl.block_b) || (bx == cl.block_b && by_ == cl.block_a);
                if (named) return ReplayVerdict::Confirmed;
            }
    return ReplayVerdict::Unconfirmed;
}

}  // namespace retreet
