#include "retreet/mso.hpp"
#include "retreet/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

namespace retreet {

std::vector<NodePath> Structure::universe() const {
    std::set<NodePath> u{""};
    for (auto& p : tree) {
        u.insert(p);
        u.insert(p + "l");
        u.insert(p + "r");
    }
    return {u.begin(), u.end()};
}

namespace {

static const std::set<NodePath> kEmpty;

struct Eval {
    const Structure& s;
    std::vector<NodePath> univ;
    std::vector<std::pair<std::string, NodePath>> env;
    std::vector<std::pair<std::string, std::set<NodePath>>> senv;

    NodePath pos(const PosTerm& t) const {
        NodePath base;
        if (t.var == "root") base = "";
        else {
            bool found = false;
            for (size_t i = env.size(); i-- > 0;)
                if (env[i].first == t.var) {
                    base = env[i].second;
                    found = true;
                    break;
                }
            if (!found) {
                auto it = s.firsts.find(t.var);
                if (it == s.firsts.end()) throw Error("UnboundVariable", "no value for " + t.var);
                base = it->second;
            }
        }
        return base + t.path;
    }

    const std::set<NodePath>& set(const std::string& n) const {
        for (size_t i = senv.size(); i-- > 0;)
            if (senv[i].first == n) return senv[i].second;
        auto it = s.sets.find(n);
        return it == s.sets.end() ? kEmpty : it->second;
    }

    bool quant1(const MsoP& f, size_t i, bool ex) {
        if (i == f->vars.size()) return run(f->kids[0]);
        for (auto& p : univ) {
            env.push_back({f->vars[i], p});
            bool r = quant1(f, i + 1, ex);
            env.pop_back();
            if (r == ex) return ex;
        }
        return !ex;
    }

    bool quant2(const MsoP& f, size_t i, bool ex) {
        if (i == f->vars.size()) return run(f->kids[0]);
        if (univ.size() > 16) throw Error("BoundExceeded", "second-order quantifier over a large universe");
        for (size_t mask = 0; mask < (size_t(1) << univ.size()); ++mask) {
            std::set<NodePath> x;
            for (size_t k = 0; k < univ.size(); ++k)
                if (mask >> k & 1) x.insert(univ[k]);
            senv.push_back({f->vars[i], std::move(x)});
            bool r = quant2(f, i + 1, ex);
            senv.pop_back();
            if (r == ex) return ex;
        }
        return !ex;
    }

    bool run(const MsoP& f) {
        switch (f->kind) {
        case Mso::True: return true;
        case Mso::False: return false;
        case Mso::In: return set(f->set).count(pos(f->a)) > 0;
        case Mso::Eq: return pos(f->a) == pos(f->b);
        case Mso::IsNil: return !s.tree.count(pos(f->a));
        case Mso::Reach: {
            auto a = pos(f->a), b = pos(f->b);
            return a.size() < b.size() && b.compare(0, a.size(), a) == 0;
        }
        case Mso::Not: return !run(f->kids[0]);
        case Mso::And:
            for (auto& k : f->kids)
                if (!run(k)) return false;
            return true;
        case Mso::Or:
            for (auto& k : f->kids)
                if (run(k)) return true;
            return false;
        case Mso::Implies: return !run(f->kids[0]) || run(f->kids[1]);
        case Mso::Iff: return run(f->kids[0]) == run(f->kids[1]);
        case Mso::Ex1: return quant1(f, 0, true);
        case Mso::All1: return quant1(f, 0, false);
        case Mso::Ex2: return quant2(f, 0, true);
        case Mso::All2: return quant2(f, 0, false);
        }
        return false;
    }
};

NodePath dir_of(const BlockTable& t, int b) {
    auto& bi = t.block(b);
    return bi.is_call ? bi.block->loc_arg.path : NodePath{};
}

std::vector<int> entered(const BlockTable& t, int s) {
    if (s < 0) return t.blocks_of(t.program().entry);
    return t.callees(s);
}

// A record stack with the condition polarities its path conditions demand.
struct Stack {
    std::vector<Record> records;
    std::map<NodePath, std::map<int, bool>> req;
};

struct StackEnum {
    const BlockTable& t;
    const std::set<NodePath>& tree;
    NodePath at;
    int q;
    size_t max_len;
    size_t max_depth;
    std::vector<Stack> out;
    Stack cur;

    void go(int s, const NodePath& u) {
        for (int b : entered(t, s)) {
            auto saved = cur.req;
            bool ok = true;
            for (auto& e : t.block(b).path) {
                if (e.kind != PathEntry::Assume) continue;
                auto& c = t.cond(e.cond).cond;
                if (c->kind == Cond::IsNil) {
                    bool nil = !tree.count(u + c->loc.path);
                    if (nil != e.polarity) ok = false;
                } else if (c->kind == Cond::Pos) {
                    auto& m = cur.req[u];
                    auto it = m.find(e.cond);
                    if (it != m.end() && it->second != e.polarity) ok = false;
                    m[e.cond] = e.polarity;
                }
                if (!ok) break;
            }
            NodePath v = u + dir_of(t, b);
            if (ok) {
                if (!t.block(b).is_call) {
                    if (v == at && (q < 0 || b == q)) {
                        cur.records.push_back({b, v});
                        out.push_back(cur);
                        cur.records.pop_back();
                    }
                } else if (cur.records.size() < max_len && v.size() <= max_depth) {
                    cur.records.push_back({b, v});
                    go(b, v);
                    cur.records.pop_back();
                }
            }
            cur.req = std::move(saved);
        }
    }
};

std::vector<Stack> stacks(const BlockTable& t, const std::set<NodePath>& tree, const NodePath& at, int q) {
    size_t depth = 0;
    for (auto& p : tree) depth = std::max(depth, p.size() + 1);
    StackEnum e{t, tree, at, q, (t.blocks().size() + 1) * (depth + 2), depth, {}, {}};
    e.cur.records.push_back({-1, ""});
    e.go(-1, "");
    return e.out;
}

// Members of a group compatible with the demanded polarities at one node.
std::vector<const std::vector<int>*> compatible(const CondGroup& g, const std::map<int, bool>* req) {
    std::vector<const std::vector<int>*> out;
    for (auto& m : g.members) {
        bool ok = true;
        if (req)
            for (int c : g.conds) {
                auto it = req->find(c);
                if (it == req->end()) continue;
                bool in = std::find(m.begin(), m.end(), c) != m.end();
                if (in != it->second) ok = false;
            }
        if (ok) out.push_back(&m);
    }
    return out;
}

std::set<NodePath> labeled_nodes(const Stack& s) {
    std::set<NodePath> n;
    for (auto& r : s.records) n.insert(r.node);
    return n;
}

bool feasible(const Stack& s, const CondSetFamily& cs) {
    for (auto& u : labeled_nodes(s)) {
        auto it = s.req.find(u);
        for (auto& g : cs.groups)
            if (g.name != "nil" && compatible(g, it == s.req.end() ? nullptr : &it->second).empty()) return false;
    }
    return true;
}

void add_blocks(const Stack& s, const LabelFamily& f, std::map<std::string, std::set<NodePath>>& out) {
    for (auto& r : s.records) out[f.block(r.block)].insert(r.node);
}

void add_conds(const LabelFamily& f, const NodePath& u, const std::vector<int>& conds, const std::vector<int>& member,
               std::map<std::string, std::set<NodePath>>& out) {
    for (int c : conds) {
        out[f.cond(c)];
        if (std::find(member.begin(), member.end(), c) != member.end()) out[f.cond(c)].insert(u);
    }
}

// Labels for two stacks compared by Consistent: where both label a node,
// pick a common member when one exists so agreement is as wide as possible.
void label_pair(const Stack& a, const LabelFamily& fa, const Stack* b, const LabelFamily* fb, const CondSetFamily& cs,
                std::map<std::string, std::set<NodePath>>& out) {
    add_blocks(a, fa, out);
    if (b) add_blocks(*b, *fb, out);
    auto na = labeled_nodes(a);
    std::set<NodePath> nb;
    if (b) nb = labeled_nodes(*b);
    std::set<NodePath> all = na;
    all.insert(nb.begin(), nb.end());
    for (auto& u : all) {
        auto ra = a.req.find(u);
        const std::map<int, bool>* reqa = ra == a.req.end() ? nullptr : &ra->second;
        const std::map<int, bool>* reqb = nullptr;
        if (b) {
            auto rb = b->req.find(u);
            reqb = rb == b->req.end() ? nullptr : &rb->second;
        }
        for (auto& g : cs.groups) {
            if (g.name == "nil") continue;
            auto ca = compatible(g, reqa);
            auto cb = compatible(g, reqb);
            bool ina = na.count(u), inb = nb.count(u);
            const std::vector<int>* pa = ca.empty() ? nullptr : ca[0];
            const std::vector<int>* pb = cb.empty() ? nullptr : cb[0];
            if (ina && inb)
                for (auto* m : ca)
                    if (std::find(cb.begin(), cb.end(), m) != cb.end()) {
                        pa = pb = m;
                        break;
                    }
            if (ina && !inb) pb = pa;
            if (inb && !ina) pa = pb;
            if (pa) add_conds(fa, u, g.conds, *pa, out);
            if (b && pb) add_conds(*fb, u, g.conds, *pb, out);
        }
    }
}

bool subset(const std::vector<int>& need, const std::vector<int>& have) {
    if (need.empty()) return false;
    for (int n : need)
        if (std::find(have.begin(), have.end(), n) == have.end()) return false;
    return true;
}

}  // namespace

bool evaluate(const MsoP& f, const Structure& s) {
    Eval e{s, s.universe(), {}, {}};
    return e.run(f);
}

std::vector<AbstractConfig> enumerate_configurations(const BlockTable& t, const CondSetFamily& cs,
                                                     const LabelFamily& f, const std::set<NodePath>& tree,
                                                     const NodePath& at, int q) {
    std::vector<AbstractConfig> out;
    for (auto& s : stacks(t, tree, at, q)) {
        if (!feasible(s, cs)) continue;
        AbstractConfig c;
        c.records = s.records;
        label_pair(s, f, nullptr, nullptr, cs, c.labels);
        out.push_back(std::move(c));
    }
    return out;
}

static std::optional<NodePath> shared_node(const BlockTable& t, int q1, const NodePath& x1, int q2, const NodePath& x2,
                                           bool node_level) {
    auto r1 = t.read_write_sets(q1), r2 = t.read_write_sets(q2);
    std::set<Access> a1 = r1.reads, a2 = r2.reads;
    a1.insert(r1.writes.begin(), r1.writes.end());
    a2.insert(r2.writes.begin(), r2.writes.end());
    for (auto& a : a1)
        for (auto& b : a2) {
            if (!r1.writes.count(a) && !r2.writes.count(b)) continue;
            if (!node_level && a.name != b.name) continue;
            if (x1 + a.disp == x2 + b.disp) return x1 + a.disp;
        }
    return std::nullopt;
}

Witness decode_witness(const Structure& model, const Query& q, int depth_cap) {
    Witness w;
    w.tree = model.tree;
    w.labels = model.sets;
    Eval ev{model, model.universe(), {}, {}};
    for (auto& fam : q.families) {
        auto& t = *q.programs[fam.program];
        auto& f = fam.labels;
        auto set = [&](const std::string& n) -> const std::set<NodePath>& { return ev.set(n); };
        std::vector<Record> recs{{-1, ""}};
        if (!set(f.block(-1)).count("")) throw Error("DecodeError", f.prefix + ": main is not labeled at the root");
        for (int depth = 0;; ++depth) {
            if (depth > depth_cap) throw Error("DecodeError", f.prefix + ": record stack exceeds the depth cap");
            auto [s, u] = recs.back();
            std::vector<Record> nexts;
            for (int b : entered(t, s)) {
                NodePath v = u + dir_of(t, b);
                if (!set(f.block(b)).count(v)) continue;
                bool ok = true;
                for (auto& e : t.block(b).path) {
                    if (e.kind != PathEntry::Assume) continue;
                    auto& c = t.cond(e.cond).cond;
                    bool holds;
                    if (c->kind == Cond::IsNil) holds = !model.tree.count(u + c->loc.path);
                    else if (c->kind == Cond::Pos) holds = set(f.cond(e.cond)).count(u) > 0;
                    else continue;
                    if (holds != e.polarity) ok = false;
                }
                if (ok) nexts.push_back({b, v});
            }
            if (nexts.size() != 1)
                throw Error("DecodeError", f.prefix + ": " + std::to_string(nexts.size()) + " successors after " +
                                               (s < 0 ? std::string("main") : block_name(s)));
            recs.push_back(nexts[0]);
            if (!t.block(nexts[0].block).is_call) break;
        }
        w.configurations.push_back(std::move(recs));
    }
    if (w.configurations.size() >= 2) {
        w.q1 = w.configurations[0].back().block;
        w.x1 = w.configurations[0].back().node;
        w.q2 = w.configurations[1].back().block;
        w.x2 = w.configurations[1].back().node;
        w.shared = shared_node(*q.programs[0], w.q1, w.x1, w.q2, w.x2, q.options.node_level);
    }
    for (auto& d : q.disjuncts)
        if (d.current.size() >= 2 && d.current[0] == w.q1 && d.current[1] == w.q2) w.disjunct = d.name;
    return w;
}

Verdict bounded_search(const Query& q, const BoundedOptions& opt) {
    Verdict v;
    v.kind = Verdict::NoCounterexampleWithinBound;
    size_t candidates = 0;
    // families are compared in pairs: (0,1) and, for conflicts, (2,3)
    std::vector<std::pair<int, int>> pairs;
    for (size_t i = 0; i + 1 < q.families.size(); i += 2) pairs.push_back({int(i), int(i + 1)});
    for (auto& shape : tree_shapes(opt.max_height)) {
        Structure base;
        base.tree = shape;
        base.sets[q.alloc] = shape;
        auto univ = base.universe();
        std::map<std::tuple<int, int, NodePath>, std::vector<Stack>> cache;
        auto get = [&](int prog, int blk, const NodePath& at) -> const std::vector<Stack>& {
            auto key = std::make_tuple(prog, blk, at);
            auto it = cache.find(key);
            if (it != cache.end()) return it->second;
            std::vector<Stack> ok;
            for (auto& s : stacks(*q.programs[prog], shape, at, blk))
                if (feasible(s, q.cond_families[prog])) ok.push_back(std::move(s));
            return cache[key] = std::move(ok);
        };
        for (auto& d : q.disjuncts)
            for (auto& x1 : univ)
                for (auto& x2 : univ) {
                    Structure st = base;
                    st.firsts = {{"x1", x1}, {"x2", x2}};
                    bool ok = true;
                    for (size_t k = 0; k < d.conjuncts.size() && ok; ++k)
                        if (d.needs[k].empty()) ok = evaluate(d.conjuncts[k], st);
                    if (!ok) continue;
                    std::vector<std::map<std::string, std::set<NodePath>>> found;
                    for (auto [fa, fb] : pairs) {
                        auto& A = q.families[fa];
                        auto& B = q.families[fb];
                        auto& sa = get(A.program, d.current[fa], st.firsts.at(A.anchor));
                        auto& sb = get(B.program, d.current[fb], st.firsts.at(B.anchor));
                        std::optional<std::map<std::string, std::set<NodePath>>> hit;
                        for (auto& a : sa) {
                            for (auto& b : sb) {
                                if (++candidates > opt.max_candidates) {
                                    v.text = "candidate budget exhausted";
                                    return v;
                                }
                                Structure c = st;
                                label_pair(a, A.labels, &b, &B.labels, q.cond_families[A.program], c.sets);
                                bool good = true;
                                for (size_t k = 0; k < d.conjuncts.size() && good; ++k)
                                    if (subset(d.needs[k], {fa, fb})) good = evaluate(d.conjuncts[k], c);
                                if (good) {
                                    hit = c.sets;
                                    break;
                                }
                            }
                            if (hit) break;
                        }
                        if (!hit) {
                            ok = false;
                            break;
                        }
                        found.push_back(std::move(*hit));
                    }
                    if (!ok) continue;
                    Structure model = st;
                    for (auto& m : found)
                        for (auto& [k, s] : m) model.sets[k].insert(s.begin(), s.end());
                    for (auto& name : q.set_vars()) model.sets[name];
                    if (!evaluate(m_and(d.conjuncts), model))
                        throw Error("EncodingMismatch", "combined labeling fails disjunct " + d.name);
                    v.kind = Verdict::Counterexample;
                    v.witness = decode_witness(model, q);
                    v.text = "counterexample on tree " + print_tree(ConcreteTree{shape, {}});
                    return v;
                }
    }
    v.text = "no counterexample on trees of height <= " + std::to_string(opt.max_height);
    return v;
}

static NodePath parse_pos(std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
    if (s == "root" || s == "eps" || s.empty()) return "";
    NodePath p;
    for (char c : s) {
        if (c == '0') p += 'l';
        else if (c == '1') p += 'r';
        else throw Error("ParseError", "bad position '" + s + "'");
    }
    return p;
}

SolverOutput parse_solver_output(const std::string& text) {
    SolverOutput out{Verdict::SolverError, std::nullopt, text};
    if (text.find("Formula is valid") != std::string::npos) {
        out.kind = Verdict::FormulaInvalid;
        return out;
    }
    if (text.find("Formula is unsatisfiable") != std::string::npos) {
        // the negated query is unsatisfiable: every assignment is a witness
        out.kind = Verdict::Counterexample;
        return out;
    }
    auto pos = text.find("counter-example");
    if (pos == std::string::npos) return out;
    out.kind = Verdict::Counterexample;
    Structure m;
    static const std::regex line(R"(^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$)");
    std::istringstream in(text.substr(pos));
    std::string l;
    bool any = false;
    while (std::getline(in, l)) {
        std::smatch mt;
        if (!std::regex_match(l, mt, line)) continue;
        std::string name = mt[1], val = mt[2];
        if (!val.empty() && val.front() == '{') {
            auto close = val.find('}');
            std::string body = val.substr(1, close == std::string::npos ? std::string::npos : close - 1);
            std::set<NodePath> s;
            std::istringstream items(body);
            std::string item;
            while (std::getline(items, item, ','))
                if (item.find_first_not_of(" \t") != std::string::npos) s.insert(parse_pos(item));
            m.sets[name] = std::move(s);
        } else {
            m.firsts[name] = parse_pos(val);
        }
        any = true;
    }
    if (any) {
        auto t = m.sets.find("T");
        if (t != m.sets.end()) m.tree = t->second;
        out.model = std::move(m);
    }
    return out;
}

std::string find_solver(const SolverOptions& opt) {
    auto runnable = [](const std::string& p) { return !p.empty() && access(p.c_str(), X_OK) == 0; };
    if (!opt.binary.empty()) return runnable(opt.binary) ? opt.binary : "";
    if (const char* e = std::getenv("RETREET_MONA"); e && runnable(e)) return e;
    if (const char* path = std::getenv("PATH")) {
        std::istringstream in(path);
        std::string dir;
        while (std::getline(in, dir, ':'))
            if (runnable(dir + "/mona")) return dir + "/mona";
    }
    return "";
}

Verdict run_solver(const Query& q, const SolverOptions& opt) {
    Verdict v;
    std::string bin = find_solver(opt);
    if (bin.empty()) {
        v.kind = Verdict::SolverError;
        v.text = "no WS2S solver";
        return v;
    }
    std::filesystem::create_directories(opt.work_dir);
    std::string file = opt.work_dir + "/" + opt.name + ".mona";
    std::ofstream(file) << emit_ws2s(q);
    std::string cmd = "timeout " + std::to_string(opt.timeout_s) + " '" + bin + "' -q '" + file + "' 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) {
        v.text = "cannot start " + bin;
        return v;
    }
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int status = pclose(p);
    std::ofstream(file + ".out") << out;
    if (WIFEXITED(status) && WEXITSTATUS(status) == 124) {
        v.text = "solver timed out";
        return v;
    }
    auto r = parse_solver_output(out);
    v.kind = r.kind;
    v.text = out;
    if (r.kind == Verdict::Counterexample && r.model) {
        try {
            v.witness = decode_witness(*r.model, q);
        } catch (const Error& e) {
            v.text += "\n" + std::string(e.what());
        }
    }
    return v;
}

static std::string node_text(const NodePath& p) { return p.empty() ? "root" : p; }
static std::string rec_block(int b) { return b < 0 ? "main" : block_name(b); }

std::string witness_json(const Witness& w, const Query& q) {
    using nlohmann::json;
    json j;
    j["kind"] = q.kind;
    json progs = json::array();
    for (auto* p : q.programs) progs.push_back(p->program().entry);
    j["programs"] = progs;
    j["tree"] = print_tree(ConcreteTree{w.tree, {}});
    json cfgs = json::array();
    for (size_t i = 0; i < w.configurations.size(); ++i) {
        json recs = json::array();
        for (auto& r : w.configurations[i]) recs.push_back({{"block", rec_block(r.block)}, {"node", node_text(r.node)}});
        cfgs.push_back({{"family", q.families[i].labels.prefix}, {"records", recs}});
    }
    j["configurations"] = cfgs;
    json c = {{"disjunct", w.disjunct},
              {"q1", rec_block(w.q1)},
              {"x1", node_text(w.x1)},
              {"q2", rec_block(w.q2)},
              {"x2", node_text(w.x2)}};
    c["shared"] = w.shared ? json(node_text(*w.shared)) : json(nullptr);
    j["conflict"] = c;
    return j.dump(2);
}

std::string print_witness(const Witness& w, const Query& q) {
    std::ostringstream o;
    o << "tree: " << print_tree(ConcreteTree{w.tree, {}}) << "\n";
    for (size_t i = 0; i < w.configurations.size(); ++i) {
        o << q.families[i].labels.prefix << ":";
        for (auto& r : w.configurations[i]) o << " " << rec_block(r.block) << "@" << node_text(r.node);
        o << "\n";
    }
    o << "conflict: " << rec_block(w.q1) << "@" << node_text(w.x1) << " and " << rec_block(w.q2) << "@"
      << node_text(w.x2);
    if (w.shared) o << " share node " << node_text(*w.shared);
    o << "\n";
    return o.str();
}

}  // namespace retreet
