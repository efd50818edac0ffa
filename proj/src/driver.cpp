#include "retreet/driver.hpp"

#include "retreet/bisim.hpp"
#include "retreet/blocks.hpp"
#include "retreet/logic.hpp"
#include "retreet/mso.hpp"
#include "retreet/oracle.hpp"
#include "retreet/semantics.hpp"

#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>

namespace retreet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string node_text(const NodePath& p) { return p.empty() ? "root" : p; }
NodePath node_of(const std::string& s) { return s == "root" ? "" : s; }
std::string blk(int b) { return b < 0 ? "main" : block_name(b); }

int block_id(const std::string& s) {
    if (s == "main") return -1;
    std::string d = s.size() > 1 && s[0] == 's' ? s.substr(1) : s;
    if (d.empty() || d.find_first_not_of("0123456789") != std::string::npos) throw Usage("bad block name '" + s + "'");
    return std::stoi(d);
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Usage("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream(path) << text;
}

BlockTable load(const std::string& path, const LangOptions& lang) {
    return BlockTable(normalize(load_program(path), lang));
}

LiaOptions lia_of(const RunConfig& c) {
    LiaOptions o;
    o.smt_solver = c.smt_bin;
    return o;
}

OracleOptions oracle_of(const RunConfig& c) {
    OracleOptions o;
    o.stmt_atomic = c.stmt_atomic;
    o.max_traces = c.interleaving_cap;
    return o;
}

SweepOptions sweep_of(const RunConfig& c) {
    SweepOptions o;
    o.max_height = c.height;
    o.domain = c.domain;
    o.oracle = oracle_of(c);
    return o;
}

void need_args(const std::vector<std::string>& args, size_t lo, size_t hi, const std::string& usage) {
    if (args.size() < lo || args.size() > hi) throw Usage("usage: " + usage);
}

json claim_json(const ReplayClaim& c) {
    static const char* kinds[] = {"race", "inequivalence", "reordering"};
    json j{{"kind", kinds[c.kind]}, {"tree", print_tree(c.tree)}};
    if (c.block_a >= 0) j["block_a"] = blk(c.block_a);
    if (c.block_b >= 0) j["block_b"] = blk(c.block_b);
    if (c.kind == ReplayClaim::Reordering) {
        j["node_a"] = node_text(c.node_a);
        j["node_b"] = node_text(c.node_b);
        j["block_a2"] = blk(c.block_a2);
        j["block_b2"] = blk(c.block_b2);
    }
    return j;
}

ReplayClaim claim_of(const json& j) {
    ReplayClaim c;
    std::string k = j.at("kind");
    if (k == "race") c.kind = ReplayClaim::Race;
    else if (k == "inequivalence") c.kind = ReplayClaim::Inequivalence;
    else if (k == "reordering") c.kind = ReplayClaim::Reordering;
    else throw Usage("unknown claim kind '" + k + "'");
    c.tree = parse_tree(j.at("tree"));
    auto b = [&](const char* key) { return j.contains(key) ? block_id(j[key]) : -1; };
    c.block_a = b("block_a");
    c.block_b = b("block_b");
    c.block_a2 = b("block_a2");
    c.block_b2 = b("block_b2");
    if (j.contains("node_a")) c.node_a = node_of(j["node_a"]);
    if (j.contains("node_b")) c.node_b = node_of(j["node_b"]);
    return c;
}

std::string verdict_name(ReplayVerdict v) { return v == ReplayVerdict::Confirmed ? "Confirmed" : "Unconfirmed"; }

class Runner {
public:
    Runner(const RunConfig& c, Report& r) : cfg(c), rep(r) {}

    void run(const std::string& cmd, const std::vector<std::string>& a) {
        static const std::map<std::string, void (Runner::*)(const std::vector<std::string>&)> table{
            {"check", &Runner::check},           {"blocks", &Runner::blocks},
            {"pathcond", &Runner::pathcond},     {"encode-race", &Runner::encode_race},
            {"encode-equiv", &Runner::encode_equiv}, {"race", &Runner::race},
            {"equiv", &Runner::equiv},           {"bisim", &Runner::bisim},
            {"oracle-race", &Runner::oracle_race}, {"oracle-equiv", &Runner::oracle_equiv},
            {"replay", &Runner::replay_cmd},     {"corpus", &Runner::corpus}};
        auto it = table.find(cmd);
        if (it == table.end()) throw Usage("unknown command '" + cmd + "'");
        (this->*it->second)(a);
    }

private:
    const RunConfig& cfg;
    Report& rep;
    std::ostringstream out;

public:
    std::string text() const { return out.str(); }

private:
    void set(const std::string& verdict, int code) {
        rep.verdict = verdict;
        rep.exit_code = code;
    }

    std::string work(const std::string& name) const { return (fs::path(cfg.work_dir) / name).string(); }

    std::string save_witness(const std::string& name, const std::vector<std::string>& programs, const json& claim,
                             const json& detail, const std::string& replay) {
        json j{{"schema", "retreet-witness/1"}, {"command", rep.command}, {"claim", claim}, {"detail", detail}};
        json progs = json::array();
        for (auto& p : programs) progs.push_back(fs::absolute(p).string());
        j["programs"] = progs;
        j["options"] = {{"allow_same_node", cfg.lang.allow_same_node},
                        {"allow_deep_loc", cfg.lang.allow_deep_loc},
                        {"stmt_atomic", cfg.stmt_atomic}};
        j["replay"] = replay;
        std::string path = work(name + ".witness.json");
        write_file(path, j.dump(2) + "\n");
        rep.witness_file = path;
        rep.replay = replay;
        out << "witness: " << path << " (" << replay << ")\n";
        return path;
    }

    bool bounded() const {
        if (cfg.backend == "bounded") return true;
        if (cfg.backend != "solver") throw Usage("unknown backend '" + cfg.backend + "'");
        return false;
    }

    // Solves a query with the configured backend.
    Verdict solve(const Query& q, const std::string& name) {
        if (q.disjuncts.empty()) {
            rep.backend = "structural";
            Verdict v;
            v.kind = Verdict::FormulaInvalid;
            v.text = "no candidate pairs";
            return v;
        }
        if (bounded()) {
            rep.backend = "bounded";
            BoundedOptions b;
            b.max_height = cfg.height;
            return bounded_search(q, b);
        }
        SolverOptions s;
        s.binary = cfg.solver_bin;
        s.work_dir = cfg.work_dir;
        s.name = name;
        s.timeout_s = cfg.solver_timeout;
        if (find_solver(s).empty())
            throw Usage("no WS2S solver: pass --solver-bin or set RETREET_MONA, or use --backend bounded");
        rep.backend = "solver";
        return run_solver(q, s);
    }

    void check(const std::vector<std::string>& a) {
        need_args(a, 1, 1, "check <file>");
        Program p = load_program(a[0]);
        auto vs = validate_restrictions(p);
        if (!vs.empty()) {
            json det = json::array();
            for (auto& v : vs) {
                out << violation_name(v.kind) << " at " << v.span.line << ":" << v.span.col << ": " << v.message
                    << "\n";
                det.push_back({{"violation", violation_name(v.kind)},
                               {"line", v.span.line},
                               {"col", v.span.col},
                               {"message", v.message}});
            }
            set("rejected", ExitRefuted);
            save_witness(stem(a[0]) + ".check", {a[0]}, json{{"kind", "violations"}}, det, "Confirmed");
            return;
        }
        Program n = normalize(p, cfg.lang);
        out << pretty_print(n);
        set("ok", ExitOk);
    }

    void blocks(const std::vector<std::string>& a) {
        need_args(a, 1, 1, "blocks <file>");
        out << dump_block_table(load(a[0], cfg.lang));
        set("ok", ExitOk);
    }

    void pathcond(const std::vector<std::string>& a) {
        need_args(a, 3, 3, "pathcond <file> <caller> <block>");
        auto t = load(a[0], cfg.lang);
        int s = block_id(a[1]), q = block_id(a[2]);
        if (s < 0 || q < 0 || s >= int(t.blocks().size()) || q >= int(t.blocks().size()))
            throw Usage("no such block");
        out << print_path_condition(path_condition(t, s, q)) << "\n";
        set("ok", ExitOk);
    }

    Query race_query(const BlockTable& t) {
        auto cs = consistent_condition_sets(t, lia_of(cfg));
        return build_datarace(t, cs, EncodeOptions{cfg.node_level});
    }

    void encode_race(const std::vector<std::string>& a) {
        need_args(a, 1, 1, "encode-race <file>");
        auto t = load(a[0], cfg.lang);
        auto q = race_query(t);
        std::string path = work(stem(a[0]) + "_race.mona");
        write_file(path, emit_ws2s(q));
        out << path << "\n" << q.disjuncts.size() << " disjuncts\n";
        set("ok", ExitOk);
    }

    std::optional<BisimRelation> relation(const BlockTable& p, const BlockTable& p2) {
        BisimSearch s;
        try {
            s = find_bisimulation(p, p2, cfg.bisim_cap, lia_of(cfg));
        } catch (const Error& e) {
            if (e.kind != "NonCallMismatch") throw;
            out << "no bisimulation: " << e.kind << ": " << e.what() << "\n";
            return std::nullopt;
        }
        if (!s.accepted) {
            out << "no bisimulation found after " << s.tried << " candidates"
                << (s.exhausted ? "" : " (cap reached)") << "\n";
            return std::nullopt;
        }
        return s.accepted;
    }

    void encode_equiv(const std::vector<std::string>& a) {
        need_args(a, 2, 2, "encode-equiv <a> <b>");
        auto p = load(a[0], cfg.lang), p2 = load(a[1], cfg.lang);
        auto r = relation(p, p2);
        if (!r) return set("unknown", ExitUnknown);
        auto q = build_conflict(p, consistent_condition_sets(p, lia_of(cfg)), p2,
                                consistent_condition_sets(p2, lia_of(cfg)), &*r, EncodeOptions{cfg.node_level});
        std::string path = work(stem(a[0]) + "_" + stem(a[1]) + "_equiv.mona");
        write_file(path, emit_ws2s(q));
        out << print_relation(*r) << path << "\n" << q.disjuncts.size() << " disjuncts\n";
        set("ok", ExitOk);
    }

    void race(const std::vector<std::string>& a) {
        need_args(a, 1, 1, "race <file>");
        auto t = load(a[0], cfg.lang);
        auto q = race_query(t);
        auto v = solve(q, stem(a[0]) + "_race");
        switch (v.kind) {
        case Verdict::FormulaInvalid:
            out << "race-free\n";
            return set("race-free", ExitOk);
        case Verdict::NoCounterexampleWithinBound:
            out << "no race on trees of height <= " << cfg.height << "\n";
            return set("unknown", ExitUnknown);
        case Verdict::SolverError:
            out << v.text << "\n";
            return set("unknown", ExitUnknown);
        case Verdict::Counterexample: break;
        }
        set("raceful", ExitRefuted);
        if (!v.witness) {
            out << "counterexample could not be decoded\n" << v.text << "\n";
            return;
        }
        auto& w = *v.witness;
        out << "raceful\n" << print_witness(w, q);
        ReplayClaim c;
        c.kind = ReplayClaim::Race;
        c.tree.nodes = w.tree;
        c.block_a = w.q1;
        c.block_b = w.q2;
        auto rv = replay(c, t, nullptr, oracle_of(cfg));
        json det = json::parse(witness_json(w, q));
        if (auto ow = oracle_datarace(t, c.tree, oracle_of(cfg))) {
            out << "oracle: " << blk(ow->a.block) << "@" << node_text(ow->a.node) << " and " << blk(ow->b.block)
                << "@" << node_text(ow->b.node) << " on " << ow->shared.name << " of "
                << node_text(ow->shared.node) << "\n";
            det["oracle"] = {{"a", blk(ow->a.block)},
                             {"b", blk(ow->b.block)},
                             {"node", node_text(ow->shared.node)},
                             {"location", ow->shared.name}};
        }
        save_witness(stem(a[0]) + "_race", {a[0]}, claim_json(c), det, verdict_name(rv));
    }

    void equiv(const std::vector<std::string>& a) {
        need_args(a, 2, 2, "equiv <a> <b>");
        auto p = load(a[0], cfg.lang), p2 = load(a[1], cfg.lang);
        auto r = relation(p, p2);
        if (!r) return set("unknown", ExitUnknown);
        out << print_relation(*r);
        auto q = build_conflict(p, consistent_condition_sets(p, lia_of(cfg)), p2,
                                consistent_condition_sets(p2, lia_of(cfg)), &*r, EncodeOptions{cfg.node_level});
        auto v = solve(q, stem(a[0]) + "_" + stem(a[1]) + "_equiv");
        switch (v.kind) {
        case Verdict::FormulaInvalid:
            out << "equivalent\n";
            return set("equivalent", ExitOk);
        case Verdict::NoCounterexampleWithinBound:
            out << "no conflict on trees of height <= " << cfg.height << "\n";
            return set("unknown", ExitUnknown);
        case Verdict::SolverError:
            out << v.text << "\n";
            return set("unknown", ExitUnknown);
        case Verdict::Counterexample: break;
        }
        set("inequivalent", ExitRefuted);
        if (!v.witness) {
            out << "counterexample could not be decoded\n" << v.text << "\n";
            return;
        }
        auto& w = *v.witness;
        out << "inequivalent\n" << print_witness(w, q);
        ReplayClaim c;
        c.kind = ReplayClaim::Reordering;
        c.tree.nodes = w.tree;
        c.block_a = w.q1;
        c.node_a = w.x1;
        c.block_b = w.q2;
        c.node_b = w.x2;
        c.block_a2 = w.configurations[2].back().block;
        c.block_b2 = w.configurations[3].back().block;
        auto rv = replay(c, p, &p2, oracle_of(cfg));
        json det = json::parse(witness_json(w, q));
        ReplayClaim obs;
        obs.kind = ReplayClaim::Inequivalence;
        obs.tree = c.tree;
        auto ov = replay(obs, p, &p2, oracle_of(cfg));
        out << "observable difference on the witness tree: " << (ov == ReplayVerdict::Confirmed ? "yes" : "no")
            << "\n";
        det["observable"] = ov == ReplayVerdict::Confirmed;
        save_witness(stem(a[0]) + "_" + stem(a[1]) + "_equiv", {a[0], a[1]}, claim_json(c), det, verdict_name(rv));
    }

    void bisim(const std::vector<std::string>& a) {
        need_args(a, 2, 2, "bisim <a> <b>");
        auto p = load(a[0], cfg.lang), p2 = load(a[1], cfg.lang);
        BisimSearch s;
        try {
            s = find_bisimulation(p, p2, cfg.bisim_cap, lia_of(cfg));
        } catch (const Error& e) {
            if (e.kind != "NonCallMismatch") throw;
            out << e.kind << ": " << e.what() << "\n";
            return set("no-bisimulation", ExitUnknown);
        }
        for (size_t i = 0; i < s.rejected.size(); ++i) {
            out << "candidate " << i + 1 << " rejected:\n" << print_relation(s.rejected[i].first);
            for (auto& why : s.rejected[i].second) out << "  " << why << "\n";
        }
        if (s.accepted) {
            out << "accepted after " << s.tried << " candidates:\n" << print_relation(*s.accepted);
            return set("bisimulation", ExitOk);
        }
        out << "no bisimulation found after " << s.tried << " candidates" << (s.exhausted ? "" : " (cap reached)")
            << "\n";
        set("no-bisimulation", ExitUnknown);
    }

    void oracle_race(const std::vector<std::string>& a) {
        need_args(a, 1, 1, "oracle-race <file>");
        auto t = load(a[0], cfg.lang);
        rep.backend = "oracle";
        auto r = sweep_datarace(t, sweep_of(cfg));
        if (!r.witness) {
            out << "race-free on all trees of height <= " << cfg.height << " (" << r.runs << " runs)\n";
            return set("race-free", ExitOk);
        }
        auto& w = *r.witness;
        out << "raceful\ntree: " << print_tree(w.tree) << "\n"
            << blk(w.a.block) << "@" << node_text(w.a.node) << " and " << blk(w.b.block) << "@"
            << node_text(w.b.node) << " on " << w.shared.name << " of " << node_text(w.shared.node) << "\n";
        set("raceful", ExitRefuted);
        ReplayClaim c;
        c.kind = ReplayClaim::Race;
        c.tree = w.tree;
        c.block_a = w.a.block;
        c.block_b = w.b.block;
        auto rv = replay(c, t, nullptr, oracle_of(cfg));
        json det{{"node", node_text(w.shared.node)}, {"location", w.shared.name}};
        save_witness(stem(a[0]) + "_oracle_race", {a[0]}, claim_json(c), det, verdict_name(rv));
    }

    void oracle_equiv(const std::vector<std::string>& a) {
        need_args(a, 2, 2, "oracle-equiv <a> <b>");
        auto p = load(a[0], cfg.lang), p2 = load(a[1], cfg.lang);
        rep.backend = "oracle";
        auto r = sweep_equivalent(p, p2, sweep_of(cfg));
        if (r.result.kind == EquivResult::Equal) {
            out << "equivalent on all trees of height <= " << cfg.height << " (" << r.runs << " runs)\n";
            return set("equivalent", ExitOk);
        }
        if (r.result.kind == EquivResult::NotApplicable) {
            out << "not applicable on " << print_tree(r.result.tree) << ": " << r.result.reason << "\n";
            return set("unknown", ExitUnknown);
        }
        out << "inequivalent\ntree: " << print_tree(r.result.tree) << "\n";
        if (!r.result.reason.empty()) out << r.result.reason << "\n";
        set("inequivalent", ExitRefuted);
        ReplayClaim c;
        c.kind = ReplayClaim::Inequivalence;
        c.tree = r.result.tree;
        auto rv = replay(c, p, &p2, oracle_of(cfg));
        save_witness(stem(a[0]) + "_" + stem(a[1]) + "_oracle_equiv", {a[0], a[1]}, claim_json(c),
                     json{{"reason", r.result.reason}}, verdict_name(rv));
    }

    void replay_cmd(const std::vector<std::string>& a) {
        need_args(a, 1, 3, "replay <witness.json> [programs...]");
        json j;
        try {
            j = json::parse(read_file(a[0]));
        } catch (const json::exception& e) {
            throw Usage(a[0] + ": " + e.what());
        }
        std::vector<std::string> progs(a.begin() + 1, a.end());
        if (progs.empty())
            for (auto& p : j.at("programs")) progs.push_back(p);
        LangOptions lang = cfg.lang;
        if (j.contains("options")) {
            lang.allow_same_node = lang.allow_same_node || j["options"].value("allow_same_node", false);
            lang.allow_deep_loc = lang.allow_deep_loc || j["options"].value("allow_deep_loc", false);
        }
        if (j.at("claim").value("kind", "") == "violations") {
            bool rejected = !validate_restrictions(load_program(progs.at(0))).empty();
            out << (rejected ? "Confirmed" : "Unconfirmed") << "\n";
            rep.replay = rejected ? "Confirmed" : "Unconfirmed";
            return set(rep.replay, rejected ? ExitOk : ExitRefuted);
        }
        auto c = claim_of(j.at("claim"));
        auto p = load(progs.at(0), lang);
        std::unique_ptr<BlockTable> p2;
        if (progs.size() > 1) p2 = std::make_unique<BlockTable>(load(progs[1], lang));
        if (c.kind != ReplayClaim::Race && !p2) throw Usage("this claim needs two programs");
        auto v = replay(c, p, p2.get(), oracle_of(cfg));
        rep.backend = "oracle";
        rep.replay = verdict_name(v);
        out << rep.replay << "\n";
        set(rep.replay, v == ReplayVerdict::Confirmed ? ExitOk : ExitRefuted);
    }

    // One manifest entry: oracle verdict, then the static verdict.
    struct Row {
        std::string name, kind, expect, oracle, stat, status;
        double seconds = 0;
    };

    void corpus(const std::vector<std::string>& a) {
        need_args(a, 1, 1, "corpus <manifest.json>");
        json m;
        try {
            m = json::parse(read_file(a[0]));
        } catch (const json::exception& e) {
            throw Usage(a[0] + ": " + e.what());
        }
        fs::path dir = fs::path(a[0]).parent_path();
        RunConfig sub = cfg;
        if (m.contains("options")) {
            sub.lang.allow_same_node = m["options"].value("allow_same_node", cfg.lang.allow_same_node);
            sub.lang.allow_deep_loc = m["options"].value("allow_deep_loc", cfg.lang.allow_deep_loc);
        }
        std::vector<Row> rows;
        int mismatches = 0;
        for (auto& e : m.at("queries")) {
            Row row;
            row.name = e.at("name");
            row.kind = e.at("kind");
            row.expect = e.at("expect");
            std::vector<std::string> files;
            for (auto& f : e.at("programs")) files.push_back((dir / f.get<std::string>()).string());
            auto t0 = std::chrono::steady_clock::now();
            row.oracle = oracle_verdict(sub, row.kind, files);
            RunConfig one = sub;
            one.work_dir = (fs::path(cfg.work_dir) / row.name).string();
            if (e.value("slow", false) && !cfg.slow && row.kind != "check") {
                row.stat = "skipped (slow)";
            } else {
                Report r = run_command(one, row.kind, files);
                if (r.exit_code == ExitUsage && r.text.find("no WS2S solver") != std::string::npos)
                    row.stat = "skipped (no WS2S solver)";
                else
                    row.stat = r.verdict + (r.backend == "bounded" ? " [bounded]" : "");
            }
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            bool stat_known = row.stat == row.expect || row.stat == row.expect + " [bounded]";
            bool stat_wrong = !stat_known && row.stat.rfind("skipped", 0) != 0 && row.stat.rfind("unknown", 0) != 0;
            if (row.oracle != row.expect || stat_wrong) {
                row.status = "MISMATCH";
                ++mismatches;
            } else {
                row.status = "ok";
            }
            rows.push_back(row);
        }
        json rj = json::array();
        for (auto& r : rows) {
            char buf[512];
            std::snprintf(buf, sizeof buf, "%-20s %-6s expect %-13s oracle %-13s static %-28s %s\n",
                          r.name.c_str(), r.kind.c_str(), r.expect.c_str(), r.oracle.c_str(), r.stat.c_str(),
                          r.status.c_str());
            out << buf;
            rj.push_back({{"name", r.name},
                          {"kind", r.kind},
                          {"expect", r.expect},
                          {"oracle", r.oracle},
                          {"static", r.stat},
                          {"status", r.status},
                          {"seconds", r.seconds}});
        }
        out << rows.size() << " queries, " << mismatches << " mismatches\n";
        std::string path = work("corpus-report.json");
        write_file(path, rj.dump(2) + "\n");
        if (mismatches) {
            rep.witness_file = path;
            return set("mismatch", ExitRefuted);
        }
        set("ok", ExitOk);
    }

    static std::string oracle_verdict(const RunConfig& c, const std::string& kind,
                                      const std::vector<std::string>& files) {
        try {
            if (kind == "check") {
                Program p = load_program(files.at(0));
                if (!validate_restrictions(p).empty()) return "rejected";
                normalize(p, c.lang);
                return "accepted";
            }
            if (kind == "race") {
                auto t = load(files.at(0), c.lang);
                return sweep_datarace(t, sweep_of(c)).witness ? "raceful" : "race-free";
            }
            if (kind == "equiv") {
                auto p = load(files.at(0), c.lang), p2 = load(files.at(1), c.lang);
                auto r = sweep_equivalent(p, p2, sweep_of(c));
                if (r.result.kind == EquivResult::Equal) return "equivalent";
                if (r.result.kind == EquivResult::Differ) return "inequivalent";
                return "n/a";
            }
        } catch (const Error& e) {
            return "error";
        }
        return "n/a";
    }
};

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"check",  "blocks", "pathcond",    "encode-race",
                                                "encode-equiv", "race", "equiv", "bisim",
                                                "oracle-race", "oracle-equiv", "replay", "corpus"};
    return names;
}

std::string config_json(const RunConfig& c) {
    json j{{"solver_bin", c.solver_bin},
           {"smt_bin", c.smt_bin},
           {"work_dir", c.work_dir},
           {"backend", c.backend},
           {"height", c.height},
           {"domain", c.domain},
           {"interleaving_cap", c.interleaving_cap},
           {"bisim_cap", c.bisim_cap},
           {"solver_timeout", c.solver_timeout},
           {"node_level", c.node_level},
           {"stmt_atomic", c.stmt_atomic},
           {"allow_same_node", c.lang.allow_same_node},
           {"allow_deep_loc", c.lang.allow_deep_loc}};
    return j.dump();
}

Report run_command(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& args) {
    Report rep;
    rep.command = command;
    rep.inputs = args;
    rep.config = config_json(cfg);
    auto t0 = std::chrono::steady_clock::now();
    Runner r(cfg, rep);
    std::string err;
    try {
        r.run(command, args);
    } catch (const Usage& e) {
        err = e.what();
        rep.verdict = "error";
        rep.exit_code = ExitUsage;
    } catch (const Error& e) {
        err = e.kind + ": " + e.what();
        if (e.span.line) err += " (line " + std::to_string(e.span.line) + ")";
        rep.verdict = e.kind == "BudgetExceeded" ? "unknown" : "error";
        rep.exit_code = e.kind == "BudgetExceeded" ? ExitUnknown : ExitUsage;
    } catch (const std::exception& e) {
        err = e.what();
        rep.verdict = "error";
        rep.exit_code = ExitUsage;
    }
    rep.text = r.text();
    if (!err.empty()) rep.text += err + "\n";
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::string Report::to_text() const { return text + "verdict: " + verdict + "\n"; }

std::string Report::to_json() const {
    json j{{"command", command},
           {"inputs", inputs},
           {"verdict", verdict},
           {"exit_code", exit_code},
           {"text", text},
           {"backend", backend},
           {"seconds", seconds},
           {"config", json::parse(config.empty() ? "{}" : config)}};
    j["witness_file"] = witness_file.empty() ? json(nullptr) : json(witness_file);
    j["replay"] = replay.empty() ? json(nullptr) : json(replay);
    return j.dump(2);
}

Report Report::from_json(const std::string& s) {
    auto j = json::parse(s);
    Report r;
    r.command = j.at("command");
    r.inputs = j.at("inputs").get<std::vector<std::string>>();
    r.verdict = j.at("verdict");
    r.exit_code = j.at("exit_code");
    r.text = j.at("text");
    r.backend = j.at("backend");
    r.seconds = j.at("seconds");
    r.config = j.at("config").dump();
    if (!j["witness_file"].is_null()) r.witness_file = j["witness_file"];
    if (!j["replay"].is_null()) r.replay = j["replay"];
    return r;
}

}  // namespace retreet
