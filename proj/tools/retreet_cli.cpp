#include "retreet/retreet.h"

#include "CLI11.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace {

struct Sub {
    const char* name;
    const char* help;
    const char* args;
};

const Sub subs[] = {
    {"check", "parse, validate and normalize a program", "file"},
    {"blocks", "dump the block table and relations", "file"},
    {"pathcond", "path condition of a block from a caller", "file caller block"},
    {"encode-race", "write the data-race query for the WS2S solver", "file"},
    {"encode-equiv", "write the conflict query for two programs", "a b"},
    {"race", "decide data-race freedom", "file"},
    {"equiv", "decide equivalence of two programs", "a b"},
    {"bisim", "search for a block relation between two programs", "a b"},
    {"oracle-race", "bounded concrete race search", "file"},
    {"oracle-equiv", "bounded concrete equivalence check", "a b"},
    {"replay", "replay a witness file on concrete trees", "witness [programs...]"},
    {"corpus", "run every query of a manifest", "manifest"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"retreet: data races and fusion equivalence for tree traversals"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string solver_bin, smt_bin, work_dir, backend, domain, format;
    std::string height, interleaving_cap, bisim_cap, timeout;
    bool node_level = false, stmt_atomic = false, same_node = false, deep_loc = false, slow = false;
    app.add_option("--solver-bin", solver_bin, "WS2S solver binary (default $RETREET_MONA, then mona)");
    app.add_option("--smt-bin", smt_bin, "SMT-LIB2 solver for integer arithmetic");
    app.add_option("--work-dir", work_dir, "directory for solver files and witnesses");
    app.add_option("--backend", backend, "solver or bounded")->check(CLI::IsMember({"solver", "bounded"}));
    app.add_option("--height", height, "tree height for oracle sweeps and the bounded backend");
    app.add_option("--domain", domain, "field values, e.g. 0,1");
    app.add_option("--interleaving-cap", interleaving_cap, "traces per tree");
    app.add_option("--bisim-cap", bisim_cap, "bisimulation candidates");
    app.add_option("--timeout", timeout, "solver timeout in seconds");
    app.add_flag("--node-level", node_level, "node-level dependence");
    app.add_flag("--stmt-atomic", stmt_atomic, "interleave single assignments");
    app.add_flag("--allow-same-node", same_node, "allow calls on n outside Main");
    app.add_flag("--allow-deep-loc", deep_loc, "allow calls on n.l.r and deeper");
    app.add_flag("--slow", slow, "corpus: include slow queries");
    app.add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    std::vector<std::string> args;
    for (auto& s : subs) {
        auto* sc = app.add_subcommand(s.name, s.help);
        sc->add_option(s.args[0] == 'a' ? "programs" : "args", args, s.args)->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : RETREET_EXIT_USAGE;
    }

    retreet_config* cfg = nullptr;
    if (retreet_config_create(&cfg) != RETREET_OK) {
        std::fprintf(stderr, "%s\n", retreet_last_error());
        return RETREET_EXIT_USAGE;
    }
    std::vector<std::pair<const char*, std::string>> sets{
        {"solver_bin", solver_bin}, {"smt_bin", smt_bin}, {"work_dir", work_dir},
        {"backend", backend},       {"domain", domain},   {"format", format},
        {"height", height},         {"interleaving_cap", interleaving_cap},
        {"bisim_cap", bisim_cap},   {"solver_timeout", timeout}};
    if (node_level) sets.push_back({"node_level", "1"});
    if (stmt_atomic) sets.push_back({"stmt_atomic", "1"});
    if (same_node) sets.push_back({"allow_same_node", "1"});
    if (deep_loc) sets.push_back({"allow_deep_loc", "1"});
    if (slow) sets.push_back({"slow", "1"});
    for (auto& [k, v] : sets) {
        if (v.empty()) continue;
        if (retreet_config_set(cfg, k, v.c_str()) != RETREET_OK) {
            std::fprintf(stderr, "%s\n", retreet_last_error());
            retreet_config_destroy(cfg);
            return RETREET_EXIT_USAGE;
        }
    }

    std::vector<const char*> cargs;
    for (auto& a : args) cargs.push_back(a.c_str());
    retreet_report* rep = nullptr;
    auto st = retreet_run(cfg, app.get_subcommands().front()->get_name().c_str(), int(cargs.size()), cargs.data(), &rep);
    retreet_config_destroy(cfg);
    if (st != RETREET_OK) {
        std::fprintf(stderr, "%s\n", retreet_last_error());
        return RETREET_EXIT_USAGE;
    }
    std::fputs(retreet_report_output(rep), stdout);
    int code = retreet_report_exit_code(rep);
    retreet_report_destroy(rep);
    return code;
}
