#pragma once

#include "retreet/lang.hpp"

#include <string>
#include <vector>

namespace retreet {

enum ExitCode { ExitOk = 0, ExitRefuted = 1, ExitUsage = 2, ExitUnknown = 3 };

struct RunConfig {
    std::string solver_bin;  // empty: $RETREET_MONA, then "mona" on PATH
    std::string smt_bin;     // external LIA backend; empty uses the internal procedure
    std::string work_dir = "retreet-work";
    std::string backend = "solver";  // or "bounded"
    int height = 2;                  // oracle sweeps and the bounded backend
    std::vector<long long> domain{0, 1};
    size_t interleaving_cap = 1u << 16;
    size_t bisim_cap = 10000;
    int solver_timeout = 3600;
    bool node_level = false;
    bool stmt_atomic = false;
    bool slow = false;  // corpus: include entries marked slow in solver runs
    bool json = false;
    LangOptions lang;
};

// Everything a command produces. `text` is the human report body.
struct Report {
    std::string command;
    std::vector<std::string> inputs;
    std::string verdict;
    int exit_code = ExitOk;
    std::string text;
    std::string witness_file;
    std::string replay;  // Confirmed / Unconfirmed / empty
    std::string backend;
    double seconds = 0;
    std::string config;  // JSON echo of the RunConfig

    std::string to_text() const;
    std::string to_json() const;
    static Report from_json(const std::string& s);
};

std::string config_json(const RunConfig& c);

// Runs one subcommand. Usage and input errors come back as reports with exit
// code 2, never as exceptions.
Report run_command(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& args);

const std::vector<std::string>& command_names();

}  // namespace retreet
