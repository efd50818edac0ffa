#include "retreet/retreet.h"

#include "retreet/driver.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>

struct retreet_config {
    retreet::RunConfig cfg;
    std::string format = "text";
    mutable std::string scratch;
};

struct retreet_report {
    retreet::Report rep;
    std::string output, json;
};

namespace {

thread_local std::string last_error;

retreet_status fail(retreet_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

template <class F>
retreet_status guard(F f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return fail(RETREET_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(RETREET_ERR_INTERNAL, "unknown failure");
    }
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "1" || v == "true") out = true;
    else if (v == "0" || v == "false") out = false;
    else return false;
    return true;
}

template <class T>
bool parse_num(const std::string& v, T& out) {
    std::istringstream in(v);
    T x;
    if (!(in >> x) || !in.eof() || x < 0) return false;
    out = x;
    return true;
}

bool parse_domain(const std::string& v, std::vector<long long>& out) {
    std::vector<long long> d;
    std::istringstream in(v);
    std::string part;
    while (std::getline(in, part, ',')) {
        char* end = nullptr;
        long long x = std::strtoll(part.c_str(), &end, 10);
        if (part.empty() || *end) return false;
        d.push_back(x);
    }
    if (d.empty()) return false;
    out = d;
    return true;
}

using Setter = std::function<bool(retreet_config&, const std::string&)>;
using Getter = std::function<std::string(const retreet_config&)>;

const std::map<std::string, std::pair<Setter, Getter>>& keys() {
    using namespace retreet;
    auto b = [](bool RunConfig::*m) {
        return std::pair<Setter, Getter>{[m](retreet_config& c, const std::string& v) { return parse_bool(v, c.cfg.*m); },
                                         [m](const retreet_config& c) { return std::string(c.cfg.*m ? "1" : "0"); }};
    };
    auto lb = [](bool LangOptions::*m) {
        return std::pair<Setter, Getter>{
            [m](retreet_config& c, const std::string& v) { return parse_bool(v, c.cfg.lang.*m); },
            [m](const retreet_config& c) { return std::string(c.cfg.lang.*m ? "1" : "0"); }};
    };
    auto s = [](std::string RunConfig::*m) {
        return std::pair<Setter, Getter>{[m](retreet_config& c, const std::string& v) {
                                             c.cfg.*m = v;
                                             return true;
                                         },
                                         [m](const retreet_config& c) { return c.cfg.*m; }};
    };
    auto n = [](auto RunConfig::*m) {
        return std::pair<Setter, Getter>{[m](retreet_config& c, const std::string& v) { return parse_num(v, c.cfg.*m); },
                                         [m](const retreet_config& c) { return std::to_string(c.cfg.*m); }};
    };
    static const std::map<std::string, std::pair<Setter, Getter>> table{
        {"solver_bin", s(&RunConfig::solver_bin)},
        {"smt_bin", s(&RunConfig::smt_bin)},
        {"work_dir", s(&RunConfig::work_dir)},
        {"backend",
         {[](retreet_config& c, const std::string& v) {
              if (v != "solver" && v != "bounded") return false;
              c.cfg.backend = v;
              return true;
          },
          [](const retreet_config& c) { return c.cfg.backend; }}},
        {"height", n(&RunConfig::height)},
        {"domain",
         {[](retreet_config& c, const std::string& v) { return parse_domain(v, c.cfg.domain); },
          [](const retreet_config& c) {
              std::string o;
              for (auto x : c.cfg.domain) o += (o.empty() ? "" : ",") + std::to_string(x);
              return o;
          }}},
        {"interleaving_cap", n(&RunConfig::interleaving_cap)},
        {"bisim_cap", n(&RunConfig::bisim_cap)},
        {"solver_timeout", n(&RunConfig::solver_timeout)},
        {"node_level", b(&RunConfig::node_level)},
        {"stmt_atomic", b(&RunConfig::stmt_atomic)},
        {"slow", b(&RunConfig::slow)},
        {"allow_same_node", lb(&LangOptions::allow_same_node)},
        {"allow_deep_loc", lb(&LangOptions::allow_deep_loc)},
        {"format",
         {[](retreet_config& c, const std::string& v) {
              if (v != "text" && v != "json") return false;
              c.format = v;
              c.cfg.json = v == "json";
              return true;
          },
          [](const retreet_config& c) { return c.format; }}},
    };
    return table;
}

}  // namespace

extern "C" {

const char* retreet_version(void) { return "0.1.0"; }

const char* retreet_status_string(retreet_status s) {
    switch (s) {
    case RETREET_OK: return "ok";
    case RETREET_ERR_NULL: return "null argument";
    case RETREET_ERR_KEY: return "unknown key";
    case RETREET_ERR_VALUE: return "bad value";
    case RETREET_ERR_COMMAND: return "unknown command";
    case RETREET_ERR_INTERNAL: return "internal error";
    }
    return "?";
}

const char* retreet_last_error(void) { return last_error.c_str(); }

retreet_status retreet_config_create(retreet_config** out) {
    if (!out) return fail(RETREET_ERR_NULL, "out is null");
    return guard([&] {
        auto* c = new retreet_config;
        if (const char* m = std::getenv("RETREET_MONA")) c->cfg.solver_bin = m;
        *out = c;
        return RETREET_OK;
    });
}

void retreet_config_destroy(retreet_config* c) { delete c; }

retreet_status retreet_config_set(retreet_config* c, const char* key, const char* value) {
    if (!c || !key || !value) return fail(RETREET_ERR_NULL, "null argument");
    return guard([&] {
        auto it = keys().find(key);
        if (it == keys().end()) return fail(RETREET_ERR_KEY, std::string("unknown key '") + key + "'");
        if (!it->second.first(*c, value))
            return fail(RETREET_ERR_VALUE, std::string("bad value '") + value + "' for " + key);
        return RETREET_OK;
    });
}

retreet_status retreet_config_get(const retreet_config* c, const char* key, const char** value) {
    if (!c || !key || !value) return fail(RETREET_ERR_NULL, "null argument");
    return guard([&] {
        auto it = keys().find(key);
        if (it == keys().end()) return fail(RETREET_ERR_KEY, std::string("unknown key '") + key + "'");
        c->scratch = it->second.second(*c);
        *value = c->scratch.c_str();
        return RETREET_OK;
    });
}

retreet_status retreet_run(const retreet_config* c, const char* command, int argc, const char* const* argv,
                           retreet_report** out) {
    if (!c || !command || !out || (argc > 0 && !argv)) return fail(RETREET_ERR_NULL, "null argument");
    return guard([&] {
        auto& names = retreet::command_names();
        if (std::find(names.begin(), names.end(), command) == names.end())
            return fail(RETREET_ERR_COMMAND, std::string("unknown command '") + command + "'");
        std::vector<std::string> args;
        for (int i = 0; i < argc; ++i) {
            if (!argv[i]) return fail(RETREET_ERR_NULL, "null argument");
            args.push_back(argv[i]);
        }
        auto* r = new retreet_report;
        r->rep = retreet::run_command(c->cfg, command, args);
        r->json = r->rep.to_json();
        r->output = c->format == "json" ? r->json + "\n" : r->rep.to_text();
        *out = r;
        return RETREET_OK;
    });
}

void retreet_report_destroy(retreet_report* r) { delete r; }

int retreet_report_exit_code(const retreet_report* r) { return r ? r->rep.exit_code : RETREET_EXIT_USAGE; }

const char* retreet_report_verdict(const retreet_report* r) { return r ? r->rep.verdict.c_str() : ""; }

const char* retreet_report_output(const retreet_report* r) { return r ? r->output.c_str() : ""; }

const char* retreet_report_json(const retreet_report* r) { return r ? r->json.c_str() : ""; }

const char* retreet_report_witness_file(const retreet_report* r) { return r ? r->rep.witness_file.c_str() : ""; }

double retreet_report_seconds(const retreet_report* r) { return r ? r->rep.seconds : 0; }

}  // extern "C"
