#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <string>
#include <sys/wait.h>

static std::string C(const std::string& name) { return std::string(CORPUS_DIR) + "/" + name; }

struct Run {
    int code;
    std::string out;
};

static Run cli(const std::string& args) {
    auto dir = std::filesystem::temp_directory_path() / "retreet_test_cli";
    std::string cmd = std::string("env -u RETREET_MONA PATH=/usr/bin:/bin '") + CLI_PATH + "' " + args +
                      " --work-dir '" + dir.string() + "' 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

TEST_CASE("exit codes") {
    CHECK(cli("check " + C("odd_even.rtt")).code == 0);
    auto s = cli("check " + C("selfcall.rtt"));
    CHECK(s.code == 1);
    CHECK(s.out.find("SelfCall") != std::string::npos);
    CHECK(cli("race " + C("odd_even_seq.rtt")).code == 0);
    CHECK(cli("race " + C("par_write.rtt") + " --backend bounded").code == 1);
    CHECK(cli("race " + C("odd_even.rtt") + " --backend bounded").code == 3);
    CHECK(cli("equiv " + C("odd_even_seq.rtt") + " " + C("fused_bad.rtt") + " --backend bounded").code == 1);
    CHECK(cli("oracle-race " + C("odd_even.rtt") + " --height 2 --domain 0,1").code == 0);
    CHECK(cli("oracle-equiv " + C("odd_even_seq.rtt") + " " + C("fused_bad.rtt")).code == 1);
}

TEST_CASE("usage errors") {
    CHECK(cli("").code == 2);
    CHECK(cli("race").code == 2);
    CHECK(cli("race a b").code == 2);
    CHECK(cli("frobnicate x").code == 2);
    CHECK(cli("race " + C("odd_even.rtt") + " --backend magic").code == 2);
    CHECK(cli("race " + C("odd_even.rtt") + " --height x").code == 2);
    auto m = cli("race " + C("odd_even.rtt"));
    CHECK(m.code == 2);
    CHECK(m.out.find("no WS2S solver") != std::string::npos);
    CHECK(cli("--help").code == 0);
}

TEST_CASE("json output") {
    auto r = cli("race " + C("par_write.rtt") + " --backend bounded --format json");
    CHECK(r.code == 1);
    CHECK(r.out.find("\"verdict\": \"raceful\"") != std::string::npos);
    CHECK(r.out.find("\"witness_file\"") != std::string::npos);
}
