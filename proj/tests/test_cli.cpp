#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"

// exercises the installed binary against the bundled assets
namespace {

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(PROXID_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    std::string out;
    char buf[4096];
    while (fgets(buf, sizeof buf, pipe)) out += buf;
    int status = pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return {code, out};
}

std::string assets(const std::string& rel) { return std::string(PROXID_ASSETS) + "/" + rel; }

}  // namespace

TEST_CASE("identify: front-door graph exits 0 with the functional") {
    RunResult r = run("identify --graph " + assets("graphs/fig2c.g") + " --query " +
                      assets("queries/y_of_a.json"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("p(m | a,c)") != std::string::npos);
}

TEST_CASE("identify: fig 3(b) exits 2 with the witness district") {
    RunResult r = run("identify --graph " + assets("graphs/fig3b.g") + " --query " +
                      assets("queries/y_of_a.json"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("witness district: {Y}") != std::string::npos);
}

TEST_CASE("identify: malformed graph exits 1 with a line number") {
    std::string bad = "/tmp/proxid_bad_graph.g";
    {
        std::ofstream out(bad);
        out << "vertex A\nA -> B\n";
    }
    RunResult r = run("identify --graph " + bad + " --query " + assets("queries/y_of_a.json"));
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("line 2") != std::string::npos);
}

TEST_CASE("pid: proximal identification of fig 1(c)") {
    RunResult r = run("pid --graph " + assets("graphs/fig1c.g") + " --query " +
                      assets("queries/fig1c_proximal.json") + " --out /tmp/proxid_fig1c.json");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("let b1(a,c,w,y) solve") != std::string::npos);
    std::ifstream in("/tmp/proxid_fig1c.json");
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str().find("\"verdict\": \"identified\"") != std::string::npos);
    CHECK(buf.str().find("bridge_solve") != std::string::npos);
}

TEST_CASE("verify: proximal g-formula passes random oracles") {
    RunResult r = run("verify --graph " + assets("graphs/fig1c.g") + " --query " +
                      assets("queries/fig1c_proximal.json") + " --proximal --trials 25 --seed 5");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("failed: 0") != std::string::npos);

    RunResult vac = run("verify --graph " + assets("graphs/fig1c.g") + " --query " +
                        assets("queries/fig1c_proximal.json") + " --proximal --trials 0");
    CHECK(vac.exit_code == 0);
    CHECK(vac.output.find("vacuously") != std::string::npos);
}

TEST_CASE("verify: a not-identified query exits 2") {
    RunResult r = run("verify --graph " + assets("graphs/bow.g") + " --query " +
                      assets("queries/y_of_a.json") + " --trials 5");
    CHECK(r.exit_code == 2);
}

TEST_CASE("simulate and report round trip") {
    std::string cfg = "/tmp/proxid_tiny.cfg";
    {
        std::ofstream out(cfg);
        out << "n_dgps=1\ndatasets_per_dgp=2\nn=500\nseed=53\ntrajectories=10\n";
        out << "estimators=OracleBackdoor,SimpleProximal\n";
    }
    RunResult r = run("simulate --config " + cfg + " --out /tmp/proxid_sim_out");
    CHECK(r.exit_code == 0);
    std::ifstream csv("/tmp/proxid_sim_out/results.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "setting,estimator,mean_abs_bias,pct_abs_bias,coverage,width,failures");

    RunResult rep = run("report --in /tmp/proxid_sim_out");
    CHECK(rep.exit_code == 0);
    CHECK(rep.output.find("OracleBackdoor") != std::string::npos);

    RunResult bad = run("simulate --config /tmp/does_not_exist.cfg --out /tmp/x");
    CHECK(bad.exit_code == 1);
}

TEST_CASE("simulate: byte-stable outputs for a fixed seed") {
    std::string cfg = "/tmp/proxid_tiny2.cfg";
    {
        std::ofstream out(cfg);
        out << "n_dgps=1\ndatasets_per_dgp=2\nn=400\nseed=7\ntrajectories=5\n";
        out << "estimators=SimpleProximal\n";
    }
    run("simulate --config " + cfg + " --out /tmp/proxid_sim_a");
    run("simulate --config " + cfg + " --out /tmp/proxid_sim_b");
    auto slurp = [](const std::string& p) {
        std::ifstream in(p);
        std::stringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    CHECK(slurp("/tmp/proxid_sim_a/results.csv") == slurp("/tmp/proxid_sim_b/results.csv"));
    CHECK_FALSE(slurp("/tmp/proxid_sim_a/results.csv").empty());
}
