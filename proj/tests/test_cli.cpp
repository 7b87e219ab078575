#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct RunResult {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
}

std::string tmp_path(const char* stem) {
    return "/tmp/shortpkt_cli_" + std::to_string(getpid()) + "_" + stem;
}

// Runs the installed CLI binary (path from the test harness environment)
// with the given argument string; captures exit status, stdout, stderr.
RunResult run_cli(const std::string& args) {
    RunResult r;
    const char* bin = std::getenv("SHORTPKT_CLI_BIN");
    if (!bin) return r;
    const std::string out_path = tmp_path("out");
    const std::string err_path = tmp_path("err");
    const std::string cmd =
        std::string(bin) + " " + args + " >" + out_path + " 2>" + err_path;
    const int rc = std::system(cmd.c_str());
    if (rc != -1 && WIFEXITED(rc)) r.status = WEXITSTATUS(rc);
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("harness provides the binary") {
    REQUIRE(std::getenv("SHORTPKT_CLI_BIN") != nullptr);
}

TEST_CASE("pdv: headline rows, fixed formatting") {
    const RunResult r = run_cli("pdv --n 100 --lambda 0.001 --d0 500,50");
    REQUIRE(r.status == 0);
    CHECK(r.err.empty());
    CHECK(r.out.rfind("# schema_version=1\n", 0) == 0);
    CHECK(contains(r.out, "d0_cu,d_frames,pdv_exact,pdv_saddlepoint,pdv_netcalc"));
    CHECK(contains(r.out,
                   "5.00000000e+02,5,1.20777587e-02,1.41370867e-02,5.75200394e-02"));
    // A budget below one frame is certain to be violated; the saddlepoint
    // column reports NA rather than a fabricated number.
    CHECK(contains(r.out, "5.00000000e+01,1,1.00000000e+00,NA,1.00000000e+00"));
}

TEST_CASE("pdv: async regime marks the sync-only bound NA") {
    const RunResult r = run_cli("pdv --n 100 --lambda 0.001 --regime async --d0 1200");
    REQUIRE(r.status == 0);
    CHECK(contains(r.out, "1.20000000e+03,1200,2.80071178e-06,3.14395030e-06,NA"));
}

TEST_CASE("explicitly requested methods fail loudly when inapplicable") {
    const RunResult nc =
        run_cli("pdv --n 100 --lambda 0.001 --regime async --d0 1200 --method netcalc");
    CHECK(nc.status != 0);
    CHECK(contains(nc.err, "frame-synchronous"));

    const RunResult sp =
        run_cli("pdv --n 100 --lambda 0.001 --d0 50 --method saddlepoint");
    CHECK(sp.status != 0);
    CHECK(contains(sp.err, "mean"));

    const RunResult age =
        run_cli("age --n 100 --lambda 0.001 --a0 600 --method netcalc");
    CHECK(age.status != 0);
    CHECK(contains(age.err, "peak age"));
}

TEST_CASE("unstable parameters are refused with the stability condition") {
    const RunResult r = run_cli("pdv --n 100 --lambda 0.01 --d0 500");
    CHECK(r.status != 0);
    CHECK(contains(r.err, "unstable"));
}

TEST_CASE("missing required flags are an error") {
    CHECK(run_cli("pdv --n 100 --d0 500").status != 0);
    CHECK(run_cli("pdv --lambda 0.001 --d0 500").status != 0);
    CHECK(run_cli("throughput --n-min 98 --n-max 102 --d0 500").status != 0);
}

TEST_CASE("byte determinism of analytical commands") {
    const std::string cmd = "pdv --n 100 --lambda 0.001 --d0 500,1000,1700";
    const RunResult a = run_cli(cmd);
    const RunResult b = run_cli(cmd);
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("simulate is reproducible and self-consistent") {
    const std::string cmd =
        "simulate --n 10 --lambda 0.01 --epsilon 0.1 --horizon 500000 --seed 9 "
        "--replicas 2";
    const RunResult a = run_cli(cmd);
    const RunResult b = run_cli(cmd);
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(contains(a.out, "regime,n,epsilon,lambda,horizon_cu"));
    CHECK(contains(a.out, "\nsync,10,1.00000000e-01,1.00000000e-02,500000,50000,9,2,"));
}

TEST_CASE("json output parses and mirrors the csv values") {
    const RunResult r = run_cli("pdv --n 100 --lambda 0.001 --d0 500 --format json");
    REQUIRE(r.status == 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    CHECK(j.at("schema_version").get<int>() == 1);
    CHECK(j.at("command").get<std::string>() == "pdv");
    REQUIRE(j.at("rows").size() == 1);
    const auto& row = j.at("rows").at(0);
    CHECK(row.at("pdv_exact").get<double>() ==
          doctest::Approx(0.012077758673558438).epsilon(1e-9));
    CHECK(row.at("d_frames").get<int>() == 5);

    // Inapplicable cells are JSON null, not strings.
    const RunResult a =
        run_cli("pdv --n 100 --lambda 0.001 --regime async --d0 1200 --format json");
    REQUIRE(a.status == 0);
    const nlohmann::json ja = nlohmann::json::parse(a.out);
    CHECK(ja.at("rows").at(0).at("pdv_netcalc").is_null());
}

TEST_CASE("config file supplies flags; explicit flags override") {
    const std::string cfg = tmp_path("cfg");
    spit(cfg, "n=100\nlambda=0.001\nd0=500\n");

    const RunResult from_cfg = run_cli("pdv --config " + cfg);
    const RunResult from_flags = run_cli("pdv --n 100 --lambda 0.001 --d0 500");
    REQUIRE(from_cfg.status == 0);
    CHECK(from_cfg.out == from_flags.out);

    const RunResult override_lam = run_cli("pdv --config " + cfg + " --lambda 0.002");
    const RunResult direct_lam = run_cli("pdv --n 100 --lambda 0.002 --d0 500");
    REQUIRE(override_lam.status == 0);
    CHECK(override_lam.out == direct_lam.out);
    CHECK(override_lam.out != from_cfg.out);
    std::remove(cfg.c_str());
}

TEST_CASE("--out writes the same bytes to a file") {
    const std::string path = tmp_path("csv");
    const RunResult to_file =
        run_cli("pdv --n 100 --lambda 0.001 --d0 500 --out " + path);
    const RunResult to_stdout = run_cli("pdv --n 100 --lambda 0.001 --d0 500");
    REQUIRE(to_file.status == 0);
    CHECK(to_file.out.empty());
    CHECK(slurp(path) == to_stdout.out);
    std::remove(path.c_str());
}

TEST_CASE("sweep emits the argmin as a trailer") {
    const RunResult r = run_cli("sweep --n-min 95 --n-max 105 --lambda 0.001 --d0 500");
    REQUIRE(r.status == 0);
    CHECK(contains(r.out, "n,epsilon,d_frames,pdv_exact"));
    CHECK(contains(r.out, "# argmin_n="));
}

TEST_CASE("compare cross-checks analysis against simulation") {
    const RunResult r = run_cli(
        "compare --n 10 --lambda 0.01 --epsilon 0.1 --d0 30 --horizon 400000 --seed 5");
    REQUIRE(r.status == 0);
    CHECK(contains(r.out,
                   "d0_cu,d_units,pdv_exact,pdv_saddlepoint,pdv_netcalc,pdv_sim,"
                   "pdv_sim_stderr"));
    // One data row after the comment and header lines.
    CHECK(contains(r.out, "3.00000000e+01,3,"));
}

TEST_CASE("age: values match the tail of the peak-age transform") {
    const RunResult r = run_cli("age --n 10 --lambda 0.01 --epsilon 0.1 --a0 60,120");
    REQUIRE(r.status == 0);
    CHECK(contains(r.out, "a0_cu,a_units,age_viol_exact,age_viol_saddlepoint"));
    CHECK(contains(r.out, "6.00000000e+01,6,6.80970190e-01,"));
    CHECK(contains(r.out, "1.20000000e+02,12,3.72407652e-01,"));
}
