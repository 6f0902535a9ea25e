#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gws/pattern.hpp"
#include "gws/tree.hpp"

using json = nlohmann::ordered_json;

namespace {

// The binary under test, injected by the test harness environment.
std::string cli_path() {
    const char* path = std::getenv("GWS_CLI");
    REQUIRE_MESSAGE(path != nullptr,
                    "GWS_CLI must point at the command-line binary (ctest sets it)");
    return path;
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    std::array<char, 4096> buffer;
    std::size_t got;
    while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
        result.output.append(buffer.data(), got);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string temp_path(const std::string& name) {
    return "/tmp/gws_cli_test_" + std::to_string(getpid()) + "_" + name;
}

} // namespace

TEST_CASE("exact oracle over the three-node conditioned law") {
    auto r = run("oracle --dist geom --pattern '(()())' --n 3");
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);
    CHECK(report["mean"].get<double>() == 0.5);
    CHECK(report["variance"].get<double>() == 0.25);
    CHECK(report["histogram"]["0"].get<double>() == 0.5);
    CHECK(report["histogram"]["1"].get<double>() == 0.5);
    CHECK(report["config"]["command"] == "oracle");
    CHECK(report["config"]["dist"] == "geom");
    CHECK(report["config"]["pattern"] == "(()())");
    CHECK(report["config"]["n"] == 3);
}

TEST_CASE("error paths exit with their documented codes and records") {
    auto unknown = run("frobnicate");
    CHECK(unknown.exit_code == 2);
    CHECK(json::parse(unknown.output)["error"]["code"] == 2);

    auto bad_dist = run("oracle --dist geoom --pattern '()' --n 3");
    CHECK(bad_dist.exit_code == 3);
    CHECK(json::parse(bad_dist.output)["error"]["code"] == 3);

    // Span-2 law: size 4 is in the wrong residue class.
    auto infeasible = run("mc --dist table:0=0.5,2=0.5 --pattern '(()())' --n 4 --reps 200");
    CHECK(infeasible.exit_code == 4);
    CHECK(json::parse(infeasible.output)["error"]["code"] == 4);

    auto too_large = run("oracle --dist geom --pattern '()' --n 20");
    CHECK(too_large.exit_code == 5);
    auto guard = json::parse(too_large.output);
    CHECK(guard["error"]["code"] == 5);
    CHECK(guard["error"]["kind"] == "oracle-guard");

    auto bad_pattern = run("oracle --dist geom --pattern '(()' --n 3");
    CHECK(bad_pattern.exit_code == 1);
    CHECK(json::parse(bad_pattern.output)["error"]["kind"] == "parse-error");
}

TEST_CASE("sampled trees feed the counter and the single-node count is the size") {
    const std::string trees = temp_path("trees.txt");
    auto sampled = run("sample --dist geom --n 6 --reps 5 --seed 42 --out " + trees);
    REQUIRE(sampled.exit_code == 0);

    auto counted = run("count --pattern '()' --trees " + trees + " --mode total");
    REQUIRE(counted.exit_code == 0);
    CHECK(counted.output == "6\n6\n6\n6\n6\n");

    // Toll of the two-node path is the root degree; check one line against
    // the library on the same file.
    std::ifstream in(trees);
    std::string first_line;
    std::getline(in, first_line);
    auto tree = gws::parse_tree(first_line);
    auto tolls = run("count --pattern '(())' --trees " + trees + " --mode toll");
    std::istringstream tolls_in(tolls.output);
    std::string first_toll;
    std::getline(tolls_in, first_toll);
    CHECK(std::stoull(first_toll) == tree.outdegree(0));

    std::remove(trees.c_str());
}

TEST_CASE("reports are byte-stable across reruns and worker counts") {
    const std::string args =
        "mc --dist geom --pattern '(()())' --n 120 --reps 500 --seed 7 ";
    auto one = run(args + "--workers 1");
    auto four = run(args + "--workers 4");
    auto again = run(args + "--workers 4");
    REQUIRE(one.exit_code == 0);
    CHECK(one.output == four.output);
    CHECK(four.output == again.output);

    // A different seed must show up in the bytes.
    auto other = run("mc --dist geom --pattern '(()())' --n 120 --reps 500 --seed 8");
    CHECK(other.output != one.output);
}

TEST_CASE("csv reports carry the configuration and fixed columns") {
    auto r = run("truncation --dist geom --pattern '(()())' --n 120 --plist 1,5 "
                 "--reps 300 --seed 3 --format csv");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("# command=truncation\n") != std::string::npos);
    CHECK(r.output.find("# plist=[1,5]\n") != std::string::npos);
    CHECK(r.output.find("# centered=false\n") != std::string::npos);
    CHECK(r.output.find("p,var_over_n,se_var_over_n\n") != std::string::npos);

    // Two data rows after the header line.
    std::istringstream lines(r.output);
    std::string line;
    std::size_t data_rows = 0;
    while (std::getline(lines, line))
        if (!line.empty() && line[0] != '#' && line[0] != 'p')
            ++data_rows;
    CHECK(data_rows == 2);
}

TEST_CASE("degeneracy report carries the certificate and the fit") {
    auto r = run("degeneracy --dist geom --pattern '(()())' --bound 4");
    REQUIRE(r.exit_code == 0);
    json report = json::parse(r.output);
    REQUIRE(!report["certificate"].is_null());
    CHECK(report["certificate"]["tau1"] == "((()))");
    CHECK(report["certificate"]["tau2"] == "(()())");
    CHECK(report["certificate"]["delta"] == -1);
    CHECK(report["lower_bound_coefficient"].get<double>() == 1.0 / 64.0);
    CHECK(report["decomposition"]["residual"].get<double>() > 1e-6);

    auto path = run("degeneracy --dist geom --pattern '((()))' --bound 6");
    REQUIRE(path.exit_code == 0);
    json path_report = json::parse(path.output);
    CHECK(path_report["certificate"].is_null());
    CHECK(path_report["lower_bound_coefficient"].is_null());
    CHECK(path_report["decomposition"]["residual"].get<double>() <= 1e-9);
}
