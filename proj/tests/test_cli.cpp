#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "test_support.hpp"

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(OCCTIME_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int st = pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string model(const char* name) { return std::string("--model ") + OCCTIME_MODELS + "/" + name; }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    for (std::string line; std::getline(ss, line);) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST(Cli, RootsOfBrownianMotion) {
    const auto r = run("roots " + model("bm.json") + " --q 2");
    ASSERT_EQ(r.status, 0);
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"kind", "re", "im"}));
    EXPECT_EQ(rows[1][0], "beta");
    EXPECT_DOUBLE_EQ(std::stod(rows[1][1]), 2.0);
    EXPECT_EQ(rows[2][0], "gamma");
    EXPECT_DOUBLE_EQ(std::stod(rows[2][1]), 2.0);
    EXPECT_EQ(r.out.find('\r'), std::string::npos);
}

TEST(Cli, VqWithZeroWeightIsKilledTail) {
    const auto r = run("vq " + model("kou.json") + " --q 1 --p 0 --b 0 --y 0.3 --x-grid -0.5,1,4");
    ASSERT_EQ(r.status, 0);
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 5u);
    const occtime::OccupationEngine eng(occtime::testing::kou());
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double x = std::stod(rows[i][0]);
        EXPECT_NEAR(std::stod(rows[i][1]), eng.killed_tail(x, 0.3, 1.0), 1e-14);
    }
}

TEST(Cli, FullPrecisionOutput) {
    const auto r = run("vq " + model("kou.json") + " --q 1 --p 0.5 --b 0 --y 0.3 --x-grid 0.2,0.2,1");
    ASSERT_EQ(r.status, 0);
    const auto rows = parse_csv(r.out);
    const occtime::OccupationEngine eng(occtime::testing::kou());
    EXPECT_EQ(std::stod(rows.at(1).at(1)), eng.v_q(0.2, 1.0, 0.5, 0.0, 0.3));
}

TEST(Cli, DensityAndScaleDensityAgree) {
    const std::string args = " --q 1 --p 0.5 --b 0 --x 0.5 --y-grid -1,0.4,5";
    const auto a = run("density " + model("sn_exp5.json") + args);
    const auto b = run("sn-density " + model("sn_exp5.json") + args);
    ASSERT_EQ(a.status, 0);
    ASSERT_EQ(b.status, 0);
    const auto ra = parse_csv(a.out), rb = parse_csv(b.out);
    ASSERT_EQ(ra.size(), 6u);
    ASSERT_EQ(rb.size(), 6u);
    for (std::size_t i = 1; i < ra.size(); ++i)
        EXPECT_NEAR(std::stod(ra[i][1]) / std::stod(rb[i][1]), 1.0, 1e-6);
}

TEST(Cli, McAndHistogram) {
    const auto r = run("mc " + model("kou.json") + " --q 1 --p 0.5 --b 0 --y 0.3 --x-grid 0,0.5,2 --paths 2000 --dt 1e-2");
    ASSERT_EQ(r.status, 0);
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "mc_mean", "mc_stderr", "n_paths"}));
    const auto h = run("mc " + model("kou.json") + " --q 1 --p 0.5 --b 0 --x 0 --y-grid -1,1,5 --paths 2000 --dt 1e-2");
    ASSERT_EQ(h.status, 0);
    EXPECT_EQ(parse_csv(h.out).size(), 7u);
    const auto again = run("mc " + model("kou.json") + " --q 1 --p 0.5 --b 0 --y 0.3 --x-grid 0,0.5,2 --paths 2000 --dt 1e-2");
    EXPECT_EQ(again.out, r.out);
}

TEST(Cli, FixedTimeAndPricing) {
    const auto f = run("fixed-time " + model("bm.json") + " --p 0 --b 0 --y 0 --t 1 --x-grid 0,0,1");
    ASSERT_EQ(f.status, 0);
    EXPECT_NEAR(std::stod(parse_csv(f.out).at(1).at(2)), 0.5, 1e-6);
    const auto p = run("price-step " + model("kou.json") +
                       " --spot 1 --strike 1 --t 0.5 --rate 0.02 --rho 1 --b -0.05 --payoff call");
    ASSERT_EQ(p.status, 0);
    const auto rows = parse_csv(p.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_GT(std::stod(rows[1].back()), 0.0);
}

TEST(Cli, OutputFile) {
    const std::string path = ::testing::TempDir() + "occtime_cli_roots.csv";
    ASSERT_EQ(run("roots " + model("kou.json") + " --q 1 --out " + path).status, 0);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "kind,re,im");
    EXPECT_EQ(run("roots " + model("kou.json") + " --q 1 --out /nonexistent/dir/x.csv").status, 4);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("roots " + model("bm.json") + " --q -1").status, 2);
    EXPECT_EQ(run("vq " + model("kou.json") + " --q 1 --p -2").status, 2);
    EXPECT_EQ(run("vq " + model("kou.json") + " --q 1 --b 0.5 --y 0.1").status, 2);
    EXPECT_EQ(run("density " + model("kou.json") + " --q 1 --p 0 --y-grid 0,1,2").status, 2);
    EXPECT_EQ(run("sn-density " + model("kou.json") + " --q 1 --p 1 --y-grid 0,1,2").status, 2);
    EXPECT_EQ(run("vq --model /nonexistent.json --q 1").status, 4);
    EXPECT_EQ(run("fixed-time " + model("bm.json") + " --p 1 --terms 7").status, 2);
    EXPECT_EQ(run("bogus").status, 2);
    EXPECT_EQ(run("vq " + model("kou.json") + " --x-grid 1,2").status, 2);
}

TEST(Cli, MalformedModelFile) {
    const std::string bad = ::testing::TempDir() + "occtime_bad_model.json";
    std::ofstream(bad) << "{ not json";
    EXPECT_EQ(run("roots --model " + bad + " --q 1").status, 4);
    const std::string invalid = ::testing::TempDir() + "occtime_invalid_model.json";
    std::ofstream(invalid) << R"({"sigma": -1})";
    EXPECT_EQ(run("roots --model " + invalid + " --q 1").status, 2);
}
