#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string output;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::path(PRESSDIM_BINARY_DIR) / "cli_test_out" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

CliResult run(const std::string& args, const fs::path& dir) {
    const fs::path log = dir / "console.txt";
    const std::string cmd = std::string("cd ") + PRESSDIM_SOURCE_DIR + " && " + PRESSDIM_CLI_PATH + " " + args +
                            " --out " + dir.string() + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = slurp(log);
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST(Cli, UnknownGeneratorIsLineAnchored) {
    const auto dir = scratch("bad_generator");
    const CliResult r = run("pressure --config configs/bad_generator.yaml", dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("configs/bad_generator.yaml:2:"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("unknown generator"), std::string::npos) << r.output;
}

TEST(Cli, MissingConfigFileIsAnError) {
    const auto dir = scratch("missing");
    EXPECT_EQ(run("pressure --config configs/does_not_exist.yaml", dir).code, 2);
}

TEST(Cli, UnknownKeyIsLineAnchored) {
    const auto dir = scratch("unknown_key");
    const fs::path cfg = dir / "bad.yaml";
    std::ofstream(cfg) << "partition:\n  generator: gauss\n  truncaton: 10\n";
    const CliResult r = run("pressure --config " + cfg.string(), dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("bad.yaml:3:"), std::string::npos) << r.output;
}

TEST(Cli, UnknownSubcommandIsAnError) {
    const auto dir = scratch("unknown_sub");
    EXPECT_EQ(run("frobnicate", dir).code, 2);
}

TEST(Cli, GaussPressureTableFlagsDivergence) {
    const auto dir = scratch("pressure_gauss");
    const CliResult r = run("pressure --config configs/pressure_gauss.yaml", dir);
    ASSERT_EQ(r.code, 0) << r.output;
    const auto rows = lines(slurp(dir / "pressure.csv"));
    ASSERT_EQ(rows.size(), 18u);
    EXPECT_EQ(rows[0], "t,lower,upper,method,truncation,tail_bound");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double t = std::stod(rows[i].substr(0, rows[i].find(',')));
        const bool inf = rows[i].find("inf") != std::string::npos;
        EXPECT_EQ(inf, t <= 0.5 + 1e-9) << rows[i];
    }
}

TEST(Cli, DyadicPressureIsFinite) {
    const auto dir = scratch("pressure_dyadic");
    ASSERT_EQ(run("pressure --config configs/pressure_dyadic.yaml", dir).code, 0);
    const auto rows = lines(slurp(dir / "pressure.csv"));
    ASSERT_GT(rows.size(), 1u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].find("inf"), std::string::npos) << rows[i];
}

TEST(Cli, DyadicBowenRoot) {
    const auto dir = scratch("bowen_dyadic");
    const CliResult r = run("bowen --config configs/bowen_dyadic.yaml", dir);
    ASSERT_EQ(r.code, 0) << r.output;
    const auto j = nlohmann::json::parse(slurp(dir / "bowen.json"));
    const double lo = j["root"]["t_low"], hi = j["root"]["t_high"];
    EXPECT_LE(lo, 1.0);
    EXPECT_GE(hi, 1.0);
    EXPECT_LT(hi - lo, 1e-9);
}

TEST(Cli, FullGaussBowenReportsCapacity) {
    const auto dir = scratch("bowen_gauss");
    const CliResult r = run("bowen --config configs/bowen_gauss.yaml", dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("capacity"), std::string::npos) << r.output;
}

TEST(Cli, OrbitPointCount) {
    const auto dir = scratch("orbit");
    ASSERT_EQ(run("orbit --config configs/orbit_k1.yaml", dir).code, 0);
    EXPECT_EQ(lines(slurp(dir / "orbit.csv")).size(), 2002u);
}

TEST(Cli, FixedPointOrbitIsRejected) {
    const auto dir = scratch("orbit_fixed");
    const fs::path cfg = dir / "fixed.yaml";
    std::ofstream(cfg) << "group:\n  n: 2\n  alphas: [[1.0]]\n  xi: infinity\norbit:\n  radius: 10\n";
    const CliResult r = run("verify-hdim --config " + cfg.string(), dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("fixed by P"), std::string::npos) << r.output;
}

TEST(Cli, SelftestPasses) {
    const auto dir = scratch("selftest");
    const CliResult r = run("selftest --config configs/selftest.yaml", dir);
    EXPECT_EQ(r.code, 0) << r.output;
    const auto j = nlohmann::json::parse(slurp(dir / "selftest.json"));
    for (const auto& c : j["checks"]) EXPECT_TRUE(c["passed"].get<bool>()) << c.dump();
}

TEST(Cli, ThreadCountDoesNotChangeOutputs) {
    std::string first_csv, first_json;
    for (int t : {1, 4, 8}) {
        const auto dir = scratch("threads_" + std::to_string(t));
        ASSERT_EQ(run("counting --config configs/hdim_h3_k2.yaml --threads " + std::to_string(t), dir).code, 0);
        const std::string csv = slurp(dir / "counting.csv"), js = slurp(dir / "counting.json");
        if (t == 1) {
            first_csv = csv;
            first_json = js;
        } else {
            EXPECT_EQ(csv, first_csv);
            EXPECT_EQ(js, first_json);
        }
    }
}
