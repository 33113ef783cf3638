#include "hyperdistill/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hyperdistill;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int shell_exit(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, DefaultRunSucceeds) {
    const auto r = cli({"--pairs", "50"});
    EXPECT_EQ(r.code, kExitOk);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["config"]["pairs"], 50);
    EXPECT_TRUE(j["audit"]["pass"].get<bool>());
    EXPECT_FALSE(j.contains("duration_ms"));
    EXPECT_NE(r.err.find("completed 50 pairs"), std::string::npos);
}

TEST(Cli, TimingFlagAddsDuration) {
    const auto r = cli({"--pairs", "5", "--timing"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_TRUE(nlohmann::json::parse(r.out)["duration_ms"].is_number());
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(cli({"--nope"}).code, kExitUsage);
    const auto r = cli({"--fidelities", "0.5,0.5,0.5,0.5"});
    EXPECT_EQ(r.code, kExitUsage);
    EXPECT_NE(r.err.find("--fidelities"), std::string::npos);
    EXPECT_EQ(cli({"--pairs", "5", "--out", "/nonexistent/dir/x.json"}).code, kExitUsage);
    EXPECT_EQ(cli({"--audit", "/nonexistent/dir/t.log"}).code, kExitUsage);
}

TEST(Cli, SameSeedSameBytes) {
    const std::vector<std::string> args = {"--pairs", "300", "--fidelities", "0.7,0.1,0.15,0.05", "--seed", "5"};
    for (const char* fmt : {"json", "csv"}) {
        auto a = args, b = args;
        a.insert(a.end(), {"--format", fmt});
        b.insert(b.end(), {"--format", fmt});
        EXPECT_EQ(cli(a).out, cli(b).out);
    }
}

TEST(Cli, TranscriptFilePassesAuditWhenReRead) {
    const auto tpath = temp_path("hyperdistill_cli_t.log");
    const auto rpath = temp_path("hyperdistill_cli_r.csv");
    const auto r = cli({"--pairs", "40", "--seed", "2", "--transcript", tpath, "--out", rpath, "--format", "csv"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(r.out.empty());
    EXPECT_EQ(report_from_csv(slurp(rpath)).pairs, 40u);

    std::ifstream in(tpath);
    const auto t = Transcript::read(in);
    EXPECT_EQ(t.run_id(), "hyperdistill-2");
    EXPECT_EQ(t.seed(), 2u);
    EXPECT_EQ(t.size(), 40u * 6 + 1);
    EXPECT_TRUE(audit(t).pass());

    const auto a = cli({"--audit", tpath});
    EXPECT_EQ(a.code, kExitOk);
    const auto j = nlohmann::json::parse(a.out);
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(j["messages"], 241);
    std::filesystem::remove(tpath);
    std::filesystem::remove(rpath);
}

TEST(Cli, AuditOfTamperedTranscriptExitsOne) {
    const auto tpath = temp_path("hyperdistill_cli_bad.log");
    ASSERT_EQ(cli({"--pairs", "3", "--transcript", tpath}).code, kExitOk);
    {
        std::ofstream app(tpath, std::ios::app);
        app << "1000|ResultReport|Bob2|Bob1|bit|0\n";
    }
    const auto a = cli({"--audit", tpath});
    EXPECT_EQ(a.code, kExitAuditFailed);
    const auto j = nlohmann::json::parse(a.out);
    EXPECT_FALSE(j["pass"].get<bool>());
    ASSERT_EQ(j["violations"].size(), 2u);
    EXPECT_EQ(j["violations"][0]["kind"], "bob_to_bob");
    EXPECT_EQ(j["violations"][1]["kind"], "result_from_bob2");
    EXPECT_EQ(j["violations"][0]["seq"], 1000);
    EXPECT_EQ(cli({"--audit", tpath, "--allow-audit-fail"}).code, kExitOk);

    {
        std::ofstream app(tpath, std::ios::app);
        app << "garbage line\n";
    }
    EXPECT_EQ(cli({"--audit", tpath}).code, kExitUsage);
    std::filesystem::remove(tpath);
}

TEST(Cli, SweepOutput) {
    const auto r = cli({"--pairs", "200", "--sweep", "6", "--format", "csv", "--seed", "10"});
    EXPECT_EQ(r.code, kExitOk);
    EXPECT_EQ(r.out.rfind("seed,phi_count,phi_frequency,z,audit_pass\n10,", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}

TEST(Cli, EntropyPrintsSeed) {
    const auto r = cli({"--pairs", "5", "--entropy"});
    EXPECT_EQ(r.code, kExitOk);
    ASSERT_EQ(r.err.rfind("seed: ", 0), 0u);
    const auto seed = std::stoull(r.err.substr(6));
    EXPECT_EQ(nlohmann::json::parse(r.out)["config"]["seed"].get<std::uint64_t>(), seed);
}

// The built executable behaves like run_cli and is deterministic across
// processes.
TEST(Cli, BinaryExitCodesAndDeterminism) {
    const std::string bin = HYPERDISTILL_CLI_PATH;
    const auto a = temp_path("hyperdistill_bin_a.json");
    const auto b = temp_path("hyperdistill_bin_b.json");
    const auto ta = temp_path("hyperdistill_bin_a.log");
    const auto tb = temp_path("hyperdistill_bin_b.log");
    const std::string common = " --pairs 500 --fidelities 0.7,0.1,0.15,0.05 --seed 77 --dephase-p 0.1";
    ASSERT_EQ(shell_exit(bin + common + " --out " + a + " --transcript " + ta + " 2>/dev/null"), 0);
    ASSERT_EQ(shell_exit(bin + common + " --out " + b + " --transcript " + tb + " 2>/dev/null"), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(slurp(ta), slurp(tb));
    EXPECT_FALSE(slurp(a).empty());
    EXPECT_EQ(shell_exit(bin + " --bogus 2>/dev/null"), 2);
    EXPECT_EQ(shell_exit(bin + " --audit " + ta + " >/dev/null"), 0);
    for (const auto& p : {a, b, ta, tb}) std::filesystem::remove(p);
}
