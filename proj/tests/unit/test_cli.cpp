#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using pilot::cli::ConfigError;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("pilot_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

    int run(std::vector<std::string> args) {
        args.insert(args.begin(), "pilot");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        out_.str("");
        err_.str("");
        return pilot::cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    std::string out_dir(const std::string& sub) const { return (dir_ / sub).string(); }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

const char* kTwoThreshold = R"({
  "params": {"h": 1, "l": -1, "h_dag": 1, "l_dag": -1, "k": 1, "alpha": 0.1, "sigma": 1},
  "p0": 0.525
})";

}  // namespace

TEST_F(CliTest, SolveWritesHeaderAndRow) {
    const std::string cfg = write("c.json", kTwoThreshold);
    ASSERT_EQ(run({"--config", cfg, "--out", out_dir("o"), "solve"}), 0) << err_.str();
    const std::string csv = slurp(dir_ / "o" / "solve.csv");
    EXPECT_NE(csv.find("# command: solve"), std::string::npos);
    EXPECT_NE(csv.find("# sigma: 1\n"), std::string::npos);
    EXPECT_NE(csv.find("# config: {"), std::string::npos);
    EXPECT_NE(csv.find("TwoThreshold"), std::string::npos);
}

TEST_F(CliTest, ExitOnlyThreshold) {
    const std::string cfg = write("c.json", R"({
      "params": {"h": 1, "l": -1, "h_dag": 0, "l_dag": 0, "k": 20, "alpha": 0.1, "sigma": 1}})");
    ASSERT_EQ(run({"--config", cfg, "--out", out_dir("o"), "solve"}), 0) << err_.str();
    const std::string csv = slurp(dir_ / "o" / "solve.csv");
    EXPECT_NE(csv.find("ExitOnly"), std::string::npos);
    EXPECT_NE(csv.find("0.0435645354"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
    EXPECT_EQ(run({"--config", write("a.json", R"({"params": {"h": 1, "l": -1, "h_dag": 1,
        "l_dag": -1, "k": 1, "alpha": 0.1, "sigma": 0}})"), "--out", out_dir("o"), "solve"}), 2);
    EXPECT_NE(err_.str().find("config error"), std::string::npos);
    EXPECT_EQ(run({"--config", write("b.json", R"({"params": {"h": 1}, "colour": 3})"), "solve"}), 2);
    EXPECT_EQ(run({"--config", write("c.json", "{not json"), "solve"}), 2);
    EXPECT_EQ(run({"--config", out_dir("missing.json"), "solve"}), 2);
    EXPECT_EQ(run({"solve"}), 2);
    EXPECT_EQ(run({"--bogus", "solve"}), 2);
    EXPECT_EQ(run({}), 2);
}

TEST_F(CliTest, SweepFailuresExitThree) {
    // Two-threshold regime with h_dag below k alpha: every row fails.
    const std::string cfg = write("c.json", R"({
      "params": {"h": 1, "l": -1, "h_dag": 0.1, "l_dag": -0.5, "k": 2, "alpha": 0.1, "sigma": 1},
      "sweep": {"min": 0.5, "max": 2, "count": 4}})");
    EXPECT_EQ(run({"--config", cfg, "--out", out_dir("o"), "sweep"}), 3);
    EXPECT_TRUE(fs::exists(dir_ / "o" / "sweep.csv"));
}

TEST_F(CliTest, SweepIsReproducibleFromItsOwnHeader) {
    const std::string cfg = write("c.json", R"({
      "model": "extended",
      "params": {"h": 1, "l": -1, "n_plants": 1, "k": 1, "alpha": 0.1, "sigma": 1},
      "sweep": {"min": 0.1, "max": 10, "count": 12}})");
    ASSERT_EQ(run({"--config", cfg, "--out", out_dir("a"), "sweep"}), 0) << err_.str();
    const fs::path first = dir_ / "a" / "sweep.csv";
    ASSERT_EQ(run({"--config", first.string(), "--out", out_dir("b"), "sweep"}), 0) << err_.str();
    EXPECT_EQ(slurp(first), slurp(dir_ / "b" / "sweep.csv"));
}

TEST_F(CliTest, SimulateIsByteIdenticalAcrossRerunsAndThreads) {
    const std::string cfg = write("c.json", R"({
      "params": {"h": 1, "l": -1, "h_dag": 1, "l_dag": -1, "k": 1, "alpha": 0.1, "sigma": 1},
      "p0": 0.525,
      "mc": {"reps": 400, "dt": 0.002, "horizon": 0.5, "paths": 2, "record_every": 25}})");
    ASSERT_EQ(run({"--config", cfg, "--out", out_dir("a"), "--seed", "5", "simulate"}), 0) << err_.str();
    ASSERT_EQ(run({"--config", (dir_ / "a" / "simulate_ensemble.csv").string(), "--out", out_dir("b"),
                   "--threads", "3", "simulate"}),
              0)
        << err_.str();
    for (const char* f : {"simulate_paths.csv", "simulate_ensemble.csv", "simulate_hitting.csv"}) {
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    }
    EXPECT_NE(slurp(dir_ / "a" / "simulate_paths.csv").find("# seed: 5"), std::string::npos);
}

TEST_F(CliTest, CertifyNegativeControlExitsFour) {
    const std::string cfg = write("c.json", R"({
      "certify": {"reps": 500, "grid_n": 1001},
      "asymptotics": {"sigmas": [0.05, 500]}})");
    EXPECT_EQ(run({"--config", cfg, "--out", out_dir("o"), "certify", "--inject-perturbation", "0.03"}), 4)
        << err_.str();
    const std::string csv = slurp(dir_ / "o" / "certify.csv");
    EXPECT_NE(csv.find("# inject_perturbation: 0.03"), std::string::npos);
    EXPECT_NE(csv.find("optimality_lower_minus"), std::string::npos);
}

TEST_F(CliTest, HiddenFlagStaysOutOfHelp) {
    EXPECT_EQ(run({"certify", "--help"}), 0);
    EXPECT_EQ(out_.str().find("inject"), std::string::npos);
}

TEST_F(CliTest, AsymptoticsRowsPerSigma) {
    const std::string cfg = write("c.json", kTwoThreshold);
    ASSERT_EQ(run({"--config", cfg, "--out", out_dir("o"), "asymptotics"}), 0) << err_.str();
    const std::string csv = slurp(dir_ / "o" / "asymptotics.csv");
    std::size_t data = 0;
    std::istringstream lines(csv);
    for (std::string line; std::getline(lines, line);) {
        if (!line.empty() && line[0] != '#') ++data;
    }
    EXPECT_EQ(data, 1u + 8u);
}

TEST(Config, RoundTripsThroughJson) {
    const auto cfg = pilot::cli::parse_config(nlohmann::json::parse(R"({
      "model": "extended",
      "params": {"h": 2, "l": -1, "n_plants": 2, "k": 1, "alpha": 0.1, "sigma": 1},
      "sweep": {"min": 0.1, "max": 5, "count": 3, "scale": "linear"},
      "mc": {"reps": 10, "seed": 3}})"));
    EXPECT_TRUE(cfg.extended());
    EXPECT_EQ(cfg.params->h_dag, 4.0);
    EXPECT_EQ(cfg.params->l_dag, -2.0);
    const auto again = pilot::cli::parse_config(pilot::cli::to_json(cfg));
    EXPECT_EQ(pilot::cli::to_json(again), pilot::cli::to_json(cfg));
}

TEST(Config, StrictValidation) {
    using nlohmann::json;
    EXPECT_THROW(pilot::cli::parse_config(json::parse(R"({"p0": 1.5})")), ConfigError);
    EXPECT_THROW(pilot::cli::parse_config(json::parse(R"({"sweep": {"min": 2, "max": 1}})")), ConfigError);
    EXPECT_THROW(pilot::cli::parse_config(json::parse(R"({"mc": {"reps": -3}})")), ConfigError);
    EXPECT_THROW(pilot::cli::parse_config(json::parse(R"({"certify": {"grid_n": 2000}})")), ConfigError);
    EXPECT_THROW(pilot::cli::parse_config(json::parse(R"({"model": "other"})")), ConfigError);
    EXPECT_THROW(pilot::cli::parse_config(json::parse(R"({"params": {"h": 1, "l": -1, "k": 1,
        "alpha": 0.1, "sigma": 1}})")), ConfigError);
}
