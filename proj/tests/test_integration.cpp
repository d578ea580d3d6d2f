// Copyright 2026 The qsub Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the qsub_cli binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qsub/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string &args) {
    std::string cmd = std::string(QSUB_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult r;
    FILE *pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return r;
    }
    std::array<char, 4096> buf{};
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        r.out.append(buf.data(), n);
    }
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path &p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

size_t count_lines(const std::string &text) {
    return static_cast<size_t>(std::count(text.begin(), text.end(), '\n'));
}

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("qsub_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_config(const std::string &name, const std::string &text) {
        fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    // Two of six candidates active, two sigma cells, coarse metric grid.
    fs::path small_config() {
        return write_config("small.yaml",
                            "trials: 3\n"
                            "n_u: [2]\n"
                            "sigma_aoa_deg: [0.0, 2.5]\n"
                            "swarm:\n"
                            "  total_uas: 6\n"
                            "metrics:\n"
                            "  pattern_points: 31\n");
    }

    fs::path dir_;
};

}  // namespace

TEST(DefaultConfig, MatchesBuiltInDefaults) {
    qsub::ExperimentConfig file = qsub::load_config(std::string(QSUB_SOURCE_DIR) + "/config/default.yaml");
    qsub::ExperimentConfig d = qsub::ExperimentConfig::defaults();
    EXPECT_EQ(file.trials, d.trials);
    EXPECT_EQ(file.n_u_sweep, d.n_u_sweep);
    EXPECT_EQ(file.sigma_aoa_sweep, d.sigma_aoa_sweep);
    EXPECT_EQ(file.scenario.swarm.total_uas, d.scenario.swarm.total_uas);
    EXPECT_EQ(file.scenario.hover.position, d.scenario.hover.position);
    EXPECT_EQ(file.scenario.grid.radial_resolution, d.scenario.grid.radial_resolution);
    EXPECT_NEAR(file.scenario.grid.angular_resolution, d.scenario.grid.angular_resolution, 1e-15);
    EXPECT_EQ(file.scenario.grid.include_center, d.scenario.grid.include_center);
    EXPECT_EQ(file.scenario.search.repetitions, d.scenario.search.repetitions);
    EXPECT_EQ(file.qpll.regularization, d.qpll.regularization);
    EXPECT_EQ(file.qpll.refinement_points, d.qpll.refinement_points);
    EXPECT_EQ(file.qpll.options.tolerance, d.qpll.options.tolerance);
    EXPECT_EQ(file.qpll.options.x_tolerance, d.qpll.options.x_tolerance);
    EXPECT_EQ(file.qpll.options.max_iterations, d.qpll.options.max_iterations);
    EXPECT_EQ(file.scenario.pattern_points, d.scenario.pattern_points);
}

TEST_F(CliTest, MissingSubcommandFails) { EXPECT_NE(run_cli("").exit_code, 0); }

TEST_F(CliTest, ConfigErrorsExitOne) {
    fs::path bad = write_config("bad.yaml", "trials: 3\nbogus_key: 1\n");
    EXPECT_EQ(run_cli("sweep -c " + bad.string() + " --out " + (dir_ / "o").string()).exit_code, 1);
    fs::path invalid = write_config("invalid.yaml", "trials: 0\n");
    EXPECT_EQ(run_cli("sweep -c " + invalid.string()).exit_code, 1);
    EXPECT_EQ(run_cli("sweep -c " + (dir_ / "missing.yaml").string()).exit_code, 1);
    EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(CliTest, SweepWritesOutputs) {
    fs::path cfg = small_config();
    fs::path out = dir_ / "run";
    RunResult r = run_cli("sweep -c " + cfg.string() + " --out " + out.string());
    ASSERT_EQ(r.exit_code, 0);
    std::string jsonl = slurp(out / "trials.jsonl");
    EXPECT_EQ(count_lines(jsonl), 3u * 2u * 3u);
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        EXPECT_FALSE(j.contains("error"));
        EXPECT_FALSE(j.contains("wall_time"));
    }
    EXPECT_EQ(count_lines(slurp(out / "summary.csv")), 1u + 6u);
    std::string table = slurp(out / "divergence.txt");
    EXPECT_NE(table.find("main_lobe"), std::string::npos);
    EXPECT_EQ(count_lines(table), 1u + 2u);
}

TEST_F(CliTest, SweepIsByteIdenticalAcrossWorkers) {
    fs::path cfg = small_config();
    ASSERT_EQ(run_cli("sweep -c " + cfg.string() + " --out " + (dir_ / "a").string()).exit_code, 0);
    ASSERT_EQ(run_cli("sweep -c " + cfg.string() + " --out " + (dir_ / "b").string() + " --workers 4").exit_code, 0);
    EXPECT_EQ(slurp(dir_ / "a" / "trials.jsonl"), slurp(dir_ / "b" / "trials.jsonl"));
    EXPECT_EQ(slurp(dir_ / "a" / "summary.csv"), slurp(dir_ / "b" / "summary.csv"));
    ASSERT_EQ(run_cli("sweep -c " + cfg.string() + " --out " + (dir_ / "c").string() + " --seed 5").exit_code, 0);
    EXPECT_NE(slurp(dir_ / "a" / "trials.jsonl"), slurp(dir_ / "c" / "trials.jsonl"));
}

TEST_F(CliTest, TrialOverride) {
    fs::path cfg = small_config();
    ASSERT_EQ(run_cli("sweep -c " + cfg.string() + " --trials 1 --out " + (dir_ / "t").string()).exit_code, 0);
    EXPECT_EQ(count_lines(slurp(dir_ / "t" / "trials.jsonl")), 6u);
}

TEST_F(CliTest, TooManyFailuresExitTwo) {
    fs::path cfg = write_config("fail.yaml",
                                "trials: 2\n"
                                "n_u: [2]\n"
                                "sigma_aoa_deg: [0.0]\n"
                                "swarm:\n"
                                "  min_separation_m: 0.09\n"
                                "  max_placement_attempts: 1\n");
    RunResult r = run_cli("sweep -c " + cfg.string() + " --out " + (dir_ / "f").string());
    EXPECT_EQ(r.exit_code, 2);
    std::string jsonl = slurp(dir_ / "f" / "trials.jsonl");
    EXPECT_EQ(count_lines(jsonl), 6u);
    EXPECT_NE(jsonl.find("\"error\""), std::string::npos);
}

TEST_F(CliTest, PatternTraceRowCounts) {
    fs::path cfg = small_config();
    fs::path out = dir_ / "p";
    RunResult r = run_cli("pattern -c " + cfg.string() + " --instants 2 --out " + out.string());
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(count_lines(r.out), 3u);
    EXPECT_EQ(r.out.rfind("instant,j_mrt,j_qsub,j_qpll\n", 0), 0u);
    for (const char *m : {"ideal", "mrt", "qsub", "qpll"}) {
        for (int i = 0; i < 2; i++) {
            std::string text = slurp(out / ("trace_" + std::to_string(i) + "_" + m + ".csv"));
            EXPECT_EQ(count_lines(text), 31u * 31u + 1u);
            EXPECT_EQ(text.rfind("theta,phi,magnitude\n", 0), 0u);
        }
    }
}

TEST_F(CliTest, SearchReportsDiagnostics) {
    fs::path cfg = small_config();
    RunResult r = run_cli("search -c " + cfg.string() + " --n-u 2 --sigma 1.0");
    ASSERT_EQ(r.exit_code, 0);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["selected"].size(), 2u);
    EXPECT_EQ(j["states_per_uas"].get<int>(), 27);
    EXPECT_EQ(j["joint_states"].get<int>(), 729);
    EXPECT_EQ(j["grover_iterations"].get<int>(), 27);
    EXPECT_EQ(j["oracle_calls"].get<int>(), 81);
    EXPECT_EQ(j["measurements"].size(), 3u);
    EXPECT_EQ(j["marked_probability_trace"].size(), 28u);
    EXPECT_GE(j["qpll_r_e"].get<double>(), 0.0);
    EXPECT_EQ(j["nm_steps"].size(), j["nm_iterations"].get<size_t>());
}

TEST_F(CliTest, ComplexityCsv) {
    fs::path out = dir_ / "cx";
    RunResult r = run_cli("complexity --sizes 4 16 64 --shots 500 --out " + out.string());
    ASSERT_EQ(r.exit_code, 0);
    std::string text = slurp(out / "complexity.csv");
    EXPECT_EQ(text, r.out);
    EXPECT_EQ(count_lines(text), 4u);
    EXPECT_NE(text.find("\n4,4,2,1,"), std::string::npos);
}

TEST_F(CliTest, InspectDumpsState) {
    RunResult r = run_cli("inspect --states 4 --marked 2 --iterations 1");
    ASSERT_EQ(r.exit_code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "index,real,imag,probability");
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        rows.push_back(line);
    }
    ASSERT_EQ(rows.size(), 4u);
    double p2 = std::stod(rows[2].substr(rows[2].rfind(',') + 1));
    EXPECT_NEAR(p2, 1.0, 1e-12);
    EXPECT_NE(run_cli("inspect --states 4 --marked 9").exit_code, 0);
}
