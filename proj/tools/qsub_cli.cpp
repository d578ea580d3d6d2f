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

// qsub_cli: pattern | search | sweep | complexity | inspect
//
// Exit codes: 0 success, 1 config error, 2 too many trial failures (or any
// other runtime failure).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "qsub/errors.hpp"
#include "qsub/harness.hpp"
#include "qsub/random.hpp"

namespace fs = std::filesystem;
using namespace qsub;

namespace {

struct Common {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<size_t> trials;
    std::optional<std::string> out;
    std::optional<size_t> workers;
};

ExperimentConfig resolve(const Common &c) {
    ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig::defaults() : load_config(c.config_path);
    if (c.seed) {
        cfg.base_seed = *c.seed;
    }
    if (c.trials) {
        cfg.trials = *c.trials;
    }
    if (c.out) {
        cfg.output_dir = *c.out;
    }
    if (c.workers) {
        cfg.workers = *c.workers;
    }
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const fs::path &p) {
    std::ofstream f(p);
    if (!f) {
        throw Error("cannot write " + p.string());
    }
    return f;
}

int cmd_sweep(const ExperimentConfig &cfg) {
    fs::create_directories(cfg.output_dir);
    std::ofstream jsonl = open_out(fs::path(cfg.output_dir) / "trials.jsonl");
    SweepResult res = run_sweep(cfg, &jsonl);
    std::ofstream summary = open_out(fs::path(cfg.output_dir) / "summary.csv");
    write_summary_csv(summary, res.summaries);
    std::ofstream table = open_out(fs::path(cfg.output_dir) / "divergence.txt");
    try {
        write_divergence_table(table, summarize_divergence(res.records));
    } catch (const EmptyGroup &) {
        table << "no successful Q-P-LL records\n";
    }
    std::cerr << res.records.size() << " records, " << res.failures << " failed\n";
    return res.failed_run ? 2 : 0;
}

int cmd_pattern(const ExperimentConfig &cfg, size_t instants) {
    auto traces = emit_pattern_traces(cfg, instants, cfg.base_seed, cfg.output_dir);
    std::printf("instant,j_mrt,j_qsub,j_qpll\n");
    for (size_t i = 0; i < traces.size(); i++) {
        std::printf("%zu,%.17g,%.17g,%.17g\n", i, traces[i].j_mrt, traces[i].j_qsub, traces[i].j_qpll);
    }
    return 0;
}

int cmd_search(const ExperimentConfig &cfg, size_t n_u, double sigma) {
    ScenarioConfig sc = cfg.scenario_for(n_u, sigma);
    ScenarioSeeds seeds = ScenarioSeeds::from(cfg.base_seed);
    Scenario scenario = build_scenario(sc, seeds);
    QsubPipelineResult q = qsub_pipeline(scenario, sc, seeds.search);
    QpllPipelineResult p = qpll_pipeline(scenario, cfg.qpll, q);
    nlohmann::ordered_json j;
    j["selected"] = scenario.selection.chosen_combination;
    j["best_sinr"] = scenario.selection.best_sinr;
    j["states_per_uas"] = scenario.grid.states_per_uas();
    j["joint_states"] = scenario.grid.joint_states();
    j["qubits"] = scenario.grid.register_qubits();
    j["grover_iterations"] = q.diagnostics.grover_iterations;
    j["oracle_calls"] = q.diagnostics.oracle_calls;
    j["measurements"] = q.diagnostics.measurements;
    j["marked_probability_trace"] = q.diagnostics.marked_probability_trace;
    j["qsub_success"] = q.diagnostics.success;
    j["qsub_r_e"] = q.r_e;
    j["qpll_r_e"] = p.r_e;
    j["nm_iterations"] = p.optimizer.iterations_used;
    j["nm_converged"] = p.optimizer.converged;
    std::vector<std::string> steps;
    for (StepKind k : p.optimizer.step_history) {
        steps.push_back(step_name(k));
    }
    j["nm_steps"] = steps;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_complexity(const ExperimentConfig &cfg, const std::vector<uint64_t> &sizes, size_t trials) {
    auto rows = complexity_sweep(sizes, trials, cfg.base_seed);
    fs::create_directories(cfg.output_dir);
    std::ofstream f = open_out(fs::path(cfg.output_dir) / "complexity.csv");
    write_complexity_csv(f, rows);
    write_complexity_csv(std::cout, rows);
    if (rows.size() >= 2) {
        std::cerr << "log-log slope " << loglog_slope(rows) << '\n';
    }
    return 0;
}

int cmd_inspect(uint64_t states, uint64_t marked, size_t iterations) {
    OracleSpec oracle(states, {marked});
    StateVector psi = uniform_over(states);
    grover_iterate(psi, oracle, iterations);
    write_state_csv(std::cout, psi);
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"quantum-search beamforming simulator"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("-c,--config", common.config_path, "YAML config file");
        sub->add_option("--seed", common.seed, "base seed override");
        sub->add_option("--trials", common.trials, "trials per cell override");
        sub->add_option("--out", common.out, "output directory override");
        sub->add_option("--workers", common.workers, "worker threads");
    };

    auto *sweep = app.add_subcommand("sweep", "Monte-Carlo campaign over sigma_AoA and N_u");
    add_common(sweep);

    size_t instants = 4;
    auto *pattern = app.add_subcommand("pattern", "write beam pattern traces per instant");
    add_common(pattern);
    pattern->add_option("--instants", instants, "number of hover instants")->check(CLI::PositiveNumber);

    size_t n_u = 4;
    double sigma = 0.0;
    auto *search = app.add_subcommand("search", "single QSUB and Q-P-LL run with diagnostics");
    add_common(search);
    search->add_option("--n-u", n_u, "active UASs");
    search->add_option("--sigma", sigma, "AoA error std in degrees");

    std::vector<uint64_t> sizes{16, 64, 256, 1024, 4096};
    size_t shots = 200;
    auto *complexity = app.add_subcommand("complexity", "oracle calls to one half success versus S");
    add_common(complexity);
    complexity->add_option("--sizes", sizes, "search space sizes");
    complexity->add_option("--shots", shots, "measurements per iteration count");

    uint64_t states = 16, marked = 0;
    size_t iterations = 1;
    auto *inspect = app.add_subcommand("inspect", "dump a Grover statevector as CSV");
    inspect->add_option("--states", states, "search space size");
    inspect->add_option("--marked", marked, "marked index");
    inspect->add_option("--iterations", iterations, "Grover iterations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*inspect) {
            return cmd_inspect(states, marked, iterations);
        }
        ExperimentConfig cfg = resolve(common);
        if (*sweep) {
            return cmd_sweep(cfg);
        }
        if (*pattern) {
            return cmd_pattern(cfg, instants);
        }
        if (*search) {
            return cmd_search(cfg, n_u, sigma);
        }
        if (*complexity) {
            return cmd_complexity(cfg, sizes, shots);
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
