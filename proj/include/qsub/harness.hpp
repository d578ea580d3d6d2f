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

#ifndef QSUB_HARNESS_HPP
#define QSUB_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qsub/qpll.hpp"
#include "qsub/search.hpp"

namespace qsub {

inline constexpr double kSpeedOfLight = 299792458.0;

enum class Method { Qsub, Qpll, MrtBaseline };
const char *method_tag(Method m);
inline constexpr Method kAllMethods[] = {Method::Qsub, Method::Qpll, Method::MrtBaseline};

struct ExperimentConfig {
    ScenarioConfig scenario;
    QpllConfig qpll;
    std::vector<double> sigma_aoa_sweep{0.0, 1.0, 2.5, 5.0};
    std::vector<size_t> n_u_sweep{4, 6, 8};
    size_t trials = 500;
    uint64_t base_seed = 1;
    double frequency = 3.5e9;
    size_t workers = 1;
    size_t null_count = 2;
    bool record_wall_time = false;
    double failure_threshold = 0.01;
    std::string output_dir = "out";

    /// Experiment defaults: 10 cm ball, 4 mm hover, 1 cm lattice with center cell.
    static ExperimentConfig defaults();
    double wavelength() const { return kSpeedOfLight / frequency; }
    /// Throws ConfigError on any invalid field.
    void validate() const;
    /// Scenario settings for one N_u cell with the wavelength applied.
    ScenarioConfig scenario_for(size_t n_u, double sigma_aoa) const;
};

/// Parses the YAML config text, starting from defaults(). Throws ConfigError.
ExperimentConfig parse_config(const std::string &yaml_text);
ExperimentConfig load_config(const std::string &path);

struct TrialRecord {
    uint64_t seed = 0;
    Method method = Method::Qsub;
    double sigma_aoa = 0.0;
    size_t n_u = 0;
    size_t trial = 0;
    double r_e = 0.0;
    double j_value = 0.0;
    uint64_t oracle_calls = 0;
    double main_lobe_divergence = 0.0;
    double null_divergence = 0.0;
    double wall_time = 0.0;
    bool success = false;
    size_t nm_iterations = 0;
    size_t nm_evaluations = 0;
    std::string draw_digest;
    std::optional<std::string> error;
};

/// One JSON object, stable key order, no trailing newline.
std::string to_json_line(const TrialRecord &record, bool include_wall_time);

struct SweepSummary {
    Method method = Method::Qsub;
    double sigma_aoa = 0.0;
    size_t n_u = 0;
    size_t count = 0;
    size_t failures = 0;
    double mean_r_e = 0.0;
    double median_r_e = 0.0;
    double p05_r_e = 0.0;
    double p25_r_e = 0.0;
    double p75_r_e = 0.0;
    double p95_r_e = 0.0;
    double iqr_r_e = 0.0;
    double mean_j = 0.0;
    double mean_main_lobe = 0.0;
    double mean_null = 0.0;
    double mean_oracle_calls = 0.0;
};

/// Linear interpolation between order statistics (q in [0, 1]).
double percentile(std::vector<double> values, double q);

/// Groups by (method, sigma, N_u) in first-seen order; failed records are counted, not aggregated.
std::vector<SweepSummary> summarize(const std::vector<TrialRecord> &records);
void write_summary_csv(std::ostream &out, const std::vector<SweepSummary> &summaries);

struct SweepResult {
    std::vector<TrialRecord> records;
    std::vector<SweepSummary> summaries;
    size_t failures = 0;
    bool failed_run = false;  // failures above the configured fraction
};

/// Runs every (N_u, trial) job on a worker pool. Records are streamed to
/// jsonl_out (when given) in job order, so output does not depend on workers.
SweepResult run_sweep(const ExperimentConfig &config, std::ostream *jsonl_out = nullptr);

/// Records for one (N_u, trial) job across every sigma and method.
std::vector<TrialRecord> run_trial_job(const ExperimentConfig &config, size_t n_u, size_t trial);

struct ComplexityRow {
    uint64_t num_states = 0;
    double classical_worst = 0.0;
    double classical_avg = 0.0;
    uint64_t quantum_calls = 0;
    double bound = 0.0;
    double empirical_success = 0.0;
};

/// Smallest iteration count whose empirical success over `trials` seeded runs reaches 1/2.
std::vector<ComplexityRow> complexity_sweep(const std::vector<uint64_t> &sizes, size_t trials, uint64_t seed,
                                            unsigned max_qubits = kDefaultMaxQubits);
void write_complexity_csv(std::ostream &out, const std::vector<ComplexityRow> &rows);
/// Least-squares slope of log(calls) against log(S).
double loglog_slope(const std::vector<ComplexityRow> &rows);

struct TraceSet {
    BeamPatternGrid ideal;
    BeamPatternGrid mrt_only;
    BeamPatternGrid qsub;
    BeamPatternGrid qpll;
    double j_mrt = 0.0;
    double j_qsub = 0.0;
    double j_qpll = 0.0;
};

/// Fresh hover draw for one instant at the first N_u and sigma of the sweep.
TraceSet compute_traces(const ExperimentConfig &config, size_t instant, uint64_t seed);
/// Writes trace_<instant>_<method>.csv files; returns the per-instant traces' J values.
std::vector<TraceSet> emit_pattern_traces(const ExperimentConfig &config, size_t instants, uint64_t seed,
                                          const std::string &out_dir);

struct DivergenceRow {
    size_t n_u = 0;
    double sigma_aoa = 0.0;
    size_t count = 0;
    double mean_main_lobe = 0.0;
    double mean_null = 0.0;
};

/// Mean divergences per (N_u, sigma) for one method, sorted by N_u then sigma.
std::vector<DivergenceRow> summarize_divergence(const std::vector<TrialRecord> &records,
                                                Method method = Method::Qpll);
void write_divergence_table(std::ostream &out, const std::vector<DivergenceRow> &rows);

}  // namespace qsub

#endif
