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

#ifndef QSUB_SEARCH_HPP
#define QSUB_SEARCH_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "qsub/beam.hpp"
#include "qsub/geometry.hpp"
#include "qsub/quantum.hpp"

namespace qsub {

inline constexpr uint64_t kDefaultCombinationCap = 1000000;

struct SelectionResult {
    std::vector<size_t> chosen_combination;
    double best_sinr = 0.0;
    uint64_t combinations_evaluated = 0;
};

/// C(n, k), or cap + 1 once the count passes cap.
uint64_t bounded_binomial(uint64_t n, uint64_t k, uint64_t cap);

/// SINR of a candidate submatrix under its own MRT weights.
double combination_score(const ChannelMatrix &submatrix, double noise_power, double interference_power = 0.0);

/// Exhaustive lexicographic scan; the first maximum wins ties.
SelectionResult select_combination(const ChannelMatrix &h, size_t n_active, double noise_power,
                                   double interference_power = 0.0, uint64_t cap = kDefaultCombinationCap);

/// Mean squared distance between paired positions.
double position_objective(std::span<const Vec3> e, std::span<const Vec3> target);

/// Positions of a joint grid state, each UAS's cell offset added to its center.
std::vector<Vec3> grid_positions(const StateGrid &grid, std::span<const Vec3> centers, uint64_t index);

/// Marks the argmin of f over the joint grid, widened to f <= f_min + tolerance^2.
OracleSpec build_position_oracle(const StateGrid &grid, std::span<const Vec3> centers, std::span<const Vec3> target,
                                 double tolerance = 0.0);

enum class IterationMode { Literal, Optimal };
enum class GroverBackend { Auto, Dense, TwoLevel };

/// Literal: floor(sqrt(S)). Optimal: floor(pi/4 sqrt(S/M)).
size_t grover_iterations(uint64_t num_states, uint64_t marked, IterationMode mode);

struct SearchConfig {
    IterationMode mode = IterationMode::Literal;
    size_t repetitions = 1;
    GroverBackend backend = GroverBackend::Auto;
    unsigned max_qubits = kDefaultMaxQubits;
    // Auto switches to the two-level backend above this many amplitudes.
    uint64_t dense_limit = uint64_t{1} << 14;
};

struct SearchDiagnostics {
    uint64_t oracle_calls = 0;
    size_t grover_iterations = 0;
    size_t repetitions = 0;
    bool success = false;
    uint64_t measured_index = 0;
    std::vector<double> marked_probability_trace;
    std::vector<uint64_t> measurements;
};

struct SearchOutcome {
    uint64_t index = 0;
    std::vector<size_t> cells;
    std::vector<Vec3> positions;
    double objective = 0.0;
    SearchDiagnostics diagnostics;
};

/// Amplifies the oracle's marked set and keeps the lowest-f of I_Q measurements.
SearchOutcome qsub_search(const StateGrid &grid, std::span<const Vec3> centers, std::span<const Vec3> target,
                          const OracleSpec &oracle, const SearchConfig &config, uint64_t seed);

struct ScenarioConfig {
    SwarmConfiguration swarm;
    HoverSigmas hover;
    GridParameters grid;
    bool trim_grid = true;
    uint64_t register_limit = kDefaultRegisterLimit;
    double sigma_aoa = 0.0;  // degrees
    Direction receiver{deg_to_rad(60.0), deg_to_rad(30.0)};
    ChannelModel channel;
    double noise_power = 0.1;
    double interference_power = 0.0;
    uint64_t combination_cap = kDefaultCombinationCap;
    SearchConfig search;
    double oracle_tolerance = 0.0;
    size_t pattern_points = 181;
};

struct ScenarioSeeds {
    uint64_t swarm = 0;
    uint64_t channel = 0;
    uint64_t hover = 0;
    uint64_t aoa = 0;
    uint64_t search = 0;

    static ScenarioSeeds from(uint64_t base);
};

/// Everything one hover snapshot needs: selection, nominal beam, truth and observation.
struct Scenario {
    std::vector<UasState> candidates;
    ChannelMatrix channel;
    SelectionResult selection;
    Eigen::MatrixXcd weights;
    std::vector<UasState> nominal;  // selected UASs with MRT magnitudes and steering phases
    HoverResult hover;
    std::vector<Vec3> truth;
    AoaObservation observation;
    StateGrid grid;
    double wavelength = 0.0;

    std::vector<Vec3> nominal_positions() const { return positions_of(nominal); }
};

Scenario build_scenario(const ScenarioConfig &config, const ScenarioSeeds &seeds);

/// Perturbations left after commanding each UAS by (nominal - predicted).
std::vector<HoverPerturbation> residual_perturbations(const Scenario &scenario, std::span<const Vec3> predicted);

struct QsubPipelineResult {
    Eigen::MatrixXcd weights;
    std::vector<Vec3> predicted;
    std::vector<HoverPerturbation> residual;
    SearchDiagnostics diagnostics;
    double r_e = 0.0;
};

QsubPipelineResult qsub_pipeline(const Scenario &scenario, const ScenarioConfig &config, uint64_t seed);

}  // namespace qsub

#endif
