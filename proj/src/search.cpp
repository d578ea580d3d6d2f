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

#include "qsub/search.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsub/errors.hpp"
#include "qsub/random.hpp"

namespace qsub {

namespace {

// Absolute slack (m^2) so that mathematically tied states survive rounding.
constexpr double kTieSlack = 1e-12;

void require_matching(const StateGrid &grid, std::span<const Vec3> centers, std::span<const Vec3> target) {
    if (centers.size() != grid.num_uas() || target.size() != grid.num_uas()) {
        throw InvalidArgument("grid, centers and target must cover the same UASs");
    }
}

}  // namespace

uint64_t bounded_binomial(uint64_t n, uint64_t k, uint64_t cap) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    // result * (n - i) / (i + 1) stays an integer at every step.
    unsigned __int128 result = 1;
    for (uint64_t i = 0; i < k; i++) {
        result = result * (n - i) / (i + 1);
        if (result > cap) {
            return cap + 1;
        }
    }
    return static_cast<uint64_t>(result);
}

double combination_score(const ChannelMatrix &submatrix, double noise_power, double interference_power) {
    return sinr(submatrix, mrt_weights(submatrix), noise_power, interference_power);
}

SelectionResult select_combination(const ChannelMatrix &h, size_t n_active, double noise_power,
                                   double interference_power, uint64_t cap) {
    auto n = static_cast<size_t>(h.entries.rows());
    if (n_active < 1 || n_active > n) {
        throw InvalidArgument("need 1 <= N_u <= rows of the channel matrix");
    }
    uint64_t count = bounded_binomial(n, n_active, cap);
    if (count > cap) {
        throw CombinationExplosion("C(" + std::to_string(n) + ", " + std::to_string(n_active) +
                                   ") exceeds the enumeration cap " + std::to_string(cap));
    }
    SelectionResult best;
    std::vector<size_t> idx(n_active);
    for (size_t i = 0; i < n_active; i++) {
        idx[i] = i;
    }
    while (true) {
        double f = combination_score(h.rows_subset(idx), noise_power, interference_power);
        best.combinations_evaluated++;
        if (best.chosen_combination.empty() || f > best.best_sinr) {
            best.best_sinr = f;
            best.chosen_combination = idx;
        }
        size_t i = n_active;
        while (i > 0 && idx[i - 1] == n - n_active + (i - 1)) {
            i--;
        }
        if (i == 0) {
            break;
        }
        idx[i - 1]++;
        for (size_t j = i; j < n_active; j++) {
            idx[j] = idx[j - 1] + 1;
        }
    }
    return best;
}

double position_objective(std::span<const Vec3> e, std::span<const Vec3> target) {
    if (e.size() != target.size() || e.empty()) {
        throw InvalidArgument("position sets must be nonempty and equally sized");
    }
    double sum = 0.0;
    for (size_t j = 0; j < e.size(); j++) {
        Vec3 d = e[j] - target[j];
        sum += dot(d, d);
    }
    return sum / static_cast<double>(e.size());
}

std::vector<Vec3> grid_positions(const StateGrid &grid, std::span<const Vec3> centers, uint64_t index) {
    std::vector<size_t> choice = grid.decode(index);
    if (centers.size() != choice.size()) {
        throw InvalidArgument("one center per UAS is required");
    }
    std::vector<Vec3> out(choice.size());
    for (size_t j = 0; j < choice.size(); j++) {
        out[j] = centers[j] + grid.cell_offsets()[choice[j]];
    }
    return out;
}

OracleSpec build_position_oracle(const StateGrid &grid, std::span<const Vec3> centers, std::span<const Vec3> target,
                                 double tolerance) {
    require_matching(grid, centers, target);
    if (!(tolerance >= 0.0)) {
        throw InvalidArgument("oracle tolerance must be nonnegative");
    }
    size_t n = grid.num_uas();
    size_t k = grid.states_per_uas();
    // f is separable, so tabulate per-UAS squared distances once.
    std::vector<double> table(n * k);
    for (size_t j = 0; j < n; j++) {
        for (size_t c = 0; c < k; c++) {
            Vec3 d = (centers[j] + grid.cell_offsets()[c]) - target[j];
            table[j * k + c] = dot(d, d);
        }
    }
    uint64_t s = grid.joint_states();
    std::vector<double> f(s);
    std::vector<size_t> digits(n, 0);
    for (uint64_t i = 0; i < s; i++) {
        double sum = 0.0;
        for (size_t j = 0; j < n; j++) {
            sum += table[j * k + digits[j]];
        }
        f[i] = sum / static_cast<double>(n);
        for (size_t j = 0; j < n; j++) {
            if (++digits[j] < k) {
                break;
            }
            digits[j] = 0;
        }
    }
    double f_min = *std::min_element(f.begin(), f.end());
    double threshold = f_min + tolerance * tolerance + kTieSlack;
    std::vector<uint64_t> marked;
    for (uint64_t i = 0; i < s; i++) {
        if (f[i] <= threshold) {
            marked.push_back(i);
        }
    }
    return OracleSpec(s, std::move(marked));
}

size_t grover_iterations(uint64_t num_states, uint64_t marked, IterationMode mode) {
    if (num_states < 1 || marked < 1) {
        throw InvalidArgument("iteration count needs a nonempty space and marked set");
    }
    if (mode == IterationMode::Literal) {
        auto r = static_cast<uint64_t>(std::sqrt(static_cast<double>(num_states)));
        while (r * r > num_states) {
            r--;
        }
        while ((r + 1) * (r + 1) <= num_states) {
            r++;
        }
        return static_cast<size_t>(r);
    }
    double ratio = static_cast<double>(num_states) / static_cast<double>(marked);
    return static_cast<size_t>(std::floor(kPi / 4.0 * std::sqrt(ratio)));
}

SearchOutcome qsub_search(const StateGrid &grid, std::span<const Vec3> centers, std::span<const Vec3> target,
                          const OracleSpec &oracle, const SearchConfig &config, uint64_t seed) {
    require_matching(grid, centers, target);
    if (oracle.num_states() != grid.joint_states()) {
        throw InvalidArgument("oracle does not cover the grid's joint states");
    }
    if (config.repetitions < 1) {
        throw InvalidArgument("at least one repetition is required");
    }
    uint64_t s = oracle.num_states();
    unsigned qubits = qubits_for(s);
    if (qubits > config.max_qubits) {
        throw RegisterTooLarge("search space needs " + std::to_string(qubits) + " qubits");
    }
    bool dense = config.backend == GroverBackend::Dense ||
                 (config.backend == GroverBackend::Auto && (uint64_t{1} << qubits) <= config.dense_limit);

    SearchOutcome out;
    SearchDiagnostics &diag = out.diagnostics;
    diag.grover_iterations = grover_iterations(s, oracle.marked_count(), config.mode);
    diag.repetitions = config.repetitions;
    diag.oracle_calls = static_cast<uint64_t>(diag.grover_iterations) * config.repetitions;

    // Every repetition prepares and evolves the same state, so it is evolved
    // once and measured I_Q times.
    Rng rng(seed);
    if (dense) {
        StateVector psi = uniform_over(s, config.max_qubits);
        diag.marked_probability_trace.push_back(marked_probability(psi, oracle));
        for (size_t k = 0; k < diag.grover_iterations; k++) {
            grover_iterate(psi, oracle, 1);
            diag.marked_probability_trace.push_back(marked_probability(psi, oracle));
        }
        std::vector<double> p = psi.probabilities();
        BornSampler sampler(p);
        for (size_t r = 0; r < config.repetitions; r++) {
            diag.measurements.push_back(std::min<uint64_t>(sampler.sample(rng), s - 1));
        }
    } else {
        TwoLevelGrover g(oracle);
        diag.marked_probability_trace.push_back(g.marked_probability());
        for (size_t k = 0; k < diag.grover_iterations; k++) {
            g.iterate(1);
            diag.marked_probability_trace.push_back(g.marked_probability());
        }
        for (size_t r = 0; r < config.repetitions; r++) {
            diag.measurements.push_back(g.sample(rng));
        }
    }

    bool first = true;
    for (uint64_t m : diag.measurements) {
        std::vector<Vec3> pos = grid_positions(grid, centers, m);
        double f = position_objective(pos, target);
        if (first || f < out.objective) {
            first = false;
            out.index = m;
            out.objective = f;
            out.positions = std::move(pos);
        }
    }
    out.cells = grid.decode(out.index);
    diag.measured_index = out.index;
    diag.success = oracle.is_marked(out.index);
    return out;
}

ScenarioSeeds ScenarioSeeds::from(uint64_t base) {
    return {derive_seed(base, {1}), derive_seed(base, {2}), derive_seed(base, {3}), derive_seed(base, {4}),
            derive_seed(base, {5})};
}

Scenario build_scenario(const ScenarioConfig &config, const ScenarioSeeds &seeds) {
    config.swarm.validate();
    Scenario sc;
    sc.wavelength = config.swarm.wavelength;
    sc.candidates = sample_swarm(config.swarm, seeds.swarm);
    std::vector<Vec3> candidate_pos = positions_of(sc.candidates);
    sc.channel = generate_channel(candidate_pos, config.receiver, sc.wavelength, config.channel, seeds.channel);
    sc.selection = select_combination(sc.channel, config.swarm.active_uas, config.noise_power,
                                      config.interference_power, config.combination_cap);
    sc.weights = mrt_weights(sc.channel.rows_subset(sc.selection.chosen_combination));

    double k = kTwoPi / sc.wavelength;
    Vec3 u0 = unit_vector(config.receiver);
    for (size_t j = 0; j < sc.selection.chosen_combination.size(); j++) {
        UasState s = sc.candidates[sc.selection.chosen_combination[j]];
        s.power = 1.0;
        s.weight = sc.weights.col(static_cast<Eigen::Index>(j)).norm();
        s.phase = -k * dot(s.cartesian, u0);
        sc.nominal.push_back(s);
    }
    sc.hover = apply_hover(sc.nominal, config.hover, seeds.hover);
    sc.truth = positions_of(sc.hover.states);
    sc.observation = observe_with_aoa_error(std::span<const Vec3>(sc.truth), config.sigma_aoa, seeds.aoa);
    GridParameters gp = config.trim_grid ? trim_to_register(config.grid, sc.nominal.size(), config.register_limit)
                                         : config.grid;
    sc.grid = StateGrid::build(gp, sc.nominal.size(), config.register_limit);
    return sc;
}

std::vector<HoverPerturbation> residual_perturbations(const Scenario &scenario, std::span<const Vec3> predicted) {
    if (predicted.size() != scenario.truth.size()) {
        throw InvalidArgument("one predicted position per selected UAS is required");
    }
    std::vector<HoverPerturbation> out = scenario.hover.perturbations;
    for (size_t j = 0; j < out.size(); j++) {
        out[j].delta_position = scenario.truth[j] - predicted[j];
    }
    return out;
}

QsubPipelineResult qsub_pipeline(const Scenario &scenario, const ScenarioConfig &config, uint64_t seed) {
    std::vector<Vec3> centers = scenario.nominal_positions();
    std::vector<Vec3> target = scenario.observation.cartesian();
    OracleSpec oracle = build_position_oracle(scenario.grid, centers, target, config.oracle_tolerance);
    SearchOutcome found = qsub_search(scenario.grid, centers, target, oracle, config.search, seed);
    QsubPipelineResult out;
    out.weights = scenario.weights;
    out.predicted = found.positions;
    out.residual = residual_perturbations(scenario, out.predicted);
    out.diagnostics = std::move(found.diagnostics);
    out.r_e = euclidean_error(out.predicted, scenario.truth);
    return out;
}

}  // namespace qsub
