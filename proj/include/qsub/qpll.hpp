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

#ifndef QSUB_QPLL_HPP
#define QSUB_QPLL_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "qsub/search.hpp"

namespace qsub {

struct NmCoefficients {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;

    void validate() const;
};

using Point = std::vector<double>;
using Objective = std::function<double(const Point &)>;

enum class StepKind { Reflect, Expand, ContractOutside, ContractInside, Shrink };
const char *step_name(StepKind kind);

class Simplex {
   public:
    /// Evaluates every vertex and sorts ascending.
    Simplex(std::vector<Point> vertices, const Objective &objective);
    Simplex(std::vector<Point> vertices, std::vector<double> values);

    size_t dimension() const { return vertices_.size() - 1; }
    const std::vector<Point> &vertices() const { return vertices_; }
    const std::vector<double> &values() const { return values_; }
    bool sorted() const { return sorted_; }

    const Point &best() const { return vertices_.front(); }
    const Point &worst() const { return vertices_.back(); }
    double best_value() const { return values_.front(); }
    double second_worst_value() const { return values_[values_.size() - 2]; }
    double worst_value() const { return values_.back(); }
    double mean_value() const;
    /// Largest distance from the best vertex to any other.
    double diameter() const;

    void set_vertex(size_t i, Point p, double value);
    /// Stable sort, so a new vertex tied with an old one ranks behind it.
    void sort();

   private:
    std::vector<Point> vertices_;
    std::vector<double> values_;
    bool sorted_ = false;
};

/// Mean of every vertex except the worst.
Point centroid(const Simplex &simplex);
/// (1 + eta) b_c - eta worst.
Point trial_vertex(const Point &b_c, const Point &worst, double eta);

/// One reflect / expand / contract / shrink decision on a sorted simplex.
StepKind nelder_mead_step(Simplex &simplex, const NmCoefficients &coeffs, const Objective &objective);

struct QpllOptions {
    NmCoefficients coefficients;
    double tolerance = 1e-3;
    // Simplex diameter bound, in objective coordinates, that must also hold.
    double x_tolerance = 1e-2;
    size_t max_iterations = 200;
    double initial_step = 1.0;
    double diameter_floor = 1e-12;
};

struct QpllResult {
    Point optimum;
    double objective_value = 0.0;
    size_t iterations_used = 0;
    bool converged = false;
    std::vector<StepKind> step_history;
    std::vector<double> best_value_history;  // entry 0 is the initial simplex
    std::vector<double> mean_value_history;
    size_t evaluations = 0;
};

/// Converged when the best value moved by at most T over the last step, the
/// simplex values span at most T and either are all equal or the diameter is
/// within x_tolerance, or the simplex collapsed below the floor.
QpllResult qpll_optimize(const Objective &objective, const Point &initial, const QpllOptions &options);

struct QpllConfig {
    QpllOptions options{NmCoefficients{}, 1e-3, 1e-2, 2000, 1.0, 1e-12};
    // Weight of the beam-distortion term; 0 keeps the pure position objective.
    double regularization = 0.0;
    size_t refinement_points = 37;
};

struct QpllPipelineResult {
    std::vector<Vec3> refined;
    QpllResult optimizer;
    double r_e = 0.0;
    std::vector<HoverPerturbation> residual;
    SearchDiagnostics coarse_diagnostics;
    double coarse_r_e = 0.0;
};

/// Objective in grid-cell units: x = (E - nominal) / r_r, value
/// f(E, observed) / r_r^2 + mu J(ideal, pattern(E)) / (sum P w)^2.
Objective refinement_objective(const Scenario &scenario, const QpllConfig &config);

/// Refines an existing coarse lock.
QpllPipelineResult qpll_pipeline(const Scenario &scenario, const QpllConfig &config, const QsubPipelineResult &coarse);
/// Runs the quantum stage once, then refines.
QpllPipelineResult qpll_pipeline(const Scenario &scenario, const ScenarioConfig &scenario_config,
                                 const QpllConfig &config, uint64_t seed);

/// 1/2 sqrt(S (sqrt 2 - sqrt(2 - sqrt 2))^2) with S = k_u^n_u.
double query_lower_bound(uint64_t k_u, uint64_t n_u);
double query_lower_bound_for_states(double num_states);

}  // namespace qsub

#endif
