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

#include "qsub/qpll.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <memory>
#include <numeric>

#include "qsub/errors.hpp"

namespace qsub {

namespace {

double checked(const Objective &objective, const Point &x) {
    double v = objective(x);
    if (!std::isfinite(v)) {
        throw ObjectiveNonFinite("objective returned a non-finite value");
    }
    return v;
}

double distance(const Point &a, const Point &b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); i++) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s);
}

std::vector<double> evaluate_all(const std::vector<Point> &vertices, const Objective &objective) {
    std::vector<double> values;
    values.reserve(vertices.size());
    for (const auto &v : vertices) {
        values.push_back(checked(objective, v));
    }
    return values;
}

}  // namespace

void NmCoefficients::validate() const {
    if (!(reflection > 0.0) || !(expansion > 1.0) || !(contraction > 0.0 && contraction < 1.0) ||
        !(shrink > 0.0 && shrink < 1.0)) {
        throw InvalidArgument("need r_c > 0, e_c > 1, 0 < c_c < 1 and 0 < s_c < 1");
    }
}

const char *step_name(StepKind kind) {
    switch (kind) {
        case StepKind::Reflect:
            return "reflect";
        case StepKind::Expand:
            return "expand";
        case StepKind::ContractOutside:
            return "contract_outside";
        case StepKind::ContractInside:
            return "contract_inside";
        case StepKind::Shrink:
            return "shrink";
    }
    return "unknown";
}

Simplex::Simplex(std::vector<Point> vertices, const Objective &objective)
    : Simplex(vertices, evaluate_all(vertices, objective)) {}

Simplex::Simplex(std::vector<Point> vertices, std::vector<double> values)
    : vertices_(std::move(vertices)), values_(std::move(values)) {
    if (vertices_.size() < 2 || values_.size() != vertices_.size()) {
        throw InvalidArgument("simplex needs K_o + 1 >= 2 vertices with one value each");
    }
    for (const auto &v : vertices_) {
        if (v.size() != vertices_.size() - 1) {
            throw InvalidArgument("simplex vertices must have K_o coordinates");
        }
        for (double c : v) {
            if (!std::isfinite(c)) {
                throw InvalidArgument("simplex vertices must be finite");
            }
        }
    }
    sort();
}

double Simplex::mean_value() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double Simplex::diameter() const {
    double d = 0.0;
    for (size_t i = 1; i < vertices_.size(); i++) {
        d = std::max(d, distance(vertices_[0], vertices_[i]));
    }
    return d;
}

void Simplex::set_vertex(size_t i, Point p, double value) {
    vertices_.at(i) = std::move(p);
    values_[i] = value;
    sorted_ = false;
}

void Simplex::sort() {
    std::vector<size_t> order(vertices_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return values_[a] < values_[b]; });
    std::vector<Point> v;
    std::vector<double> f;
    for (size_t i : order) {
        v.push_back(std::move(vertices_[i]));
        f.push_back(values_[i]);
    }
    vertices_ = std::move(v);
    values_ = std::move(f);
    sorted_ = true;
}

Point centroid(const Simplex &simplex) {
    size_t k = simplex.dimension();
    Point c(k, 0.0);
    for (size_t j = 0; j < k; j++) {
        for (size_t i = 0; i < k; i++) {
            c[i] += simplex.vertices()[j][i];
        }
    }
    for (double &v : c) {
        v /= static_cast<double>(k);
    }
    return c;
}

Point trial_vertex(const Point &b_c, const Point &worst, double eta) {
    if (b_c.size() != worst.size()) {
        throw InvalidArgument("centroid and worst vertex differ in dimension");
    }
    Point out(b_c.size());
    for (size_t i = 0; i < b_c.size(); i++) {
        out[i] = (1.0 + eta) * b_c[i] - eta * worst[i];
    }
    return out;
}

StepKind nelder_mead_step(Simplex &simplex, const NmCoefficients &coeffs, const Objective &objective) {
    coeffs.validate();
    if (!simplex.sorted()) {
        simplex.sort();
    }
    size_t last = simplex.dimension();
    Point bc = centroid(simplex);
    Point worst = simplex.worst();
    double f_best = simplex.best_value();
    double f_second = simplex.second_worst_value();
    double f_worst = simplex.worst_value();

    Point xr = trial_vertex(bc, worst, coeffs.reflection);
    double fr = checked(objective, xr);
    StepKind kind;
    if (fr < f_best) {
        Point xe = trial_vertex(bc, worst, coeffs.reflection * coeffs.expansion);
        double fe = checked(objective, xe);
        if (fe < fr) {
            simplex.set_vertex(last, std::move(xe), fe);
            kind = StepKind::Expand;
        } else {
            simplex.set_vertex(last, std::move(xr), fr);
            kind = StepKind::Reflect;
        }
    } else if (fr < f_second) {
        simplex.set_vertex(last, std::move(xr), fr);
        kind = StepKind::Reflect;
    } else {
        bool outside = fr < f_worst;
        double eta = outside ? coeffs.reflection * coeffs.contraction : -coeffs.contraction;
        Point xc = trial_vertex(bc, worst, eta);
        double fc = checked(objective, xc);
        if (outside ? fc <= fr : fc < f_worst) {
            simplex.set_vertex(last, std::move(xc), fc);
            kind = outside ? StepKind::ContractOutside : StepKind::ContractInside;
        } else {
            Point b0 = simplex.best();
            for (size_t j = 1; j <= last; j++) {
                Point v = simplex.vertices()[j];
                for (size_t i = 0; i < v.size(); i++) {
                    v[i] = b0[i] + coeffs.shrink * (v[i] - b0[i]);
                }
                double fv = checked(objective, v);
                simplex.set_vertex(j, std::move(v), fv);
            }
            kind = StepKind::Shrink;
        }
    }
    simplex.sort();
    return kind;
}

QpllResult qpll_optimize(const Objective &objective, const Point &initial, const QpllOptions &options) {
    options.coefficients.validate();
    if (!(options.tolerance > 0.0) || !(options.x_tolerance > 0.0)) {
        throw InvalidArgument("tolerances must be positive");
    }
    if (initial.empty()) {
        throw InvalidArgument("initial point must have at least one coordinate");
    }
    QpllResult res;
    Objective counted = [&](const Point &x) {
        res.evaluations++;
        return objective(x);
    };
    std::vector<Point> vertices{initial};
    for (size_t i = 0; i < initial.size(); i++) {
        Point v = initial;
        v[i] += options.initial_step;
        vertices.push_back(std::move(v));
    }
    Simplex simplex(std::move(vertices), counted);
    res.best_value_history.push_back(simplex.best_value());
    res.mean_value_history.push_back(simplex.mean_value());
    while (res.iterations_used < options.max_iterations) {
        double previous = simplex.best_value();
        res.step_history.push_back(nelder_mead_step(simplex, options.coefficients, counted));
        res.iterations_used++;
        res.best_value_history.push_back(simplex.best_value());
        res.mean_value_history.push_back(simplex.mean_value());
        // A perfectly flat simplex carries no descent direction, so it stops
        // without waiting for the diameter bound.
        double spread = simplex.worst_value() - simplex.best_value();
        bool settled = std::abs(simplex.best_value() - previous) <= options.tolerance &&
                       spread <= options.tolerance && (spread == 0.0 || simplex.diameter() <= options.x_tolerance);
        if (settled || simplex.diameter() <= options.diameter_floor) {
            res.converged = true;
            break;
        }
    }
    res.optimum = simplex.best();
    res.objective_value = simplex.best_value();
    return res;
}

Objective refinement_objective(const Scenario &scenario, const QpllConfig &config) {
    if (!(config.regularization >= 0.0)) {
        throw InvalidArgument("regularization weight must be nonnegative");
    }
    double r = scenario.grid.parameters().radial_resolution;
    std::vector<Vec3> nominal = scenario.nominal_positions();
    std::vector<Vec3> observed = scenario.observation.cartesian();
    double mu = config.regularization;
    std::shared_ptr<PatternEvaluator> evaluator;
    std::vector<double> amplitudes;
    std::vector<double> phases;
    double scale = 0.0;
    if (mu > 0.0) {
        AngularGrid grid = AngularGrid::uniform(config.refinement_points, config.refinement_points);
        BeamPatternGrid ideal = beam_pattern(scenario.nominal, grid, scenario.wavelength);
        evaluator = std::make_shared<PatternEvaluator>(grid, scenario.wavelength, ideal);
        for (const auto &s : scenario.nominal) {
            amplitudes.push_back(s.power * s.weight);
            phases.push_back(s.phase);
            scale += s.power * s.weight;
        }
        scale *= scale;
    }
    return [=](const Point &x) {
        std::vector<Vec3> e(nominal.size());
        for (size_t j = 0; j < nominal.size(); j++) {
            e[j] = nominal[j] + r * Vec3{x[3 * j], x[3 * j + 1], x[3 * j + 2]};
        }
        double f = position_objective(e, observed) / (r * r);
        if (evaluator) {
            f += mu * evaluator->distortion(e, amplitudes, phases) / scale;
        }
        return f;
    };
}

QpllPipelineResult qpll_pipeline(const Scenario &scenario, const QpllConfig &config, const QsubPipelineResult &coarse) {
    double r = scenario.grid.parameters().radial_resolution;
    std::vector<Vec3> nominal = scenario.nominal_positions();
    if (coarse.predicted.size() != nominal.size()) {
        throw InvalidArgument("coarse lock does not match the selected UASs");
    }
    Point x0;
    for (size_t j = 0; j < nominal.size(); j++) {
        Vec3 d = coarse.predicted[j] - nominal[j];
        for (double c : d) {
            x0.push_back(c / r);
        }
    }
    QpllPipelineResult out;
    out.optimizer = qpll_optimize(refinement_objective(scenario, config), x0, config.options);
    for (size_t j = 0; j < nominal.size(); j++) {
        const Point &x = out.optimizer.optimum;
        out.refined.push_back(nominal[j] + r * Vec3{x[3 * j], x[3 * j + 1], x[3 * j + 2]});
    }
    out.r_e = euclidean_error(out.refined, scenario.truth);
    out.residual = residual_perturbations(scenario, out.refined);
    out.coarse_diagnostics = coarse.diagnostics;
    out.coarse_r_e = coarse.r_e;
    return out;
}

QpllPipelineResult qpll_pipeline(const Scenario &scenario, const ScenarioConfig &scenario_config,
                                 const QpllConfig &config, uint64_t seed) {
    return qpll_pipeline(scenario, config, qsub_pipeline(scenario, scenario_config, seed));
}

double query_lower_bound_for_states(double num_states) {
    if (!(num_states >= 1.0)) {
        throw InvalidArgument("search space must hold at least one state");
    }
    if (!std::isfinite(num_states)) {
        throw Overflow("search space size is not representable");
    }
    double c = std::sqrt(2.0) - std::sqrt(2.0 - std::sqrt(2.0));
    return 0.5 * std::sqrt(num_states * (c * c));
}

double query_lower_bound(uint64_t k_u, uint64_t n_u) {
    if (k_u < 1 || n_u < 1) {
        throw InvalidArgument("k_u and n_u must be at least 1");
    }
    double log_states = static_cast<double>(n_u) * std::log(static_cast<double>(k_u));
    if (log_states >= std::log(DBL_MAX)) {
        throw Overflow("k_u^n_u exceeds the representable range");
    }
    return query_lower_bound_for_states(std::pow(static_cast<double>(k_u), static_cast<double>(n_u)));
}

}  // namespace qsub
