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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qsub/errors.hpp"
#include "qsub/qpll.hpp"

using namespace qsub;

namespace {

double sq_norm(const Point &x) {
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return s;
}

Objective shifted_bowl(Point center) {
    return [center](const Point &x) {
        double s = 0.0;
        for (size_t i = 0; i < x.size(); i++) {
            s += (x[i] - center[i]) * (x[i] - center[i]);
        }
        return s;
    };
}

double rosenbrock(const Point &x) {
    double a = 1.0 - x[0];
    double b = x[1] - x[0] * x[0];
    return a * a + 100.0 * b * b;
}

ScenarioConfig tiny_scenario(double sigma_aoa, double hover_sigma) {
    ScenarioConfig c;
    c.swarm.total_uas = 5;
    c.swarm.active_uas = 2;
    c.swarm.min_separation = 0.05;
    c.hover.position = hover_sigma;
    c.grid.radial_resolution = 0.01;
    c.grid.radial_extent = 0.01;
    c.grid.angular_resolution = kPi / 4;
    c.grid.include_center = true;
    c.sigma_aoa = sigma_aoa;
    c.search.mode = IterationMode::Optimal;
    c.search.repetitions = 3;
    return c;
}

}  // namespace

TEST(Coefficients, Admissibility) {
    EXPECT_NO_THROW(NmCoefficients{}.validate());
    EXPECT_THROW((NmCoefficients{0.0, 2.0, 0.5, 0.5}.validate()), InvalidArgument);
    EXPECT_THROW((NmCoefficients{1.0, 1.0, 0.5, 0.5}.validate()), InvalidArgument);
    EXPECT_THROW((NmCoefficients{1.0, 2.0, 1.0, 0.5}.validate()), InvalidArgument);
    EXPECT_THROW((NmCoefficients{1.0, 2.0, 0.5, 0.0}.validate()), InvalidArgument);
}

TEST(SimplexTest, SortedOnConstruction) {
    Simplex s({{0.0, 2.0}, {0.0, 0.0}, {2.0, 0.0}}, std::vector<double>{4.0, 0.0, 1.0});
    EXPECT_TRUE(s.sorted());
    EXPECT_EQ(s.values(), (std::vector<double>{0.0, 1.0, 4.0}));
    EXPECT_EQ(s.worst(), (Point{0.0, 2.0}));
    EXPECT_NEAR(s.mean_value(), 5.0 / 3.0, 1e-15);
    EXPECT_NEAR(s.diameter(), 2.0, 1e-15);
}

TEST(SimplexTest, RejectsBadShapes) {
    EXPECT_THROW(Simplex({{0.0, 0.0}, {1.0, 0.0}}, std::vector<double>{0.0, 1.0}), InvalidArgument);
    EXPECT_THROW(Simplex({{0.0}, {NAN}}, std::vector<double>{0.0, 1.0}), InvalidArgument);
}

TEST(Centroid, Examples) {
    Simplex s({{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}}, std::vector<double>{0.0, 1.0, 2.0});
    s.sort();
    EXPECT_EQ(centroid(s), (Point{1.0, 0.0}));

    Simplex same({{0.3, -0.2}, {0.3, -0.2}, {0.3, -0.2}}, std::vector<double>{1.0, 1.0, 1.0});
    same.sort();
    EXPECT_EQ(centroid(same), (Point{0.3, -0.2}));
}

TEST(Centroid, MatchesIndependentMean) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 50; t++) {
        std::vector<Point> v(4, Point(3));
        for (auto &p : v) {
            for (double &c : p) {
                c = u(rng);
            }
        }
        Simplex s(v, shifted_bowl({0.0, 0.0, 0.0}));
        Point expected(3, 0.0);
        for (size_t j = 0; j < 3; j++) {
            for (size_t i = 0; i < 3; i++) {
                expected[i] += s.vertices()[j][i] / 3.0;
            }
        }
        Point c = centroid(s);
        for (size_t i = 0; i < 3; i++) {
            EXPECT_NEAR(c[i], expected[i], 1e-14);
        }
    }
}

TEST(TrialVertex, Examples) {
    Point bc{1.0, 0.0}, worst{0.0, 2.0};
    EXPECT_EQ(trial_vertex(bc, worst, 0.0), bc);
    EXPECT_EQ(trial_vertex(bc, worst, 1.0), (Point{2.0, -2.0}));
    Point mid = trial_vertex(bc, worst, -0.5);
    EXPECT_NEAR(mid[0], 0.5, 1e-15);
    EXPECT_NEAR(mid[1], 1.0, 1e-15);
}

TEST(TrialVertex, AffineInEta) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 200; t++) {
        Point bc{u(rng), u(rng), u(rng)}, worst{u(rng), u(rng), u(rng)};
        double e1 = u(rng), e2 = u(rng);
        Point a = trial_vertex(bc, worst, e1), b = trial_vertex(bc, worst, e2);
        Point m = trial_vertex(bc, worst, 0.5 * (e1 + e2));
        for (size_t i = 0; i < 3; i++) {
            EXPECT_NEAR(a[i] + b[i] - 2.0 * m[i], 0.0, 1e-12);
        }
    }
}

TEST(NelderMeadStep, ReflectionHandTrace) {
    Objective f = sq_norm;
    Simplex s({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, f);
    // Reflection lands on (0, 0) with f = 0; expansion to (-0.5, -0.5) scores 0.5, so reflection stays.
    EXPECT_EQ(nelder_mead_step(s, NmCoefficients{}, f), StepKind::Reflect);
    EXPECT_EQ(s.best(), (Point{0.0, 0.0}));
    EXPECT_EQ(s.best_value(), 0.0);
    for (const auto &v : s.vertices()) {
        EXPECT_NE(v, (Point{1.0, 1.0}));
    }
    EXPECT_TRUE(s.sorted());
}

TEST(NelderMeadStep, ExpansionTaken) {
    Objective f = shifted_bowl({-5.0, -5.0});
    Simplex s({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, f);
    EXPECT_EQ(nelder_mead_step(s, NmCoefficients{}, f), StepKind::Expand);
    EXPECT_EQ(s.best(), (Point{-0.5, -0.5}));
}

TEST(NelderMeadStep, ShrinkFixedPoint) {
    Objective f = sq_norm;
    Simplex s({{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}, f);
    EXPECT_EQ(nelder_mead_step(s, NmCoefficients{}, f), StepKind::Shrink);
    for (const auto &v : s.vertices()) {
        EXPECT_EQ(v, (Point{0.0, 0.0}));
    }
}

TEST(NelderMeadStep, ShrinkTowardBest) {
    // A ridge where every trial point is worse than all vertices.
    Objective f = [](const Point &x) { return std::abs(x[0]) < 1e-9 && std::abs(x[1]) < 1e-9 ? 0.0 : 10.0; };
    Simplex s({{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}}, f);
    EXPECT_EQ(nelder_mead_step(s, NmCoefficients{}, f), StepKind::Shrink);
    EXPECT_EQ(s.best(), (Point{0.0, 0.0}));
    EXPECT_NEAR(s.diameter(), 1.0, 1e-15);
}

TEST(NelderMeadStep, BestNeverIncreases) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    std::uniform_int_distribution<int> pick(0, 2);
    Objective fs[] = {sq_norm, rosenbrock, [](const Point &x) { return std::abs(x[0]) + std::sin(3.0 * x[1]) + 2.0; }};
    size_t steps = 0;
    while (steps < 10000) {
        const Objective &f = fs[pick(rng)];
        Simplex s({{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}}, f);
        for (int k = 0; k < 50 && steps < 10000; k++, steps++) {
            double before = s.best_value();
            nelder_mead_step(s, NmCoefficients{}, f);
            ASSERT_LE(s.best_value(), before);
            for (size_t i = 1; i < s.values().size(); i++) {
                ASSERT_LE(s.values()[i - 1], s.values()[i]);
            }
        }
    }
}

TEST(NelderMeadStep, NonFiniteObjective) {
    Objective f = [](const Point &x) { return x[0] < -0.5 ? NAN : sq_norm(x); };
    Simplex s({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, f);
    nelder_mead_step(s, NmCoefficients{}, f);  // reflect to the origin, expansion at -0.5 is still finite
    Simplex t({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.5}}, f);
    EXPECT_THROW(nelder_mead_step(t, NmCoefficients{}, f), ObjectiveNonFinite);
}

TEST(Optimize, ShiftedBowlBenchmark) {
    QpllOptions o;
    o.tolerance = 1e-3;
    o.max_iterations = 200;
    QpllResult r = qpll_optimize(shifted_bowl({1.0, 2.0, 3.0}), {0.0, 0.0, 0.0}, o);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.iterations_used, 200u);
    double d = std::sqrt(shifted_bowl({1.0, 2.0, 3.0})(r.optimum));
    EXPECT_LT(d, 0.05);
    EXPECT_EQ(r.objective_value, shifted_bowl({1.0, 2.0, 3.0})(r.optimum));
    EXPECT_EQ(r.step_history.size(), r.iterations_used);
    EXPECT_EQ(r.best_value_history.size(), r.iterations_used + 1);
}

TEST(Optimize, ConstantConvergesInOneStep) {
    QpllResult r = qpll_optimize([](const Point &) { return 7.0; }, {0.5, -1.0}, QpllOptions{});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations_used, 1u);
    EXPECT_EQ(r.objective_value, 7.0);
}

TEST(Optimize, Rosenbrock) {
    QpllOptions o;
    o.tolerance = 1e-8;
    o.max_iterations = 500;
    QpllResult r = qpll_optimize(rosenbrock, {-1.2, 1.0}, o);
    EXPECT_LE(r.iterations_used, 500u);
    EXPECT_LT(r.objective_value, 1e-3);
}

TEST(Optimize, ConvexQuadraticsWithinTenT) {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_real_distribution<double> curv(0.5, 4.0);
    QpllOptions o;
    o.max_iterations = 2000;
    for (size_t dim = 2; dim <= 6; dim++) {
        for (int t = 0; t < 100; t++) {
            Point c(dim), a(dim), x0(dim);
            for (size_t i = 0; i < dim; i++) {
                c[i] = u(rng);
                a[i] = curv(rng);
                x0[i] = u(rng);
            }
            Objective f = [&](const Point &x) {
                double s = 0.0;
                for (size_t i = 0; i < x.size(); i++) {
                    s += a[i] * (x[i] - c[i]) * (x[i] - c[i]);
                }
                return s;
            };
            QpllResult r = qpll_optimize(f, x0, o);
            EXPECT_TRUE(r.converged);
            EXPECT_LE(r.objective_value, 10.0 * o.tolerance) << "dim " << dim << " start " << t;
            for (size_t k = 1; k < r.best_value_history.size(); k++) {
                ASSERT_LE(r.best_value_history[k], r.best_value_history[k - 1]);
            }
        }
    }
}

TEST(Optimize, Validation) {
    QpllOptions o;
    o.tolerance = 0.0;
    EXPECT_THROW(qpll_optimize(sq_norm, {1.0}, o), InvalidArgument);
    EXPECT_THROW(qpll_optimize(sq_norm, {}, QpllOptions{}), InvalidArgument);
}

TEST(QueryBound, Values) {
    double c = std::sqrt(2.0) - std::sqrt(2.0 - std::sqrt(2.0));
    EXPECT_NEAR(c * c, 0.42100, 1e-5);
    EXPECT_NEAR(query_lower_bound(1, 1), 0.32444, 1e-4);
    EXPECT_NEAR(query_lower_bound(4, 4), 5.191, 1e-3);
    EXPECT_NEAR(query_lower_bound(4, 4), 16.0 * query_lower_bound(1, 5), 1e-12);
    EXPECT_THROW(query_lower_bound(0, 3), InvalidArgument);
    EXPECT_THROW(query_lower_bound(1000, 200), Overflow);
    double prev = 0.0;
    for (uint64_t s = 1; s < 5000; s += 7) {
        double b = query_lower_bound(s, 1);
        EXPECT_GT(b, prev);
        prev = b;
    }
}

TEST(QueryBound, EmpiricalHalfSuccessNeverBeatsBound) {
    for (uint64_t s : {uint64_t{16}, uint64_t{64}, uint64_t{256}, uint64_t{1024}, uint64_t{4096}}) {
        OracleSpec oracle(s, {s / 3});
        StateVector psi = uniform_over(s);
        Rng rng(s);
        size_t k = 0;
        for (;; k++) {
            BornSampler sampler(psi.probabilities());
            int hits = 0;
            for (int i = 0; i < 10000; i++) {
                hits += oracle.is_marked(sampler.sample(rng)) ? 1 : 0;
            }
            if (hits >= 5000) {
                break;
            }
            grover_iterate(psi, oracle, 1);
        }
        EXPECT_GE(static_cast<double>(k), query_lower_bound_for_states(static_cast<double>(s))) << "S=" << s;
    }
}

TEST(Pipeline, ExactLockStaysPut) {
    ScenarioConfig sc = tiny_scenario(0.0, 0.0);
    ScenarioSeeds seeds = ScenarioSeeds::from(5);
    Scenario scenario = build_scenario(sc, seeds);
    QsubPipelineResult coarse = qsub_pipeline(scenario, sc, seeds.search);
    ASSERT_TRUE(coarse.diagnostics.success);
    QpllConfig qc;
    QpllPipelineResult r = qpll_pipeline(scenario, qc, coarse);
    EXPECT_EQ(r.r_e, 0.0);
    EXPECT_EQ(r.coarse_r_e, 0.0);
    EXPECT_TRUE(r.optimizer.converged);
}

TEST(Pipeline, ZeroAoaErrorNeverWorseThanCoarse) {
    ScenarioConfig sc = tiny_scenario(0.0, 0.004);
    QpllConfig qc;
    for (uint64_t base = 0; base < 20; base++) {
        ScenarioSeeds seeds = ScenarioSeeds::from(base);
        Scenario scenario = build_scenario(sc, seeds);
        QpllPipelineResult r = qpll_pipeline(scenario, sc, qc, seeds.search);
        EXPECT_LE(r.r_e, r.coarse_r_e + qc.options.tolerance);
        EXPECT_LE(r.optimizer.iterations_used, qc.options.max_iterations);
        EXPECT_EQ(r.refined.size(), 2u);
    }
}

TEST(Pipeline, ObjectiveInGridUnits) {
    ScenarioConfig sc = tiny_scenario(1.0, 0.004);
    Scenario scenario = build_scenario(sc, ScenarioSeeds::from(3));
    QpllConfig qc;
    Objective f = refinement_objective(scenario, qc);
    // x = 0 places every UAS at its nominal position.
    std::vector<Vec3> nominal = scenario.nominal_positions();
    std::vector<Vec3> observed = scenario.observation.cartesian();
    double expected = position_objective(nominal, observed) / (0.01 * 0.01);
    EXPECT_NEAR(f(Point(6, 0.0)), expected, 1e-12 * expected);

    qc.regularization = 5.0;
    qc.refinement_points = 25;
    Objective g = refinement_objective(scenario, qc);
    EXPECT_NEAR(g(Point(6, 0.0)), expected, 1e-12 * expected);  // J vanishes at the nominal layout
    Point moved(6, 0.0);
    moved[0] = 0.3;
    EXPECT_GT(g(moved), f(moved));
    qc.regularization = -1.0;
    EXPECT_THROW(refinement_objective(scenario, qc), InvalidArgument);
}

TEST(Pipeline, Deterministic) {
    ScenarioConfig sc = tiny_scenario(2.5, 0.004);
    QpllConfig qc;
    qc.regularization = 5.0;
    qc.refinement_points = 25;
    ScenarioSeeds seeds = ScenarioSeeds::from(77);
    Scenario scenario = build_scenario(sc, seeds);
    QpllPipelineResult a = qpll_pipeline(scenario, sc, qc, seeds.search);
    QpllPipelineResult b = qpll_pipeline(scenario, sc, qc, seeds.search);
    EXPECT_EQ(a.optimizer.optimum, b.optimizer.optimum);
    EXPECT_EQ(a.r_e, b.r_e);
    EXPECT_EQ(a.optimizer.step_history, b.optimizer.step_history);
}
