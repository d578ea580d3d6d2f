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

#include "qsub/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qsub/errors.hpp"
#include "qsub/random.hpp"

namespace qsub {

namespace {

uint64_t bits_of(double v) {
    uint64_t b;
    std::memcpy(&b, &v, sizeof(b));
    return b;
}

std::string draw_digest(const Scenario &sc) {
    uint64_t h = 0x6a09e667f3bcc908ULL;
    auto mix = [&](double v) { h = splitmix64(h ^ bits_of(v)); };
    for (const auto &p : sc.truth) {
        for (double c : p) {
            mix(c);
        }
    }
    for (const auto &o : sc.observation.observed) {
        mix(o.r);
        mix(o.theta);
        mix(o.phi);
    }
    for (size_t i : sc.selection.chosen_combination) {
        mix(static_cast<double>(i));
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Emitted files must never carry NaN or Inf.
void require_finite(const TrialRecord &r) {
    for (double v : {r.r_e, r.j_value, r.main_lobe_divergence, r.null_divergence}) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ObjectiveNonFinite(std::string("non-finite or negative metric for ") + method_tag(r.method));
        }
    }
}

uint64_t job_seed(uint64_t base, size_t n_u, size_t trial) {
    return derive_seed(base, {0x6a6f62, static_cast<uint64_t>(n_u), static_cast<uint64_t>(trial)});
}

}  // namespace

const char *method_tag(Method m) {
    switch (m) {
        case Method::Qsub:
            return "QSUB";
        case Method::Qpll:
            return "Q-P-LL";
        case Method::MrtBaseline:
            return "MRT-baseline";
    }
    return "unknown";
}

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    c.scenario.swarm.total_uas = 10;
    c.scenario.swarm.ball_radius = 0.1;
    c.scenario.swarm.min_separation = 0.05;
    c.scenario.hover.position = 0.004;
    c.scenario.grid.radial_resolution = 0.01;
    c.scenario.grid.angular_resolution = deg_to_rad(45.0);
    c.scenario.grid.radial_extent = 0.01;
    c.scenario.grid.include_center = true;
    c.scenario.search.mode = IterationMode::Literal;
    c.scenario.search.repetitions = 3;
    c.qpll.regularization = 5.0;
    c.qpll.refinement_points = 25;
    return c;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string &m) { throw ConfigError(m); };
    if (trials < 1) {
        fail("trials must be at least 1");
    }
    if (sigma_aoa_sweep.empty() || n_u_sweep.empty()) {
        fail("sweep lists must be nonempty");
    }
    if (!(frequency > 0.0) || !std::isfinite(frequency)) {
        fail("frequency must be positive");
    }
    if (workers < 1) {
        fail("workers must be at least 1");
    }
    for (double s : sigma_aoa_sweep) {
        if (!(s >= 0.0)) {
            fail("sigma_aoa values must be nonnegative");
        }
    }
    for (size_t n : n_u_sweep) {
        if (n < 1 || n > scenario.swarm.total_uas) {
            fail("every N_u must lie in [1, total_uas]");
        }
    }
    if (scenario.pattern_points < 3) {
        fail("pattern_points must be at least 3");
    }
    try {
        scenario.swarm.validate();
        scenario.hover.validate();
        scenario.grid.validate();
        qpll.options.coefficients.validate();
    } catch (const Error &e) {
        fail(e.what());
    }
    if (!(qpll.options.tolerance > 0.0) || !(qpll.options.x_tolerance > 0.0) || qpll.refinement_points < 2 ||
        !(qpll.regularization >= 0.0)) {
        fail("qpll tolerance, refinement_points or regularization out of range");
    }
    if (scenario.search.repetitions < 1) {
        fail("search repetitions must be at least 1");
    }
}

ScenarioConfig ExperimentConfig::scenario_for(size_t n_u, double sigma_aoa) const {
    ScenarioConfig s = scenario;
    s.swarm.active_uas = n_u;
    s.swarm.wavelength = wavelength();
    s.sigma_aoa = sigma_aoa;
    return s;
}

std::string to_json_line(const TrialRecord &r, bool include_wall_time) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["method"] = method_tag(r.method);
    j["sigma_aoa"] = r.sigma_aoa;
    j["n_u"] = r.n_u;
    j["trial"] = r.trial;
    if (r.error) {
        j["error"] = *r.error;
    } else {
        j["r_e"] = r.r_e;
        j["j_value"] = r.j_value;
        j["oracle_calls"] = r.oracle_calls;
        j["success"] = r.success;
        j["main_lobe_divergence"] = r.main_lobe_divergence;
        j["null_divergence"] = r.null_divergence;
        j["nm_iterations"] = r.nm_iterations;
        j["nm_evaluations"] = r.nm_evaluations;
    }
    j["draw_digest"] = r.draw_digest;
    if (include_wall_time) {
        j["wall_time"] = r.wall_time;
    }
    return j.dump();
}

std::vector<TrialRecord> run_trial_job(const ExperimentConfig &config, size_t n_u, size_t trial) {
    uint64_t seed = job_seed(config.base_seed, n_u, trial);
    std::vector<TrialRecord> out;
    auto blank = [&](Method m, double sigma) {
        TrialRecord r;
        r.seed = seed;
        r.method = m;
        r.sigma_aoa = sigma;
        r.n_u = n_u;
        r.trial = trial;
        return r;
    };
    try {
        ScenarioSeeds seeds = ScenarioSeeds::from(seed);
        ScenarioConfig base = config.scenario_for(n_u, 0.0);
        Scenario sc = build_scenario(base, seeds);
        AngularGrid metric_grid = AngularGrid::uniform(base.pattern_points, base.pattern_points);
        BeamPatternGrid ideal = beam_pattern(sc.nominal, metric_grid, sc.wavelength);
        auto score = [&](TrialRecord &r, std::span<const HoverPerturbation> residual) {
            BeamPatternGrid achieved = distorted_pattern(sc.nominal, residual, metric_grid, sc.wavelength);
            r.j_value = objective_j(ideal, achieved);
            PatternDivergence d = pattern_divergence(ideal, achieved, config.null_count);
            r.main_lobe_divergence = d.main_lobe_divergence;
            r.null_divergence = d.null_divergence;
        };
        std::vector<Vec3> nominal = sc.nominal_positions();
        for (double sigma : config.sigma_aoa_sweep) {
            ScenarioConfig cell = config.scenario_for(n_u, sigma);
            sc.observation = observe_with_aoa_error(std::span<const Vec3>(sc.truth), sigma, seeds.aoa);
            std::string digest = draw_digest(sc);

            auto t0 = std::chrono::steady_clock::now();
            QsubPipelineResult q = qsub_pipeline(sc, cell, seeds.search);
            TrialRecord rq = blank(Method::Qsub, sigma);
            rq.r_e = q.r_e;
            rq.oracle_calls = q.diagnostics.oracle_calls;
            rq.success = q.diagnostics.success;
            score(rq, q.residual);
            rq.draw_digest = digest;
            rq.wall_time = seconds_since(t0);

            t0 = std::chrono::steady_clock::now();
            QpllPipelineResult p = qpll_pipeline(sc, config.qpll, q);
            TrialRecord rp = blank(Method::Qpll, sigma);
            rp.r_e = p.r_e;
            rp.oracle_calls = q.diagnostics.oracle_calls;
            rp.success = q.diagnostics.success;
            rp.nm_iterations = p.optimizer.iterations_used;
            rp.nm_evaluations = p.optimizer.evaluations;
            score(rp, p.residual);
            rp.draw_digest = digest;
            rp.wall_time = seconds_since(t0) + rq.wall_time;

            t0 = std::chrono::steady_clock::now();
            TrialRecord rm = blank(Method::MrtBaseline, sigma);
            rm.r_e = euclidean_error(nominal, sc.truth);
            score(rm, sc.hover.perturbations);
            rm.draw_digest = digest;
            rm.wall_time = seconds_since(t0);

            require_finite(rq);
            require_finite(rp);
            require_finite(rm);
            out.push_back(std::move(rq));
            out.push_back(std::move(rp));
            out.push_back(std::move(rm));
        }
    } catch (const std::exception &e) {
        out.clear();
        for (double sigma : config.sigma_aoa_sweep) {
            for (Method m : kAllMethods) {
                TrialRecord r = blank(m, sigma);
                r.error = e.what();
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw EmptyGroup("percentile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    double pos = q * static_cast<double>(values.size() - 1);
    auto lo = static_cast<size_t>(std::floor(pos));
    size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<SweepSummary> summarize(const std::vector<TrialRecord> &records) {
    std::vector<SweepSummary> out;
    std::vector<std::vector<const TrialRecord *>> members;
    std::map<std::tuple<int, uint64_t, size_t>, size_t> index;
    for (const auto &r : records) {
        auto key = std::make_tuple(static_cast<int>(r.method), bits_of(r.sigma_aoa), r.n_u);
        auto [it, fresh] = index.emplace(key, out.size());
        if (fresh) {
            SweepSummary s;
            s.method = r.method;
            s.sigma_aoa = r.sigma_aoa;
            s.n_u = r.n_u;
            out.push_back(s);
            members.emplace_back();
        }
        members[it->second].push_back(&r);
    }
    for (size_t g = 0; g < out.size(); g++) {
        SweepSummary &s = out[g];
        std::vector<double> re;
        double j = 0.0, ml = 0.0, nl = 0.0, calls = 0.0;
        for (const TrialRecord *r : members[g]) {
            if (r->error) {
                s.failures++;
                continue;
            }
            re.push_back(r->r_e);
            j += r->j_value;
            ml += r->main_lobe_divergence;
            nl += r->null_divergence;
            calls += static_cast<double>(r->oracle_calls);
        }
        s.count = re.size();
        if (re.empty()) {
            continue;
        }
        double n = static_cast<double>(re.size());
        double sum = 0.0;
        for (double v : re) {
            sum += v;
        }
        s.mean_r_e = sum / n;
        s.median_r_e = percentile(re, 0.5);
        s.p05_r_e = percentile(re, 0.05);
        s.p25_r_e = percentile(re, 0.25);
        s.p75_r_e = percentile(re, 0.75);
        s.p95_r_e = percentile(re, 0.95);
        s.iqr_r_e = s.p75_r_e - s.p25_r_e;
        s.mean_j = j / n;
        s.mean_main_lobe = ml / n;
        s.mean_null = nl / n;
        s.mean_oracle_calls = calls / n;
    }
    return out;
}

void write_summary_csv(std::ostream &out, const std::vector<SweepSummary> &summaries) {
    out << "method,sigma_aoa,n_u,count,failures,mean_r_e,median_r_e,p05_r_e,p25_r_e,p75_r_e,p95_r_e,iqr_r_e,"
           "mean_j,mean_main_lobe,mean_null,mean_oracle_calls\n";
    char buf[512];
    for (const auto &s : summaries) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%.17g,%zu,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      method_tag(s.method), s.sigma_aoa, s.n_u, s.count, s.failures, s.mean_r_e, s.median_r_e,
                      s.p05_r_e, s.p25_r_e, s.p75_r_e, s.p95_r_e, s.iqr_r_e, s.mean_j, s.mean_main_lobe,
                      s.mean_null, s.mean_oracle_calls);
        out << buf;
    }
}

SweepResult run_sweep(const ExperimentConfig &config, std::ostream *jsonl_out) {
    config.validate();
    struct Job {
        size_t n_u;
        size_t trial;
    };
    std::vector<Job> jobs;
    for (size_t n_u : config.n_u_sweep) {
        for (size_t t = 0; t < config.trials; t++) {
            jobs.push_back({n_u, t});
        }
    }
    std::vector<std::optional<std::vector<TrialRecord>>> done(jobs.size());
    SweepResult result;
    std::mutex mu;
    size_t flushed = 0;
    std::atomic<size_t> next{0};
    // The writer emits the longest finished prefix, so stream order is job order.
    auto flush_ready = [&]() {
        while (flushed < jobs.size() && done[flushed]) {
            for (auto &r : *done[flushed]) {
                if (jsonl_out) {
                    *jsonl_out << to_json_line(r, config.record_wall_time) << '\n';
                }
                result.records.push_back(std::move(r));
            }
            done[flushed].reset();
            flushed++;
        }
    };
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= jobs.size()) {
                return;
            }
            std::vector<TrialRecord> recs = run_trial_job(config, jobs[i].n_u, jobs[i].trial);
            std::lock_guard<std::mutex> lock(mu);
            done[i] = std::move(recs);
            flush_ready();
        }
    };
    size_t n_workers = std::min(config.workers, std::max<size_t>(jobs.size(), 1));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (size_t w = 0; w < n_workers; w++) {
            pool.emplace_back(worker);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    if (jsonl_out) {
        jsonl_out->flush();
    }
    for (const auto &r : result.records) {
        if (r.error) {
            result.failures++;
        }
    }
    result.failed_run = static_cast<double>(result.failures) >
                        config.failure_threshold * static_cast<double>(result.records.size());
    result.summaries = summarize(result.records);
    return result;
}

std::vector<ComplexityRow> complexity_sweep(const std::vector<uint64_t> &sizes, size_t trials, uint64_t seed,
                                            unsigned max_qubits) {
    if (trials < 1) {
        throw InvalidArgument("complexity sweep needs at least one trial");
    }
    std::vector<ComplexityRow> rows;
    for (uint64_t s : sizes) {
        if (s < 1) {
            throw InvalidArgument("search space sizes must be positive");
        }
        if (qubits_for(s) > max_qubits) {
            throw RegisterTooLarge("search space of " + std::to_string(s) + " states exceeds the register");
        }
        OracleSpec oracle(s, {derive_seed(seed, {0x6f7261, s}) % s});
        StateVector psi = uniform_over(s, max_qubits);
        size_t limit = 2 * static_cast<size_t>(std::ceil(std::sqrt(static_cast<double>(s)))) + 2;
        ComplexityRow row;
        row.num_states = s;
        row.classical_worst = static_cast<double>(s);
        row.classical_avg = static_cast<double>(s) / 2.0;
        row.bound = query_lower_bound_for_states(static_cast<double>(s));
        bool found = false;
        for (size_t k = 0; k <= limit; k++) {
            if (k > 0) {
                grover_iterate(psi, oracle, 1);
            }
            std::vector<double> p = psi.probabilities();
            BornSampler sampler(p);
            Rng rng(derive_seed(seed, {0x72756e, s, k}));
            size_t hits = 0;
            for (size_t t = 0; t < trials; t++) {
                hits += oracle.is_marked(sampler.sample(rng)) ? 1 : 0;
            }
            double rate = static_cast<double>(hits) / static_cast<double>(trials);
            if (rate >= 0.5) {
                row.quantum_calls = k;
                row.empirical_success = rate;
                found = true;
                break;
            }
        }
        if (!found) {
            throw Error("no iteration count reached one half success for S = " + std::to_string(s));
        }
        rows.push_back(row);
    }
    return rows;
}

void write_complexity_csv(std::ostream &out, const std::vector<ComplexityRow> &rows) {
    out << "S,classical_worst,classical_avg,quantum_calls,bound\n";
    char buf[256];
    for (const auto &r : rows) {
        std::snprintf(buf, sizeof(buf), "%llu,%.17g,%.17g,%llu,%.17g\n", static_cast<unsigned long long>(r.num_states),
                      r.classical_worst, r.classical_avg, static_cast<unsigned long long>(r.quantum_calls), r.bound);
        out << buf;
    }
}

double loglog_slope(const std::vector<ComplexityRow> &rows) {
    std::vector<double> x, y;
    for (const auto &r : rows) {
        if (r.quantum_calls > 0) {
            x.push_back(std::log(static_cast<double>(r.num_states)));
            y.push_back(std::log(static_cast<double>(r.quantum_calls)));
        }
    }
    if (x.size() < 2) {
        throw InvalidArgument("slope needs at least two sizes with nonzero calls");
    }
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); i++) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (size_t i = 0; i < x.size(); i++) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

TraceSet compute_traces(const ExperimentConfig &config, size_t instant, uint64_t seed) {
    config.validate();
    ScenarioConfig cell = config.scenario_for(config.n_u_sweep.front(), config.sigma_aoa_sweep.front());
    ScenarioSeeds seeds = ScenarioSeeds::from(derive_seed(seed, {0x747263, static_cast<uint64_t>(instant)}));
    Scenario sc = build_scenario(cell, seeds);
    AngularGrid grid = AngularGrid::uniform(cell.pattern_points, cell.pattern_points);
    QsubPipelineResult q = qsub_pipeline(sc, cell, seeds.search);
    QpllPipelineResult p = qpll_pipeline(sc, config.qpll, q);
    TraceSet t;
    t.ideal = beam_pattern(sc.nominal, grid, sc.wavelength);
    t.mrt_only = distorted_pattern(sc.nominal, sc.hover.perturbations, grid, sc.wavelength);
    t.qsub = distorted_pattern(sc.nominal, q.residual, grid, sc.wavelength);
    t.qpll = distorted_pattern(sc.nominal, p.residual, grid, sc.wavelength);
    t.j_mrt = objective_j(t.ideal, t.mrt_only);
    t.j_qsub = objective_j(t.ideal, t.qsub);
    t.j_qpll = objective_j(t.ideal, t.qpll);
    return t;
}

std::vector<TraceSet> emit_pattern_traces(const ExperimentConfig &config, size_t instants, uint64_t seed,
                                          const std::string &out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<TraceSet> out;
    for (size_t i = 0; i < instants; i++) {
        TraceSet t = compute_traces(config, i, seed);
        const std::pair<const char *, const BeamPatternGrid *> files[] = {
            {"ideal", &t.ideal}, {"mrt", &t.mrt_only}, {"qsub", &t.qsub}, {"qpll", &t.qpll}};
        for (const auto &[name, grid] : files) {
            std::ofstream f(std::filesystem::path(out_dir) / ("trace_" + std::to_string(i) + "_" + name + ".csv"));
            if (!f) {
                throw Error("cannot write pattern trace into " + out_dir);
            }
            write_pattern_csv(f, *grid);
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<DivergenceRow> summarize_divergence(const std::vector<TrialRecord> &records, Method method) {
    std::map<std::pair<size_t, double>, DivergenceRow> groups;
    for (const auto &r : records) {
        if (r.method != method || r.error) {
            continue;
        }
        DivergenceRow &g = groups[{r.n_u, r.sigma_aoa}];
        g.n_u = r.n_u;
        g.sigma_aoa = r.sigma_aoa;
        g.count++;
        g.mean_main_lobe += r.main_lobe_divergence;
        g.mean_null += r.null_divergence;
    }
    if (groups.empty()) {
        throw EmptyGroup(std::string("no successful records for method ") + method_tag(method));
    }
    std::vector<DivergenceRow> out;
    for (auto &[key, g] : groups) {
        g.mean_main_lobe /= static_cast<double>(g.count);
        g.mean_null /= static_cast<double>(g.count);
        out.push_back(g);
    }
    return out;
}

void write_divergence_table(std::ostream &out, const std::vector<DivergenceRow> &rows) {
    out << "N_u  sigma_AoA(deg)  main_lobe(deg)  nulls(deg)  trials\n";
    char buf[160];
    for (const auto &r : rows) {
        std::snprintf(buf, sizeof(buf), "%-4zu %-15.2f %-15.3f %-11.3f %zu\n", r.n_u, r.sigma_aoa, r.mean_main_lobe,
                      r.mean_null, r.count);
        out << buf;
    }
}

}  // namespace qsub
