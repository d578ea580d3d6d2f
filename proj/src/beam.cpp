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

#include "qsub/beam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "qsub/errors.hpp"
#include "qsub/random.hpp"

namespace qsub {

namespace {

struct Element {
    double amplitude;
    Vec3 pos;
    double phase;
    double dtheta;
    double dphi;
};

Vec3 direction_vector(double theta, double phi) {
    double st = std::sin(theta);
    return {std::cos(phi) * st, std::sin(phi) * st, std::cos(theta)};
}

// Shared kernel for the ideal and distorted patterns. Zero angle offsets take
// the cached direction path, which is bitwise what the general path computes.
BeamPatternGrid evaluate(const std::vector<Element> &elements, const AngularGrid &grid, double wavelength) {
    if (elements.empty() || grid.theta.empty() || grid.phi.empty()) {
        throw InvalidArgument("pattern needs a nonempty swarm and sample grid");
    }
    if (!(wavelength > 0.0)) {
        throw InvalidArgument("wavelength must be positive");
    }
    double k = kTwoPi / wavelength;
    size_t nt = grid.theta.size();
    size_t np = grid.phi.size();
    std::vector<Vec3> dirs(nt * np);
    for (size_t i = 0; i < nt; i++) {
        for (size_t j = 0; j < np; j++) {
            dirs[i * np + j] = direction_vector(grid.theta[i], grid.phi[j]);
        }
    }
    std::vector<double> re(nt * np, 0.0);
    std::vector<double> im(nt * np, 0.0);
    for (const auto &e : elements) {
        bool shared = e.dtheta == 0.0 && e.dphi == 0.0;
        for (size_t i = 0; i < nt; i++) {
            for (size_t j = 0; j < np; j++) {
                size_t idx = i * np + j;
                Vec3 u = shared ? dirs[idx] : direction_vector(grid.theta[i] + e.dtheta, grid.phi[j] + e.dphi);
                double psi = e.phase + k * (e.pos[0] * u[0] + e.pos[1] * u[1] + e.pos[2] * u[2]);
                re[idx] += e.amplitude * std::cos(psi);
                im[idx] += e.amplitude * std::sin(psi);
            }
        }
    }
    BeamPatternGrid out;
    out.theta_samples = grid.theta;
    out.phi_samples = grid.phi;
    out.magnitudes.resize(nt * np);
    for (size_t idx = 0; idx < nt * np; idx++) {
        out.magnitudes[idx] = std::sqrt(re[idx] * re[idx] + im[idx] * im[idx]);
    }
    return out;
}

std::vector<double> trapezoid_weights(const std::vector<double> &x) {
    size_t n = x.size();
    std::vector<double> w(n, 0.0);
    for (size_t i = 0; i + 1 < n; i++) {
        double h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    return w;
}

void require_same_samples(const BeamPatternGrid &a, const BeamPatternGrid &b) {
    if (a.theta_samples != b.theta_samples || a.phi_samples != b.phi_samples ||
        a.magnitudes.size() != b.magnitudes.size()) {
        throw GridMismatch("pattern grids do not share sample lists");
    }
}

std::vector<size_t> local_minima(const BeamPatternGrid &g) {
    std::vector<size_t> out;
    long nt = static_cast<long>(g.rows());
    long np = static_cast<long>(g.cols());
    for (long i = 0; i < nt; i++) {
        for (long j = 0; j < np; j++) {
            double v = g.at(i, j);
            bool is_min = true;
            for (long di = -1; di <= 1 && is_min; di++) {
                for (long dj = -1; dj <= 1; dj++) {
                    long a = i + di, b = j + dj;
                    if ((di == 0 && dj == 0) || a < 0 || b < 0 || a >= nt || b >= np) {
                        continue;
                    }
                    if (g.at(a, b) < v) {
                        is_min = false;
                        break;
                    }
                }
            }
            if (is_min) {
                out.push_back(static_cast<size_t>(i * np + j));
            }
        }
    }
    return out;
}

Direction direction_at(const BeamPatternGrid &g, size_t flat) {
    return {g.theta_samples[flat / g.cols()], g.phi_samples[flat % g.cols()]};
}

}  // namespace

Vec3 unit_vector(const Direction &d) { return direction_vector(d.theta, d.phi); }

double angular_distance_deg(const Direction &a, const Direction &b) {
    Vec3 u = unit_vector(a);
    Vec3 v = unit_vector(b);
    // atan2 of cross and dot stays accurate for tiny and near-antipodal angles.
    Vec3 c{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    return rad_to_deg(std::atan2(norm(c), dot(u, v)));
}

AngularGrid AngularGrid::uniform(size_t n_theta, size_t n_phi) {
    if (n_theta < 2 || n_phi < 2) {
        throw InvalidArgument("angular grid needs at least two samples per axis");
    }
    auto axis = [](size_t n) {
        std::vector<double> v(n);
        for (size_t i = 0; i < n; i++) {
            v[i] = -kPi + kTwoPi * static_cast<double>(i) / static_cast<double>(n - 1);
        }
        return v;
    };
    return {axis(n_theta), axis(n_phi)};
}

BeamPatternGrid beam_pattern(std::span<const UasState> swarm, const AngularGrid &grid, double wavelength) {
    std::vector<Element> elements;
    for (const auto &s : swarm) {
        elements.push_back({s.power * s.weight, s.cartesian, s.phase, 0.0, 0.0});
    }
    return evaluate(elements, grid, wavelength);
}

BeamPatternGrid distorted_pattern(std::span<const UasState> swarm, std::span<const HoverPerturbation> perturbations,
                                  const AngularGrid &grid, double wavelength) {
    if (swarm.size() != perturbations.size()) {
        throw InvalidArgument("one perturbation per UAS is required");
    }
    std::vector<Element> elements;
    for (size_t k = 0; k < swarm.size(); k++) {
        const auto &s = swarm[k];
        const auto &d = perturbations[k];
        elements.push_back({s.power * s.weight, s.cartesian + d.delta_position, s.phase + d.delta_phase,
                            d.delta_theta, d.delta_phi});
    }
    return evaluate(elements, grid, wavelength);
}

double objective_j(const BeamPatternGrid &ideal, const BeamPatternGrid &distorted) {
    require_same_samples(ideal, distorted);
    std::vector<double> wt = trapezoid_weights(ideal.theta_samples);
    std::vector<double> wp = trapezoid_weights(ideal.phi_samples);
    double total = 0.0;
    for (size_t i = 0; i < ideal.rows(); i++) {
        double row = 0.0;
        for (size_t j = 0; j < ideal.cols(); j++) {
            double d = ideal.at(i, j) - distorted.at(i, j);
            row += wp[j] * d * d;
        }
        total += wt[i] * row;
    }
    return 0.25 * total;
}

PatternEvaluator::PatternEvaluator(const AngularGrid &grid, double wavelength, const BeamPatternGrid &reference)
    : k_(kTwoPi / wavelength), n_theta_(grid.theta.size()), n_phi_(grid.phi.size()) {
    if (reference.theta_samples != grid.theta || reference.phi_samples != grid.phi) {
        throw GridMismatch("reference pattern does not use the evaluator grid");
    }
    std::vector<double> wt = trapezoid_weights(grid.theta);
    std::vector<double> wp = trapezoid_weights(grid.phi);
    for (size_t i = 0; i < n_theta_; i++) {
        for (size_t j = 0; j < n_phi_; j++) {
            dirs_.push_back(direction_vector(grid.theta[i], grid.phi[j]));
            weights_.push_back(wt[i] * wp[j]);
        }
    }
    reference_ = reference.magnitudes;
    re_.resize(dirs_.size());
    im_.resize(dirs_.size());
}

double PatternEvaluator::distortion(std::span<const Vec3> positions, std::span<const double> amplitudes,
                                    std::span<const double> phases) const {
    if (positions.size() != amplitudes.size() || positions.size() != phases.size()) {
        throw InvalidArgument("element arrays must be equally sized");
    }
    std::fill(re_.begin(), re_.end(), 0.0);
    std::fill(im_.begin(), im_.end(), 0.0);
    for (size_t e = 0; e < positions.size(); e++) {
        const Vec3 &p = positions[e];
        for (size_t idx = 0; idx < dirs_.size(); idx++) {
            const Vec3 &u = dirs_[idx];
            double psi = phases[e] + k_ * (p[0] * u[0] + p[1] * u[1] + p[2] * u[2]);
            re_[idx] += amplitudes[e] * std::cos(psi);
            im_[idx] += amplitudes[e] * std::sin(psi);
        }
    }
    double total = 0.0;
    for (size_t idx = 0; idx < dirs_.size(); idx++) {
        double d = reference_[idx] - std::sqrt(re_[idx] * re_[idx] + im_[idx] * im_[idx]);
        total += weights_[idx] * d * d;
    }
    return 0.25 * total;
}

ChannelMatrix ChannelMatrix::rows_subset(std::span<const size_t> rows) const {
    ChannelMatrix out;
    out.model_tag = model_tag;
    out.entries.resize(static_cast<Eigen::Index>(rows.size()), entries.cols());
    for (size_t i = 0; i < rows.size(); i++) {
        out.entries.row(static_cast<Eigen::Index>(i)) = entries.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

ChannelMatrix generate_channel(std::span<const Vec3> positions, const Direction &receiver, double wavelength,
                               const ChannelModel &model, uint64_t seed) {
    if (positions.empty() || model.receive_dims < 1) {
        throw InvalidArgument("channel needs at least one UAS and one receive dimension");
    }
    double kf = std::pow(10.0, model.rician_k_db / 10.0);
    double los_scale = std::sqrt(kf / (kf + 1.0));
    double nlos_scale = std::sqrt(1.0 / (kf + 1.0));
    double k = kTwoPi / wavelength;
    Vec3 u = unit_vector(receiver);
    NormalSource normal(seed);
    ChannelMatrix h;
    h.model_tag = "rician-k" + std::to_string(model.rician_k_db) + "dB";
    auto rows = static_cast<Eigen::Index>(positions.size());
    auto cols = static_cast<Eigen::Index>(model.receive_dims);
    h.entries.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; r++) {
        for (Eigen::Index c = 0; c < cols; c++) {
            double psi = k * dot(positions[static_cast<size_t>(r)], u) + kPi * static_cast<double>(c) * u[2];
            std::complex<double> los = std::polar(1.0, psi);
            double a = normal.next();
            double b = normal.next();
            std::complex<double> scatter(a * std::sqrt(0.5), b * std::sqrt(0.5));
            h.entries(r, c) = los_scale * los + nlos_scale * scatter;
        }
    }
    return h;
}

Eigen::MatrixXcd mrt_weights(const ChannelMatrix &h) {
    double fro = h.entries.norm();
    if (fro == 0.0) {
        throw ZeroChannel("channel submatrix has zero norm");
    }
    if (!std::isfinite(fro)) {
        throw InvalidArgument("channel submatrix has non-finite entries");
    }
    return h.entries.adjoint() / fro;
}

double sinr(const ChannelMatrix &h, const Eigen::MatrixXcd &w, double noise_power, double interference_power) {
    if (!(noise_power > 0.0)) {
        throw InvalidArgument("noise power must be positive");
    }
    if (h.entries.cols() != w.rows()) {
        throw InvalidArgument("weight dimensions do not match the channel");
    }
    return (h.entries * w).squaredNorm() / (noise_power + interference_power);
}

PatternDivergence pattern_divergence(const BeamPatternGrid &ideal, const BeamPatternGrid &achieved,
                                     size_t deepest_nulls) {
    require_same_samples(ideal, achieved);
    auto argmax = [](const BeamPatternGrid &g) {
        return static_cast<size_t>(std::max_element(g.magnitudes.begin(), g.magnitudes.end()) - g.magnitudes.begin());
    };
    PatternDivergence out;
    out.main_lobe_divergence =
        angular_distance_deg(direction_at(ideal, argmax(ideal)), direction_at(achieved, argmax(achieved)));

    std::vector<size_t> ideal_minima = local_minima(ideal);
    std::stable_sort(ideal_minima.begin(), ideal_minima.end(),
                     [&](size_t a, size_t b) { return ideal.magnitudes[a] < ideal.magnitudes[b]; });
    // The [-pi, pi]^2 domain covers the sphere twice; keep distinct directions only.
    std::vector<Direction> nulls;
    for (size_t idx : ideal_minima) {
        if (nulls.size() >= deepest_nulls) {
            break;
        }
        Direction d = direction_at(ideal, idx);
        bool duplicate = std::any_of(nulls.begin(), nulls.end(),
                                     [&](const Direction &n) { return angular_distance_deg(n, d) < 1e-6; });
        if (!duplicate) {
            nulls.push_back(d);
        }
    }
    std::vector<size_t> achieved_minima = local_minima(achieved);
    if (nulls.empty() || achieved_minima.empty()) {
        return out;
    }
    double total = 0.0;
    for (const auto &n : nulls) {
        double best = 180.0;
        for (size_t idx : achieved_minima) {
            best = std::min(best, angular_distance_deg(n, direction_at(achieved, idx)));
        }
        total += best;
    }
    out.null_divergence = total / static_cast<double>(nulls.size());
    return out;
}

void write_pattern_csv(std::ostream &out, const BeamPatternGrid &grid) {
    out << "theta,phi,magnitude\n";
    char buf[96];
    for (size_t i = 0; i < grid.rows(); i++) {
        for (size_t j = 0; j < grid.cols(); j++) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", grid.theta_samples[i], grid.phi_samples[j],
                          grid.at(i, j));
            out << buf;
        }
    }
}

}  // namespace qsub
