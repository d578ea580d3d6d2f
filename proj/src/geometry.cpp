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

#include "qsub/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsub/errors.hpp"
#include "qsub/random.hpp"

namespace qsub {

namespace {

constexpr double kAngleSlack = 1e-9;

bool is_pole(double theta) { return theta < kAngleSlack || std::abs(theta - kPi) < kAngleSlack; }

size_t radial_shells(const GridParameters &p) {
    return static_cast<size_t>(std::floor(p.radial_extent / p.radial_resolution + kAngleSlack));
}

std::vector<SphericalCoord> enumerate_cells(const GridParameters &p) {
    std::vector<SphericalCoord> cells;
    if (p.include_center) {
        cells.push_back({0.0, 0.0, 0.0});
    }
    size_t shells = radial_shells(p);
    for (size_t i = 1; i <= shells; i++) {
        double r = p.radial_resolution * static_cast<double>(i);
        for (size_t j = 0;; j++) {
            double theta = p.angular_resolution * static_cast<double>(j);
            if (theta > kPi + kAngleSlack) {
                break;
            }
            theta = std::min(theta, kPi);
            if (is_pole(theta)) {
                cells.push_back({r, theta, 0.0});
                continue;
            }
            for (size_t l = 0;; l++) {
                double phi = p.angular_resolution * static_cast<double>(l);
                if (phi > kTwoPi - kAngleSlack) {
                    break;
                }
                cells.push_back({r, theta, phi});
            }
        }
    }
    return cells;
}

// Returns 0 when base^exp exceeds limit.
uint64_t checked_power(uint64_t base, size_t exp, uint64_t limit) {
    uint64_t result = 1;
    for (size_t i = 0; i < exp; i++) {
        if (base != 0 && result > limit / base) {
            return 0;
        }
        result *= base;
    }
    return result <= limit ? result : 0;
}

// Rotation by yaw (z), pitch (y), roll (x), applied in that order.
Vec3 rotate(const Orientation &o, const Vec3 &v) {
    double cy = std::cos(o.yaw), sy = std::sin(o.yaw);
    double cp = std::cos(o.pitch), sp = std::sin(o.pitch);
    double cr = std::cos(o.roll), sr = std::sin(o.roll);
    Vec3 a{v[0], cr * v[1] - sr * v[2], sr * v[1] + cr * v[2]};
    Vec3 b{cp * a[0] + sp * a[2], a[1], -sp * a[0] + cp * a[2]};
    return {cy * b[0] - sy * b[1], sy * b[0] + cy * b[1], b[2]};
}

}  // namespace

double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }

Vec3 mean_point(std::span<const Vec3> points) {
    Vec3 sum{0.0, 0.0, 0.0};
    for (const auto &p : points) {
        sum = sum + p;
    }
    if (points.empty()) {
        return sum;
    }
    return (1.0 / static_cast<double>(points.size())) * sum;
}

double wrap_to_pi(double angle) {
    double w = std::remainder(angle, kTwoPi);
    if (w <= -kPi) {
        w += kTwoPi;
    }
    return w;
}

double wrap_to_two_pi(double angle) {
    double w = std::fmod(angle, kTwoPi);
    if (w < 0.0) {
        w += kTwoPi;
    }
    if (w >= kTwoPi) {
        w = 0.0;
    }
    return w;
}

SphericalCoord SphericalCoord::normalized() const {
    double t = wrap_to_pi(theta);
    double p = phi;
    if (t < 0.0) {
        t = -t;
        p += kPi;
    }
    return {r, t, wrap_to_two_pi(p)};
}

Vec3 spherical_to_cartesian(const SphericalCoord &p) {
    double st = std::sin(p.theta);
    return {p.r * st * std::cos(p.phi), p.r * st * std::sin(p.phi), p.r * std::cos(p.theta)};
}

SphericalCoord cartesian_to_spherical(const Vec3 &v) {
    double r = norm(v);
    if (r == 0.0) {
        return {0.0, 0.0, 0.0};
    }
    double theta = std::acos(std::clamp(v[2] / r, -1.0, 1.0));
    double phi = wrap_to_two_pi(std::atan2(v[1], v[0]));
    return {r, theta, phi};
}

Orientation Orientation::normalized() const { return {wrap_to_pi(yaw), wrap_to_pi(pitch), wrap_to_pi(roll)}; }

UasState UasState::at(const Vec3 &cartesian) {
    UasState s;
    s.move_to(cartesian);
    return s;
}

UasState UasState::at(const SphericalCoord &position) {
    UasState s;
    s.position = position.normalized();
    s.cartesian = spherical_to_cartesian(s.position);
    return s;
}

void UasState::move_to(const Vec3 &c) {
    cartesian = c;
    position = cartesian_to_spherical(c);
}

void UasState::validate() const {
    if (!(power > 0.0)) {
        throw InvalidArgument("UAS power must be positive");
    }
    if (!(weight >= 0.0)) {
        throw InvalidArgument("UAS weight must be nonnegative");
    }
}

std::vector<Vec3> positions_of(std::span<const UasState> states) {
    std::vector<Vec3> out;
    out.reserve(states.size());
    for (const auto &s : states) {
        out.push_back(s.cartesian);
    }
    return out;
}

void SwarmConfiguration::validate() const {
    if (active_uas < 1 || active_uas > total_uas) {
        throw InvalidArgument("need 1 <= active_uas <= total_uas");
    }
    if (!(ball_radius > 0.0)) {
        throw InvalidArgument("ball_radius must be positive");
    }
    if (!(wavelength > 0.0)) {
        throw InvalidArgument("wavelength must be positive");
    }
    if (!(separation() >= 0.0)) {
        throw InvalidArgument("min_separation must be nonnegative");
    }
}

std::vector<UasState> sample_swarm(const SwarmConfiguration &config, uint64_t seed) {
    config.validate();
    double sep = config.separation();
    if (config.total_uas > 1 && sep > 2.0 * config.ball_radius) {
        throw PlacementInfeasible("min_separation exceeds the ball diameter");
    }
    constexpr size_t kDeadEnd = 5000;
    Rng rng(seed);
    double radius = config.ball_radius;
    std::vector<Vec3> pts;
    size_t attempts = 0;
    size_t since_progress = 0;
    while (pts.size() < config.total_uas) {
        if (attempts++ >= config.max_placement_attempts) {
            throw PlacementInfeasible("placement attempts exhausted after " + std::to_string(attempts - 1));
        }
        Vec3 v{(2.0 * uniform01(rng) - 1.0) * radius, (2.0 * uniform01(rng) - 1.0) * radius,
               (2.0 * uniform01(rng) - 1.0) * radius};
        bool ok = norm(v) <= radius;
        for (size_t i = 0; ok && i < pts.size(); i++) {
            ok = norm(v - pts[i]) >= sep;
        }
        if (ok) {
            pts.push_back(v);
            since_progress = 0;
        } else if (++since_progress >= kDeadEnd) {
            pts.clear();
            since_progress = 0;
        }
    }
    std::vector<UasState> out;
    out.reserve(pts.size());
    for (const auto &p : pts) {
        out.push_back(UasState::at(p));
    }
    return out;
}

void HoverSigmas::validate() const {
    for (double s : {position, theta, phi, phase, yaw, pitch, roll}) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw InvalidArgument("hover sigmas must be finite and nonnegative");
        }
    }
}

HoverResult apply_hover(std::span<const UasState> states, const HoverSigmas &sigmas, uint64_t seed) {
    sigmas.validate();
    std::vector<Vec3> pos = positions_of(states);
    Vec3 center = mean_point(pos);
    NormalSource normal(seed);
    HoverResult out;
    out.states.reserve(states.size());
    out.perturbations.reserve(states.size());
    for (const auto &s : states) {
        // Nine draws per UAS whatever the sigmas, so streams stay aligned.
        double z[9];
        for (double &v : z) {
            v = normal.next();
        }
        HoverPerturbation d;
        d.delta_position = {sigmas.position * z[0], sigmas.position * z[1], sigmas.position * z[2]};
        d.delta_theta = sigmas.theta * z[3];
        d.delta_phi = sigmas.phi * z[4];
        d.delta_phase = sigmas.phase * z[5];
        Orientation jitter{sigmas.yaw * z[6], sigmas.pitch * z[7], sigmas.roll * z[8]};
        if (jitter.yaw != 0.0 || jitter.pitch != 0.0 || jitter.roll != 0.0) {
            Vec3 arm = s.cartesian - center;
            d.delta_position = d.delta_position + (rotate(jitter, arm) - arm);
        }
        UasState moved = s;
        moved.move_to(s.cartesian + d.delta_position);
        moved.phase = s.phase + d.delta_phase;
        moved.orientation =
            Orientation{s.orientation.yaw + jitter.yaw, s.orientation.pitch + jitter.pitch,
                        s.orientation.roll + jitter.roll}
                .normalized();
        out.states.push_back(moved);
        out.perturbations.push_back(d);
    }
    return out;
}

void GridParameters::validate() const {
    if (!(radial_resolution > 0.0) || !(angular_resolution > 0.0) || !(radial_extent > 0.0)) {
        throw InvalidArgument("grid resolutions and extent must be positive");
    }
}

size_t count_grid_cells(const GridParameters &params) {
    params.validate();
    return enumerate_cells(params).size();
}

StateGrid StateGrid::build(const GridParameters &params, size_t num_uas, uint64_t register_limit) {
    params.validate();
    if (num_uas < 1) {
        throw InvalidArgument("num_uas must be at least 1");
    }
    StateGrid g;
    g.params_ = params;
    g.num_uas_ = num_uas;
    g.cells_ = enumerate_cells(params);
    if (g.cells_.empty()) {
        throw InvalidArgument("grid parameters produce no cells");
    }
    g.joint_states_ = checked_power(g.cells_.size(), num_uas, register_limit);
    if (g.joint_states_ == 0) {
        throw GridTooLarge(std::to_string(g.cells_.size()) + "^" + std::to_string(num_uas) +
                           " joint states exceed the register limit " + std::to_string(register_limit));
    }
    for (const auto &c : g.cells_) {
        g.offsets_.push_back(spherical_to_cartesian(c));
    }
    return g;
}

unsigned StateGrid::register_qubits() const {
    unsigned n = 1;
    while ((uint64_t{1} << n) < joint_states_) {
        n++;
    }
    return n;
}

std::vector<size_t> StateGrid::decode(uint64_t index) const {
    if (index >= joint_states_) {
        throw IndexOutOfRange("grid index " + std::to_string(index) + " out of range");
    }
    std::vector<size_t> choice(num_uas_);
    uint64_t k = cells_.size();
    for (size_t j = 0; j < num_uas_; j++) {
        choice[j] = static_cast<size_t>(index % k);
        index /= k;
    }
    return choice;
}

uint64_t StateGrid::encode(std::span<const size_t> choice) const {
    if (choice.size() != num_uas_) {
        throw InvalidArgument("choice length does not match num_uas");
    }
    uint64_t k = cells_.size();
    uint64_t index = 0;
    for (size_t j = num_uas_; j-- > 0;) {
        if (choice[j] >= k) {
            throw IndexOutOfRange("cell choice out of range");
        }
        index = index * k + choice[j];
    }
    return index;
}

StateGrid build_state_grid(double radial_resolution, double angular_resolution, double radial_extent,
                           size_t num_uas, uint64_t register_limit) {
    GridParameters p;
    p.radial_resolution = radial_resolution;
    p.angular_resolution = angular_resolution;
    p.radial_extent = radial_extent;
    return StateGrid::build(p, num_uas, register_limit);
}

GridParameters trim_to_register(GridParameters params, size_t num_uas, uint64_t register_limit) {
    params.validate();
    while (checked_power(count_grid_cells(params), num_uas, register_limit) == 0) {
        size_t shells = radial_shells(params);
        if (shells > 1) {
            params.radial_extent = params.radial_resolution * static_cast<double>(shells - 1);
        } else if (params.angular_resolution < kPi - kAngleSlack) {
            params.angular_resolution = std::min(2.0 * params.angular_resolution, kPi);
        } else {
            throw GridTooLarge("grid cannot be trimmed to fit " + std::to_string(num_uas) + " UASs");
        }
    }
    return params;
}

std::vector<Vec3> AoaObservation::cartesian() const {
    std::vector<Vec3> out;
    out.reserve(observed.size());
    for (const auto &o : observed) {
        out.push_back(spherical_to_cartesian(o));
    }
    return out;
}

AoaObservation observe_with_aoa_error(std::span<const Vec3> truth, double sigma_aoa_deg, uint64_t seed) {
    if (!(sigma_aoa_deg >= 0.0)) {
        throw InvalidArgument("sigma_aoa must be nonnegative");
    }
    double sigma = deg_to_rad(sigma_aoa_deg);
    NormalSource normal(seed);
    AoaObservation obs;
    obs.sigma_aoa = sigma_aoa_deg;
    for (const auto &t : truth) {
        SphericalCoord p = cartesian_to_spherical(t);
        double zt = normal.next();
        double zp = normal.next();
        if (sigma == 0.0) {
            obs.observed.push_back(p);
            continue;
        }
        double theta = p.theta + sigma * zt;
        if (theta < 0.0 || theta > kPi) {
            obs.clamp_count++;
            theta = std::clamp(theta, 0.0, kPi);
        }
        obs.observed.push_back({p.r, theta, wrap_to_two_pi(p.phi + sigma * zp)});
    }
    return obs;
}

AoaObservation observe_with_aoa_error(std::span<const UasState> truth, double sigma_aoa_deg, uint64_t seed) {
    std::vector<Vec3> pos = positions_of(truth);
    return observe_with_aoa_error(std::span<const Vec3>(pos), sigma_aoa_deg, seed);
}

double euclidean_error(const Vec3 &predicted, const Vec3 &actual) { return norm(predicted - actual); }

double euclidean_error(std::span<const Vec3> predicted, std::span<const Vec3> actual) {
    if (predicted.size() != actual.size() || predicted.empty()) {
        throw InvalidArgument("position sets must be nonempty and equally sized");
    }
    double sum = 0.0;
    for (size_t i = 0; i < predicted.size(); i++) {
        sum += euclidean_error(predicted[i], actual[i]);
    }
    return sum / static_cast<double>(predicted.size());
}

}  // namespace qsub
