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

#ifndef QSUB_GEOMETRY_HPP
#define QSUB_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace qsub {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

inline double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3 &a, const Vec3 &b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3 &a, const Vec3 &b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3 &a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3 &a, const Vec3 &b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3 &a);
Vec3 mean_point(std::span<const Vec3> points);

/// Wraps an angle into (-pi, pi].
double wrap_to_pi(double angle);
/// Wraps an angle into [0, 2pi).
double wrap_to_two_pi(double angle);

struct SphericalCoord {
    double r = 0.0;
    double theta = 0.0;  // colatitude from +Z, [0, pi]
    double phi = 0.0;    // longitude, [0, 2pi)

    /// Reflects theta back into [0, pi] (adjusting phi) and wraps phi.
    SphericalCoord normalized() const;
};

Vec3 spherical_to_cartesian(const SphericalCoord &p);
/// Inverse of spherical_to_cartesian. The origin maps to (0, 0, 0).
SphericalCoord cartesian_to_spherical(const Vec3 &v);

struct Orientation {
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;

    Orientation normalized() const;
};

struct UasState {
    SphericalCoord position;
    Vec3 cartesian{0.0, 0.0, 0.0};
    Orientation orientation;
    double power = 1.0;
    double weight = 1.0;
    double phase = 0.0;

    static UasState at(const Vec3 &cartesian);
    static UasState at(const SphericalCoord &position);
    /// Moves the state, keeping both coordinate caches consistent.
    void move_to(const Vec3 &cartesian);
    void validate() const;
};

std::vector<Vec3> positions_of(std::span<const UasState> states);

struct SwarmConfiguration {
    size_t total_uas = 8;
    size_t active_uas = 4;
    double ball_radius = 0.1;
    std::optional<double> min_separation;  // defaults to ball_radius
    double wavelength = 299792458.0 / 3.5e9;
    size_t max_placement_attempts = 1000000;

    double separation() const { return min_separation.value_or(ball_radius); }
    void validate() const;
};

/// Uniform rejection sampling inside the ball with restarts on dead ends.
std::vector<UasState> sample_swarm(const SwarmConfiguration &config, uint64_t seed);

struct HoverPerturbation {
    Vec3 delta_position{0.0, 0.0, 0.0};
    double delta_theta = 0.0;
    double delta_phi = 0.0;
    double delta_phase = 0.0;
};

/// Standard deviations of the hover jitter. Positions in meters, the rest in radians.
struct HoverSigmas {
    double position = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    double phase = 0.0;
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;

    void validate() const;
};

struct HoverResult {
    std::vector<UasState> states;
    std::vector<HoverPerturbation> perturbations;
};

/// Draws independent Gaussian jitter per UAS. Attitude jitter rotates the
/// element about the swarm centroid and is folded into delta_position.
HoverResult apply_hover(std::span<const UasState> states, const HoverSigmas &sigmas, uint64_t seed);

struct GridParameters {
    double radial_resolution = 0.25;
    double angular_resolution = kPi / 4.0;
    double radial_extent = 1.0;
    bool include_center = false;

    void validate() const;
};

inline constexpr uint64_t kDefaultRegisterLimit = uint64_t{1} << 20;

class StateGrid {
   public:
    StateGrid() = default;
    static StateGrid build(const GridParameters &params, size_t num_uas,
                           uint64_t register_limit = kDefaultRegisterLimit);

    const GridParameters &parameters() const { return params_; }
    size_t states_per_uas() const { return cells_.size(); }
    size_t num_uas() const { return num_uas_; }
    uint64_t joint_states() const { return joint_states_; }
    unsigned register_qubits() const;

    std::span<const SphericalCoord> cells() const { return cells_; }
    std::span<const Vec3> cell_offsets() const { return offsets_; }

    /// Mixed radix with UAS 0 as the least significant digit.
    std::vector<size_t> decode(uint64_t index) const;
    uint64_t encode(std::span<const size_t> choice) const;

   private:
    GridParameters params_;
    size_t num_uas_ = 0;
    uint64_t joint_states_ = 0;
    std::vector<SphericalCoord> cells_;
    std::vector<Vec3> offsets_;
};

StateGrid build_state_grid(double radial_resolution, double angular_resolution, double radial_extent,
                           size_t num_uas, uint64_t register_limit = kDefaultRegisterLimit);

/// Number of cells a parameter set produces, without building the grid.
size_t count_grid_cells(const GridParameters &params);

/// Drops outer shells, then doubles the angular step, until the joint space fits.
GridParameters trim_to_register(GridParameters params, size_t num_uas,
                                uint64_t register_limit = kDefaultRegisterLimit);

struct AoaObservation {
    std::vector<SphericalCoord> observed;
    double sigma_aoa = 0.0;  // degrees
    size_t clamp_count = 0;

    std::vector<Vec3> cartesian() const;
};

AoaObservation observe_with_aoa_error(std::span<const UasState> truth, double sigma_aoa_deg, uint64_t seed);
AoaObservation observe_with_aoa_error(std::span<const Vec3> truth, double sigma_aoa_deg, uint64_t seed);

double euclidean_error(const Vec3 &predicted, const Vec3 &actual);
double euclidean_error(std::span<const Vec3> predicted, std::span<const Vec3> actual);

}  // namespace qsub

#endif
