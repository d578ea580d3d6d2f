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

#ifndef QSUB_BEAM_HPP
#define QSUB_BEAM_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qsub/geometry.hpp"

namespace qsub {

/// Elevation and azimuth in the pattern convention, both in [-pi, pi].
struct Direction {
    double theta = 0.0;
    double phi = 0.0;
};

Vec3 unit_vector(const Direction &d);
/// Great-circle angle between two directions, in degrees.
double angular_distance_deg(const Direction &a, const Direction &b);

struct AngularGrid {
    std::vector<double> theta;
    std::vector<double> phi;

    /// Evenly spaced samples over [-pi, pi] with both endpoints.
    static AngularGrid uniform(size_t n_theta, size_t n_phi);
    bool operator==(const AngularGrid &other) const = default;
};

struct BeamPatternGrid {
    std::vector<double> theta_samples;
    std::vector<double> phi_samples;
    std::vector<double> magnitudes;  // row-major [theta][phi]

    size_t rows() const { return theta_samples.size(); }
    size_t cols() const { return phi_samples.size(); }
    double at(size_t i, size_t j) const { return magnitudes[i * phi_samples.size() + j]; }
};

BeamPatternGrid beam_pattern(std::span<const UasState> swarm, const AngularGrid &grid, double wavelength);
BeamPatternGrid distorted_pattern(std::span<const UasState> swarm, std::span<const HoverPerturbation> perturbations,
                                  const AngularGrid &grid, double wavelength);

/// Repeated J evaluations against a fixed reference on one grid, for optimizer
/// inner loops. Agrees with objective_j(reference, beam_pattern(...)).
class PatternEvaluator {
   public:
    PatternEvaluator(const AngularGrid &grid, double wavelength, const BeamPatternGrid &reference);

    double distortion(std::span<const Vec3> positions, std::span<const double> amplitudes,
                      std::span<const double> phases) const;

   private:
    double k_;
    size_t n_theta_;
    size_t n_phi_;
    std::vector<Vec3> dirs_;
    std::vector<double> weights_;  // trapezoid weight of each sample
    std::vector<double> reference_;
    mutable std::vector<double> re_;
    mutable std::vector<double> im_;
};

/// Quarter of the trapezoidal integral of the squared magnitude difference.
double objective_j(const BeamPatternGrid &ideal, const BeamPatternGrid &distorted);

struct ChannelMatrix {
    Eigen::MatrixXcd entries;  // rows: candidate UASs, cols: receive dimensions
    std::string model_tag;

    ChannelMatrix rows_subset(std::span<const size_t> rows) const;
};

struct ChannelModel {
    double rician_k_db = 10.0;
    size_t receive_dims = 1;
};

/// Rician channel: i.i.d. CN(0,1) scatter plus a rank-1 line-of-sight term
/// whose phases follow the element positions toward the receiver.
ChannelMatrix generate_channel(std::span<const Vec3> positions, const Direction &receiver, double wavelength,
                               const ChannelModel &model, uint64_t seed);

/// H^H normalized to unit Frobenius norm. Column k of H^H belongs to row k of H.
Eigen::MatrixXcd mrt_weights(const ChannelMatrix &h);
double sinr(const ChannelMatrix &h, const Eigen::MatrixXcd &w, double noise_power, double interference_power = 0.0);

struct PatternDivergence {
    double main_lobe_divergence = 0.0;  // degrees
    double null_divergence = 0.0;       // degrees
};

PatternDivergence pattern_divergence(const BeamPatternGrid &ideal, const BeamPatternGrid &achieved,
                                     size_t deepest_nulls = 2);

/// Header plus one `theta,phi,magnitude` row per sample, 17 significant digits.
void write_pattern_csv(std::ostream &out, const BeamPatternGrid &grid);

}  // namespace qsub

#endif
