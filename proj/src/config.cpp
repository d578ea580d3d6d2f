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

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "qsub/errors.hpp"
#include "qsub/harness.hpp"

namespace qsub {

namespace {

void reject_unknown(const YAML::Node &node, const std::string &where, const std::set<std::string> &known) {
    if (!node.IsMap()) {
        throw ConfigError("'" + where + "' must be a mapping");
    }
    for (const auto &kv : node) {
        auto key = kv.first.as<std::string>();
        if (!known.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read(const YAML::Node &node, const char *key, T &out) {
    if (node[key]) {
        out = node[key].as<T>();
    }
}

void read_angle_deg(const YAML::Node &node, const char *key, double &radians) {
    if (node[key]) {
        radians = deg_to_rad(node[key].as<double>());
    }
}

}  // namespace

ExperimentConfig parse_config(const std::string &yaml_text) {
    ExperimentConfig c = ExperimentConfig::defaults();
    try {
        YAML::Node root = YAML::Load(yaml_text);
        if (root.IsNull()) {
            c.validate();
            return c;
        }
        reject_unknown(root, "top level",
                       {"seed", "trials", "workers", "frequency_hz", "sigma_aoa_deg", "n_u", "swarm", "hover", "grid",
                        "channel", "search", "qpll", "metrics", "output"});
        read(root, "seed", c.base_seed);
        read(root, "trials", c.trials);
        read(root, "workers", c.workers);
        read(root, "frequency_hz", c.frequency);
        read(root, "sigma_aoa_deg", c.sigma_aoa_sweep);
        read(root, "n_u", c.n_u_sweep);

        if (auto n = root["swarm"]) {
            reject_unknown(n, "swarm", {"total_uas", "ball_radius_m", "min_separation_m", "max_placement_attempts"});
            read(n, "total_uas", c.scenario.swarm.total_uas);
            read(n, "ball_radius_m", c.scenario.swarm.ball_radius);
            read(n, "max_placement_attempts", c.scenario.swarm.max_placement_attempts);
            if (n["min_separation_m"]) {
                c.scenario.swarm.min_separation = n["min_separation_m"].as<double>();
            }
        }
        if (auto n = root["hover"]) {
            reject_unknown(n, "hover",
                           {"position_m", "theta_rad", "phi_rad", "phase_rad", "yaw_rad", "pitch_rad", "roll_rad"});
            read(n, "position_m", c.scenario.hover.position);
            read(n, "theta_rad", c.scenario.hover.theta);
            read(n, "phi_rad", c.scenario.hover.phi);
            read(n, "phase_rad", c.scenario.hover.phase);
            read(n, "yaw_rad", c.scenario.hover.yaw);
            read(n, "pitch_rad", c.scenario.hover.pitch);
            read(n, "roll_rad", c.scenario.hover.roll);
        }
        if (auto n = root["grid"]) {
            reject_unknown(n, "grid",
                           {"radial_resolution_m", "angular_resolution_deg", "radial_extent_m", "include_center",
                            "register_limit", "trim"});
            read(n, "radial_resolution_m", c.scenario.grid.radial_resolution);
            read_angle_deg(n, "angular_resolution_deg", c.scenario.grid.angular_resolution);
            read(n, "radial_extent_m", c.scenario.grid.radial_extent);
            read(n, "include_center", c.scenario.grid.include_center);
            read(n, "register_limit", c.scenario.register_limit);
            read(n, "trim", c.scenario.trim_grid);
        }
        if (auto n = root["channel"]) {
            reject_unknown(n, "channel",
                           {"rician_k_db", "receive_dims", "noise_power_w", "interference_power_w",
                            "receiver_theta_deg", "receiver_phi_deg", "combination_cap"});
            read(n, "rician_k_db", c.scenario.channel.rician_k_db);
            read(n, "receive_dims", c.scenario.channel.receive_dims);
            read(n, "noise_power_w", c.scenario.noise_power);
            read(n, "interference_power_w", c.scenario.interference_power);
            read_angle_deg(n, "receiver_theta_deg", c.scenario.receiver.theta);
            read_angle_deg(n, "receiver_phi_deg", c.scenario.receiver.phi);
            read(n, "combination_cap", c.scenario.combination_cap);
        }
        if (auto n = root["search"]) {
            reject_unknown(n, "search", {"iteration_mode", "repetitions", "oracle_tolerance_m", "backend"});
            if (n["iteration_mode"]) {
                auto mode = n["iteration_mode"].as<std::string>();
                if (mode == "literal") {
                    c.scenario.search.mode = IterationMode::Literal;
                } else if (mode == "optimal") {
                    c.scenario.search.mode = IterationMode::Optimal;
                } else {
                    throw ConfigError("iteration_mode must be 'literal' or 'optimal'");
                }
            }
            if (n["backend"]) {
                auto b = n["backend"].as<std::string>();
                if (b == "auto") {
                    c.scenario.search.backend = GroverBackend::Auto;
                } else if (b == "dense") {
                    c.scenario.search.backend = GroverBackend::Dense;
                } else if (b == "two_level") {
                    c.scenario.search.backend = GroverBackend::TwoLevel;
                } else {
                    throw ConfigError("backend must be 'auto', 'dense' or 'two_level'");
                }
            }
            read(n, "repetitions", c.scenario.search.repetitions);
            read(n, "oracle_tolerance_m", c.scenario.oracle_tolerance);
        }
        if (auto n = root["qpll"]) {
            reject_unknown(n, "qpll",
                           {"tolerance", "x_tolerance", "max_iterations", "regularization", "refinement_points",
                            "reflection", "expansion", "contraction", "shrink"});
            read(n, "tolerance", c.qpll.options.tolerance);
            read(n, "x_tolerance", c.qpll.options.x_tolerance);
            read(n, "max_iterations", c.qpll.options.max_iterations);
            read(n, "regularization", c.qpll.regularization);
            read(n, "refinement_points", c.qpll.refinement_points);
            read(n, "reflection", c.qpll.options.coefficients.reflection);
            read(n, "expansion", c.qpll.options.coefficients.expansion);
            read(n, "contraction", c.qpll.options.coefficients.contraction);
            read(n, "shrink", c.qpll.options.coefficients.shrink);
        }
        if (auto n = root["metrics"]) {
            reject_unknown(n, "metrics", {"pattern_points", "null_count"});
            read(n, "pattern_points", c.scenario.pattern_points);
            read(n, "null_count", c.null_count);
        }
        if (auto n = root["output"]) {
            reject_unknown(n, "output", {"dir", "record_wall_time", "failure_threshold"});
            read(n, "dir", c.output_dir);
            read(n, "record_wall_time", c.record_wall_time);
            read(n, "failure_threshold", c.failure_threshold);
        }
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot open config file " + path);
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

}  // namespace qsub
