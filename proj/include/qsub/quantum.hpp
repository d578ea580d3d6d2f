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

#ifndef QSUB_QUANTUM_HPP
#define QSUB_QUANTUM_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qsub/random.hpp"

namespace qsub {

using Complex = std::complex<double>;

inline constexpr double kUnitaryTolerance = 1e-10;
inline constexpr unsigned kDefaultMaxQubits = 20;

struct SingleQubitGate {
    Eigen::Matrix2cd m;

    bool is_unitary(double tolerance = kUnitaryTolerance) const;
    SingleQubitGate adjoint() const { return {m.adjoint()}; }
};

/// Position synchronization gate [[a sqrt(p), b sqrt(1-p)], [c sqrt(1-p), d sqrt(p)]].
SingleQubitGate q_psg(double p, double a, double b, double c, double d);
SingleQubitGate rotation_y(double phi);
SingleQubitGate rotation_z(double phi);
SingleQubitGate hadamard();
SingleQubitGate pauli_x();

class StateVector {
   public:
    /// The all-zeros basis state on num_qubits qubits.
    explicit StateVector(unsigned num_qubits, unsigned max_qubits = kDefaultMaxQubits);

    static StateVector basis(unsigned num_qubits, uint64_t index);
    /// Length must be a power of two and the vector normalized within 1e-10.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    unsigned num_qubits() const { return num_qubits_; }
    size_t size() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }
    std::span<Complex> amplitudes() { return amps_; }
    const Complex &operator[](size_t i) const { return amps_[i]; }
    Complex &operator[](size_t i) { return amps_[i]; }

    double norm_squared() const;
    std::vector<double> probabilities() const;
    /// Applies a single-qubit gate; qubit 0 is the least significant index bit.
    void apply_gate(const SingleQubitGate &gate, unsigned qubit);

   private:
    StateVector() = default;

    unsigned num_qubits_ = 0;
    std::vector<Complex> amps_;
};

/// H on every qubit of |0...0>.
StateVector uniform_superposition(unsigned num_qubits, unsigned max_qubits = kDefaultMaxQubits);
/// Equal amplitudes over the first active_states entries, zero padding above.
StateVector uniform_over(uint64_t active_states, unsigned max_qubits = kDefaultMaxQubits);
unsigned qubits_for(uint64_t states);

class OracleSpec {
   public:
    /// Sorts and deduplicates marked; requires 1 <= |marked| and indices < num_states.
    OracleSpec(uint64_t num_states, std::vector<uint64_t> marked);

    uint64_t num_states() const { return num_states_; }
    const std::vector<uint64_t> &marked() const { return marked_; }
    size_t marked_count() const { return marked_.size(); }
    bool is_marked(uint64_t index) const;

   private:
    uint64_t num_states_;
    std::vector<uint64_t> marked_;
};

void apply_oracle(StateVector &psi, const OracleSpec &oracle);
/// a_i -> 2 mean - a_i over the first active_states entries.
void diffusion(StateVector &psi, uint64_t active_states);
void grover_iterate(StateVector &psi, const OracleSpec &oracle, size_t iterations);
double marked_probability(const StateVector &psi, const OracleSpec &oracle);
/// sin^2((2k+1) asin(sqrt(M/S))).
double grover_success_probability(uint64_t num_states, uint64_t marked, size_t iterations);

/// Inverse-CDF Born sampling over a fixed probability table.
class BornSampler {
   public:
    explicit BornSampler(std::span<const double> probabilities);
    uint64_t sample(Rng &rng) const;

   private:
    std::vector<double> cdf_;
};

uint64_t measure(const StateVector &psi, uint64_t seed);

/// Grover dynamics restricted to span{|alpha>, |beta>}: one amplitude shared by
/// every marked state and one by every unmarked active state. Exact for a
/// uniform start, and needs no memory proportional to the search space.
class TwoLevelGrover {
   public:
    explicit TwoLevelGrover(const OracleSpec &oracle);

    void iterate(size_t iterations);
    double marked_amplitude() const { return marked_amp_; }
    double unmarked_amplitude() const { return unmarked_amp_; }
    double marked_probability() const;
    double probability_of(uint64_t index) const;
    /// Same inverse-CDF walk in index order as BornSampler on the dense state.
    uint64_t sample(Rng &rng) const;

   private:
    const OracleSpec *oracle_;
    double marked_amp_;
    double unmarked_amp_;
};

/// Runs Grover with the oracle acting on an explicit |-> ancilla (|s>|q> -> |s>|q xor f(s)>)
/// and returns the marginal index-register probabilities.
std::vector<double> ancilla_grover_probabilities(const OracleSpec &oracle, size_t iterations,
                                                 unsigned max_qubits = kDefaultMaxQubits);

class DensityMatrix {
   public:
    explicit DensityMatrix(Eigen::MatrixXcd rho);
    static DensityMatrix from_state(const StateVector &psi);
    /// Ensemble sum_j p_j |s_j><s_j|.
    static DensityMatrix from_ensemble(std::span<const double> weights, std::span<const StateVector> states);

    const Eigen::MatrixXcd &matrix() const { return rho_; }
    /// Hermitian, unit trace and PSD within the given tolerances.
    bool is_valid(double tolerance = 1e-10, double eigen_floor = -1e-8) const;

   private:
    Eigen::MatrixXcd rho_;
};

bool is_unitary(const Eigen::MatrixXcd &u, double tolerance = kUnitaryTolerance);
DensityMatrix density_evolve(const DensityMatrix &rho, const Eigen::MatrixXcd &u);
/// Dense matrix of a single-qubit gate embedded on one qubit of an n-qubit register.
Eigen::MatrixXcd embed_gate(const SingleQubitGate &gate, unsigned qubit, unsigned num_qubits);

/// `index,real,imag,probability` rows.
void write_state_csv(std::ostream &out, const StateVector &psi);

}  // namespace qsub

#endif
