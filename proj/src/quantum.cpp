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

#include "qsub/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "qsub/errors.hpp"

namespace qsub {

namespace {

double unitarity_defect(const Eigen::MatrixXcd &u) {
    Eigen::MatrixXcd d = u * u.adjoint() - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

void check_register(unsigned num_qubits, unsigned max_qubits) {
    if (num_qubits < 1) {
        throw InvalidArgument("register needs at least one qubit");
    }
    if (num_qubits > max_qubits || num_qubits > 62) {
        throw RegisterTooLarge("register of " + std::to_string(num_qubits) + " qubits exceeds the limit of " +
                               std::to_string(max_qubits));
    }
}

}  // namespace

bool SingleQubitGate::is_unitary(double tolerance) const {
    return qsub::is_unitary(Eigen::MatrixXcd(m), tolerance);
}

bool is_unitary(const Eigen::MatrixXcd &u, double tolerance) {
    if (u.rows() != u.cols() || u.rows() == 0 || !u.allFinite()) {
        return false;
    }
    return unitarity_defect(u) <= tolerance;
}

SingleQubitGate q_psg(double p, double a, double b, double c, double d) {
    for (double v : {p, a, b, c, d}) {
        if (!std::isfinite(v)) {
            throw InvalidArgument("gate parameters must be finite");
        }
    }
    if (p < 0.0 || p > 1.0) {
        throw InvalidArgument("p must lie in [0, 1]");
    }
    double sp = std::sqrt(p);
    double sq = std::sqrt(1.0 - p);
    SingleQubitGate g;
    g.m << a * sp, b * sq, c * sq, d * sp;
    if (!g.is_unitary()) {
        throw NotUnitary("Q_PSG parameters do not give a unitary matrix");
    }
    return g;
}

SingleQubitGate rotation_y(double phi) {
    SingleQubitGate g;
    double c = std::cos(phi / 2.0);
    double s = std::sin(phi / 2.0);
    g.m << c, -s, s, c;
    return g;
}

SingleQubitGate rotation_z(double phi) {
    SingleQubitGate g;
    g.m << std::polar(1.0, -phi / 2.0), 0.0, 0.0, std::polar(1.0, phi / 2.0);
    return g;
}

SingleQubitGate hadamard() { return q_psg(0.5, 1.0, 1.0, 1.0, -1.0); }

SingleQubitGate pauli_x() {
    SingleQubitGate g;
    g.m << 0.0, 1.0, 1.0, 0.0;
    return g;
}

StateVector::StateVector(unsigned num_qubits, unsigned max_qubits) {
    check_register(num_qubits, max_qubits);
    num_qubits_ = num_qubits;
    amps_.assign(size_t{1} << num_qubits, Complex(0.0, 0.0));
    amps_[0] = 1.0;
}

StateVector StateVector::basis(unsigned num_qubits, uint64_t index) {
    StateVector psi(num_qubits);
    if (index >= psi.size()) {
        throw IndexOutOfRange("basis index out of range");
    }
    psi.amps_[0] = 0.0;
    psi.amps_[index] = 1.0;
    return psi;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    size_t n = amplitudes.size();
    if (n < 2 || (n & (n - 1)) != 0) {
        throw InvalidArgument("amplitude count must be a power of two");
    }
    StateVector psi;
    psi.amps_ = std::move(amplitudes);
    psi.num_qubits_ = 0;
    while ((size_t{1} << psi.num_qubits_) < n) {
        psi.num_qubits_++;
    }
    if (std::abs(psi.norm_squared() - 1.0) > 1e-10) {
        throw InvalidArgument("amplitudes are not normalized");
    }
    return psi;
}

double StateVector::norm_squared() const {
    double s = 0.0;
    for (const auto &a : amps_) {
        s += std::norm(a);
    }
    return s;
}

std::vector<double> StateVector::probabilities() const {
    std::vector<double> p(amps_.size());
    for (size_t i = 0; i < amps_.size(); i++) {
        p[i] = std::norm(amps_[i]);
    }
    return p;
}

void StateVector::apply_gate(const SingleQubitGate &gate, unsigned qubit) {
    if (qubit >= num_qubits_) {
        throw IndexOutOfRange("qubit index out of range");
    }
    size_t bit = size_t{1} << qubit;
    Complex m00 = gate.m(0, 0), m01 = gate.m(0, 1), m10 = gate.m(1, 0), m11 = gate.m(1, 1);
    for (size_t i = 0; i < amps_.size(); i++) {
        if (i & bit) {
            continue;
        }
        Complex a = amps_[i];
        Complex b = amps_[i | bit];
        amps_[i] = m00 * a + m01 * b;
        amps_[i | bit] = m10 * a + m11 * b;
    }
}

unsigned qubits_for(uint64_t states) {
    unsigned n = 1;
    while (n < 63 && (uint64_t{1} << n) < states) {
        n++;
    }
    return n;
}

StateVector uniform_superposition(unsigned num_qubits, unsigned max_qubits) {
    StateVector psi(num_qubits, max_qubits);
    SingleQubitGate h = hadamard();
    for (unsigned q = 0; q < num_qubits; q++) {
        psi.apply_gate(h, q);
    }
    return psi;
}

StateVector uniform_over(uint64_t active_states, unsigned max_qubits) {
    if (active_states < 1) {
        throw InvalidArgument("need at least one active state");
    }
    StateVector psi(qubits_for(active_states), max_qubits);
    double a = 1.0 / std::sqrt(static_cast<double>(active_states));
    for (uint64_t i = 0; i < psi.size(); i++) {
        psi[i] = i < active_states ? Complex(a, 0.0) : Complex(0.0, 0.0);
    }
    return psi;
}

OracleSpec::OracleSpec(uint64_t num_states, std::vector<uint64_t> marked)
    : num_states_(num_states), marked_(std::move(marked)) {
    std::sort(marked_.begin(), marked_.end());
    marked_.erase(std::unique(marked_.begin(), marked_.end()), marked_.end());
    if (num_states_ < 1 || marked_.empty()) {
        throw InvalidArgument("oracle needs at least one state and one marked index");
    }
    if (marked_.back() >= num_states_) {
        throw IndexOutOfRange("marked index beyond the search space");
    }
}

bool OracleSpec::is_marked(uint64_t index) const {
    return std::binary_search(marked_.begin(), marked_.end(), index);
}

void apply_oracle(StateVector &psi, const OracleSpec &oracle) {
    if (oracle.num_states() > psi.size()) {
        throw IndexOutOfRange("oracle search space exceeds the register");
    }
    for (uint64_t i : oracle.marked()) {
        psi[i] = -psi[i];
    }
}

void diffusion(StateVector &psi, uint64_t active_states) {
    if (active_states > psi.size()) {
        throw IndexOutOfRange("active states exceed the register");
    }
    if (active_states == 0) {
        return;
    }
    Complex sum(0.0, 0.0);
    for (uint64_t i = 0; i < active_states; i++) {
        sum += psi[i];
    }
    Complex twice_mean = 2.0 * sum / static_cast<double>(active_states);
    for (uint64_t i = 0; i < active_states; i++) {
        psi[i] = twice_mean - psi[i];
    }
}

void grover_iterate(StateVector &psi, const OracleSpec &oracle, size_t iterations) {
    for (size_t k = 0; k < iterations; k++) {
        apply_oracle(psi, oracle);
        diffusion(psi, oracle.num_states());
    }
}

double marked_probability(const StateVector &psi, const OracleSpec &oracle) {
    double p = 0.0;
    for (uint64_t i : oracle.marked()) {
        if (i < psi.size()) {
            p += std::norm(psi[i]);
        }
    }
    return p;
}

double grover_success_probability(uint64_t num_states, uint64_t marked, size_t iterations) {
    double theta = std::asin(std::sqrt(static_cast<double>(marked) / static_cast<double>(num_states)));
    double s = std::sin((2.0 * static_cast<double>(iterations) + 1.0) * theta);
    return s * s;
}

BornSampler::BornSampler(std::span<const double> probabilities) {
    if (probabilities.empty()) {
        throw InvalidArgument("empty probability table");
    }
    cdf_.resize(probabilities.size());
    double running = 0.0;
    for (size_t i = 0; i < probabilities.size(); i++) {
        running += probabilities[i];
        cdf_[i] = running;
    }
    if (!(running > 0.0)) {
        throw InvalidArgument("probability table has no mass");
    }
}

uint64_t BornSampler::sample(Rng &rng) const {
    double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) {
        --it;
    }
    return static_cast<uint64_t>(it - cdf_.begin());
}

uint64_t measure(const StateVector &psi, uint64_t seed) {
    std::vector<double> p = psi.probabilities();
    Rng rng(seed);
    return BornSampler(p).sample(rng);
}

TwoLevelGrover::TwoLevelGrover(const OracleSpec &oracle) : oracle_(&oracle) {
    double a = 1.0 / std::sqrt(static_cast<double>(oracle.num_states()));
    marked_amp_ = a;
    unmarked_amp_ = a;
}

void TwoLevelGrover::iterate(size_t iterations) {
    double s = static_cast<double>(oracle_->num_states());
    double m = static_cast<double>(oracle_->marked_count());
    for (size_t k = 0; k < iterations; k++) {
        marked_amp_ = -marked_amp_;
        double twice_mean = 2.0 * (m * marked_amp_ + (s - m) * unmarked_amp_) / s;
        marked_amp_ = twice_mean - marked_amp_;
        unmarked_amp_ = twice_mean - unmarked_amp_;
    }
}

double TwoLevelGrover::marked_probability() const {
    return static_cast<double>(oracle_->marked_count()) * marked_amp_ * marked_amp_;
}

double TwoLevelGrover::probability_of(uint64_t index) const {
    if (index >= oracle_->num_states()) {
        return 0.0;
    }
    return oracle_->is_marked(index) ? marked_amp_ * marked_amp_ : unmarked_amp_ * unmarked_amp_;
}

uint64_t TwoLevelGrover::sample(Rng &rng) const {
    const auto &marked = oracle_->marked();
    double pm = marked_amp_ * marked_amp_;
    double pu = unmarked_amp_ * unmarked_amp_;
    uint64_t s = oracle_->num_states();
    // Mass of indices [0, x).
    auto cumulative = [&](uint64_t x) {
        auto below = static_cast<double>(std::lower_bound(marked.begin(), marked.end(), x) - marked.begin());
        return pu * static_cast<double>(x) + (pm - pu) * below;
    };
    double u = uniform01(rng) * cumulative(s);
    uint64_t lo = 0;
    uint64_t hi = s - 1;
    while (lo < hi) {
        uint64_t mid = lo + (hi - lo) / 2;
        if (cumulative(mid + 1) > u) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

std::vector<double> ancilla_grover_probabilities(const OracleSpec &oracle, size_t iterations, unsigned max_qubits) {
    unsigned n = qubits_for(oracle.num_states());
    StateVector psi(n + 1, max_qubits);
    uint64_t half = uint64_t{1} << n;
    uint64_t s = oracle.num_states();
    // Index register uniform over the active states, ancilla in H X |0> = |->.
    double a = 1.0 / std::sqrt(static_cast<double>(s));
    SingleQubitGate minus = SingleQubitGate{hadamard().m * pauli_x().m};
    for (uint64_t i = 0; i < psi.size(); i++) {
        psi[i] = 0.0;
    }
    for (uint64_t i = 0; i < s; i++) {
        psi[i] = a * minus.m(0, 0);
        psi[i + half] = a * minus.m(1, 0);
    }
    for (size_t k = 0; k < iterations; k++) {
        for (uint64_t i : oracle.marked()) {
            std::swap(psi[i], psi[i + half]);
        }
        for (uint64_t anc = 0; anc < 2; anc++) {
            Complex sum(0.0, 0.0);
            for (uint64_t i = 0; i < s; i++) {
                sum += psi[i + anc * half];
            }
            Complex twice_mean = 2.0 * sum / static_cast<double>(s);
            for (uint64_t i = 0; i < s; i++) {
                psi[i + anc * half] = twice_mean - psi[i + anc * half];
            }
        }
    }
    std::vector<double> marginal(half, 0.0);
    for (uint64_t i = 0; i < half; i++) {
        marginal[i] = std::norm(psi[i]) + std::norm(psi[i + half]);
    }
    return marginal;
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() == 0) {
        throw InvalidArgument("density matrix must be square and nonempty");
    }
}

DensityMatrix DensityMatrix::from_state(const StateVector &psi) {
    Eigen::Map<const Eigen::VectorXcd> v(psi.amplitudes().data(), static_cast<Eigen::Index>(psi.size()));
    return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::from_ensemble(std::span<const double> weights, std::span<const StateVector> states) {
    if (weights.size() != states.size() || states.empty()) {
        throw InvalidArgument("ensemble needs one weight per state");
    }
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(states[0].size()),
                                                  static_cast<Eigen::Index>(states[0].size()));
    for (size_t j = 0; j < states.size(); j++) {
        if (states[j].size() != states[0].size() || weights[j] < 0.0) {
            throw InvalidArgument("ensemble states must share a size and weights be nonnegative");
        }
        rho += weights[j] * from_state(states[j]).matrix();
    }
    return DensityMatrix(rho);
}

bool DensityMatrix::is_valid(double tolerance, double eigen_floor) const {
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tolerance) {
        return false;
    }
    if (std::abs(rho_.trace() - Complex(1.0, 0.0)) > tolerance) {
        return false;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff() >= eigen_floor;
}

DensityMatrix density_evolve(const DensityMatrix &rho, const Eigen::MatrixXcd &u) {
    if (u.rows() != rho.matrix().rows() || !is_unitary(u)) {
        throw NotUnitary("evolution operator is not a unitary of matching size");
    }
    return DensityMatrix(u * rho.matrix() * u.adjoint());
}

Eigen::MatrixXcd embed_gate(const SingleQubitGate &gate, unsigned qubit, unsigned num_qubits) {
    check_register(num_qubits, 12);
    if (qubit >= num_qubits) {
        throw IndexOutOfRange("qubit index out of range");
    }
    auto dim = static_cast<Eigen::Index>(size_t{1} << num_qubits);
    Eigen::Index bit = Eigen::Index{1} << qubit;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; i++) {
        for (Eigen::Index j = 0; j < dim; j++) {
            if ((i & ~bit) == (j & ~bit)) {
                out(i, j) = gate.m((i & bit) ? 1 : 0, (j & bit) ? 1 : 0);
            }
        }
    }
    return out;
}

void write_state_csv(std::ostream &out, const StateVector &psi) {
    out << "index,real,imag,probability\n";
    char buf[128];
    for (size_t i = 0; i < psi.size(); i++) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i, psi[i].real(), psi[i].imag(),
                      std::norm(psi[i]));
        out << buf;
    }
}

}  // namespace qsub
