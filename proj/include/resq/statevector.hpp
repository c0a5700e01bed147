#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "resq/circuit.hpp"

namespace resq {

class SimulationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Stochastic noise applied by run_shots. After each single-qubit gate,
// with probability p1 a Pauli drawn uniformly from {I, X, Y, Z} hits the
// target; after each CNOT, with probability p2 one of the 16 two-qubit
// Paulis hits both qubits. Each measured bit then flips with probability
// readout_flip.
struct NoiseModel {
    double p1 = 0.0;
    double p2 = 0.0;
    double readout_flip = 0.0;
    std::uint64_t seed = 0;

    static NoiseModel noiseless(std::uint64_t seed = 0) { return {0.0, 0.0, 0.0, seed}; }
    // Placeholder NISQ-ish magnitudes used when a workflow gives none.
    static NoiseModel defaults(std::uint64_t seed = 0) { return {0.001, 0.01, 0.02, seed}; }

    // Throws std::invalid_argument unless every probability is in [0, 1].
    void validate() const;

    friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

// Dense 2^n amplitude vector. Basis index bit q holds qubit q.
class StateVector {
  public:
    static constexpr std::size_t kMaxQubits = 24;

    explicit StateVector(std::size_t num_qubits);  // |0...0>

    std::size_t num_qubits() const { return num_qubits_; }
    std::span<const std::complex<double>> amplitudes() const { return amps_; }
    std::complex<double> amplitude(std::size_t basis_index) const { return amps_.at(basis_index); }

    // Throws SimulationError if a target is out of range.
    void apply(const Gate& gate);
    void apply_pauli(std::size_t qubit, Pauli p);

    double norm_squared() const;
    // Probability of each basis index, |amp|^2.
    std::vector<double> probabilities() const;

  private:
    void apply_1q(std::size_t q, const std::complex<double> (&m)[2][2]);
    void check_target(std::size_t q) const;

    std::size_t num_qubits_;
    std::vector<std::complex<double>> amps_;
};

// Functional form of StateVector::apply.
StateVector apply_gate(StateVector state, const Gate& gate);

struct RunOptions {
    // 0 = std::thread::hardware_concurrency(). Results never depend on it.
    unsigned threads = 0;
};

// Samples `shots` independent noisy trajectories of `circuit`. Shot k draws
// all of its randomness from CounterRng(noise.seed, k).
BitstringCounts run_shots(const Circuit& circuit, std::uint64_t shots, const NoiseModel& noise,
                          const RunOptions& options = {});

}  // namespace resq
