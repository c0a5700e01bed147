#pragma once

#include <map>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "resq/circuit.hpp"
#include "resq/statevector.hpp"

// Exact reference semantics for small circuits. Shares no code with the
// statevector simulator: gates are full 2^n x 2^n Kronecker-built
// unitaries and depolarizing is applied as a channel on the density matrix.
namespace resq::oracle {

inline constexpr std::size_t kMaxOracleQubits = 3;

using Distribution = std::map<std::string, double>;

// Unitary of `gate` on n qubits; basis index bit q is qubit q.
Eigen::MatrixXcd gate_unitary(const Gate& gate, std::size_t num_qubits);

// rho -> Tr_S(rho) (x) I/d on the qubits in `qubits` (d = 2^|S|).
Eigen::MatrixXcd replace_with_maximally_mixed(const Eigen::MatrixXcd& rho, std::span<const std::size_t> qubits,
                                              std::size_t num_qubits);

// (1/d^2) sum over the full Pauli group on `qubits` of P rho P^dagger.
Eigen::MatrixXcd pauli_twirl(const Eigen::MatrixXcd& rho, std::span<const std::size_t> qubits,
                             std::size_t num_qubits);

// Density matrix after all gates and gate noise, before measurement.
Eigen::MatrixXcd final_density_matrix(const Circuit& circuit, const NoiseModel& noise);

// Exact probability of every outcome string over measured_qubits, readout
// flips included. Throws std::invalid_argument above kMaxOracleQubits.
Distribution density_matrix_oracle(const Circuit& circuit, const NoiseModel& noise);

}  // namespace resq::oracle
