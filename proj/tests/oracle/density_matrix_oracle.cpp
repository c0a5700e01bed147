#include "density_matrix_oracle.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace resq::oracle {

namespace {

using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using cd = std::complex<double>;

Matrix2cd mat(cd a, cd b, cd c, cd d) {
    Matrix2cd m;
    m << a, b, c, d;
    return m;
}

const Matrix2cd kI = Matrix2cd::Identity();
const Matrix2cd kX = mat(0, 1, 1, 0);
const Matrix2cd kY = mat(0, cd(0, -1), cd(0, 1), 0);
const Matrix2cd kZ = mat(1, 0, 0, -1);
const Matrix2cd kP0 = mat(1, 0, 0, 0);
const Matrix2cd kP1 = mat(0, 0, 0, 1);

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

// factors[q] acts on qubit q; qubit n-1 is the most significant Kronecker factor.
MatrixXcd embed(const std::vector<Matrix2cd>& factors) {
    MatrixXcd out = MatrixXcd::Identity(1, 1);
    for (std::size_t k = factors.size(); k-- > 0;) {
        out = kron(out, factors[k]);
    }
    return out;
}

MatrixXcd single(std::size_t n, std::size_t q, const Matrix2cd& u) {
    std::vector<Matrix2cd> f(n, kI);
    f[q] = u;
    return embed(f);
}

Matrix2cd single_qubit_matrix(const Gate& g) {
    const double th = g.angle().value_or(0.0);
    const double c = std::cos(th / 2);
    const double s = std::sin(th / 2);
    const double r = 1.0 / std::sqrt(2.0);
    switch (g.kind()) {
        case GateKind::H: return mat(r, r, r, -r);
        case GateKind::X: return kX;
        case GateKind::Y: return kY;
        case GateKind::Z: return kZ;
        case GateKind::S: return mat(1, 0, 0, cd(0, 1));
        case GateKind::T: return mat(1, 0, 0, std::exp(cd(0, std::numbers::pi / 4)));
        // exp(-i th/2 sigma)
        case GateKind::RX: return mat(c, cd(0, -s), cd(0, -s), c);
        case GateKind::RY: return mat(c, -s, s, c);
        case GateKind::RZ: return mat(std::exp(cd(0, -th / 2)), 0, 0, std::exp(cd(0, th / 2)));
        case GateKind::CNOT: break;
    }
    throw std::logic_error("not a single-qubit gate");
}

}  // namespace

MatrixXcd gate_unitary(const Gate& gate, std::size_t n) {
    if (gate.kind() == GateKind::CNOT) {
        const auto control = gate.targets()[0];
        const auto target = gate.targets()[1];
        std::vector<Matrix2cd> off(n, kI);
        std::vector<Matrix2cd> on(n, kI);
        off[control] = kP0;
        on[control] = kP1;
        on[target] = kX;
        return embed(off) + embed(on);
    }
    return single(n, gate.targets()[0], single_qubit_matrix(gate));
}

MatrixXcd replace_with_maximally_mixed(const MatrixXcd& rho, std::span<const std::size_t> qubits, std::size_t n) {
    std::size_t mask = 0;
    for (const auto q : qubits) {
        mask |= std::size_t{1} << q;
    }
    const std::size_t dim = std::size_t{1} << n;
    const double d = static_cast<double>(std::size_t{1} << qubits.size());

    // Enumerate all assignments of the subsystem bits.
    std::vector<std::size_t> sub;
    for (std::size_t k = 0; k < dim; ++k) {
        if ((k & ~mask) == 0) {
            sub.push_back(k);
        }
    }
    MatrixXcd out = MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            if ((i & mask) != (j & mask)) {
                continue;
            }
            cd trace = 0;
            for (const auto k : sub) {
                trace += rho(static_cast<Eigen::Index>((i & ~mask) | k), static_cast<Eigen::Index>((j & ~mask) | k));
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = trace / d;
        }
    }
    return out;
}

MatrixXcd pauli_twirl(const MatrixXcd& rho, std::span<const std::size_t> qubits, std::size_t n) {
    const std::array<Matrix2cd, 4> paulis{kI, kX, kY, kZ};
    const std::size_t terms = std::size_t{1} << (2 * qubits.size());
    MatrixXcd out = MatrixXcd::Zero(rho.rows(), rho.cols());
    for (std::size_t t = 0; t < terms; ++t) {
        std::vector<Matrix2cd> f(n, kI);
        for (std::size_t k = 0; k < qubits.size(); ++k) {
            f[qubits[k]] = paulis[(t >> (2 * k)) & 3U];
        }
        const MatrixXcd p = embed(f);
        out += p * rho * p.adjoint();
    }
    return out / static_cast<double>(terms);
}

MatrixXcd final_density_matrix(const Circuit& circuit, const NoiseModel& noise) {
    const std::size_t n = circuit.num_qubits();
    if (n > kMaxOracleQubits) {
        throw std::invalid_argument("density-matrix oracle is limited to " + std::to_string(kMaxOracleQubits) +
                                    " qubits");
    }
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
    MatrixXcd rho = MatrixXcd::Zero(dim, dim);
    rho(0, 0) = 1.0;
    for (const auto& g : circuit.gates()) {
        const MatrixXcd u = gate_unitary(g, n);
        rho = u * rho * u.adjoint();
        const double p = g.kind() == GateKind::CNOT ? noise.p2 : noise.p1;
        if (p > 0.0) {
            rho = (1.0 - p) * rho + p * replace_with_maximally_mixed(rho, g.targets(), n);
        }
    }
    return rho;
}

Distribution density_matrix_oracle(const Circuit& circuit, const NoiseModel& noise) {
    const MatrixXcd rho = final_density_matrix(circuit, noise);
    const auto& measured = circuit.measured_qubits();
    const std::size_t m = measured.size();
    std::vector<double> ideal(std::size_t{1} << m, 0.0);
    for (Eigen::Index idx = 0; idx < rho.rows(); ++idx) {
        std::size_t code = 0;
        for (std::size_t i = 0; i < m; ++i) {
            code |= ((static_cast<std::size_t>(idx) >> measured[i]) & 1U) << i;
        }
        ideal[code] += rho(idx, idx).real();
    }

    const double r = noise.readout_flip;
    Distribution out;
    for (std::size_t observed = 0; observed < ideal.size(); ++observed) {
        double p = 0.0;
        for (std::size_t actual = 0; actual < ideal.size(); ++actual) {
            double w = ideal[actual];
            for (std::size_t i = 0; i < m; ++i) {
                w *= (((observed ^ actual) >> i) & 1U) ? r : 1.0 - r;
            }
            p += w;
        }
        std::string key(m, '0');
        for (std::size_t i = 0; i < m; ++i) {
            if ((observed >> i) & 1U) {
                key[i] = '1';
            }
        }
        out[key] = p;
    }
    return out;
}

}  // namespace resq::oracle
