#include "resq/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "resq/rng.hpp"

namespace resq {

namespace {

using cd = std::complex<double>;
constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void NoiseModel::validate() const {
    if (!probability(p1) || !probability(p2) || !probability(readout_flip)) {
        throw std::invalid_argument("noise probabilities must lie in [0, 1]");
    }
}

StateVector::StateVector(std::size_t num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits == 0 || num_qubits > kMaxQubits) {
        throw SimulationError("statevector supports 1.." + std::to_string(kMaxQubits) + " qubits, got " +
                              std::to_string(num_qubits));
    }
    amps_.assign(std::size_t{1} << num_qubits, cd{0.0, 0.0});
    amps_[0] = 1.0;
}

void StateVector::check_target(std::size_t q) const {
    if (q >= num_qubits_) {
        throw SimulationError("target qubit " + std::to_string(q) + " out of range for " +
                              std::to_string(num_qubits_) + "-qubit state");
    }
}

void StateVector::apply_1q(std::size_t q, const cd (&m)[2][2]) {
    const std::size_t stride = std::size_t{1} << q;
    const std::size_t dim = amps_.size();
    for (std::size_t block = 0; block < dim; block += 2 * stride) {
        for (std::size_t i = block; i < block + stride; ++i) {
            const cd a0 = amps_[i];
            const cd a1 = amps_[i + stride];
            amps_[i] = m[0][0] * a0 + m[0][1] * a1;
            amps_[i + stride] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

void StateVector::apply(const Gate& gate) {
    for (const std::size_t q : gate.targets()) {
        check_target(q);
    }
    const std::size_t q = gate.targets()[0];
    const double theta = gate.angle().value_or(0.0);
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    constexpr cd i{0.0, 1.0};

    switch (gate.kind()) {
        case GateKind::H: {
            const cd m[2][2] = {{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}};
            apply_1q(q, m);
            break;
        }
        case GateKind::X: apply_pauli(q, Pauli::X); break;
        case GateKind::Y: apply_pauli(q, Pauli::Y); break;
        case GateKind::Z: apply_pauli(q, Pauli::Z); break;
        case GateKind::S: {
            const cd m[2][2] = {{1.0, 0.0}, {0.0, i}};
            apply_1q(q, m);
            break;
        }
        case GateKind::T: {
            const cd m[2][2] = {{1.0, 0.0}, {0.0, std::polar(1.0, std::numbers::pi / 4)}};
            apply_1q(q, m);
            break;
        }
        case GateKind::RX: {
            const cd m[2][2] = {{c, -i * s}, {-i * s, c}};
            apply_1q(q, m);
            break;
        }
        case GateKind::RY: {
            if (theta == 0.0) {
                break;
            }
            const cd m[2][2] = {{c, -s}, {s, c}};
            apply_1q(q, m);
            break;
        }
        case GateKind::RZ: {
            const cd m[2][2] = {{std::polar(1.0, -theta / 2), 0.0}, {0.0, std::polar(1.0, theta / 2)}};
            apply_1q(q, m);
            break;
        }
        case GateKind::CNOT: {
            const std::size_t cbit = std::size_t{1} << gate.targets()[0];
            const std::size_t tbit = std::size_t{1} << gate.targets()[1];
            for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
                if ((idx & cbit) && !(idx & tbit)) {
                    std::swap(amps_[idx], amps_[idx | tbit]);
                }
            }
            break;
        }
    }
}

void StateVector::apply_pauli(std::size_t qubit, Pauli p) {
    check_target(qubit);
    const std::size_t bit = std::size_t{1} << qubit;
    switch (p) {
        case Pauli::I: break;
        case Pauli::X:
            for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
                if (!(idx & bit)) {
                    std::swap(amps_[idx], amps_[idx | bit]);
                }
            }
            break;
        case Pauli::Y:
            // Y = [[0, -i], [i, 0]]
            for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
                if (!(idx & bit)) {
                    const cd a0 = amps_[idx];
                    const cd a1 = amps_[idx | bit];
                    amps_[idx] = cd{a1.imag(), -a1.real()};
                    amps_[idx | bit] = cd{-a0.imag(), a0.real()};
                }
            }
            break;
        case Pauli::Z:
            for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
                if (idx & bit) {
                    amps_[idx] = -amps_[idx];
                }
            }
            break;
    }
}

double StateVector::norm_squared() const {
    double total = 0.0;
    for (const auto& a : amps_) {
        total += std::norm(a);
    }
    return total;
}

std::vector<double> StateVector::probabilities() const {
    std::vector<double> p(amps_.size());
    std::transform(amps_.begin(), amps_.end(), p.begin(), [](const cd& a) { return std::norm(a); });
    return p;
}

StateVector apply_gate(StateVector state, const Gate& gate) {
    state.apply(gate);
    return state;
}

namespace {

struct NoiseEvent {
    std::size_t gate_index;
    unsigned paulis;  // two bits per involved qubit, first target in the low bits
};

class ShotSampler {
  public:
    ShotSampler(const Circuit& circuit, const NoiseModel& noise) : circuit_(circuit), noise_(noise) {
        const auto& measured = circuit.measured_qubits();
        num_outcomes_ = std::size_t{1} << measured.size();
        StateVector sv(circuit.num_qubits());
        for (const auto& g : circuit.gates()) {
            sv.apply(g);
        }
        noiseless_cdf_ = cumulative(marginal(sv));
    }

    std::size_t num_outcomes() const { return num_outcomes_; }

    // Outcome code: bit i is the measured value of measured_qubits[i].
    std::size_t sample(std::uint64_t shot, std::vector<NoiseEvent>& scratch) const {
        CounterRng rng(noise_.seed, shot);
        scratch.clear();
        const auto& gates = circuit_.gates();
        for (std::size_t g = 0; g < gates.size(); ++g) {
            const bool two_qubit = arity(gates[g].kind()) == 2;
            const double p = two_qubit ? noise_.p2 : noise_.p1;
            if (p > 0.0 && rng.uniform() < p) {
                const auto paulis = static_cast<unsigned>(rng.bits(two_qubit ? 4 : 2));
                if (paulis != 0) {
                    scratch.push_back({g, paulis});
                }
            }
        }

        std::size_t outcome;
        const double u = rng.uniform();
        if (scratch.empty()) {
            outcome = draw(noiseless_cdf_, u);
        } else {
            outcome = draw(cumulative(marginal(evolve(scratch))), u);
        }

        if (noise_.readout_flip > 0.0) {
            for (std::size_t i = 0; i < circuit_.measured_qubits().size(); ++i) {
                if (rng.uniform() < noise_.readout_flip) {
                    outcome ^= std::size_t{1} << i;
                }
            }
        }
        return outcome;
    }

  private:
    StateVector evolve(const std::vector<NoiseEvent>& events) const {
        StateVector sv(circuit_.num_qubits());
        auto next = events.begin();
        const auto& gates = circuit_.gates();
        for (std::size_t g = 0; g < gates.size(); ++g) {
            sv.apply(gates[g]);
            if (next != events.end() && next->gate_index == g) {
                const auto targets = gates[g].targets();
                for (std::size_t k = 0; k < targets.size(); ++k) {
                    sv.apply_pauli(targets[k], static_cast<Pauli>((next->paulis >> (2 * k)) & 3U));
                }
                ++next;
            }
        }
        return sv;
    }

    std::vector<double> marginal(const StateVector& sv) const {
        const auto& measured = circuit_.measured_qubits();
        std::vector<double> out(num_outcomes_, 0.0);
        const auto amps = sv.amplitudes();
        for (std::size_t idx = 0; idx < amps.size(); ++idx) {
            std::size_t code = 0;
            for (std::size_t i = 0; i < measured.size(); ++i) {
                code |= ((idx >> measured[i]) & 1U) << i;
            }
            out[code] += std::norm(amps[idx]);
        }
        return out;
    }

    static std::vector<double> cumulative(std::vector<double> p) {
        double running = 0.0;
        for (auto& x : p) {
            running += x;
            x = running;
        }
        return p;
    }

    static std::size_t draw(const std::vector<double>& cdf, double u) {
        const double target = u * cdf.back();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        if (it == cdf.end()) {
            --it;
        }
        // Never land on a zero-probability outcome at the upper edge.
        while (it != cdf.begin() && *it == *(it - 1)) {
            --it;
        }
        return static_cast<std::size_t>(it - cdf.begin());
    }

    const Circuit& circuit_;
    NoiseModel noise_;
    std::size_t num_outcomes_ = 0;
    std::vector<double> noiseless_cdf_;
};

}  // namespace

BitstringCounts run_shots(const Circuit& circuit, std::uint64_t shots, const NoiseModel& noise,
                          const RunOptions& options) {
    if (shots == 0) {
        throw SimulationError("shots must be at least 1");
    }
    try {
        noise.validate();
    } catch (const std::invalid_argument& e) {
        throw SimulationError(e.what());
    }
    if (circuit.num_qubits() > StateVector::kMaxQubits) {
        throw SimulationError("circuit too large for statevector simulation");
    }

    const ShotSampler sampler(circuit, noise);
    unsigned threads = options.threads != 0 ? options.threads : std::max(1U, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, shots));

    std::vector<std::vector<std::uint64_t>> histograms(threads, std::vector<std::uint64_t>(sampler.num_outcomes(), 0));
    auto work = [&](unsigned t) {
        const std::uint64_t begin = shots * t / threads;
        const std::uint64_t end = shots * (t + 1) / threads;
        std::vector<NoiseEvent> scratch;
        auto& hist = histograms[t];
        for (std::uint64_t shot = begin; shot < end; ++shot) {
            ++hist[sampler.sample(shot, scratch)];
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(work, t);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    const std::size_t width = circuit.measured_qubits().size();
    BitstringCounts::Map counts;
    for (std::size_t code = 0; code < sampler.num_outcomes(); ++code) {
        std::uint64_t n = 0;
        for (const auto& hist : histograms) {
            n += hist[code];
        }
        if (n == 0) {
            continue;
        }
        std::string key(width, '0');
        for (std::size_t i = 0; i < width; ++i) {
            if ((code >> i) & 1U) {
                key[i] = '1';
            }
        }
        counts.emplace(std::move(key), n);
    }
    return BitstringCounts(std::move(counts));
}

}  // namespace resq
