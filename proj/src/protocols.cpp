#include "qphoton/protocols.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace qphoton {

std::string_view to_string(BsmLabel label) {
    switch (label) {
        case BsmLabel::PsiMinus: return "psi-";
        case BsmLabel::PsiPlus: return "psi+";
        case BsmLabel::PhiMinus: return "phi-";
        case BsmLabel::PhiPlus: return "phi+";
        case BsmLabel::Ambiguous: return "ambiguous";
    }
    return "?";
}

BsmLabel to_label(BellKind kind) {
    switch (kind) {
        case BellKind::PsiMinus: return BsmLabel::PsiMinus;
        case BellKind::PsiPlus: return BsmLabel::PsiPlus;
        case BellKind::PhiMinus: return BsmLabel::PhiMinus;
        case BellKind::PhiPlus: return BsmLabel::PhiPlus;
    }
    return BsmLabel::Ambiguous;
}

namespace {

void require_two_qubits(const DensityMatrix& rho) {
    if (rho.dims() != Dims{2, 2}) throw std::invalid_argument("Bell-state measurement needs a two-qubit state");
}

int kind_index(BellKind kind) { return static_cast<int>(kind); }

std::size_t sample_index(const double* probs, std::size_t n, Rng& rng) {
    std::discrete_distribution<std::size_t> dist(probs, probs + n);
    return dist(rng);
}

}  // namespace

std::array<double, 4> bell_probabilities(const DensityMatrix& rho) {
    require_two_qubits(rho);
    std::array<double, 4> p{};
    double sum = 0.0;
    for (BellKind k : kAllBellKinds) {
        const Vector b = bell_state(k).amps();
        const double v = std::max(0.0, b.dot(rho.mat() * b).real());
        p[static_cast<std::size_t>(kind_index(k))] = v;
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

std::array<double, 3> partial_bsm_probabilities(const DensityMatrix& rho) {
    const auto p = bell_probabilities(rho);
    return {p[0], p[1], p[2] + p[3]};
}

FullBsmResult full_bsm(const DensityMatrix& rho, Rng& rng) {
    const auto p = bell_probabilities(rho);
    const std::size_t k = sample_index(p.data(), p.size(), rng);
    const BellKind kind = kAllBellKinds[k];
    return {BsmOutcome{to_label(kind), p[k]}, bell_state(kind).density()};
}

BsmOutcome partial_bsm(const DensityMatrix& rho, Rng& rng) {
    const auto p = partial_bsm_probabilities(rho);
    const std::size_t k = sample_index(p.data(), p.size(), rng);
    constexpr BsmLabel labels[3] = {BsmLabel::PsiMinus, BsmLabel::PsiPlus, BsmLabel::Ambiguous};
    return {labels[k], p[k]};
}

BellProjection project_bell_pair(const DensityMatrix& rho, int first, BellKind kind) {
    const int n = rho.num_subsystems();
    if (first < 0 || first + 1 >= n) throw std::out_of_range("Bell pair index out of range");
    if (rho.dims()[static_cast<std::size_t>(first)] != 2 || rho.dims()[static_cast<std::size_t>(first + 1)] != 2)
        throw std::invalid_argument("Bell projection needs two qubits");
    const Vector b = bell_state(kind).amps();
    const Matrix p = embed_block(b * b.adjoint(), rho.dims(), first, 2);
    const Matrix projected = p * rho.mat() * p;
    const double prob = projected.trace().real();
    if (!(prob > kExactTol)) throw std::domain_error("Bell outcome has zero probability");
    std::vector<int> keep;
    for (int k = 0; k < n; ++k)
        if (k != first && k != first + 1) keep.push_back(k);
    if (keep.empty()) return {prob, bell_state(kind).density()};
    Dims kept_dims;
    for (int k : keep) kept_dims.push_back(rho.dims()[static_cast<std::size_t>(k)]);
    return {prob, DensityMatrix::normalized(kept_dims, partial_trace(projected, rho.dims(), keep))};
}

Matrix bell_pauli(BellKind kind) {
    switch (kind) {
        case BellKind::PhiPlus: return identity(2);
        case BellKind::PhiMinus: return pauli_z();
        case BellKind::PsiPlus: return pauli_x();
        case BellKind::PsiMinus: return pauli_x() * pauli_z();
    }
    throw std::invalid_argument("unknown Bell kind");
}

std::string_view to_string(Correction c) {
    switch (c) {
        case Correction::Identity: return "identity";
        case Correction::BitFlip: return "bit flip";
        case Correction::PhaseFlip: return "phase flip";
        case Correction::BitAndPhaseFlip: return "bit and phase flip";
    }
    return "?";
}

Matrix correction_unitary(Correction c) {
    switch (c) {
        case Correction::Identity: return identity(2);
        case Correction::BitFlip: return pauli_x();
        case Correction::PhaseFlip: return pauli_z();
        case Correction::BitAndPhaseFlip: return pauli_x() * pauli_z();
    }
    throw std::invalid_argument("unknown correction");
}

Correction teleport_correction(BellKind outcome, BellKind resource) {
    // Bob holds sigma_R sigma_B^* |input>; the Paulis used here are real, so
    // the correction is the class of sigma_R sigma_B up to a phase.
    const Matrix m = bell_pauli(resource) * bell_pauli(outcome);
    for (Correction c : {Correction::Identity, Correction::BitFlip, Correction::PhaseFlip, Correction::BitAndPhaseFlip})
        if (std::abs(std::abs((correction_unitary(c).adjoint() * m).trace()) - 2.0) < 1e-12) return c;
    throw std::logic_error("Bell Pauli product outside the correction group");
}

TeleportResult teleport(const StateVector& input, BellKind resource, BsmMode bsm, bool apply_correction, Rng& rng) {
    if (input.dims() != Dims{2}) throw std::invalid_argument("teleportation input must be a single qubit");
    const DensityMatrix joint = tensor(input, bell_state(resource)).density();

    std::array<double, 4> probs{};
    std::vector<DensityMatrix> branches;
    for (BellKind k : kAllBellKinds) {
        auto proj = project_bell_pair(joint, 0, k);
        probs[static_cast<std::size_t>(kind_index(k))] = proj.probability;
        branches.push_back(std::move(proj.remainder));
    }
    const std::size_t k = sample_index(probs.data(), probs.size(), rng);
    const BellKind kind = kAllBellKinds[k];

    auto corrected = [&](const DensityMatrix& bob, BellKind outcome) {
        if (!apply_correction) return bob;
        return apply_local_unitary(bob, correction_unitary(teleport_correction(outcome, resource)), 0);
    };

    if (bsm == BsmMode::Full) {
        DensityMatrix out = corrected(branches[k], kind);
        const double f = fidelity(out, input);
        return {std::move(out), ClassicalMessage{static_cast<int>(k), 4}, BsmOutcome{to_label(kind), probs[k]}, true, f};
    }

    if (kind == BellKind::PsiMinus || kind == BellKind::PsiPlus) {
        DensityMatrix out = corrected(branches[k], kind);
        const double f = fidelity(out, input);
        return {std::move(out), ClassicalMessage{kind == BellKind::PsiMinus ? 0 : 1, 3},
                BsmOutcome{to_label(kind), probs[k]}, true, f};
    }
    // phi+- cannot be told apart: Bob is left with the uncorrected mixture.
    const double p_amb = probs[2] + probs[3];
    Matrix mix = (probs[2] * branches[2].mat() + probs[3] * branches[3].mat()) / p_amb;
    DensityMatrix out = DensityMatrix::normalized({2}, std::move(mix));
    const double f = fidelity(out, input);
    return {std::move(out), ClassicalMessage{2, 3}, BsmOutcome{BsmLabel::Ambiguous, p_amb}, false, f};
}

double uncorrected_teleport_fidelity(const StateVector& input, BellKind resource) {
    const DensityMatrix joint = tensor(input, bell_state(resource)).density();
    double f = 0.0;
    for (BellKind k : kAllBellKinds) {
        const auto proj = project_bell_pair(joint, 0, k);
        f += proj.probability * fidelity(proj.remainder, input);
    }
    return f;
}

DensityMatrix uncorrected_teleport_output(const StateVector& input, BellKind resource) {
    const DensityMatrix joint = tensor(input, bell_state(resource)).density();
    Matrix avg = Matrix::Zero(2, 2);
    for (BellKind k : kAllBellKinds) {
        const auto proj = project_bell_pair(joint, 0, k);
        avg += proj.probability * proj.remainder.mat();
    }
    return DensityMatrix::normalized({2}, std::move(avg));
}

Matrix dense_code(int message, BellKind /*resource*/) {
    switch (message) {
        case 0: return identity(2);
        case 1: return pauli_x();
        case 2: return pauli_z();
        case 3: return pauli_x() * pauli_z();
        default: throw std::invalid_argument("dense-coding message must be 0..3");
    }
}

StateVector dense_encode_state(int message, BellKind resource) {
    return apply_local_unitary(bell_state(resource), dense_code(message, resource), 0);
}

std::optional<int> dense_decode(BsmLabel outcome, BellKind resource) {
    if (outcome == BsmLabel::Ambiguous) return std::nullopt;
    for (int m = 0; m < 4; ++m) {
        const StateVector encoded = dense_encode_state(m, resource);
        for (BellKind k : kAllBellKinds)
            if (to_label(k) == outcome && fidelity(encoded, bell_state(k)) > 0.5) return m;
    }
    throw std::logic_error("dense coding table incomplete");
}

double dense_coding_capacity(BsmMode bsm) { return bsm == BsmMode::Full ? 2.0 : std::log2(3.0); }

SwapResult entanglement_swap_conditional(const DensityMatrix& pair12, const DensityMatrix& pair34, BellKind outcome) {
    if (pair12.dims() != Dims{2, 2} || pair34.dims() != Dims{2, 2})
        throw std::invalid_argument("entanglement swapping needs two two-qubit states");
    const auto proj = project_bell_pair(tensor(pair12, pair34), 1, outcome);
    return {BsmOutcome{to_label(outcome), proj.probability}, proj.remainder};
}

SwapResult entanglement_swap(const DensityMatrix& pair12, const DensityMatrix& pair34, Rng& rng) {
    if (pair12.dims() != Dims{2, 2} || pair34.dims() != Dims{2, 2})
        throw std::invalid_argument("entanglement swapping needs two two-qubit states");
    const DensityMatrix joint = tensor(pair12, pair34);
    // Marginal of the middle pair gives the Bell-outcome distribution.
    const auto p = bell_probabilities(partial_trace(joint, {1, 2}));
    const std::size_t k = sample_index(p.data(), p.size(), rng);
    return entanglement_swap_conditional(pair12, pair34, kAllBellKinds[k]);
}

}  // namespace qphoton
