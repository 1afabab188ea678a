// protocols.hpp
// Bell-state measurement (complete and linear-optics partial), teleportation,
// dense coding and entanglement swapping.

#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "qphoton/qcore.hpp"
#include "qphoton/sources.hpp"

namespace qphoton {

enum class BsmLabel { PsiMinus, PsiPlus, PhiMinus, PhiPlus, Ambiguous };

std::string_view to_string(BsmLabel label);
BsmLabel to_label(BellKind kind);

enum class BsmMode {
    Full,     // projection onto all four Bell states
    Partial,  // linear optics: psi+- resolved, phi+- merged into Ambiguous
};

struct BsmOutcome {
    BsmLabel label = BsmLabel::Ambiguous;
    double probability = 0.0;
};

// Bell-basis probabilities of a two-qubit state, ordered as kAllBellKinds.
std::array<double, 4> bell_probabilities(const DensityMatrix& rho);
// {P(psi-), P(psi+), P(phi-) + P(phi+)}
std::array<double, 3> partial_bsm_probabilities(const DensityMatrix& rho);

struct FullBsmResult {
    BsmOutcome outcome;
    DensityMatrix residue;  // post-measurement two-qubit state |B><B|
};

FullBsmResult full_bsm(const DensityMatrix& rho, Rng& rng);
BsmOutcome partial_bsm(const DensityMatrix& rho, Rng& rng);

// Projects subsystems (first, first + 1) of a register onto a Bell state.
// Returns the outcome probability and the normalized state of the remaining
// subsystems (in their original order). Throws std::domain_error for an
// outcome of zero probability.
struct BellProjection {
    double probability = 0.0;
    DensityMatrix remainder;
};
BellProjection project_bell_pair(const DensityMatrix& rho, int first, BellKind kind);

// Pauli frame of a Bell state: |B> = (I x sigma_B)|phi+>, with sigma among
// {I, X, Z, XZ}.
Matrix bell_pauli(BellKind kind);

enum class Correction { Identity, BitFlip, PhaseFlip, BitAndPhaseFlip };
std::string_view to_string(Correction c);

// Bob's correction after Alice's Bell outcome on (input, her half of the
// resource). For the singlet resource:
//   psi- -> identity, psi+ -> phase flip, phi- -> bit flip, phi+ -> bit and phase flip.
Correction teleport_correction(BellKind outcome, BellKind resource);
Matrix correction_unitary(Correction c);

struct ClassicalMessage {
    int value = 0;  // 0..3 for two bits, 0..2 for a trit
    int arity = 4;
};

struct TeleportResult {
    DensityMatrix output;  // Bob's qubit
    ClassicalMessage message;
    BsmOutcome outcome;
    bool success = false;  // false when a partial BSM returns Ambiguous
    double fidelity = 0.0;
};

// Input on qubit 0, resource on qubits (1, 2); Alice measures (0, 1).
TeleportResult teleport(const StateVector& input, BellKind resource, BsmMode bsm, bool apply_correction, Rng& rng);

// Outcome-averaged fidelity of Bob's uncorrected qubit with the input:
// sum_B p_B F(rho_B, input). Equals 1/2 for every pure input.
double uncorrected_teleport_fidelity(const StateVector& input, BellKind resource);
// Outcome-averaged output without correction (I/2 for any input).
DensityMatrix uncorrected_teleport_output(const StateVector& input, BellKind resource);

// Dense coding. Message bits (b1 b0) select I, X, Z, XZ on Alice's qubit
// (qubit 0) of the shared pair.
Matrix dense_code(int message, BellKind resource);
StateVector dense_encode_state(int message, BellKind resource);
// Decodes a Bell outcome. Partial BSM resolves two messages exactly and
// returns nullopt for the two that merge.
std::optional<int> dense_decode(BsmLabel outcome, BellKind resource);
// Classical bits per transmitted qubit: log2 of the number of
// distinguishable outcome classes (2 for full, log2 3 for partial).
double dense_coding_capacity(BsmMode bsm);

struct SwapResult {
    BsmOutcome outcome;       // on qubits 2 and 3
    DensityMatrix state14;    // conditional state of qubits 1 and 4
};

// Conditional state of qubits 1&4 for a given Bell outcome on 2&3.
SwapResult entanglement_swap_conditional(const DensityMatrix& pair12, const DensityMatrix& pair34, BellKind outcome);
SwapResult entanglement_swap(const DensityMatrix& pair12, const DensityMatrix& pair34, Rng& rng);

}  // namespace qphoton
