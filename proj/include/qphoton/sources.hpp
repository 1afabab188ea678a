// sources.hpp
// Entangled-state factories and photon-pair number statistics.

#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "qphoton/qcore.hpp"

namespace qphoton {

// psi+- = (|01> +- |10>)/sqrt2, phi+- = (|00> +- |11>)/sqrt2; PsiMinus is the
// singlet.
enum class BellKind { PsiMinus, PsiPlus, PhiMinus, PhiPlus };

inline constexpr BellKind kAllBellKinds[] = {BellKind::PsiMinus, BellKind::PsiPlus,
                                             BellKind::PhiMinus, BellKind::PhiPlus};

std::string_view to_string(BellKind kind);
BellKind bell_kind_from_string(std::string_view name);

StateVector bell_state(BellKind kind);

// alpha|00> + sqrt(1-alpha^2) e^{i phi}|11>, 0 <= alpha <= 1.
StateVector nonmax_state(double alpha, double phi = 0.0);

// v |B><B| + (1-v) I/4.
DensityMatrix noisy_bell(BellKind kind, double visibility);
// Singlet with isotropic noise: v |psi-><psi-| + (1-v) I/4.
DensityMatrix werner(double v);

// Equal superposition of two complementary bit patterns. Without patterns:
// (|0...0> + |1...1>)/sqrt2.
StateVector ghz(int n, std::optional<std::pair<std::vector<int>, std::vector<int>>> patterns = std::nullopt);

enum class PairStatistics { Poisson, Thermal };

struct SourceModel {
    double mu = 0.1;          // mean pairs per pulse
    double visibility = 1.0;  // entanglement contrast
    PairStatistics statistics = PairStatistics::Poisson;

    SourceModel() = default;
    SourceModel(double mu, double visibility, PairStatistics statistics = PairStatistics::Poisson);
};

std::uint64_t poisson_pair_count(double mu, Rng& rng);
// Bose-Einstein (geometric) distribution with mean mu.
std::uint64_t thermal_pair_count(double mu, Rng& rng);
std::uint64_t pair_count(const SourceModel& model, Rng& rng);

// The pair state a source emits: noisy_bell(kind, model.visibility).
DensityMatrix emitted_pair(const SourceModel& model, BellKind kind = BellKind::PsiMinus);

}  // namespace qphoton
