#include "qphoton/sources.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace qphoton {

std::string_view to_string(BellKind kind) {
    switch (kind) {
        case BellKind::PsiMinus: return "psi-";
        case BellKind::PsiPlus: return "psi+";
        case BellKind::PhiMinus: return "phi-";
        case BellKind::PhiPlus: return "phi+";
    }
    return "?";
}

BellKind bell_kind_from_string(std::string_view name) {
    if (name == "psi-" || name == "psi_minus" || name == "PsiMinus" || name == "singlet")
        return BellKind::PsiMinus;
    if (name == "psi+" || name == "psi_plus" || name == "PsiPlus") return BellKind::PsiPlus;
    if (name == "phi-" || name == "phi_minus" || name == "PhiMinus") return BellKind::PhiMinus;
    if (name == "phi+" || name == "phi_plus" || name == "PhiPlus") return BellKind::PhiPlus;
    throw std::invalid_argument("unknown Bell state: " + std::string(name));
}

StateVector bell_state(BellKind kind) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (kind) {
        case BellKind::PsiMinus: return StateVector::qubits({0.0, r, -r, 0.0});
        case BellKind::PsiPlus: return StateVector::qubits({0.0, r, r, 0.0});
        case BellKind::PhiMinus: return StateVector::qubits({r, 0.0, 0.0, -r});
        case BellKind::PhiPlus: return StateVector::qubits({r, 0.0, 0.0, r});
    }
    throw std::invalid_argument("unknown Bell kind");
}

StateVector nonmax_state(double alpha, double phi) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    const double beta = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));
    Vector v = Vector::Zero(4);
    v(0) = alpha;
    v(3) = beta * std::polar(1.0, phi);
    return StateVector::normalized({2, 2}, std::move(v));
}

DensityMatrix noisy_bell(BellKind kind, double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw std::invalid_argument("visibility must lie in [0, 1]");
    const Vector b = bell_state(kind).amps();
    Matrix m = visibility * (b * b.adjoint()) + (1.0 - visibility) * identity(4) / 4.0;
    return DensityMatrix::normalized({2, 2}, std::move(m));
}

DensityMatrix werner(double v) { return noisy_bell(BellKind::PsiMinus, v); }

StateVector ghz(int n, std::optional<std::pair<std::vector<int>, std::vector<int>>> patterns) {
    if (n < 2) throw std::invalid_argument("GHZ state needs at least two qubits");
    std::vector<int> p0(static_cast<std::size_t>(n), 0), p1(static_cast<std::size_t>(n), 1);
    if (patterns) {
        p0 = patterns->first;
        p1 = patterns->second;
        if (p0.size() != static_cast<std::size_t>(n) || p1.size() != static_cast<std::size_t>(n))
            throw std::invalid_argument("GHZ pattern length must equal n");
        for (std::size_t k = 0; k < p0.size(); ++k) {
            if ((p0[k] != 0 && p0[k] != 1) || (p1[k] != 0 && p1[k] != 1))
                throw std::invalid_argument("GHZ patterns must be bit strings");
            if (p0[k] == p1[k]) throw std::invalid_argument("GHZ patterns must differ in every position");
        }
    }
    const Dims dims(static_cast<std::size_t>(n), 2);
    Vector v = StateVector::basis(dims, p0).amps() + StateVector::basis(dims, p1).amps();
    return StateVector::normalized(dims, std::move(v));
}

SourceModel::SourceModel(double mu_, double visibility_, PairStatistics statistics_)
    : mu(mu_), visibility(visibility_), statistics(statistics_) {
    if (!(mu >= 0.0)) throw std::invalid_argument("mean pair number must be >= 0");
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw std::invalid_argument("visibility must lie in [0, 1]");
}

std::uint64_t poisson_pair_count(double mu, Rng& rng) {
    if (!(mu >= 0.0)) throw std::invalid_argument("mean pair number must be >= 0");
    if (mu == 0.0) return 0;
    std::poisson_distribution<std::uint64_t> dist(mu);
    return dist(rng);
}

std::uint64_t thermal_pair_count(double mu, Rng& rng) {
    if (!(mu >= 0.0)) throw std::invalid_argument("mean pair number must be >= 0");
    if (mu == 0.0) return 0;
    // P(k) = mu^k / (1+mu)^(k+1): geometric with success 1/(1+mu).
    std::geometric_distribution<std::uint64_t> dist(1.0 / (1.0 + mu));
    return dist(rng);
}

std::uint64_t pair_count(const SourceModel& model, Rng& rng) {
    return model.statistics == PairStatistics::Poisson ? poisson_pair_count(model.mu, rng)
                                                       : thermal_pair_count(model.mu, rng);
}

DensityMatrix emitted_pair(const SourceModel& model, BellKind kind) {
    return noisy_bell(kind, model.visibility);
}

}  // namespace qphoton
