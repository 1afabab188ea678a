// tomography.hpp
// Two-qubit state reconstruction: measurement settings, simulated counts,
// linear inversion and maximum-likelihood estimation.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qphoton/measure.hpp"
#include "qphoton/qcore.hpp"

namespace qphoton {

// One joint setting: each qubit is measured along its analyzer direction,
// giving four outcomes (00 = both along +analyzer).
struct TomographySetting {
    BlochVector a;
    BlochVector b;
};

struct TomographySettings {
    std::vector<TomographySetting> settings;

    std::size_t size() const { return settings.size(); }
    // Projector for outcome (oa, ob) of setting s, 4x4.
    Matrix projector(std::size_t s, int oa, int ob) const;
    // Rows: the (+,+) projector of every setting written in the two-qubit
    // Pauli basis. Rank 16 means the settings are tomographically complete.
    Eigen::MatrixXd design_matrix() const;
};

// All 16 pairs from the per-qubit analyzers {+z, -z, +x, +y}, i.e. the
// projectors onto |0>, |1>, |+> and |+i>.
TomographySettings standard_settings();

// Relative frequencies per setting. Built from counts (normalized by the
// setting totals, with the totals kept as likelihood weights) or from
// exact probabilities (unit weights).
struct TomographyData {
    std::vector<std::array<double, 4>> freq;  // outcome order 00, 01, 10, 11
    std::vector<double> weight;               // shots per setting

    static TomographyData from_counts(const CountTable& counts, std::size_t n_settings);
    static TomographyData exact(const DensityMatrix& rho, const TomographySettings& settings);
};

// Multinomial counts per setting drawn from the Born probabilities.
CountTable simulate_counts(const DensityMatrix& rho, const TomographySettings& settings,
                           std::uint64_t shots_per_setting, Rng& rng);

// Least-squares inversion of the Born rule in the Pauli basis. The result is
// Hermitian with unit trace but may have negative eigenvalues. Throws
// std::invalid_argument when the data do not determine all 15 parameters.
Matrix linear_inversion(const TomographyData& data, const TomographySettings& settings);

// Clips negative eigenvalues and renormalizes.
DensityMatrix project_to_physical(const Matrix& m);

// Multinomial log-likelihood sum_s w_s sum_o f_so log p_so. Returns -inf if a
// recorded outcome has zero probability.
double log_likelihood(const Matrix& rho, const TomographyData& data, const TomographySettings& settings);

struct ReconstructionResult {
    DensityMatrix matrix;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Iterative ascent on rho = T^dag T / tr(T^dag T) with the diluted R rho R
// update and backtracking. Stops when the per-shot improvement in
// log-likelihood drops below `tolerance`; after max_iter the best iterate
// is returned with converged = false.
ReconstructionResult mle_reconstruct(const TomographyData& data, const TomographySettings& settings,
                                     double tolerance = 1e-9, int max_iter = 10'000);
ReconstructionResult mle_reconstruct(const CountTable& counts, const TomographySettings& settings,
                                     double tolerance = 1e-9, int max_iter = 10'000);

}  // namespace qphoton
