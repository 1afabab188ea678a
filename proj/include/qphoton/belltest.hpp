// belltest.hpp
// CHSH and Mermin inequalities, analyzer-setting optimization, the
// detection-efficiency threshold and the speed-of-influence bound.

#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qphoton/measure.hpp"
#include "qphoton/qcore.hpp"

namespace qphoton {

inline constexpr double kLocalBound = 2.0;
inline const double kTsirelsonBound = 2.0 * std::sqrt(2.0);

struct ChshSettings {
    BlochVector a, a_prime, b, b_prime;
};

// Analyzer directions for the singlet at polarization angles 0 and 45 deg
// (Alice) and 22.5 and 67.5 deg (Bob); on the Bloch sphere the angles
// double and lie in the x-z plane.
ChshSettings singlet_optimal_settings();

struct BoundReport {
    double s = 0.0;
    ChshSettings settings;
    bool violated = false;                    // s > 2
    std::optional<double> std_error;          // when estimated from counts
    std::optional<double> sigma_margin;       // (s - 2) / std_error
};

// S = |E(a,b) - E(a,b')| + |E(a',b') + E(a',b)|
double chsh_value(const CorrelationTensor& ct, const ChshSettings& settings);
BoundReport chsh(const DensityMatrix& rho, const ChshSettings& settings);

// Estimates ordered (a,b), (a,b'), (a',b), (a',b').
BoundReport chsh_from_estimates(const std::array<CorrelationEstimate, 4>& estimates,
                                const ChshSettings& settings);

// Numerical maximum over all four analyzer directions: 15 deg grid over
// Alice's two directions, Bob's directions in closed form, then simplex
// refinement.
BoundReport chsh_optimize(const DensityMatrix& rho);

// Closed-form maximum 2 sqrt(m1 + m2) from the two largest eigenvalues of
// T^T T.
double chsh_max_analytic(const DensityMatrix& rho);

// Two analyzer directions (a_i, b_i) per party.
using MerminSettings = std::array<std::pair<BlochVector, BlochVector>, 3>;

// M = E(a1 b2 b3) + E(b1 a2 b3) + E(b1 b2 a3) - E(a1 a2 a3); LHV bound 2,
// quantum maximum 4.
double mermin3(const DensityMatrix& rho, const MerminSettings& settings);
MerminSettings mermin_xy_settings();

// Coincidence probabilities in a +-45 deg polarization basis (Bloch +-x by
// default), keyed by "P"/"M" strings in qubit order: "PMM" is qubit 0 at
// +45 deg, qubits 1 and 2 at -45 deg.
std::map<std::string, double> pm_coincidence_profile(const StateVector& state,
                                                     std::span<const BlochVector> settings = {});
std::map<std::string, double> ghz3_coincidence_profile(const StateVector& state,
                                                       std::span<const BlochVector> settings = {});

// Detection-efficiency loophole. Every missed detection is recorded as the +1
// outcome, so with symmetric efficiency eta
//   E(a,b) = eta^2 a.T.b + eta(1-eta)(a.r_A + b.r_B) + (1-eta)^2.
double chsh_with_misses(const CorrelationTensor& ct, const ChshSettings& settings, double eta);
// Maximum of chsh_with_misses over analyzer directions in the x-z plane.
BoundReport no_fair_sampling_chsh_max(const DensityMatrix& rho, double eta);

struct EfficiencyFamily {
    enum class Kind { Maximal, Nonmaximal };
    Kind kind = Kind::Maximal;
    std::vector<double> alphas;  // amplitude of |00> in alpha|00> + beta|11>
    double visibility = 1.0;     // isotropic noise admixture

    static EfficiencyFamily maximal(double visibility = 1.0);
    static EfficiencyFamily nonmaximal(std::vector<double> alphas = {}, double visibility = 1.0);
};

struct EfficiencyPoint {
    double alpha = 0.0;
    double eta = 1.0;   // threshold estimate (upper end of the bracket)
    double lo = 0.0;
    double hi = 1.0;
    bool converged = false;
    bool violates_at_unit_efficiency = false;
};

struct EfficiencyThreshold {
    double eta = 1.0;
    double alpha = 0.0;
    double lo = 0.0;
    double hi = 1.0;
    bool converged = false;
    std::vector<EfficiencyPoint> sweep;
};

// Smallest efficiency at which the family still violates CHSH without fair
// sampling: outer bisection on eta (tolerance 1e-6), inner maximization over
// analyzer angles. For the nonmaximal family the minimum over the alpha
// sweep is returned together with every sweep point. If no family member
// violates even at eta = 1 the result has converged = false and eta = 1.
EfficiencyThreshold critical_efficiency(const EfficiencyFamily& family);
EfficiencyPoint efficiency_threshold_for(const DensityMatrix& rho, double alpha_label = 0.0);

// Lower bound on the speed of a hypothetical influence, in units of c.
inline constexpr double kSpeedOfLight = 3.0e8;  // m/s, rounded as in the quoted bounds
double speed_lower_bound(double separation_m, double timing_uncertainty_s, double c = kSpeedOfLight);

}  // namespace qphoton
