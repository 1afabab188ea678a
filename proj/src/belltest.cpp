#include "qphoton/belltest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "qphoton/optimize.hpp"
#include "qphoton/sources.hpp"

namespace qphoton {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDeg15 = kPi / 12.0;

void require_two_qubits(const DensityMatrix& rho) {
    if (rho.dims() != Dims{2, 2}) throw std::invalid_argument("CHSH needs a two-qubit state");
}

BlochVector unit_or_z(const Eigen::Vector3d& v) {
    return v.norm() > 1e-300 ? BlochVector::from_vector(v) : kPlusZ;
}
}  // namespace

ChshSettings singlet_optimal_settings() {
    return {BlochVector::in_xz_plane(0.0), BlochVector::in_xz_plane(kPi / 2), BlochVector::in_xz_plane(kPi / 4),
            BlochVector::in_xz_plane(3 * kPi / 4)};
}

double chsh_value(const CorrelationTensor& ct, const ChshSettings& s) {
    return std::abs(ct.correlation(s.a, s.b) - ct.correlation(s.a, s.b_prime)) +
           std::abs(ct.correlation(s.a_prime, s.b_prime) + ct.correlation(s.a_prime, s.b));
}

BoundReport chsh(const DensityMatrix& rho, const ChshSettings& settings) {
    require_two_qubits(rho);
    BoundReport r;
    r.s = chsh_value(correlation_tensor(rho), settings);
    r.settings = settings;
    r.violated = r.s > kLocalBound;
    return r;
}

BoundReport chsh_from_estimates(const std::array<CorrelationEstimate, 4>& e, const ChshSettings& settings) {
    BoundReport r;
    r.s = std::abs(e[0].e_hat - e[1].e_hat) + std::abs(e[3].e_hat + e[2].e_hat);
    r.settings = settings;
    r.violated = r.s > kLocalBound;
    double var = 0.0;
    for (const auto& est : e) var += est.std_error * est.std_error;
    r.std_error = std::sqrt(var);
    if (*r.std_error > 0.0) r.sigma_margin = (r.s - kLocalBound) / *r.std_error;
    return r;
}

double chsh_max_analytic(const DensityMatrix& rho) {
    const CorrelationTensor ct = correlation_tensor(rho);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(ct.t.transpose() * ct.t);
    const auto ev = solver.eigenvalues();  // ascending
    return 2.0 * std::sqrt(std::max(0.0, ev(1) + ev(2)));
}

BoundReport chsh_optimize(const DensityMatrix& rho) {
    require_two_qubits(rho);
    const CorrelationTensor ct = correlation_tensor(rho);
    // For fixed a, a' the best b, b' are along T^T(a + a') and T^T(a' - a), so
    // S(a, a') = |T^T(a + a')| + |T^T(a' - a)|.
    auto dir = [](double theta, double phi) {
        return Eigen::Vector3d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
    };
    const Eigen::Matrix3d tt = ct.t.transpose();
    auto objective = [&](const std::vector<double>& x) {
        const Eigen::Vector3d a = dir(x[0], x[1]);
        const Eigen::Vector3d ap = dir(x[2], x[3]);
        return (tt * (a + ap)).norm() + (tt * (ap - a)).norm();
    };
    const auto best = opt::grid_then_refine_max(objective, {0.0, 0.0, 0.0, 0.0}, {kDeg15, kDeg15, kDeg15, kDeg15},
                                                {13, 24, 13, 24}, 4, 0.05);
    const Eigen::Vector3d a = dir(best.x[0], best.x[1]);
    const Eigen::Vector3d ap = dir(best.x[2], best.x[3]);
    // E(a,b) - E(a,b') + E(a',b') + E(a',b) = (a+a').T b + (a'-a).T b'
    const ChshSettings s{BlochVector::from_vector(a), BlochVector::from_vector(ap), unit_or_z(tt * (a + ap)),
                         unit_or_z(tt * (ap - a))};
    return chsh(rho, s);
}

// ---------------------------------------------------------------------------
// Mermin / GHZ

MerminSettings mermin_xy_settings() {
    return {std::pair{kPlusX, kPlusY}, std::pair{kPlusX, kPlusY}, std::pair{kPlusX, kPlusY}};
}

double mermin3(const DensityMatrix& rho, const MerminSettings& s) {
    if (rho.dims() != Dims{2, 2, 2}) throw std::invalid_argument("mermin3 needs a three-qubit state");
    auto e = [&](const BlochVector& x, const BlochVector& y, const BlochVector& z) {
        const BlochVector v[3] = {x, y, z};
        return correlation(rho, v);
    };
    return e(s[0].first, s[1].second, s[2].second) + e(s[0].second, s[1].first, s[2].second) +
           e(s[0].second, s[1].second, s[2].first) - e(s[0].first, s[1].first, s[2].first);
}

std::map<std::string, double> pm_coincidence_profile(const StateVector& state, std::span<const BlochVector> settings) {
    const DensityMatrix rho = state.density();
    if (!rho.all_qubits()) throw std::invalid_argument("coincidence profile needs a qubit register");
    std::vector<BlochVector> dirs(settings.begin(), settings.end());
    if (dirs.empty()) dirs.assign(rho.dims().size(), kPlusX);
    const ProbabilityTable table = born_probabilities(rho, dirs);
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < table.size(); ++i) {
        std::string label;
        for (int r : table.outcome_at(i).pattern) label.push_back(r == 0 ? 'P' : 'M');
        out[label] = table[i];
    }
    return out;
}

std::map<std::string, double> ghz3_coincidence_profile(const StateVector& state, std::span<const BlochVector> settings) {
    if (state.dims() != Dims{2, 2, 2}) throw std::invalid_argument("ghz3 profile needs a three-qubit pure state");
    return pm_coincidence_profile(state, settings);
}

// ---------------------------------------------------------------------------
// Detection efficiency

double chsh_with_misses(const CorrelationTensor& ct, const ChshSettings& s, double eta) {
    const double miss = 1.0 - eta;
    auto e = [&](const BlochVector& a, const BlochVector& b) {
        return eta * eta * ct.correlation(a, b) + eta * miss * (a.vec().dot(ct.alice) + b.vec().dot(ct.bob)) +
               miss * miss;
    };
    return std::abs(e(s.a, s.b) - e(s.a, s.b_prime)) + std::abs(e(s.a_prime, s.b_prime) + e(s.a_prime, s.b));
}

namespace {

struct PlaneCorrelations {
    // Restriction of the correlation data to the x-z plane.
    double txx, txz, tzx, tzz, ax, az, bx, bz;

    explicit PlaneCorrelations(const CorrelationTensor& ct)
        : txx(ct.t(0, 0)), txz(ct.t(0, 2)), tzx(ct.t(2, 0)), tzz(ct.t(2, 2)), ax(ct.alice(0)), az(ct.alice(2)),
          bx(ct.bob(0)), bz(ct.bob(2)) {}

    double value(const std::vector<double>& x, double eta) const {
        const double miss = 1.0 - eta;
        const double sa[2] = {std::sin(x[0]), std::sin(x[1])}, ca[2] = {std::cos(x[0]), std::cos(x[1])};
        const double sb[2] = {std::sin(x[2]), std::sin(x[3])}, cb[2] = {std::cos(x[2]), std::cos(x[3])};
        auto e = [&](int i, int j) {
            const double corr = sa[i] * (txx * sb[j] + txz * cb[j]) + ca[i] * (tzx * sb[j] + tzz * cb[j]);
            const double marg = sa[i] * ax + ca[i] * az + sb[j] * bx + cb[j] * bz;
            return eta * eta * corr + eta * miss * marg + miss * miss;
        };
        return std::abs(e(0, 0) - e(0, 1)) + std::abs(e(1, 1) + e(1, 0));
    }
};

}  // namespace

BoundReport no_fair_sampling_chsh_max(const DensityMatrix& rho, double eta) {
    require_two_qubits(rho);
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("efficiency must lie in [0, 1]");
    const CorrelationTensor ct = correlation_tensor(rho);
    const PlaneCorrelations plane(ct);
    auto objective = [&](const std::vector<double>& x) { return plane.value(x, eta); };
    const auto best = opt::grid_then_refine_max(objective, {0.0, 0.0, 0.0, 0.0}, {kDeg15, kDeg15, kDeg15, kDeg15},
                                                {24, 24, 24, 24}, 4, 0.05);
    ChshSettings s{BlochVector::in_xz_plane(best.x[0]), BlochVector::in_xz_plane(best.x[1]),
                   BlochVector::in_xz_plane(best.x[2]), BlochVector::in_xz_plane(best.x[3])};
    BoundReport r;
    r.settings = s;
    r.s = chsh_with_misses(ct, s, eta);
    r.violated = r.s > kLocalBound;
    return r;
}

EfficiencyFamily EfficiencyFamily::maximal(double visibility) {
    return {Kind::Maximal, {1.0 / std::sqrt(2.0)}, visibility};
}

EfficiencyFamily EfficiencyFamily::nonmaximal(std::vector<double> alphas, double visibility) {
    if (alphas.empty()) alphas = {1.0 / std::sqrt(2.0), 0.6, 0.5, 0.4, 0.3, 0.25, 0.2, 0.15, 0.1, 0.07, 0.05};
    return {Kind::Nonmaximal, std::move(alphas), visibility};
}

namespace {
// Violation must clear the local bound by more than rounding noise.
constexpr double kViolationMargin = 1e-11;
constexpr double kEtaTol = 1e-6;
}  // namespace

EfficiencyPoint efficiency_threshold_for(const DensityMatrix& rho, double alpha_label) {
    EfficiencyPoint p;
    p.alpha = alpha_label;
    auto violates = [&](double eta) { return no_fair_sampling_chsh_max(rho, eta).s > kLocalBound + kViolationMargin; };
    p.violates_at_unit_efficiency = violates(1.0);
    if (!p.violates_at_unit_efficiency) {
        p.lo = 1.0;
        p.hi = 1.0;
        p.eta = 1.0;
        p.converged = false;
        return p;
    }
    // Below 1/2 no state can beat the local bound with this assignment.
    const auto bracket = opt::bisect_boundary(violates, 0.5, 1.0, kEtaTol);
    p.lo = bracket.lo;
    p.hi = bracket.hi;
    p.eta = bracket.hi;
    p.converged = bracket.converged;
    return p;
}

EfficiencyThreshold critical_efficiency(const EfficiencyFamily& family) {
    if (family.alphas.empty()) throw std::invalid_argument("efficiency family needs at least one alpha");
    EfficiencyThreshold out;
    bool have = false;
    for (double alpha : family.alphas) {
        const StateVector psi = nonmax_state(alpha);
        Matrix m = family.visibility * psi.density().mat() + (1.0 - family.visibility) * identity(4) / 4.0;
        const DensityMatrix rho = DensityMatrix::normalized({2, 2}, m);
        EfficiencyPoint p = efficiency_threshold_for(rho, alpha);
        out.sweep.push_back(p);
        if (!p.violates_at_unit_efficiency) continue;
        if (!have || p.eta < out.eta) {
            out.eta = p.eta;
            out.alpha = p.alpha;
            out.lo = p.lo;
            out.hi = p.hi;
            out.converged = p.converged;
            have = true;
        }
    }
    if (!have) {
        out.eta = 1.0;
        out.lo = out.hi = 1.0;
        out.converged = false;
    }
    return out;
}

double speed_lower_bound(double separation_m, double timing_uncertainty_s, double c) {
    if (!(separation_m > 0.0) || !(timing_uncertainty_s > 0.0))
        throw std::invalid_argument("separation and timing uncertainty must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("speed of light must be positive");
    return separation_m / timing_uncertainty_s / c;
}

}  // namespace qphoton
