#include "qphoton/tomography.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace qphoton {

namespace {

const std::array<Matrix, 4>& paulis() {
    static const std::array<Matrix, 4> p{identity(2), pauli_x(), pauli_y(), pauli_z()};
    return p;
}

// sigma_i (x) sigma_j for k = 4i + j.
const std::array<Matrix, 16>& pauli_products() {
    static const std::array<Matrix, 16> basis = [] {
        std::array<Matrix, 16> b;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) b[static_cast<std::size_t>(4 * i + j)] = kron(paulis()[i], paulis()[j]);
        return b;
    }();
    return basis;
}

constexpr int kOutcomes[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};

int sign_of(int outcome) { return outcome == 0 ? 1 : -1; }

std::vector<std::array<Matrix, 4>> all_projectors(const TomographySettings& settings) {
    std::vector<std::array<Matrix, 4>> out(settings.size());
    for (std::size_t s = 0; s < settings.size(); ++s)
        for (int o = 0; o < 4; ++o)
            out[s][static_cast<std::size_t>(o)] = settings.projector(s, kOutcomes[o][0], kOutcomes[o][1]);
    return out;
}

void check_shape(const TomographyData& data, const TomographySettings& settings) {
    if (data.freq.size() != settings.size() || data.weight.size() != settings.size())
        throw std::invalid_argument("tomography data and settings disagree in size");
}

double ll_with(const Matrix& rho, const TomographyData& data, const std::vector<std::array<Matrix, 4>>& proj) {
    double ll = 0.0;
    for (std::size_t s = 0; s < proj.size(); ++s) {
        if (data.weight[s] <= 0.0) continue;
        for (std::size_t o = 0; o < 4; ++o) {
            const double f = data.freq[s][o];
            if (f <= 0.0) continue;
            const double p = (rho * proj[s][o]).trace().real();
            if (p <= 0.0) return -std::numeric_limits<double>::infinity();
            ll += data.weight[s] * f * std::log(p);
        }
    }
    return ll;
}

Matrix from_factor(const Matrix& t) {
    Matrix rho = t.adjoint() * t;
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

}  // namespace

Matrix TomographySettings::projector(std::size_t s, int oa, int ob) const {
    const auto& st = settings.at(s);
    return kron(projector_from_bloch(st.a, sign_of(oa)), projector_from_bloch(st.b, sign_of(ob)));
}

Eigen::MatrixXd TomographySettings::design_matrix() const {
    Eigen::MatrixXd d(static_cast<Eigen::Index>(settings.size()), 16);
    for (std::size_t s = 0; s < settings.size(); ++s) {
        const Matrix p = projector(s, 0, 0);
        for (std::size_t k = 0; k < 16; ++k)
            d(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) = (p * pauli_products()[k]).trace().real();
    }
    return d;
}

TomographySettings standard_settings() {
    const BlochVector analyzers[4] = {kPlusZ, kMinusZ, kPlusX, kPlusY};
    TomographySettings out;
    for (const auto& a : analyzers)
        for (const auto& b : analyzers) out.settings.push_back({a, b});
    return out;
}

TomographyData TomographyData::from_counts(const CountTable& counts, std::size_t n_settings) {
    TomographyData data;
    data.freq.assign(n_settings, {0.0, 0.0, 0.0, 0.0});
    data.weight.assign(n_settings, 0.0);
    for (const auto& [key, n] : counts.entries()) {
        const auto& [sid, pattern] = key;
        if (sid < 0 || static_cast<std::size_t>(sid) >= n_settings)
            throw std::invalid_argument("count table refers to an unknown setting");
        if (pattern.size() != 2 || pattern[0] < 0 || pattern[0] > 1 || pattern[1] < 0 || pattern[1] > 1)
            throw std::invalid_argument("tomography counts need two-qubit outcomes");
        const auto s = static_cast<std::size_t>(sid);
        data.freq[s][static_cast<std::size_t>(2 * pattern[0] + pattern[1])] += static_cast<double>(n);
        data.weight[s] += static_cast<double>(n);
    }
    for (std::size_t s = 0; s < n_settings; ++s)
        if (data.weight[s] > 0.0)
            for (double& f : data.freq[s]) f /= data.weight[s];
    return data;
}

TomographyData TomographyData::exact(const DensityMatrix& rho, const TomographySettings& settings) {
    if (rho.dims() != Dims{2, 2}) throw std::invalid_argument("tomography is implemented for two qubits");
    TomographyData data;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        std::array<double, 4> f{};
        for (int o = 0; o < 4; ++o)
            f[static_cast<std::size_t>(o)] =
                std::max(0.0, (rho.mat() * settings.projector(s, kOutcomes[o][0], kOutcomes[o][1])).trace().real());
        data.freq.push_back(f);
        data.weight.push_back(1.0);
    }
    return data;
}

CountTable simulate_counts(const DensityMatrix& rho, const TomographySettings& settings,
                           std::uint64_t shots_per_setting, Rng& rng) {
    if (shots_per_setting < 1) throw std::invalid_argument("shots_per_setting must be at least 1");
    if (rho.dims() != Dims{2, 2}) throw std::invalid_argument("tomography is implemented for two qubits");
    CountTable table;
    for (std::size_t s = 0; s < settings.size(); ++s) {
        const BlochVector an[2] = {settings.settings[s].a, settings.settings[s].b};
        const auto probs = born_probabilities(rho, an);
        // multinomial as a chain of conditional binomials
        std::uint64_t left = shots_per_setting;
        double mass = 1.0;
        for (std::size_t o = 0; o < 4; ++o) {
            std::uint64_t n = left;
            if (o < 3) {
                const double q = mass > 0.0 ? std::clamp(probs[o] / mass, 0.0, 1.0) : 0.0;
                n = std::binomial_distribution<std::uint64_t>(left, q)(rng);
            }
            mass -= probs[o];
            left -= n;
            if (n > 0) table.add(static_cast<int>(s), {kOutcomes[o][0], kOutcomes[o][1]}, n);
        }
        table.add_gates(shots_per_setting);
    }
    return table;
}

Matrix linear_inversion(const TomographyData& data, const TomographySettings& settings) {
    check_shape(data, settings);
    const auto proj = all_projectors(settings);
    std::vector<std::pair<std::size_t, std::size_t>> rows;
    for (std::size_t s = 0; s < settings.size(); ++s)
        if (data.weight[s] > 0.0)
            for (std::size_t o = 0; o < 4; ++o) rows.emplace_back(s, o);

    // p_so = 1/4 tr(P_so) + 1/4 sum_k r_k tr(P_so sigma_k), k over the 15
    // non-identity Pauli products.
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 15);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto [s, o] = rows[r];
        const Matrix& p = proj[s][o];
        const auto ri = static_cast<Eigen::Index>(r);
        y(ri) = data.freq[s][o] - 0.25 * p.trace().real();
        for (std::size_t k = 1; k < 16; ++k)
            a(ri, static_cast<Eigen::Index>(k - 1)) = 0.25 * (p * pauli_products()[k]).trace().real();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (rows.size() < 15 || qr.rank() < 15)
        throw std::invalid_argument("tomography design matrix is singular for these data");
    const Eigen::VectorXd r = qr.solve(y);

    Matrix rho = pauli_products()[0];
    for (std::size_t k = 1; k < 16; ++k) rho += r(static_cast<Eigen::Index>(k - 1)) * pauli_products()[k];
    rho *= 0.25;
    return 0.5 * (rho + rho.adjoint());
}

DensityMatrix project_to_physical(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    if (ev.sum() <= 0.0) throw std::invalid_argument("matrix has no positive part");
    ev /= ev.sum();
    const Matrix rho = es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    Dims dims;
    for (auto d = m.rows(); d > 1; d /= 2) dims.push_back(2);
    return DensityMatrix::normalized(dims, rho);
}

double log_likelihood(const Matrix& rho, const TomographyData& data, const TomographySettings& settings) {
    check_shape(data, settings);
    return ll_with(rho, data, all_projectors(settings));
}

ReconstructionResult mle_reconstruct(const TomographyData& data, const TomographySettings& settings,
                                     double tolerance, int max_iter) {
    check_shape(data, settings);
    double total = 0.0;
    for (double w : data.weight) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("tomography data are empty");
    const auto proj = all_projectors(settings);

    Matrix t = identity(4) / 2.0;
    Matrix rho = from_factor(t);
    double ll = ll_with(rho, data, proj);
    double eps = 1.0;
    bool converged = false;
    int it = 0;
    for (; it < max_iter && !converged; ++it) {
        Matrix r = Matrix::Zero(4, 4);
        for (std::size_t s = 0; s < proj.size(); ++s) {
            if (data.weight[s] <= 0.0) continue;
            for (std::size_t o = 0; o < 4; ++o) {
                const double f = data.freq[s][o];
                if (f <= 0.0) continue;
                const double p = (rho * proj[s][o]).trace().real();
                r += (data.weight[s] * f / p) * proj[s][o];
            }
        }
        const Matrix g = r / total - identity(4);

        bool accepted = false;
        while (eps > 1e-12) {
            const Matrix t_new = t * (identity(4) + eps * g);
            const Matrix rho_new = from_factor(t_new);
            const double ll_new = ll_with(rho_new, data, proj);
            if (ll_new > ll) {
                converged = (ll_new - ll) / total < tolerance;
                t = t_new / std::sqrt((t_new.adjoint() * t_new).trace().real());
                rho = rho_new;
                ll = ll_new;
                eps = std::min(eps * 2.0, 16.0);
                accepted = true;
                break;
            }
            eps *= 0.5;
        }
        // no ascent direction left: stationary point
        if (!accepted) converged = true;
    }

    ReconstructionResult result{DensityMatrix::normalized({2, 2}, rho), ll, it, converged};
    // A physical projection of the direct inversion can occasionally sit
    // higher when the ascent stalls; never return the worse of the two.
    try {
        const DensityMatrix li = project_to_physical(linear_inversion(data, settings));
        const double ll_li = ll_with(li.mat(), data, proj);
        if (ll_li > result.log_likelihood) {
            result.matrix = li;
            result.log_likelihood = ll_li;
        }
    } catch (const std::invalid_argument&) {
    }
    return result;
}

ReconstructionResult mle_reconstruct(const CountTable& counts, const TomographySettings& settings,
                                     double tolerance, int max_iter) {
    return mle_reconstruct(TomographyData::from_counts(counts, settings.size()), settings, tolerance, max_iter);
}

}  // namespace qphoton
