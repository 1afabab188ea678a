#include "qphoton/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace qphoton {

namespace {

void check_dims(const Dims& dims) {
    if (dims.empty()) throw std::invalid_argument("register needs at least one subsystem");
    for (int d : dims)
        if (d < 2) throw std::invalid_argument("local dimensions must be >= 2");
}

// Flattened index -> per-subsystem digits (subsystem 0 most significant).
std::vector<int> digits_of(std::size_t index, const Dims& dims) {
    std::vector<int> out(dims.size());
    for (std::size_t k = dims.size(); k-- > 0;) {
        out[k] = static_cast<int>(index % static_cast<std::size_t>(dims[k]));
        index /= static_cast<std::size_t>(dims[k]);
    }
    return out;
}

std::size_t index_from_digits(const std::vector<int>& digits, const Dims& dims) {
    std::size_t index = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (digits[k] < 0 || digits[k] >= dims[k])
            throw std::out_of_range("outcome index exceeds local dimension");
        index = index * static_cast<std::size_t>(dims[k]) + static_cast<std::size_t>(digits[k]);
    }
    return index;
}

Dims concat(const Dims& a, const Dims& b) {
    Dims out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace

std::size_t total_dim(const Dims& dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(Dims dims, Vector amps) : dims_(std::move(dims)), amps_(std::move(amps)) {
    check_dims(dims_);
    if (static_cast<std::size_t>(amps_.size()) != total_dim(dims_))
        throw std::invalid_argument("amplitude count does not match the register dimension");
    if (std::abs(amps_.squaredNorm() - 1.0) > kExactTol)
        throw std::invalid_argument("state vector is not normalized");
}

StateVector StateVector::normalized(Dims dims, Vector amps) {
    const double n = amps.norm();
    if (n <= 0.0 || !std::isfinite(n)) throw std::invalid_argument("cannot normalize a zero vector");
    amps /= n;
    return StateVector(std::move(dims), std::move(amps));
}

StateVector StateVector::basis(Dims dims, const std::vector<int>& pattern) {
    check_dims(dims);
    if (pattern.size() != dims.size()) throw std::invalid_argument("pattern length mismatch");
    Vector amps = Vector::Zero(static_cast<Eigen::Index>(total_dim(dims)));
    amps(static_cast<Eigen::Index>(index_from_digits(pattern, dims))) = 1.0;
    return StateVector(std::move(dims), std::move(amps));
}

StateVector StateVector::qubits(std::initializer_list<cplx> amps) {
    const std::size_t n = amps.size();
    int count = 0;
    while ((std::size_t{1} << count) < n) ++count;
    if (count == 0 || (std::size_t{1} << count) != n)
        throw std::invalid_argument("qubit register needs 2^n amplitudes");
    Vector v(static_cast<Eigen::Index>(n));
    Eigen::Index i = 0;
    for (const auto& a : amps) v(i++) = a;
    return normalized(Dims(static_cast<std::size_t>(count), 2), std::move(v));
}

DensityMatrix StateVector::density() const {
    return DensityMatrix::normalized(dims_, amps_ * amps_.adjoint());
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Dims dims, Matrix mat) : dims_(std::move(dims)), mat_(std::move(mat)) {
    check_dims(dims_);
    const auto n = static_cast<Eigen::Index>(total_dim(dims_));
    if (mat_.rows() != n || mat_.cols() != n)
        throw std::invalid_argument("density matrix side does not match the register dimension");
    if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > kExactTol)
        throw std::invalid_argument("density matrix is not Hermitian");
    if (std::abs(mat_.trace() - cplx(1.0)) > kExactTol)
        throw std::invalid_argument("density matrix trace is not one");
    if (eigenvalues().minCoeff() < -kPsdTol)
        throw std::invalid_argument("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::normalized(Dims dims, Matrix mat) {
    Matrix h = 0.5 * (mat + mat.adjoint());
    const double tr = h.trace().real();
    if (!(tr > 0.0)) throw std::invalid_argument("cannot normalize an operator with nonpositive trace");
    h /= tr;
    return DensityMatrix(std::move(dims), std::move(h));
}

DensityMatrix DensityMatrix::maximally_mixed(Dims dims) {
    check_dims(dims);
    const int n = static_cast<int>(total_dim(dims));
    return DensityMatrix(std::move(dims), identity(n) / static_cast<double>(n));
}

bool DensityMatrix::all_qubits() const {
    return std::all_of(dims_.begin(), dims_.end(), [](int d) { return d == 2; });
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(mat_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

double DensityMatrix::purity() const { return (mat_ * mat_).trace().real(); }

// ---------------------------------------------------------------------------
// BlochVector, Outcome tables

BlochVector::BlochVector(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
    if (std::abs(x * x + y * y + z * z - 1.0) > kExactTol)
        throw std::invalid_argument("Bloch vector must have unit length");
}

BlochVector BlochVector::from_angles(double theta, double phi) {
    return BlochVector(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                       std::cos(theta));
}

BlochVector BlochVector::from_vector(const Eigen::Vector3d& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero Bloch vector");
    return BlochVector(v.x() / n, v.y() / n, v.z() / n);
}

ProbabilityTable::ProbabilityTable(Dims dims, std::vector<double> probs)
    : dims_(std::move(dims)), probs_(std::move(probs)) {
    check_dims(dims_);
    if (probs_.size() != total_dim(dims_))
        throw std::invalid_argument("probability table size does not match dims");
    double sum = 0.0;
    for (double p : probs_) {
        if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument("negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kExactTol) throw std::invalid_argument("probabilities do not sum to one");
}

double ProbabilityTable::operator()(const Outcome& outcome) const {
    return probs_[index_of(outcome)];
}

Outcome ProbabilityTable::outcome_at(std::size_t index) const {
    if (index >= probs_.size()) throw std::out_of_range("outcome index");
    return Outcome{digits_of(index, dims_)};
}

std::size_t ProbabilityTable::index_of(const Outcome& outcome) const {
    if (outcome.pattern.size() != dims_.size()) throw std::invalid_argument("pattern length mismatch");
    return index_from_digits(outcome.pattern, dims_);
}

// ---------------------------------------------------------------------------
// Operators

Matrix identity(int d) { return Matrix::Identity(d, d); }

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix spin_observable(const BlochVector& v) {
    return v.x * pauli_x() + v.y * pauli_y() + v.z * pauli_z();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    return DensityMatrix::normalized(concat(a.dims(), b.dims()), kron(a.mat(), b.mat()));
}

StateVector tensor(const StateVector& a, const StateVector& b) {
    Matrix k = kron(Matrix(a.amps()), Matrix(b.amps()));
    return StateVector::normalized(concat(a.dims(), b.dims()), Vector(k.col(0)));
}

Matrix partial_trace(const Matrix& op, const Dims& dims, const std::vector<int>& keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace needs at least one kept subsystem");
    const int n = static_cast<int>(dims.size());
    std::set<int> kept;
    for (int k : keep) {
        if (k < 0 || k >= n) throw std::out_of_range("subsystem index out of range");
        if (!kept.insert(k).second) throw std::invalid_argument("repeated subsystem index");
    }
    Dims kept_dims, traced_dims;
    std::vector<int> kept_idx(kept.begin(), kept.end()), traced_idx;
    for (int k = 0; k < n; ++k) {
        if (kept.count(k)) {
            kept_dims.push_back(dims[static_cast<std::size_t>(k)]);
        } else {
            traced_idx.push_back(k);
            traced_dims.push_back(dims[static_cast<std::size_t>(k)]);
        }
    }
    const std::size_t dk = total_dim(kept_dims);
    const std::size_t dt = traced_dims.empty() ? 1 : total_dim(traced_dims);

    // Full index for (kept digits, traced digits).
    std::vector<std::size_t> full(dk * dt);
    std::vector<int> digits(dims.size());
    for (std::size_t i = 0; i < dk; ++i) {
        const auto kd = digits_of(i, kept_dims);
        for (std::size_t j = 0; j < dt; ++j) {
            const auto td = traced_dims.empty() ? std::vector<int>{} : digits_of(j, traced_dims);
            for (std::size_t a = 0; a < kept_idx.size(); ++a)
                digits[static_cast<std::size_t>(kept_idx[a])] = kd[a];
            for (std::size_t a = 0; a < traced_idx.size(); ++a)
                digits[static_cast<std::size_t>(traced_idx[a])] = td[a];
            full[i * dt + j] = index_from_digits(digits, dims);
        }
    }
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
    for (std::size_t r = 0; r < dk; ++r)
        for (std::size_t c = 0; c < dk; ++c) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j < dt; ++j)
                acc += op(static_cast<Eigen::Index>(full[r * dt + j]),
                          static_cast<Eigen::Index>(full[c * dt + j]));
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = acc;
        }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
    Matrix reduced = partial_trace(rho.mat(), rho.dims(), keep);
    std::set<int> kept(keep.begin(), keep.end());
    Dims kept_dims;
    for (int k : kept) kept_dims.push_back(rho.dims()[static_cast<std::size_t>(k)]);
    return DensityMatrix::normalized(std::move(kept_dims), std::move(reduced));
}

Matrix embed_block(const Matrix& block, const Dims& dims, int first, int count) {
    const int n = static_cast<int>(dims.size());
    if (first < 0 || count < 1 || first + count > n) throw std::out_of_range("target subsystem out of range");
    std::size_t left = 1, mid = 1, right = 1;
    for (int k = 0; k < n; ++k) {
        const auto d = static_cast<std::size_t>(dims[static_cast<std::size_t>(k)]);
        if (k < first) left *= d;
        else if (k < first + count) mid *= d;
        else right *= d;
    }
    if (static_cast<std::size_t>(block.rows()) != mid || static_cast<std::size_t>(block.cols()) != mid)
        throw std::invalid_argument("operator dimension does not match the target subsystems");
    return kron(kron(identity(static_cast<int>(left)), block), identity(static_cast<int>(right)));
}

Matrix embed(const Matrix& local, const Dims& dims, int target) {
    return embed_block(local, dims, target, 1);
}

bool is_unitary(const Matrix& u, double tol) {
    if (u.rows() != u.cols()) return false;
    return ((u.adjoint() * u) - identity(static_cast<int>(u.rows()))).cwiseAbs().maxCoeff() <= tol;
}

namespace {
void check_local_unitary(const Dims& dims, const Matrix& u, int target) {
    if (target < 0 || target >= static_cast<int>(dims.size()))
        throw std::out_of_range("target subsystem out of range");
    if (u.rows() != dims[static_cast<std::size_t>(target)] || u.cols() != u.rows())
        throw std::invalid_argument("unitary dimension does not match the target subsystem");
    if (!is_unitary(u)) throw std::invalid_argument("operator is not unitary");
}
}  // namespace

DensityMatrix apply_local_unitary(const DensityMatrix& rho, const Matrix& u, int target) {
    check_local_unitary(rho.dims(), u, target);
    const Matrix full = embed(u, rho.dims(), target);
    return DensityMatrix::normalized(rho.dims(), full * rho.mat() * full.adjoint());
}

StateVector apply_local_unitary(const StateVector& psi, const Matrix& u, int target) {
    check_local_unitary(psi.dims(), u, target);
    return StateVector::normalized(psi.dims(), embed(u, psi.dims(), target) * psi.amps());
}

Matrix projector_from_bloch(const BlochVector& v, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    return 0.5 * (identity(2) + static_cast<double>(sign) * spin_observable(v));
}

Vector bloch_ket(const BlochVector& v, int sign) {
    // Eigenvectors of v.sigma: (cos(t/2), e^{i p} sin(t/2)) and its orthogonal
    // complement (sin(t/2), -e^{i p} cos(t/2)).
    const double theta = std::acos(std::clamp(v.z, -1.0, 1.0));
    const double phi = std::atan2(v.y, v.x);
    const cplx phase = std::polar(1.0, phi);
    Vector k(2);
    if (sign == 1) {
        k << std::cos(theta / 2), phase * std::sin(theta / 2);
    } else if (sign == -1) {
        k << std::sin(theta / 2), -phase * std::cos(theta / 2);
    } else {
        throw std::invalid_argument("sign must be +1 or -1");
    }
    return k;
}

ProbabilityTable born_probabilities(const DensityMatrix& rho, std::span<const BlochVector> settings) {
    if (!rho.all_qubits()) throw std::invalid_argument("analyzer settings require a qubit register");
    if (settings.size() != rho.dims().size())
        throw std::invalid_argument("need exactly one analyzer setting per qubit");
    // Rotate every analyzer basis onto the computational basis, then read the
    // diagonal: p(o) = <o| W rho W^dagger |o>, rows of W_i are <+v|, <-v|.
    Matrix w = Matrix::Identity(1, 1);
    for (const auto& v : settings) {
        Matrix wi(2, 2);
        wi.row(0) = bloch_ket(v, 1).adjoint();
        wi.row(1) = bloch_ket(v, -1).adjoint();
        w = kron(w, wi);
    }
    const Matrix rotated = w * rho.mat() * w.adjoint();
    std::vector<double> probs(rho.dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        probs[i] = std::max(0.0, rotated(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real());
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return ProbabilityTable(rho.dims(), std::move(probs));
}

ProbabilityTable computational_probabilities(const DensityMatrix& rho) {
    std::vector<double> probs(rho.dim());
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        probs[i] = std::max(0.0, rho.mat()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real());
        sum += probs[i];
    }
    for (double& p : probs) p /= sum;
    return ProbabilityTable(rho.dims(), std::move(probs));
}

OutcomeSampler::OutcomeSampler(const ProbabilityTable& table)
    : table_(table), dist_(table.probs().begin(), table.probs().end()) {}

std::size_t OutcomeSampler::sample_index(Rng& rng) { return dist_(rng); }

Outcome OutcomeSampler::operator()(Rng& rng) { return table_.outcome_at(dist_(rng)); }

Outcome sample_outcome(const ProbabilityTable& probs, Rng& rng) {
    OutcomeSampler sampler(probs);
    return sampler(rng);
}

// ---------------------------------------------------------------------------
// Fidelity

double fidelity(const StateVector& a, const StateVector& b) {
    if (a.dims() != b.dims()) throw std::invalid_argument("fidelity: dimension mismatch");
    return std::min(1.0, std::norm(a.amps().dot(b.amps())));
}

double fidelity(const DensityMatrix& a, const StateVector& b) {
    if (a.dims() != b.dims()) throw std::invalid_argument("fidelity: dimension mismatch");
    const cplx v = b.amps().dot(a.mat() * b.amps());
    return std::clamp(v.real(), 0.0, 1.0);
}

namespace {
Matrix psd_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    Eigen::VectorXd ev = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * ev.asDiagonal() * solver.eigenvectors().adjoint();
}
}  // namespace

double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dims() != b.dims()) throw std::invalid_argument("fidelity: dimension mismatch");
    const Matrix sa = psd_sqrt(a.mat());
    const Matrix inner = sa * b.mat() * sa;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    const double root_sum = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Random instances

namespace {
Matrix ginibre(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = cplx(g(rng), g(rng));
    return m;
}
}  // namespace

StateVector random_state(const Dims& dims, Rng& rng) {
    check_dims(dims);
    return StateVector::normalized(dims, ginibre(static_cast<int>(total_dim(dims)), 1, rng).col(0));
}

DensityMatrix random_density_matrix(const Dims& dims, Rng& rng, int rank) {
    check_dims(dims);
    const int d = static_cast<int>(total_dim(dims));
    const int k = (rank <= 0 || rank > d) ? d : rank;
    const Matrix g = ginibre(d, k, rng);
    return DensityMatrix::normalized(dims, g * g.adjoint());
}

Matrix random_unitary(int d, Rng& rng) {
    const Matrix z = ginibre(d, d, rng);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        const cplx rii = r(i, i);
        q.col(i) *= std::abs(rii) > 0 ? rii / std::abs(rii) : cplx(1.0);
    }
    return q;
}

BlochVector random_bloch(Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Vector3d v;
    do {
        v = {g(rng), g(rng), g(rng)};
    } while (v.norm() < 1e-8);
    return BlochVector::from_vector(v);
}

}  // namespace qphoton
