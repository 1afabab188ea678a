// qcore.hpp
// Dense complex linear algebra for small multi-qudit registers.
//
// Subsystems are ordered as declared: subsystem 0 is the leftmost ket label
// and the most significant digit of the flattened index, so tensor() is the
// ordinary Kronecker product and |01> means subsystem 0 in |0>, subsystem 1
// in |1>.

#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qphoton {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Dims = std::vector<int>;
using Rng = std::mt19937_64;

// Exact-algebra tolerance and eigenvalue-positivity tolerance.
inline constexpr double kExactTol = 1e-12;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kUnitaryTol = 1e-10;

std::size_t total_dim(const Dims& dims);

class DensityMatrix;

class StateVector {
public:
    // Throws std::invalid_argument unless the amplitudes have unit norm and
    // the right length.
    StateVector(Dims dims, Vector amps);

    // Rescales amps to unit norm first. Throws on a zero vector.
    static StateVector normalized(Dims dims, Vector amps);
    static StateVector basis(Dims dims, const std::vector<int>& pattern);
    static StateVector qubits(std::initializer_list<cplx> amps);

    const Dims& dims() const { return dims_; }
    const Vector& amps() const { return amps_; }
    std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
    int num_subsystems() const { return static_cast<int>(dims_.size()); }
    cplx operator[](std::size_t i) const { return amps_(static_cast<Eigen::Index>(i)); }

    DensityMatrix density() const;

private:
    Dims dims_;
    Vector amps_;
};

class DensityMatrix {
public:
    // Throws std::invalid_argument unless mat is Hermitian, trace one and
    // positive semidefinite (within kExactTol / kPsdTol).
    DensityMatrix(Dims dims, Matrix mat);

    // Hermitizes and divides by the trace before validating.
    static DensityMatrix normalized(Dims dims, Matrix mat);
    static DensityMatrix maximally_mixed(Dims dims);

    const Dims& dims() const { return dims_; }
    const Matrix& mat() const { return mat_; }
    std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }
    int num_subsystems() const { return static_cast<int>(dims_.size()); }
    bool all_qubits() const;

    Eigen::VectorXd eigenvalues() const;
    double purity() const;

private:
    Dims dims_;
    Matrix mat_;
};

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    BlochVector() = default;
    // Throws unless x^2+y^2+z^2 = 1 within kExactTol.
    BlochVector(double x, double y, double z);

    // Polar angle theta from +z, azimuth phi from +x.
    static BlochVector from_angles(double theta, double phi);
    // Direction in the x-z plane at polar angle theta.
    static BlochVector in_xz_plane(double theta) { return from_angles(theta, 0.0); }
    // Normalizes an arbitrary nonzero vector.
    static BlochVector from_vector(const Eigen::Vector3d& v);

    Eigen::Vector3d vec() const { return {x, y, z}; }
};

inline const BlochVector kPlusX{1.0, 0.0, 0.0};
inline const BlochVector kPlusY{0.0, 1.0, 0.0};
inline const BlochVector kPlusZ{0.0, 0.0, 1.0};
inline const BlochVector kMinusZ{0.0, 0.0, -1.0};

struct Outcome {
    std::vector<int> pattern;

    bool operator==(const Outcome&) const = default;
    auto operator<=>(const Outcome&) const = default;
};

// Probability distribution over outcome patterns of a register, indexed by
// the flattened pattern (same ordering as the state index).
class ProbabilityTable {
public:
    ProbabilityTable(Dims dims, std::vector<double> probs);

    const Dims& dims() const { return dims_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }

    double operator[](std::size_t index) const { return probs_[index]; }
    double operator()(const Outcome& outcome) const;

    Outcome outcome_at(std::size_t index) const;
    std::size_t index_of(const Outcome& outcome) const;

private:
    Dims dims_;
    std::vector<double> probs_;
};

// Pauli matrices and single-qubit gates.
Matrix identity(int d);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
// v.sigma for a Bloch direction.
Matrix spin_observable(const BlochVector& v);

Matrix kron(const Matrix& a, const Matrix& b);

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
StateVector tensor(const StateVector& a, const StateVector& b);

// Keeps the listed subsystems (any order; result follows ascending index
// order). Throws std::out_of_range for an invalid index and
// std::invalid_argument for an empty or repeated set.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);
// Same operation on an unvalidated (possibly unnormalized) operator.
Matrix partial_trace(const Matrix& op, const Dims& dims, const std::vector<int>& keep);

// Lifts a local operator acting on `target` to the full register.
Matrix embed(const Matrix& local, const Dims& dims, int target);
// Lifts an operator acting on the contiguous block [first, first + count).
Matrix embed_block(const Matrix& block, const Dims& dims, int first, int count);

bool is_unitary(const Matrix& u, double tol = kUnitaryTol);

// Throws std::invalid_argument if u is not unitary on the target dimension.
DensityMatrix apply_local_unitary(const DensityMatrix& rho, const Matrix& u, int target);
StateVector apply_local_unitary(const StateVector& psi, const Matrix& u, int target);

// Projector onto the +v (sign = +1) or -v (sign = -1) eigenstate of v.sigma.
Matrix projector_from_bloch(const BlochVector& v, int sign);
// The +v eigenket (index 0) or -v eigenket (index 1) as a column.
Vector bloch_ket(const BlochVector& v, int sign);

// Outcome 0 of qubit i is the projection onto +settings[i], outcome 1 onto
// -settings[i]. Qubit registers only.
ProbabilityTable born_probabilities(const DensityMatrix& rho,
                                    std::span<const BlochVector> settings);
// Computational-basis probabilities (any local dimensions).
ProbabilityTable computational_probabilities(const DensityMatrix& rho);

// Reusable sampler over a fixed distribution.
class OutcomeSampler {
public:
    explicit OutcomeSampler(const ProbabilityTable& table);
    Outcome operator()(Rng& rng);
    std::size_t sample_index(Rng& rng);

private:
    ProbabilityTable table_;
    std::discrete_distribution<std::size_t> dist_;
};

Outcome sample_outcome(const ProbabilityTable& probs, Rng& rng);

double fidelity(const StateVector& a, const StateVector& b);
double fidelity(const DensityMatrix& a, const StateVector& b);
double fidelity(const DensityMatrix& a, const DensityMatrix& b);

// Random instances for tests and demos.
StateVector random_state(const Dims& dims, Rng& rng);
// Ginibre ensemble with the given rank (0 = full rank).
DensityMatrix random_density_matrix(const Dims& dims, Rng& rng, int rank = 0);
// Haar-random unitary.
Matrix random_unitary(int d, Rng& rng);
BlochVector random_bloch(Rng& rng);

}  // namespace qphoton
