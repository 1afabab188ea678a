#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qphoton/qcore.hpp"
#include "qphoton/sources.hpp"

using namespace qphoton;

namespace {
DensityMatrix ket_density(std::initializer_list<cplx> amps) { return StateVector::qubits(amps).density(); }
}  // namespace

TEST_CASE("state vector and density matrix invariants are enforced") {
    CHECK_THROWS_AS(StateVector({2}, Vector::Ones(2)), std::invalid_argument);
    CHECK_THROWS_AS(StateVector({2, 2}, Vector::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(StateVector({1}, Vector::Ones(1)), std::invalid_argument);

    Matrix not_hermitian = identity(2) / 2.0;
    not_hermitian(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityMatrix({2}, not_hermitian), std::invalid_argument);
    CHECK_THROWS_AS(DensityMatrix({2}, identity(2)), std::invalid_argument);
    Matrix negative(2, 2);
    negative << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityMatrix({2}, negative), std::invalid_argument);

    CHECK_THROWS_AS(BlochVector(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("tensor") {
    SUBCASE("maximally mixed factors") {
        const auto r = tensor(DensityMatrix::maximally_mixed({2}), DensityMatrix::maximally_mixed({2}));
        CHECK(r.dims() == Dims{2, 2});
        CHECK(oracle::max_abs(r.mat() - identity(4) / 4.0) < kExactTol);
    }
    SUBCASE("basis product") {
        const auto r = tensor(StateVector::basis({2}, {0}).density(), StateVector::basis({2}, {1}).density());
        CHECK(oracle::max_abs(r.mat() - StateVector::basis({2, 2}, {0, 1}).density().mat()) < kExactTol);
        CHECK(std::abs(r.mat()(1, 1) - 1.0) < kExactTol);
    }
    SUBCASE("singlet squared against the element-wise Kronecker oracle") {
        const auto s = bell_state(BellKind::PsiMinus).density();
        const auto r = tensor(s, s);
        CHECK(r.dims() == Dims{2, 2, 2, 2});
        CHECK(oracle::max_abs(r.mat() - oracle::kronecker(s.mat(), s.mat())) < kExactTol);
    }
    SUBCASE("qudit dims concatenate") {
        const auto r = tensor(DensityMatrix::maximally_mixed({4}), DensityMatrix::maximally_mixed({3}));
        CHECK(r.dims() == Dims{4, 3});
        CHECK(r.dim() == 12);
    }
}

TEST_CASE("partial_trace") {
    SUBCASE("singlet reduces to I/2") {
        const auto rho = bell_state(BellKind::PsiMinus).density();
        CHECK(oracle::max_abs(partial_trace(rho, {0}).mat() - identity(2) / 2.0) < kExactTol);
        CHECK(oracle::max_abs(partial_trace(rho, {1}).mat() - identity(2) / 2.0) < kExactTol);
    }
    SUBCASE("product state returns the kept factor") {
        Rng rng(3);
        const auto a = random_density_matrix({2}, rng);
        const auto b = random_density_matrix({2}, rng);
        CHECK(oracle::max_abs(partial_trace(tensor(a, b), {0}).mat() - a.mat()) < kExactTol);
    }
    SUBCASE("random two-qubit state against the double-sum oracle") {
        Rng rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const auto rho = random_density_matrix({2, 2}, rng);
            CHECK(oracle::max_abs(partial_trace(rho, {0}).mat() - oracle::trace_out_second(rho.mat(), 2, 2)) < kExactTol);
            CHECK(oracle::max_abs(partial_trace(rho, {1}).mat() - oracle::trace_out_first(rho.mat(), 2, 2)) < kExactTol);
        }
    }
    SUBCASE("qudit registers") {
        Rng rng(5);
        const auto rho = random_density_matrix({3, 4}, rng);
        CHECK(oracle::max_abs(partial_trace(rho, {0}).mat() - oracle::trace_out_second(rho.mat(), 3, 4)) < kExactTol);
        CHECK(oracle::max_abs(partial_trace(rho, {1}).mat() - oracle::trace_out_first(rho.mat(), 3, 4)) < kExactTol);
    }
    SUBCASE("invalid indices") {
        const auto rho = DensityMatrix::maximally_mixed({2, 2});
        CHECK_THROWS_AS(partial_trace(rho, {2}), std::out_of_range);
        CHECK_THROWS_AS(partial_trace(rho, {-1}), std::out_of_range);
        CHECK_THROWS_AS(partial_trace(rho, {}), std::invalid_argument);
        CHECK_THROWS_AS(partial_trace(rho, {0, 0}), std::invalid_argument);
    }
    SUBCASE("keeping everything is the identity map") {
        Rng rng(8);
        const auto rho = random_density_matrix({2, 2, 2}, rng);
        CHECK(oracle::max_abs(partial_trace(rho, {2, 0, 1}).mat() - rho.mat()) < kExactTol);
    }
}

TEST_CASE("property: partial_trace(tensor(a, b), {0}) == a") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int da = 2 + trial % 3, db = 2 + (trial / 3) % 2;
        const auto a = random_density_matrix({da}, rng);
        const auto b = random_density_matrix({db}, rng);
        CHECK(oracle::max_abs(partial_trace(tensor(a, b), {0}).mat() - a.mat()) < kExactTol);
    }
}

TEST_CASE("apply_local_unitary") {
    SUBCASE("identity leaves the state alone") {
        Rng rng(1);
        const auto rho = random_density_matrix({2, 2}, rng);
        CHECK(oracle::max_abs(apply_local_unitary(rho, identity(2), 1).mat() - rho.mat()) < kExactTol);
    }
    SUBCASE("bit flip") {
        const auto r = apply_local_unitary(StateVector::basis({2}, {0}).density(), pauli_x(), 0);
        CHECK(oracle::max_abs(r.mat() - StateVector::basis({2}, {1}).density().mat()) < kExactTol);
    }
    SUBCASE("bit-and-phase flip on qubit B of phi+ gives a psi state (full conjugation oracle)") {
        const auto phi = bell_state(BellKind::PhiPlus).density();
        const Matrix xz = pauli_x() * pauli_z();
        const auto r = apply_local_unitary(phi, xz, 1);
        const Matrix full = oracle::kronecker(Matrix::Identity(2, 2), xz);
        CHECK(oracle::max_abs(r.mat() - full * phi.mat() * full.adjoint()) < kExactTol);
        CHECK(fidelity(r, bell_state(BellKind::PsiMinus)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("non-unitary rejected") {
        Matrix m = identity(2);
        m(0, 0) = 0.5;
        CHECK_THROWS_AS(apply_local_unitary(DensityMatrix::maximally_mixed({2}), m, 0), std::invalid_argument);
        CHECK_THROWS_AS(apply_local_unitary(DensityMatrix::maximally_mixed({2, 3}), identity(2), 1),
                        std::invalid_argument);
    }
}

TEST_CASE("property: local unitaries preserve trace, Hermiticity and spectrum") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rho = random_density_matrix({2, 3}, rng);
        const int target = trial % 2;
        const Matrix u = random_unitary(rho.dims()[static_cast<std::size_t>(target)], rng);
        const auto out = apply_local_unitary(rho, u, target);
        CHECK(std::abs(out.mat().trace() - cplx(1.0)) < 1e-10);
        CHECK(oracle::max_abs(out.mat() - out.mat().adjoint()) < 1e-10);
        CHECK((out.eigenvalues() - rho.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("born_probabilities") {
    SUBCASE("singlet along z is perfectly anticorrelated") {
        const BlochVector s[2] = {kPlusZ, kPlusZ};
        const auto p = born_probabilities(bell_state(BellKind::PsiMinus).density(), s);
        CHECK(p(Outcome{{0, 1}}) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p(Outcome{{1, 0}}) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p(Outcome{{0, 0}}) < 1e-15);
        CHECK(p(Outcome{{1, 1}}) < 1e-15);
    }
    SUBCASE("|0> in the x basis is unbiased") {
        const BlochVector s[1] = {kPlusX};
        const auto p = born_probabilities(StateVector::basis({2}, {0}).density(), s);
        CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("singlet at relative angle matches the projector-trace oracle") {
        const auto rho = bell_state(BellKind::PsiMinus).density();
        for (double theta : {0.1, 0.5, 1.0, 2.0, 3.0}) {
            const BlochVector s[2] = {kPlusZ, BlochVector::in_xz_plane(theta)};
            const auto p = born_probabilities(rho, s);
            double p_equal = 0.0;
            for (int sa : {1, -1})
                for (int sb : {1, -1}) {
                    const double oracle_p = oracle::projector_probability(
                        rho.mat(), {oracle::bloch_projector(0, 0, 1, sa),
                                    oracle::bloch_projector(std::sin(theta), 0, std::cos(theta), sb)});
                    CHECK(std::abs(p(Outcome{{sa == 1 ? 0 : 1, sb == 1 ? 0 : 1}}) - oracle_p) < kExactTol);
                    if (sa == sb) p_equal += oracle_p;
                }
            // Equal outcomes for the singlet: sin^2(theta/2).
            CHECK(p_equal == doctest::Approx(std::pow(std::sin(theta / 2), 2)).epsilon(1e-12));
        }
    }
    SUBCASE("errors") {
        const BlochVector one[1] = {kPlusZ};
        CHECK_THROWS_AS(born_probabilities(DensityMatrix::maximally_mixed({2, 2}), one), std::invalid_argument);
        const BlochVector two[2] = {kPlusZ, kPlusZ};
        CHECK_THROWS_AS(born_probabilities(DensityMatrix::maximally_mixed({2, 3}), two), std::invalid_argument);
    }
}

TEST_CASE("property: Born probabilities sum to one over random states and settings") {
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + trial % 3;
        const auto rho = random_density_matrix(Dims(static_cast<std::size_t>(n), 2), rng, 1 + trial % 4);
        std::vector<BlochVector> s;
        for (int k = 0; k < n; ++k) s.push_back(random_bloch(rng));
        const auto p = born_probabilities(rho, s);
        double sum = 0.0;
        for (double v : p.probs()) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) < kExactTol);
    }
}

TEST_CASE("sample_outcome") {
    SUBCASE("point mass") {
        Rng rng(4);
        const ProbabilityTable t({2, 2}, {0.0, 0.0, 1.0, 0.0});
        for (int i = 0; i < 100; ++i) CHECK(sample_outcome(t, rng) == Outcome{{1, 0}});
    }
    SUBCASE("uniform over four outcomes, 1e6 draws within 5 sigma") {
        Rng rng(12345);
        const ProbabilityTable t({2, 2}, {0.25, 0.25, 0.25, 0.25});
        OutcomeSampler sampler(t);
        const int n = 1'000'000;
        std::vector<int> freq(4, 0);
        for (int i = 0; i < n; ++i) ++freq[sampler.sample_index(rng)];
        const double sigma = std::sqrt(0.25 * 0.75 / n);
        for (int f : freq) CHECK(std::abs(static_cast<double>(f) / n - 0.25) < 5 * sigma);
    }
    SUBCASE("fixed seed reproduces the sequence") {
        const ProbabilityTable t({2}, {0.3, 0.7});
        Rng r1(42), r2(42);
        for (int i = 0; i < 1000; ++i) CHECK(sample_outcome(t, r1) == sample_outcome(t, r2));
    }
}

TEST_CASE("property: empirical frequencies converge at the binomial rate") {
    Rng rng(31337);
    const int n = 100'000;
    for (int trial = 0; trial < 5; ++trial) {
        const auto rho = random_density_matrix({2, 2}, rng);
        const BlochVector s[2] = {random_bloch(rng), random_bloch(rng)};
        const auto p = born_probabilities(rho, s);
        OutcomeSampler sampler(p);
        std::vector<int> freq(4, 0);
        for (int i = 0; i < n; ++i) ++freq[sampler.sample_index(rng)];
        for (std::size_t k = 0; k < 4; ++k) {
            const double bound = 5 * std::sqrt(p[k] * (1 - p[k]) / n);
            CHECK(std::abs(static_cast<double>(freq[k]) / n - p[k]) <= bound + 1e-12);
        }
    }
}

TEST_CASE("fidelity") {
    const auto zero = StateVector::basis({2}, {0});
    const auto one = StateVector::basis({2}, {1});
    const auto plus = StateVector::qubits({1.0, 1.0});
    CHECK(fidelity(zero, zero) == doctest::Approx(1.0));
    CHECK(fidelity(zero, one) == doctest::Approx(0.0));
    // overlap oracle |<0|+>|^2
    const double overlap = std::norm(zero.amps().dot(plus.amps()));
    CHECK(fidelity(zero, plus) == doctest::Approx(overlap));
    CHECK(fidelity(zero, plus) == doctest::Approx(0.5).epsilon(1e-12));
    // mixed-state form agrees with the pure one
    CHECK(fidelity(zero.density(), plus.density()) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(fidelity(zero.density(), plus) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(fidelity(zero, bell_state(BellKind::PsiMinus)), std::invalid_argument);
}

TEST_CASE("projector_from_bloch") {
    CHECK(oracle::max_abs(projector_from_bloch(kPlusZ, 1) - StateVector::basis({2}, {0}).density().mat()) < kExactTol);
    CHECK(oracle::max_abs(projector_from_bloch(kPlusZ, -1) - StateVector::basis({2}, {1}).density().mat()) < kExactTol);
    CHECK(oracle::max_abs(projector_from_bloch(kPlusX, 1) - oracle::bloch_projector(1, 0, 0, 1)) < kExactTol);
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        const auto v = random_bloch(rng);
        const Matrix p = projector_from_bloch(v, 1), m = projector_from_bloch(v, -1);
        CHECK(oracle::max_abs(p * p - p) < kExactTol);
        CHECK(std::abs(p.trace() - cplx(1.0)) < kExactTol);
        CHECK(oracle::max_abs(p + m - identity(2)) < kExactTol);
        CHECK(oracle::max_abs(p - oracle::bloch_projector(v.x, v.y, v.z, 1)) < kExactTol);
        const Vector k = bloch_ket(v, 1);
        CHECK(oracle::max_abs(k * k.adjoint() - p) < kExactTol);
    }
}

TEST_CASE("qudit register support") {
    const auto psi = StateVector::basis({4, 2}, {3, 1});
    CHECK(psi.dim() == 8);
    CHECK(std::abs(psi[7] - cplx(1.0)) < kExactTol);
    const auto reduced = partial_trace(psi.density(), {0});
    CHECK(reduced.dims() == Dims{4});
    CHECK(std::abs(reduced.mat()(3, 3) - cplx(1.0)) < kExactTol);
    const BlochVector s[2] = {kPlusZ, kPlusZ};
    CHECK_THROWS_AS(born_probabilities(psi.density(), s), std::invalid_argument);
    const auto probs = computational_probabilities(psi.density());
    CHECK(probs(Outcome{{3, 1}}) == doctest::Approx(1.0));
}
