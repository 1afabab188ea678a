#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "oracles.hpp"
#include "qphoton/sources.hpp"
#include "qphoton/tomography.hpp"

using namespace qphoton;

namespace {

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
    return es.eigenvalues().minCoeff();
}

bool physical(const DensityMatrix& rho) {
    return std::abs(rho.mat().trace().real() - 1.0) < 1e-10 && min_eigenvalue(rho.mat()) > -1e-9 &&
           oracle::max_abs(rho.mat() - rho.mat().adjoint()) < 1e-12;
}

}  // namespace

TEST_CASE("standard settings") {
    const auto st = standard_settings();
    CHECK(st.size() == 16);
    // rank oracle: independent QR on the design matrix
    Eigen::FullPivLU<Eigen::MatrixXd> lu(st.design_matrix());
    CHECK(lu.rank() == 16);
    bool has_zz = false;
    for (const auto& s : st.settings) has_zz |= (s.a.vec() - kPlusZ.vec()).norm() < 1e-15 && (s.b.vec() - kPlusZ.vec()).norm() < 1e-15;
    CHECK(has_zz);
    // (+,+) projector of setting 0 is |00><00|
    CHECK(oracle::max_abs(st.projector(0, 0, 0) - StateVector::basis({2, 2}, {0, 0}).density().mat()) < 1e-15);
}

TEST_CASE("simulate_counts") {
    const auto st = standard_settings();
    SUBCASE("|00> in z(x)z lands in 00") {
        Rng rng(1);
        const auto t = simulate_counts(StateVector::basis({2, 2}, {0, 0}).density(), st, 1000, rng);
        CHECK(t.count(0, {0, 0}) == 1000);
        CHECK(t.setting_total(0) == 1000);
        CHECK(t.total_gates() == 16'000);
        CHECK(t.total_counts() == 16'000);
    }
    SUBCASE("frequencies within 5 sigma at 1e5 shots") {
        Rng rng(2);
        const auto rho = random_density_matrix({2, 2}, rng);
        const std::uint64_t shots = 100'000;
        const auto t = simulate_counts(rho, st, shots, rng);
        for (std::size_t s = 0; s < st.size(); ++s)
            for (int oa = 0; oa < 2; ++oa)
                for (int ob = 0; ob < 2; ++ob) {
                    const auto& set = st.settings[s];
                    const double p = oracle::projector_probability(
                        rho.mat(), {oracle::bloch_projector(set.a.x, set.a.y, set.a.z, oa == 0 ? 1 : -1),
                                    oracle::bloch_projector(set.b.x, set.b.y, set.b.z, ob == 0 ? 1 : -1)});
                    const double f = static_cast<double>(t.count(static_cast<int>(s), {oa, ob})) / shots;
                    CHECK(std::abs(f - p) <= 5 * std::sqrt(p * (1 - p) / shots) + 1e-12);
                }
    }
    SUBCASE("seed deterministic") {
        Rng a(9), b(9);
        const auto rho = werner(0.7);
        CHECK(simulate_counts(rho, st, 500, a) == simulate_counts(rho, st, 500, b));
    }
    Rng rng(3);
    CHECK_THROWS_AS(simulate_counts(werner(1.0), st, 0, rng), std::invalid_argument);
}

TEST_CASE("count tables round trip through delimited text") {
    Rng rng(4);
    const auto st = standard_settings();
    const auto t = simulate_counts(werner(0.9), st, 200, rng);
    std::stringstream ss;
    t.write_csv(ss);
    const auto back = CountTable::read_csv(ss);
    CHECK(back == t);
    const auto a = linear_inversion(TomographyData::from_counts(t, st.size()), st);
    const auto b = linear_inversion(TomographyData::from_counts(back, st.size()), st);
    CHECK(oracle::max_abs(a - b) == 0.0);
}

TEST_CASE("linear inversion") {
    const auto st = standard_settings();
    SUBCASE("exact data of werner(0.8)") {
        const auto w = werner(0.8);
        CHECK(oracle::max_abs(linear_inversion(TomographyData::exact(w, st), st) - w.mat()) < 1e-10);
    }
    SUBCASE("exact data of the singlet give the +-1/2 matrix") {
        const Matrix m = linear_inversion(TomographyData::exact(bell_state(BellKind::PsiMinus).density(), st), st);
        Matrix expected = Matrix::Zero(4, 4);
        expected(1, 1) = expected(2, 2) = 0.5;
        expected(1, 2) = expected(2, 1) = -0.5;
        CHECK(oracle::max_abs(m - expected) < 1e-10);
    }
    SUBCASE("property: exact data reproduce random states") {
        Rng rng(5);
        for (int i = 0; i < 50; ++i) {
            const auto rho = random_density_matrix({2, 2}, rng, 1 + i % 4);
            CHECK(oracle::max_abs(linear_inversion(TomographyData::exact(rho, st), st) - rho.mat()) < 1e-10);
        }
    }
    SUBCASE("few counts of a near-pure state can come out unphysical") {
        const auto near_pure = werner(0.99);
        int negative = 0;
        for (int seed = 0; seed < 50; ++seed) {
            Rng rng(static_cast<std::uint64_t>(seed));
            const auto t = simulate_counts(near_pure, st, 100, rng);
            const Matrix m = linear_inversion(TomographyData::from_counts(t, st.size()), st);
            CHECK(std::abs(m.trace().real() - 1.0) < 1e-10);
            CHECK(oracle::max_abs(m - m.adjoint()) < 1e-14);
            negative += min_eigenvalue(m) < -1e-9 ? 1 : 0;
        }
        CHECK(negative >= 1);
    }
    SUBCASE("a single setting cannot be inverted") {
        CountTable t;
        t.add(0, {0, 1}, 10);
        CHECK_THROWS_AS(linear_inversion(TomographyData::from_counts(t, st.size()), st), std::invalid_argument);
    }
}

TEST_CASE("maximum-likelihood reconstruction") {
    const auto st = standard_settings();
    const auto singlet = bell_state(BellKind::PsiMinus);
    SUBCASE("singlet counts at 1e5 shots per setting") {
        Rng rng(6);
        const auto r = mle_reconstruct(simulate_counts(singlet.density(), st, 100'000, rng), st);
        CHECK(physical(r.matrix));
        CHECK(fidelity(r.matrix, singlet) >= 0.99);
    }
    SUBCASE("exact probabilities") {
        const auto r = mle_reconstruct(TomographyData::exact(singlet.density(), st), st);
        CHECK(physical(r.matrix));
        CHECK(fidelity(r.matrix, singlet) >= 1 - 1e-6);
        Rng rng(7);
        const auto rho = random_density_matrix({2, 2}, rng, 2);
        const auto r2 = mle_reconstruct(TomographyData::exact(rho, st), st);
        CHECK(fidelity(r2.matrix, rho) >= 1 - 1e-6);
    }
    SUBCASE("degenerate single-setting input stays physical") {
        CountTable t;
        t.add(0, {0, 0}, 50);
        t.add(0, {1, 1}, 50);
        const auto r = mle_reconstruct(t, st);
        CHECK(physical(r.matrix));
        CountTable one;
        one.add(5, {1, 0}, 3);
        CHECK(physical(mle_reconstruct(one, st).matrix));
    }
    SUBCASE("iteration cap reports non-convergence") {
        Rng rng(8);
        const auto r = mle_reconstruct(simulate_counts(singlet.density(), st, 1000, rng), st, 1e-300, 3);
        CHECK_FALSE(r.converged);
        CHECK(r.iterations == 3);
        CHECK(physical(r.matrix));
    }
    CHECK_THROWS_AS(mle_reconstruct(CountTable{}, st), std::invalid_argument);
}

TEST_CASE("property: MLE is physical and at least as likely as projected inversion") {
    const auto st = standard_settings();
    Rng rng(10);
    for (int i = 0; i < 100; ++i) {
        const auto rho = random_density_matrix({2, 2}, rng, 1 + i % 4);
        const auto counts = simulate_counts(rho, st, 200, rng);
        const auto data = TomographyData::from_counts(counts, st.size());
        const auto r = mle_reconstruct(data, st);
        CHECK(physical(r.matrix));
        CHECK(r.log_likelihood == doctest::Approx(log_likelihood(r.matrix.mat(), data, st)).epsilon(1e-9));
        const auto li = project_to_physical(linear_inversion(data, st));
        CHECK(r.log_likelihood >= log_likelihood(li.mat(), data, st) - 1e-9);
    }
}

TEST_CASE("property: MLE physical on adversarial count tables") {
    const auto st = standard_settings();
    Rng rng(11);
    std::uniform_int_distribution<int> setting(0, 15), bit(0, 1);
    std::uniform_int_distribution<std::uint64_t> count(1, 1000);
    for (int i = 0; i < 30; ++i) {
        CountTable t;
        const int entries = 1 + i % 12;
        for (int e = 0; e < entries; ++e) t.add(setting(rng), {bit(rng), bit(rng)}, count(rng));
        CHECK(physical(mle_reconstruct(t, st, 1e-9, 2000).matrix));
    }
}

TEST_CASE("property: fidelity improves with shots on average") {
    const auto st = standard_settings();
    Rng pick(12);
    const auto rho = random_density_matrix({2, 2}, pick, 2);
    std::vector<double> mean_f;
    int inversions = 0;
    for (std::uint64_t shots : {100u, 1000u, 10'000u, 100'000u}) {
        double sum = 0.0;
        for (int seed = 0; seed < 20; ++seed) {
            Rng rng(1000 + static_cast<std::uint64_t>(seed));
            sum += fidelity(mle_reconstruct(simulate_counts(rho, st, shots, rng), st).matrix, rho);
        }
        mean_f.push_back(sum / 20);
    }
    for (std::size_t i = 1; i < mean_f.size(); ++i) inversions += mean_f[i] < mean_f[i - 1] ? 1 : 0;
    CHECK(inversions <= 2);
    CHECK(mean_f.back() > mean_f.front());
}
