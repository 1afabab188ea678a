#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "qphoton/belltest.hpp"
#include "qphoton/distill.hpp"
#include "qphoton/sources.hpp"

using namespace qphoton;

namespace {

const double kSqrt2 = std::sqrt(2.0);

Matrix random_contraction(Rng& rng) {
    Matrix m = Matrix::Zero(2, 2);
    std::normal_distribution<double> g;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = cplx(g(rng), g(rng));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.adjoint() * m);
    return m / std::sqrt(es.eigenvalues().maxCoeff() * 1.0000001);
}

}  // namespace

TEST_CASE("local_filter") {
    Rng rng(1);
    const auto rho = random_density_matrix({2, 2}, rng);
    const auto same = local_filter(rho, LocalFilter{});
    CHECK(same.success_probability == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle::max_abs(same.state.mat() - rho.mat()) < 1e-12);

    const auto p01 = StateVector::basis({2, 2}, {0, 1}).density();
    const double eps = 0.3;
    Matrix a = Matrix::Identity(2, 2);
    a(1, 1) = eps;
    const auto out = local_filter(p01, LocalFilter(a, identity(2)));
    CHECK(out.success_probability == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle::max_abs(out.state.mat() - p01.mat()) < 1e-12);

    Matrix big = 1.2 * identity(2);
    CHECK_THROWS_AS(LocalFilter(big, identity(2)), std::invalid_argument);
    Matrix kill = Matrix::Zero(2, 2);
    kill(0, 0) = 1.0;
    CHECK_THROWS_AS(local_filter(StateVector::basis({2, 2}, {1, 1}).density(), LocalFilter(kill, identity(2))),
                    std::domain_error);
}

TEST_CASE("property: filtering keeps states physical and reports the raw trace") {
    Rng rng(2);
    for (int i = 0; i < 300; ++i) {
        const auto rho = random_density_matrix({2, 2}, rng, 1 + i % 4);
        const LocalFilter f(random_contraction(rng), random_contraction(rng));
        const auto out = local_filter(rho, f);
        const Matrix k = oracle::kronecker(f.a, f.b);
        const double raw = (k * rho.mat() * k.adjoint()).trace().real();
        CHECK(std::abs(out.success_probability - raw) < 1e-12);
        CHECK(out.success_probability > 0.0);
        CHECK(out.success_probability <= 1.0 + 1e-12);
        CHECK(std::abs(out.state.mat().trace().real() - 1.0) < 1e-10);
        Eigen::SelfAdjointEigenSolver<Matrix> es(out.state.mat());
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
        CHECK(chsh_max_analytic(out.state) <= 2 * kSqrt2 + 1e-9);
    }
}

TEST_CASE("procrustean filter") {
    CHECK(oracle::max_abs(procrustean_filter_for(1.0 / kSqrt2).a - identity(2)) < 1e-12);
    for (double alpha : {0.9, 0.8, 0.3, 0.1}) {
        const double beta = std::sqrt(1 - alpha * alpha);
        const auto out = local_filter(nonmax_state(alpha).density(), procrustean_filter_for(alpha));
        // direct algebra: both amplitudes become min(alpha, beta)
        const double m = std::min(alpha, beta);
        CHECK(out.success_probability == doctest::Approx(2 * m * m).epsilon(1e-12));
        CHECK(fidelity(out.state, bell_state(BellKind::PhiPlus)) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(chsh_optimize(out.state).s - 2 * kSqrt2) < 1e-6);
    }
    CHECK(local_filter(nonmax_state(0.9).density(), procrustean_filter_for(0.9)).success_probability ==
          doctest::Approx(2 * (1 - 0.81)).epsilon(1e-12));
    CHECK_THROWS_AS(procrustean_filter_for(0.0), std::invalid_argument);
    CHECK_THROWS_AS(procrustean_filter_for(1.0), std::invalid_argument);
}

TEST_CASE("hidden nonlocality") {
    SUBCASE("family member at S = 1.82") {
        const auto alpha = family_alpha_for(0.9, 1.82);
        REQUIRE(alpha.has_value());
        CHECK(chsh_max_analytic(distill_family_state(*alpha, 0.9)) == doctest::Approx(1.82).epsilon(1e-9));
        const auto r = hidden_nonlocality_demo(0.9, 1.82);
        CHECK(r.s_initial == doctest::Approx(1.82).epsilon(1e-6));
        CHECK(r.s_filtered >= 2.2);
        CHECK(r.hidden_nonlocality);
        const auto out = local_filter(distill_family_state(*alpha, 0.9), r.filter);
        CHECK(std::abs(out.success_probability - r.success_probability) < 1e-12);
        CHECK(chsh_optimize(out.state).s == doctest::Approx(r.s_filtered).epsilon(1e-9));
    }
    SUBCASE("werner states below 1/sqrt2 gain nothing") {
        for (double v : {0.3, 0.5, 0.6, 0.7}) {
            const auto r = hidden_nonlocality_demo(werner(v));
            CHECK_FALSE(r.hidden_nonlocality);
            CHECK(r.s_filtered <= 2.0 + 1e-9);
        }
    }
    SUBCASE("maximally entangled input stays at the Tsirelson value") {
        const auto r = hidden_nonlocality_demo(bell_state(BellKind::PhiPlus).density());
        CHECK(std::abs(r.s_initial - 2 * kSqrt2) < 1e-6);
        CHECK(r.s_filtered <= 2 * kSqrt2 + 1e-9);
        CHECK_FALSE(r.hidden_nonlocality);
    }
    CHECK_FALSE(family_alpha_for(0.5, 1.82).has_value());
    CHECK_THROWS_AS(hidden_nonlocality_demo(0.5, 1.82), std::invalid_argument);
}
