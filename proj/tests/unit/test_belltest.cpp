#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qphoton/belltest.hpp"
#include "qphoton/sources.hpp"

using namespace qphoton;

namespace {
const double kSqrt2 = std::sqrt(2.0);
}

TEST_CASE("chsh with fixed settings") {
    const auto singlet = werner(1.0);
    const auto r = chsh(singlet, singlet_optimal_settings());
    CHECK(r.s == doctest::Approx(2 * kSqrt2).epsilon(1e-12));
    CHECK(r.violated);

    // A product state never exceeds the local bound.
    Rng rng(3);
    const auto product = StateVector::basis({2, 2}, {0, 0}).density();
    for (int i = 0; i < 200; ++i) {
        const ChshSettings s{random_bloch(rng), random_bloch(rng), random_bloch(rng), random_bloch(rng)};
        CHECK(chsh(product, s).s <= 2.0 + 1e-12);
    }
    // linearity in the visibility
    CHECK(chsh(werner(0.75), singlet_optimal_settings()).s == doctest::Approx(2 * kSqrt2 * 0.75).epsilon(1e-12));
}

TEST_CASE("chsh_optimize") {
    SUBCASE("singlet reaches 2 sqrt2 quickly") {
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = chsh_optimize(werner(1.0));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        CHECK(std::abs(r.s - 2 * kSqrt2) < 1e-6);
        CHECK(secs < 1.0);
        // The optimal settings are the polarization angles (0, 45; 22.5, 67.5)
        // up to a common rotation: relative Bloch angles of 90 deg within each
        // party and 45/135 deg across.
        const double aa = std::acos(std::clamp(r.settings.a.vec().dot(r.settings.a_prime.vec()), -1.0, 1.0));
        const double bb = std::acos(std::clamp(r.settings.b.vec().dot(r.settings.b_prime.vec()), -1.0, 1.0));
        CHECK(aa == doctest::Approx(std::numbers::pi / 2).epsilon(1e-4));
        CHECK(bb == doctest::Approx(std::numbers::pi / 2).epsilon(1e-4));
        // Grid-and-refine oracle over the x-z plane with the canonical layout.
        double best = 0.0;
        for (int i = 0; i < 720; ++i) {
            const double t = i * std::numbers::pi / 360;
            const ChshSettings s{BlochVector::in_xz_plane(0), BlochVector::in_xz_plane(std::numbers::pi / 2),
                                 BlochVector::in_xz_plane(t), BlochVector::in_xz_plane(t + std::numbers::pi / 2)};
            best = std::max(best, chsh(werner(1.0), s).s);
        }
        CHECK(best == doctest::Approx(r.s).epsilon(1e-6));
    }
    SUBCASE("maximally mixed state gives zero") {
        CHECK(chsh_optimize(DensityMatrix::maximally_mixed({2, 2})).s == doctest::Approx(0.0));
    }
    SUBCASE("Werner threshold state sits on the bound") {
        CHECK(std::abs(chsh_optimize(werner(1.0 / kSqrt2)).s - 2.0) < 1e-6);
    }
    SUBCASE("matches the closed-form maximum on random states") {
        Rng rng(41);
        for (int i = 0; i < 50; ++i) {
            const auto rho = random_density_matrix({2, 2}, rng, 1 + i % 4);
            CHECK(std::abs(chsh_optimize(rho).s - chsh_max_analytic(rho)) < 1e-6);
        }
    }
}

TEST_CASE("property: Tsirelson bound over random states") {
    Rng rng(1000);
    for (int i = 0; i < 1000; ++i) {
        const auto rho = random_density_matrix({2, 2}, rng, 1 + i % 4);
        CHECK(chsh_max_analytic(rho) <= 2 * kSqrt2 + 1e-9);
    }
    for (int i = 0; i < 100; ++i) {
        const auto rho = random_density_matrix({2, 2}, rng, 1 + i % 2);
        CHECK(chsh_optimize(rho).s <= 2 * kSqrt2 + 1e-9);
    }
}

TEST_CASE("property: chsh is invariant under simultaneous local rotations") {
    Rng rng(55);
    for (int i = 0; i < 100; ++i) {
        const auto rho = random_density_matrix({2, 2}, rng);
        const ChshSettings s{random_bloch(rng), random_bloch(rng), random_bloch(rng), random_bloch(rng)};
        const Matrix ua = random_unitary(2, rng), ub = random_unitary(2, rng);
        const auto rotated = apply_local_unitary(apply_local_unitary(rho, ua, 0), ub, 1);
        // v.sigma -> U (v.sigma) U^dagger; read the new direction off the Paulis.
        auto rotate = [](const Matrix& u, const BlochVector& v) {
            const Matrix m = u * spin_observable(v) * u.adjoint();
            return BlochVector::from_vector({0.5 * (m * pauli_x()).trace().real(), 0.5 * (m * pauli_y()).trace().real(),
                                             0.5 * (m * pauli_z()).trace().real()});
        };
        const ChshSettings rs{rotate(ua, s.a), rotate(ua, s.a_prime), rotate(ub, s.b), rotate(ub, s.b_prime)};
        CHECK(std::abs(chsh(rho, s).s - chsh(rotated, rs).s) < 1e-10);
    }
}

TEST_CASE("chsh from estimated correlations carries a sigma margin") {
    std::array<CorrelationEstimate, 4> e;
    const double vals[4] = {-0.7, 0.7, -0.7, -0.7};
    for (int i = 0; i < 4; ++i) {
        e[static_cast<std::size_t>(i)].e_hat = vals[i];
        e[static_cast<std::size_t>(i)].std_error = 0.01;
    }
    const auto r = chsh_from_estimates(e, singlet_optimal_settings());
    CHECK(r.s == doctest::Approx(2.8));
    CHECK(r.violated);
    REQUIRE(r.std_error.has_value());
    CHECK(*r.std_error == doctest::Approx(0.02));
    CHECK(*r.sigma_margin == doctest::Approx(40.0));
}

TEST_CASE("mermin3") {
    const auto g = ghz(3).density();
    // brute-force expectation oracle for XYY etc.
    const Eigen::Vector3d x(1, 0, 0), y(0, 1, 0);
    const double m_oracle = oracle::spin_product_expectation(g.mat(), {x, y, y}) +
                            oracle::spin_product_expectation(g.mat(), {y, x, y}) +
                            oracle::spin_product_expectation(g.mat(), {y, y, x}) -
                            oracle::spin_product_expectation(g.mat(), {x, x, x});
    const double m = mermin3(g, mermin_xy_settings());
    CHECK(m == doctest::Approx(m_oracle).epsilon(1e-12));
    CHECK(std::abs(std::abs(m) - 4.0) < 1e-9);

    // Product states: |0>|0>|0>
    CHECK(std::abs(mermin3(StateVector::basis({2, 2, 2}, {0, 0, 0}).density(), mermin_xy_settings())) <= 2.0);

    // white noise at weight 1/2
    const Matrix half = 0.5 * g.mat() + 0.5 * identity(8) / 8.0;
    CHECK(std::abs(std::abs(mermin3(DensityMatrix({2, 2, 2}, half), mermin_xy_settings())) - 2.0) < 1e-9);
    CHECK_THROWS_AS(mermin3(werner(1.0), mermin_xy_settings()), std::invalid_argument);
}

TEST_CASE("property: mermin3 of random product states stays within the LHV bound") {
    Rng rng(808);
    for (int i = 0; i < 1000; ++i) {
        auto rho = random_state({2}, rng).density();
        rho = tensor(rho, random_state({2}, rng).density());
        rho = tensor(rho, random_state({2}, rng).density());
        const MerminSettings s{std::pair{random_bloch(rng), random_bloch(rng)},
                               std::pair{random_bloch(rng), random_bloch(rng)},
                               std::pair{random_bloch(rng), random_bloch(rng)}};
        CHECK(std::abs(mermin3(rho, s)) <= 2.0 + 1e-12);
    }
}

TEST_CASE("GHZ coincidence profiles") {
    SUBCASE("three photons after the trigger") {
        const auto state = ghz(3, std::pair{std::vector<int>{0, 0, 1}, std::vector<int>{1, 1, 0}});
        const auto profile = ghz3_coincidence_profile(state);
        CHECK(profile.size() == 8);
        // brute-force basis expansion: amplitude of s1 s2 s3 is
        // (s3 + s1 s2)/4, nonzero only when s1 s2 s3 = +1.
        for (const auto& [label, p] : profile) {
            int parity = 1;
            for (char c : label) parity *= c == 'P' ? 1 : -1;
            CHECK(p == doctest::Approx(parity == 1 ? 0.25 : 0.0).epsilon(1e-12));
            if (parity != 1) CHECK(p < 1e-12);
        }
        CHECK(profile.at("PPP") == doctest::Approx(0.25));
        CHECK(profile.at("PMM") == doctest::Approx(0.25));
        CHECK(profile.at("MPM") == doctest::Approx(0.25));
        CHECK(profile.at("MMP") == doctest::Approx(0.25));
    }
    SUBCASE("product |HHH> is flat") {
        for (const auto& [label, p] : ghz3_coincidence_profile(StateVector::basis({2, 2, 2}, {0, 0, 0})))
            CHECK(p == doctest::Approx(0.125).epsilon(1e-12));
    }
    SUBCASE("four photons: even parity only") {
        const auto state = ghz(4, std::pair{std::vector<int>{0, 1, 1, 0}, std::vector<int>{1, 0, 0, 1}});
        double total = 0.0;
        for (const auto& [label, p] : pm_coincidence_profile(state)) {
            int minus = 0;
            for (char c : label) minus += c == 'M' ? 1 : 0;
            if (minus % 2 == 1) CHECK(p < 1e-12);
            else CHECK(p == doctest::Approx(0.125).epsilon(1e-12));
            total += p;
        }
        CHECK(total == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(ghz3_coincidence_profile(ghz(4)), std::invalid_argument);
}

TEST_CASE("CHSH with missed detections") {
    const auto ct = correlation_tensor(werner(1.0));
    // With zero marginals the best value is eta^2 2 sqrt2 + 2 (1-eta)^2.
    for (double eta : {0.7, 0.8284, 0.9, 1.0}) {
        const auto r = no_fair_sampling_chsh_max(werner(1.0), eta);
        CHECK(r.s == doctest::Approx(eta * eta * 2 * kSqrt2 + 2 * (1 - eta) * (1 - eta)).epsilon(1e-9));
        CHECK(chsh_with_misses(ct, r.settings, eta) == doctest::Approx(r.s));
    }
    CHECK(no_fair_sampling_chsh_max(werner(1.0), 1.0).violated);
}

TEST_CASE("critical efficiency, maximal family") {
    const auto th = critical_efficiency(EfficiencyFamily::maximal());
    CHECK(th.converged);
    CHECK(std::abs(th.eta - 2.0 / (1.0 + kSqrt2)) < 5e-6);
    CHECK(th.hi - th.lo <= 1e-6);
}

TEST_CASE("critical efficiency for a state that never violates") {
    const auto p = efficiency_threshold_for(werner(0.5));
    CHECK_FALSE(p.violates_at_unit_efficiency);
    CHECK_FALSE(p.converged);
    CHECK(p.eta == 1.0);
}

TEST_CASE("speed_lower_bound") {
    CHECK(speed_lower_bound(10'000.0, 5e-12) == doctest::Approx(2.0 / 3.0 * 1e7).epsilon(1e-15));
    CHECK(speed_lower_bound(3e8, 1.0) == doctest::Approx(1.0));
    CHECK(speed_lower_bound(360.0, 1.2e-6) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(speed_lower_bound(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(speed_lower_bound(1.0, -1.0), std::invalid_argument);
}
