#include <catch_amalgamated.hpp>

#include <cmath>

#include "fecr/distributions.hpp"
#include "fecr/elicit.hpp"
#include "fecr/rng.hpp"

using namespace fecr;

TEST_CASE("gamma quantile statements round-trip to the planted parameters") {
    const double q1 = dist::gamma_quantile(0.5, 2.0, 0.01);
    const double q2 = dist::gamma_quantile(0.9, 2.0, 0.01);
    const auto r = solve_from_quantiles({ElicitFamily::gamma, 0.5, q1, 0.9, q2});
    CHECK(r.theta1 == Catch::Approx(2.0).epsilon(1e-4));
    CHECK(r.theta2 == Catch::Approx(0.01).epsilon(1e-4));
    CHECK(r.max_residual < 1e-8);
}

TEST_CASE("uniform beta matches its own quartiles") {
    const auto r = solve_from_quantiles({ElicitFamily::beta, 0.25, 0.25, 0.75, 0.75});
    CHECK(r.theta1 == Catch::Approx(1.0).margin(1e-6));
    CHECK(r.theta2 == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("invalid statements are rejected up front") {
    CHECK_THROWS_AS(solve_from_quantiles({ElicitFamily::beta, 0.1, 0.8, 0.9, 0.2}),
                    std::domain_error);  // decreasing quantiles
    CHECK_THROWS_AS(solve_from_quantiles({ElicitFamily::beta, 0.9, 0.2, 0.1, 0.8}),
                    std::domain_error);  // decreasing probabilities
    CHECK_THROWS_AS(solve_from_quantiles({ElicitFamily::beta, 0.1, 0.2, 1.2, 0.8}),
                    std::domain_error);  // p out of range
    CHECK_THROWS_AS(solve_from_quantiles({ElicitFamily::gamma, 0.1, -1.0, 0.9, 2.0}),
                    std::domain_error);  // negative gamma quantile
    CHECK_THROWS_AS(solve_from_quantiles({ElicitFamily::beta, 0.1, 0.2, 0.9, 1.5}),
                    std::domain_error);  // beta quantile above 1
}

TEST_CASE("extreme but feasible statements still solve") {
    // 80% of the mass inside (1e-4, 1.1e-4) needs a sharply concentrated beta
    const auto r = solve_from_quantiles({ElicitFamily::beta, 0.1, 1e-4, 0.9, 1.1e-4});
    CHECK(r.max_residual < 1e-8);
    CHECK(dist::beta_cdf(1e-4, r.theta1, r.theta2) == Catch::Approx(0.1).margin(1e-8));
}

TEST_CASE("statements beyond any solvable concentration report infeasibility") {
    try {
        // 80% of the mass inside a 2e-8 window around 1/2
        solve_from_quantiles({ElicitFamily::beta, 0.1, 0.5 - 1e-8, 0.9, 0.5 + 1e-8});
        FAIL("expected infeasibility error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("infeasible") != std::string::npos);
    }
}

TEST_CASE("random parameter roundtrips within 1e-4 relative") {
    RngStream rng(12345, 0);
    int done = 0;
    while (done < 50) {
        const double t1 = rng.uniform(0.5, 50.0);
        const double t2 = rng.uniform(0.5, 50.0);
        const double q1 = dist::gamma_quantile(0.25, t1, t2);
        const double q2 = dist::gamma_quantile(0.75, t1, t2);
        const auto r = solve_from_quantiles({ElicitFamily::gamma, 0.25, q1, 0.75, q2});
        CHECK(r.theta1 == Catch::Approx(t1).epsilon(1e-4));
        CHECK(r.theta2 == Catch::Approx(t2).epsilon(1e-4));
        ++done;
    }
    done = 0;
    while (done < 50) {
        const double t1 = rng.uniform(0.5, 50.0);
        const double t2 = rng.uniform(0.5, 50.0);
        const double q1 = dist::beta_quantile(0.25, t1, t2);
        const double q2 = dist::beta_quantile(0.75, t1, t2);
        if (!(q1 < q2)) continue;
        const auto r = solve_from_quantiles({ElicitFamily::beta, 0.25, q1, 0.75, q2});
        CHECK(r.theta1 == Catch::Approx(t1).epsilon(1e-4));
        CHECK(r.theta2 == Catch::Approx(t2).epsilon(1e-4));
        ++done;
    }
}

TEST_CASE("every converged start agrees on the solution") {
    const ElicitationTarget tgt{ElicitFamily::gamma, 0.25, dist::gamma_quantile(0.25, 3.0, 0.8),
                                0.75, dist::gamma_quantile(0.75, 3.0, 0.8)};
    double ref1 = 0.0, ref2 = 0.0;
    bool have_ref = false;
    for (double a : {0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) {
        for (double b : {0.5, 2.0, 10.0}) {
            double t1 = a, t2 = b;
            if (!elicit_detail::newton_run(tgt, t1, t2, 1e-10)) continue;
            if (!have_ref) {
                ref1 = t1;
                ref2 = t2;
                have_ref = true;
            } else {
                CHECK(t1 == Catch::Approx(ref1).margin(1e-6));
                CHECK(t2 == Catch::Approx(ref2).margin(1e-6));
            }
        }
    }
    REQUIRE(have_ref);
    CHECK(ref1 == Catch::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("beta mode/concentration closed form") {
    const auto sym = beta_from_mode_concentration(0.5, 4.0);
    CHECK(sym.theta1 == 2.0);
    CHECK(sym.theta2 == 2.0);
    const auto skew = beta_from_mode_concentration(0.9, 12.0);
    CHECK(skew.theta1 == Catch::Approx(10.0));
    CHECK(skew.theta2 == Catch::Approx(2.0));
    CHECK_THROWS_AS(beta_from_mode_concentration(0.0, 4.0), std::domain_error);
    CHECK_THROWS_AS(beta_from_mode_concentration(1.0, 4.0), std::domain_error);
    CHECK_THROWS_AS(beta_from_mode_concentration(0.5, 2.0), std::domain_error);
}

TEST_CASE("mode identity holds across the parameter range") {
    RngStream rng(777, 0);
    for (int i = 0; i < 100; ++i) {
        const double omega = rng.uniform(0.01, 0.99);
        const double k = rng.uniform(2.01, 120.0);
        const auto r = beta_from_mode_concentration(omega, k);
        CHECK((r.theta1 - 1.0) / (r.theta1 + r.theta2 - 2.0) == Catch::Approx(omega).margin(1e-12));
        CHECK(r.theta1 + r.theta2 == Catch::Approx(k).margin(1e-12));
    }
}
