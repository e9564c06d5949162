#include <catch_amalgamated.hpp>

#include <cmath>

#include "fecr/distributions.hpp"
#include "testutil.hpp"

using namespace fecr;

TEST_CASE("poisson log pmf") {
    CHECK(dist::poisson_log_pmf(0, 1.0) == Catch::Approx(-1.0));
    // pmf(2; 2) = 2 e^{-2}
    CHECK(dist::poisson_log_pmf(2, 2.0) == Catch::Approx(std::log(2.0) - 2.0));
    const double tiny = dist::poisson_log_pmf(5, 1e-300);
    CHECK(std::isfinite(tiny));
    CHECK(tiny < -1000.0);
    CHECK_THROWS_AS(dist::poisson_log_pmf(1, 0.0), std::domain_error);
    CHECK_THROWS_AS(dist::poisson_log_pmf(1, std::nan("")), std::domain_error);
    CHECK_THROWS_AS(dist::poisson_log_pmf(-1, 1.0), std::domain_error);
}

TEST_CASE("zero-inflated poisson log pmf") {
    CHECK(dist::zip_log_pmf(0, 5.0, 1.0) == 0.0);
    CHECK(dist::zip_log_pmf(3, 2.0, 0.0) == dist::poisson_log_pmf(3, 2.0));
    CHECK(dist::zip_log_pmf(0, 1.0, 0.5) ==
          Catch::Approx(std::log(0.5 + 0.5 * std::exp(-1.0))));
    CHECK(dist::zip_log_pmf(2, 1.0, 1.0) == -special::inf);
    CHECK_THROWS_AS(dist::zip_log_pmf(0, 1.0, -0.1), std::domain_error);
    CHECK_THROWS_AS(dist::zip_log_pmf(0, 1.0, 1.1), std::domain_error);
}

TEST_CASE("zip pmf sums to one over a parameter grid") {
    for (double lambda : {0.5, 1.0, 5.0, 20.0, 100.0}) {
        for (double phi : {0.0, 0.25, 0.9}) {
            const auto kmax = static_cast<std::int64_t>(lambda + 20.0 * std::sqrt(lambda) + 50.0);
            double total = 0.0;
            for (std::int64_t k = 0; k <= kmax; ++k)
                total += std::exp(dist::zip_log_pmf(k, lambda, phi));
            CHECK(total == Catch::Approx(1.0).margin(1e-10));
        }
    }
}

TEST_CASE("negative binomial log pmf") {
    // geometric case: p = size/(size+mean) = 1/2
    CHECK(dist::neg_binomial_log_pmf(0, 1.0, 1.0) == Catch::Approx(std::log(0.5)));
    for (std::int64_t k : {0, 1, 5, 20}) {
        CHECK(dist::neg_binomial_log_pmf(k, 3.0, 1e8) ==
              Catch::Approx(dist::poisson_log_pmf(k, 3.0)).margin(1e-4));
    }
    double total = 0.0;
    for (std::int64_t k = 0; k <= 1000; ++k)
        total += std::exp(dist::neg_binomial_log_pmf(k, 5.0, 2.0));
    CHECK(total == Catch::Approx(1.0).margin(1e-10));
    CHECK_THROWS_AS(dist::neg_binomial_log_pmf(0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(dist::neg_binomial_log_pmf(0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("gamma density integrates to one by quadrature") {
    for (auto [shape, rate] : {std::pair{2.0, 0.01}, {1.0, 0.7}, {3.5, 2.0}}) {
        const double upper = dist::gamma_quantile(1.0 - 1e-12, shape, rate);
        const double integral = testutil::simpson(
            [&](double x) { return x > 0.0 ? std::exp(dist::gamma_log_pdf(x, shape, rate)) : 0.0; },
            1e-9, upper, 60000);
        CHECK(integral == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("beta and normal densities") {
    CHECK(dist::beta_log_pdf(0.5, 1.0, 1.0) == 0.0);
    CHECK(dist::beta_log_pdf(-0.5, 2.0, 2.0) == -special::inf);
    CHECK(dist::beta_log_pdf(1.5, 2.0, 2.0) == -special::inf);
    CHECK(dist::normal_log_pdf(0.0, 0.0, 1.0) == Catch::Approx(-0.5 * std::log(2.0 * M_PI)));
    CHECK_THROWS_AS(dist::beta_log_pdf(0.5, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(dist::normal_log_pdf(0.0, 0.0, 0.0), std::domain_error);
}

TEST_CASE("truncated normal renormalizes over the tail") {
    const double expect =
        dist::normal_log_pdf(2.0, 2.0, 1.0) - special::log_normal_sf(-2.0);
    CHECK(dist::trunc_normal_log_pdf(2.0, 2.0, 1.0, 0.0) == Catch::Approx(expect).margin(1e-12));
    CHECK(dist::trunc_normal_log_pdf(-0.5, 2.0, 1.0, 0.0) == -special::inf);

    const double integral = testutil::simpson(
        [](double x) { return std::exp(dist::trunc_normal_log_pdf(x, 2.0, 1.0, 0.0)); }, 0.0,
        2.0 + 12.0, 40000);
    CHECK(integral == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("quantile / CDF roundtrips") {
    for (double p = 0.01; p < 0.995; p += 0.07) {
        for (double shape : {0.3, 1.0, 2.0, 10.0, 50.0}) {
            for (double rate : {0.01, 1.0, 7.0}) {
                const double q = dist::gamma_quantile(p, shape, rate);
                CHECK(dist::gamma_cdf(q, shape, rate) == Catch::Approx(p).margin(1e-8));
            }
        }
        for (double a : {0.5, 1.0, 2.0, 8.0}) {
            for (double b : {0.5, 1.0, 3.0}) {
                const double q = dist::beta_quantile(p, a, b);
                CHECK(dist::beta_cdf(q, a, b) == Catch::Approx(p).margin(1e-8));
            }
        }
    }
    CHECK(dist::beta_quantile(0.5, 1.0, 1.0) == Catch::Approx(0.5).margin(1e-12));
    CHECK_THROWS_AS(dist::gamma_quantile(0.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(dist::beta_quantile(1.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("student t quantile against its CDF") {
    auto t_cdf = [](double x, double df) {
        const double z = df / (df + x * x);
        const double half_tail = 0.5 * special::reg_inc_beta(df / 2.0, 0.5, z);
        return x > 0.0 ? 1.0 - half_tail : half_tail;
    };
    CHECK(dist::student_t_quantile(0.975, 4.0) == Catch::Approx(2.7764).margin(1e-3));
    CHECK(dist::student_t_quantile(0.025, 4.0) == Catch::Approx(-2.7764).margin(1e-3));
    CHECK(dist::student_t_quantile(0.5, 7.0) == 0.0);
    for (double p : {0.05, 0.3, 0.8, 0.99}) {
        for (double df : {1.0, 4.0, 28.0}) {
            CHECK(t_cdf(dist::student_t_quantile(p, df), df) == Catch::Approx(p).margin(1e-9));
        }
    }
    CHECK_THROWS_AS(dist::student_t_quantile(0.9, 0.5), std::domain_error);
}

TEST_CASE("poisson quantile is the smallest k with CDF(k) >= p") {
    CHECK(dist::poisson_quantile(0.95, 5.0) == 9);
    CHECK(dist::poisson_cdf(9, 5.0) >= 0.95);
    CHECK(dist::poisson_cdf(8, 5.0) < 0.95);
    for (double p : {0.01, 0.5, 0.95, 0.999}) {
        for (double mean : {0.2, 3.0, 45.0, 800.0}) {
            const std::int64_t k = dist::poisson_quantile(p, mean);
            CHECK(dist::poisson_cdf(k, mean) >= p);
            if (k > 0) CHECK(dist::poisson_cdf(k - 1, mean) < p);
        }
    }
    CHECK_THROWS_AS(dist::poisson_quantile(1.0, 5.0), std::domain_error);
}
