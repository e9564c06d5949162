#pragma once

// Log-densities, CDFs and quantiles for the distributions the count models
// need. Quantile convention for discrete distributions: smallest q with
// CDF(q) >= p. Continuous quantiles are Newton-refined to |CDF(q) - p| well
// below 1e-10, falling back to bisection when Newton stalls.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fecr/special.hpp"

namespace fecr::dist {

using special::inf;

inline double poisson_log_pmf(std::int64_t k, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::domain_error("poisson_log_pmf: lambda must be positive and finite");
    if (k < 0) throw std::domain_error("poisson_log_pmf: k must be >= 0");
    return static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0);
}

// Zero-inflated Poisson. phi = 0 and phi = 1 are handled exactly so that the
// no-inflation case reduces to the plain Poisson bit for bit.
inline double zip_log_pmf(std::int64_t k, double lambda, double phi) {
    if (!(phi >= 0.0 && phi <= 1.0))
        throw std::domain_error("zip_log_pmf: phi must be in [0,1]");
    if (phi == 0.0) return poisson_log_pmf(k, lambda);
    if (k < 0) throw std::domain_error("zip_log_pmf: k must be >= 0");
    if (phi == 1.0) return k == 0 ? 0.0 : -inf;
    if (k == 0)
        return special::log_sum_exp(std::log(phi), std::log1p(-phi) - lambda);
    return std::log1p(-phi) + poisson_log_pmf(k, lambda);
}

// Gamma-Poisson mixture parameterized by mean and shape ("size").
inline double neg_binomial_log_pmf(std::int64_t k, double mean, double size) {
    if (!(mean > 0.0) || !(size > 0.0))
        throw std::domain_error("neg_binomial_log_pmf: mean and size must be positive");
    if (k < 0) throw std::domain_error("neg_binomial_log_pmf: k must be >= 0");
    const double kd = static_cast<double>(k);
    return std::lgamma(kd + size) - std::lgamma(size) - std::lgamma(kd + 1.0)
        + size * std::log(size / (size + mean))
        + kd * (std::log(mean) - std::log(size + mean));
}

inline double gamma_log_pdf(double x, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::domain_error("gamma_log_pdf: shape and rate must be positive");
    if (!(x > 0.0)) return -inf;
    return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

inline double beta_log_pdf(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("beta_log_pdf: a and b must be positive");
    if (x < 0.0 || x > 1.0 || std::isnan(x)) return -inf;
    double t = -special::lbeta(a, b);
    if (x == 0.0) {
        if (a != 1.0) return a > 1.0 ? -inf : inf;
    } else {
        t += (a - 1.0) * std::log(x);
    }
    if (x == 1.0) {
        if (b != 1.0) return b > 1.0 ? -inf : inf;
    } else {
        t += (b - 1.0) * std::log1p(-x);
    }
    return t;
}

inline double normal_log_pdf(double x, double mean, double sd) {
    if (!(sd > 0.0)) throw std::domain_error("normal_log_pdf: sd must be positive");
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

// Normal truncated below at `lower`, renormalized over (lower, inf).
inline double trunc_normal_log_pdf(double x, double mean, double sd, double lower) {
    if (!(sd > 0.0)) throw std::domain_error("trunc_normal_log_pdf: sd must be positive");
    if (!std::isfinite(lower)) throw std::domain_error("trunc_normal_log_pdf: bound must be finite");
    if (x < lower) return -inf;
    return normal_log_pdf(x, mean, sd) - special::log_normal_sf((lower - mean) / sd);
}

inline double gamma_cdf(double x, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::domain_error("gamma_cdf: shape and rate must be positive");
    if (x <= 0.0) return 0.0;
    return special::reg_lower_gamma(shape, x * rate);
}

inline double beta_cdf(double x, double a, double b) {
    return special::reg_inc_beta(a, b, x);
}

inline double poisson_cdf(std::int64_t k, double lambda) {
    if (!(lambda > 0.0))
        throw std::domain_error("poisson_cdf: lambda must be positive");
    if (k < 0) return 0.0;
    return special::reg_upper_gamma(static_cast<double>(k) + 1.0, lambda);
}

namespace detail {

inline void check_prob(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw std::domain_error("quantile: probability must be in (0,1)");
}

// Newton on the CDF from a caller-provided seed, with expanding-bracket
// bisection as the fallback. cdf and log_pdf are taken on the standardized
// argument; bounds give the support.
template <typename Cdf, typename LogPdf>
double invert_cdf(double p, double seed, double lo, double hi, Cdf cdf, LogPdf log_pdf) {
    double x = seed;
    if (!(x > lo) || !(x < hi) || !std::isfinite(x))
        x = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + 1.0;
    double blo = lo, bhi = hi;
    bool newton_ok = false;
    for (int it = 0; it < 200; ++it) {
        const double f = cdf(x) - p;
        if (f > 0.0) bhi = std::min(bhi, x); else blo = std::max(blo, x);
        if (std::fabs(f) < 1e-14) { newton_ok = true; break; }
        const double dpdf = std::exp(log_pdf(x));
        if (!(dpdf > 0.0) || !std::isfinite(dpdf)) break;
        double xn = x - f / dpdf;
        if (!(xn > lo) || !(xn < hi) || !std::isfinite(xn)) {
            // damp toward the valid bracket
            xn = f > 0.0 ? 0.5 * (x + std::max(blo, lo)) : (std::isfinite(bhi) ? 0.5 * (x + bhi) : 2.0 * x + 1.0);
        }
        if (std::fabs(xn - x) <= 1e-15 * (std::fabs(x) + 1e-300)) { x = xn; newton_ok = true; break; }
        x = xn;
    }
    if (newton_ok && std::fabs(cdf(x) - p) < 1e-11) return x;
    // bisection fallback
    if (!std::isfinite(bhi)) {
        bhi = std::max(1.0, 2.0 * std::max(blo, 1.0));
        while (cdf(bhi) < p) {
            bhi *= 2.0;
            if (bhi > 1e300) throw std::runtime_error("invert_cdf: bracket expansion failed");
        }
    }
    for (int it = 0; it < 400 && bhi - blo > 1e-15 * std::max(1.0, std::fabs(blo)); ++it) {
        const double mid = 0.5 * (blo + bhi);
        if (cdf(mid) < p) blo = mid; else bhi = mid;
    }
    return 0.5 * (blo + bhi);
}

}  // namespace detail

inline double gamma_quantile(double p, double shape, double rate) {
    detail::check_prob(p);
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::domain_error("gamma_quantile: shape and rate must be positive");
    // Wilson-Hilferty seed (unit rate scale)
    const double z = special::normal_quantile(p);
    double seed = shape * std::pow(1.0 - 1.0 / (9.0 * shape) + z / (3.0 * std::sqrt(shape)), 3.0);
    if (!(seed > 0.0)) seed = shape * 1e-3;
    const double y = detail::invert_cdf(
        p, seed, 0.0, inf,
        [shape](double t) { return special::reg_lower_gamma(shape, t); },
        [shape](double t) { return (shape - 1.0) * std::log(t) - t - std::lgamma(shape); });
    return y / rate;
}

inline double beta_quantile(double p, double a, double b) {
    detail::check_prob(p);
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("beta_quantile: a and b must be positive");
    // normal approximation seed around the mean
    const double mean = a / (a + b);
    const double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
    double seed = mean + sd * special::normal_quantile(p);
    if (!(seed > 0.0) || !(seed < 1.0)) seed = mean;
    return detail::invert_cdf(
        p, seed, 0.0, 1.0,
        [a, b](double t) { return special::reg_inc_beta(a, b, t); },
        [a, b](double t) { return (a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t) - special::lbeta(a, b); });
}

inline double student_t_quantile(double p, double df) {
    detail::check_prob(p);
    if (!(df >= 1.0)) throw std::domain_error("student_t_quantile: df must be >= 1");
    if (p == 0.5) return 0.0;
    const double q = 2.0 * std::min(p, 1.0 - p);
    const double z = beta_quantile(q, 0.5 * df, 0.5);
    const double t = std::sqrt(df * (1.0 - z) / z);
    return p < 0.5 ? -t : t;
}

// Smallest k with CDF(k) >= p.
inline std::int64_t poisson_quantile(double p, double mean) {
    detail::check_prob(p);
    if (!(mean > 0.0)) throw std::domain_error("poisson_quantile: mean must be positive");
    const double z = special::normal_quantile(p);
    std::int64_t k = static_cast<std::int64_t>(std::floor(mean + z * std::sqrt(mean)));
    if (k < 0) k = 0;
    while (k > 0 && poisson_cdf(k - 1, mean) >= p) --k;
    while (poisson_cdf(k, mean) < p) ++k;
    return k;
}

}  // namespace fecr::dist
