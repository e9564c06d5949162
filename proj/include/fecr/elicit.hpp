#pragma once

// Prior elicitation: hyperparameters from two quantile statements (gamma or
// beta) via damped Newton in CDF space on (log theta1, log theta2), with a
// multistart grid when Newton stalls, and the closed-form beta mode/
// concentration mapping.

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "fecr/distributions.hpp"

namespace fecr {

enum class ElicitFamily { gamma, beta };

struct ElicitationTarget {
    ElicitFamily family = ElicitFamily::gamma;
    double p1 = 0.0, q1 = 0.0;
    double p2 = 0.0, q2 = 0.0;

    void validate() const {
        if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0))
            throw std::domain_error("elicit: probabilities must be in (0,1)");
        if (!(p1 < p2)) throw std::domain_error("elicit: need p1 < p2");
        if (!(q1 < q2)) throw std::domain_error("elicit: need Q1 < Q2 (quantiles must increase)");
        if (family == ElicitFamily::gamma) {
            if (!(q1 > 0.0)) throw std::domain_error("elicit: gamma quantiles must be positive");
        } else {
            if (!(q1 > 0.0 && q2 < 1.0))
                throw std::domain_error("elicit: beta quantiles must be in (0,1)");
        }
    }
};

struct ElicitResult {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double max_residual = 0.0;  // max |F(Q_j) - p_j| at the solution
};

namespace elicit_detail {

inline double cdf(ElicitFamily fam, double q, double t1, double t2) {
    return fam == ElicitFamily::gamma ? dist::gamma_cdf(q, t1, t2) : dist::beta_cdf(q, t1, t2);
}

// One damped Newton run from (t1, t2); Jacobian by central differences in
// log-parameter space. Returns true when both CDF residuals drop below tol.
// CDF evaluation failures (extreme parameters) end the run like any other
// stall so the multistart can move on.
inline bool newton_run(const ElicitationTarget& tgt, double& t1, double& t2, double tol) {
    double x1 = std::log(t1), x2 = std::log(t2);
    auto residuals = [&](double a, double b, double& r1, double& r2) {
        try {
            r1 = cdf(tgt.family, tgt.q1, a, b) - tgt.p1;
            r2 = cdf(tgt.family, tgt.q2, a, b) - tgt.p2;
        } catch (const std::exception&) {
            r1 = r2 = std::numeric_limits<double>::quiet_NaN();
        }
    };
    const double h = 1e-6;
    for (int it = 0; it < 200; ++it) {
        const double a = std::exp(x1), b = std::exp(x2);
        double r1, r2;
        residuals(a, b, r1, r2);
        const double err = std::max(std::fabs(r1), std::fabs(r2));
        if (err < tol) {
            t1 = a;
            t2 = b;
            return true;
        }
        double r1p, r2p, r1m, r2m;
        residuals(std::exp(x1 + h), b, r1p, r2p);
        residuals(std::exp(x1 - h), b, r1m, r2m);
        const double j11 = (r1p - r1m) / (2.0 * h), j21 = (r2p - r2m) / (2.0 * h);
        residuals(a, std::exp(x2 + h), r1p, r2p);
        residuals(a, std::exp(x2 - h), r1m, r2m);
        const double j12 = (r1p - r1m) / (2.0 * h), j22 = (r2p - r2m) / (2.0 * h);
        const double det = j11 * j22 - j12 * j21;
        if (!std::isfinite(det) || std::fabs(det) < 1e-300) return false;
        const double dx1 = (j22 * r1 - j12 * r2) / det;
        const double dx2 = (j11 * r2 - j21 * r1) / det;
        // backtracking on the squared residual norm
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 40; ++ls) {
            const double y1 = x1 - step * dx1;
            const double y2 = x2 - step * dx2;
            if (std::fabs(y1) < 300.0 && std::fabs(y2) < 300.0) {
                double s1, s2;
                residuals(std::exp(y1), std::exp(y2), s1, s2);
                if (std::isfinite(s1) && std::isfinite(s2) &&
                    s1 * s1 + s2 * s2 < r1 * r1 + r2 * r2) {
                    x1 = y1;
                    x2 = y2;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!moved) return false;
    }
    return false;
}

}  // namespace elicit_detail

// Solve F^{-1}(p1) = Q1, F^{-1}(p2) = Q2 for the two hyperparameters.
inline ElicitResult solve_from_quantiles(const ElicitationTarget& tgt) {
    tgt.validate();
    const double tol = 1e-10;
    static constexpr std::array<double, 6> grid = {0.5, 1.0, 2.0, 5.0, 10.0, 50.0};

    // moment-flavored starting point first, then the multistart grid
    std::vector<std::pair<double, double>> starts;
    if (tgt.family == ElicitFamily::gamma) {
        const double mid = 0.5 * (tgt.q1 + tgt.q2);
        starts.push_back({2.0, 2.0 / mid});
    } else {
        starts.push_back({2.0, 2.0});
    }
    for (double a : grid)
        for (double b : grid) starts.push_back({a, b});

    double best_err = special::inf;
    ElicitResult best;
    for (auto [a, b] : starts) {
        double t1 = a, t2 = b;
        if (elicit_detail::newton_run(tgt, t1, t2, tol)) {
            const double r1 = elicit_detail::cdf(tgt.family, tgt.q1, t1, t2) - tgt.p1;
            const double r2 = elicit_detail::cdf(tgt.family, tgt.q2, t1, t2) - tgt.p2;
            ElicitResult res{t1, t2, std::max(std::fabs(r1), std::fabs(r2))};
            return res;
        }
        // remember the least-bad endpoint for the error report
        try {
            const double r1 = elicit_detail::cdf(tgt.family, tgt.q1, t1, t2) - tgt.p1;
            const double r2 = elicit_detail::cdf(tgt.family, tgt.q2, t1, t2) - tgt.p2;
            const double err = std::max(std::fabs(r1), std::fabs(r2));
            if (err < best_err) {
                best_err = err;
                best = {t1, t2, err};
            }
        } catch (const std::exception&) {
            // endpoint not even evaluable; nothing to report from this start
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "elicitation infeasible: no (theta1, theta2) matches the stated quantiles; "
                  "best residual %.3g at (%.4g, %.4g)",
                  best.max_residual, best.theta1, best.theta2);
    throw std::runtime_error(buf);
}

// Beta hyperparameters from mode omega and concentration k:
// theta1 = omega (k-2) + 1, theta2 = (1-omega)(k-2) + 1.
inline ElicitResult beta_from_mode_concentration(double omega, double k) {
    if (!(omega > 0.0 && omega < 1.0))
        throw std::domain_error("elicit: mode must be strictly inside (0,1)");
    if (!(k > 2.0)) throw std::domain_error("elicit: concentration must exceed 2");
    return {omega * (k - 2.0) + 1.0, (1.0 - omega) * (k - 2.0) + 1.0, 0.0};
}

}  // namespace fecr
