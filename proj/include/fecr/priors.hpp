#pragma once

// Prior specifications for the group-level parameters. Hyperparameters follow
// the (shape, rate) convention for gamma and (mean, sd) for normal kinds.
// Interval-supported parameters (delta, phi, nu) take beta priors; delta's
// beta is rescaled onto (0, upper) when an upper bound above 1 is configured.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "fecr/distributions.hpp"

namespace fecr {

enum class PriorDist { gamma, beta, normal, trunc_normal };

struct PriorSpec {
    PriorDist dist = PriorDist::gamma;
    double a = 1.0;
    double b = 1.0;
    double lower = 0.0;  // trunc_normal only

    static PriorSpec gamma_prior(double shape, double rate) { return {PriorDist::gamma, shape, rate, 0.0}; }
    static PriorSpec beta_prior(double a, double b) { return {PriorDist::beta, a, b, 0.0}; }
    static PriorSpec normal_prior(double mean, double sd) { return {PriorDist::normal, mean, sd, 0.0}; }
    static PriorSpec trunc_normal_prior(double mean, double sd, double lower) {
        return {PriorDist::trunc_normal, mean, sd, lower};
    }

    bool operator==(const PriorSpec&) const = default;
};

// Log-density of the prior at constrained value x, accumulating d/dx into
// grad. `upper` rescales a beta prior onto (0, upper); pass 1 for unit-interval
// parameters and 0/ignore for unbounded ones.
inline double prior_log_pdf(const PriorSpec& ps, double x, double upper, double* grad) {
    switch (ps.dist) {
        case PriorDist::gamma: {
            if (!(x > 0.0)) return -special::inf;
            if (grad) *grad += (ps.a - 1.0) / x - ps.b;
            return dist::gamma_log_pdf(x, ps.a, ps.b);
        }
        case PriorDist::beta: {
            const double u = upper > 0.0 ? upper : 1.0;
            const double xs = x / u;
            if (grad && xs > 0.0 && xs < 1.0)
                *grad += ((ps.a - 1.0) / xs - (ps.b - 1.0) / (1.0 - xs)) / u;
            return dist::beta_log_pdf(xs, ps.a, ps.b) - std::log(u);
        }
        case PriorDist::normal: {
            if (grad) *grad += -(x - ps.a) / (ps.b * ps.b);
            return dist::normal_log_pdf(x, ps.a, ps.b);
        }
        case PriorDist::trunc_normal: {
            if (x < ps.lower) return -special::inf;
            if (grad) *grad += -(x - ps.a) / (ps.b * ps.b);
            return dist::trunc_normal_log_pdf(x, ps.a, ps.b, ps.lower);
        }
    }
    throw std::logic_error("prior_log_pdf: unknown dist");
}

inline std::string prior_to_string(const PriorSpec& ps) {
    auto fmt = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%g", v);
        return std::string(buf);
    };
    switch (ps.dist) {
        case PriorDist::gamma: return "gamma(" + fmt(ps.a) + "," + fmt(ps.b) + ")";
        case PriorDist::beta: return "beta(" + fmt(ps.a) + "," + fmt(ps.b) + ")";
        case PriorDist::normal: return "normal(" + fmt(ps.a) + "," + fmt(ps.b) + ")";
        case PriorDist::trunc_normal:
            return "trunc_normal(" + fmt(ps.a) + "," + fmt(ps.b) + "," + fmt(ps.lower) + ")";
    }
    return "?";
}

// Parse "gamma(1,0.001)", "beta(1,1)", "normal(1000,100)",
// "trunc_normal(2,1,0)".
inline PriorSpec parse_prior(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw std::invalid_argument("prior syntax: expected dist(a,b), got '" + text + "'");
    const std::string name = text.substr(0, open);
    std::vector<double> args;
    std::string body = text.substr(open + 1, close - open - 1);
    std::size_t pos = 0;
    while (pos <= body.size()) {
        const auto comma = body.find(',', pos);
        const std::string piece = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            args.push_back(std::stod(piece));
        } catch (const std::exception&) {
            throw std::invalid_argument("prior syntax: bad number '" + piece + "' in '" + text + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (name == "gamma" && args.size() == 2) return PriorSpec::gamma_prior(args[0], args[1]);
    if (name == "beta" && args.size() == 2) return PriorSpec::beta_prior(args[0], args[1]);
    if (name == "normal" && args.size() == 2) return PriorSpec::normal_prior(args[0], args[1]);
    if (name == "trunc_normal" && args.size() == 3)
        return PriorSpec::trunc_normal_prior(args[0], args[1], args[2]);
    throw std::invalid_argument("prior syntax: unknown form '" + text + "'");
}

// Named prior overrides keyed by parameter (mu, kappa, delta, phi, tau, nu,
// alpha); build_model fills unset entries with defaults.
using PriorSet = std::map<std::string, PriorSpec>;

}  // namespace fecr
