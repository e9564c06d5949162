#pragma once

// Multi-chain Hamiltonian Monte Carlo with warmup adaptation. Step size is
// tuned by dual averaging toward a target acceptance rate; a diagonal mass
// matrix is estimated over doubling warmup windows. Trajectories use a
// jittered number of leapfrog steps, uniform on [1, L] with L chosen so the
// maximal trajectory length is about 1.6 in mass-standardized coordinates.
// A transition whose Hamiltonian error exceeds 1000 (or goes non-finite) is
// divergent and always rejected.
//
// Any type exposing n_params() and log_posterior(span<const double>)
// -> LogPosterior can be sampled; Model satisfies this directly.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fecr/model.hpp"
#include "fecr/rng.hpp"

namespace fecr::hmc {

struct SamplerConfig {
    int nsamples = 2000;  // total iterations per chain, warmup included
    int nburnin = 1000;
    int thinning = 1;
    int nchain = 2;
    int nworkers = 2;
    double adapt_delta = 0.8;
    int max_leapfrog = 1024;
    std::uint64_t seed = 0;

    void validate() const {
        if (nsamples <= 0 || nburnin < 0 || nburnin >= nsamples)
            throw std::invalid_argument("sampler config: need 0 <= nburnin < nsamples");
        if (thinning < 1) throw std::invalid_argument("sampler config: thinning must be >= 1");
        if (nchain < 1) throw std::invalid_argument("sampler config: nchain must be >= 1");
        if (nworkers < 1) throw std::invalid_argument("sampler config: nworkers must be >= 1");
        if (!(adapt_delta > 0.6 && adapt_delta < 1.0))
            throw std::invalid_argument("sampler config: adapt_delta must be in (0.6, 1)");
        if (max_leapfrog < 1) throw std::invalid_argument("sampler config: max_leapfrog must be >= 1");
    }

    int retained_per_chain() const { return (nsamples - nburnin) / thinning; }
};

struct ChainResult {
    std::vector<std::vector<double>> draws;  // retained x n_params
    std::vector<std::uint8_t> divergent;     // per retained draw
    int divergences = 0;                     // post-warmup divergent transitions
    double step_size = 0.0;
    double accept_rate = 0.0;                // mean post-warmup acceptance statistic
};

struct PosteriorDraws {
    std::vector<std::string> param_names;
    std::vector<ChainResult> chains;

    int total_divergences() const {
        int n = 0;
        for (const auto& c : chains) n += c.divergences;
        return n;
    }
    std::size_t n_chains() const { return chains.size(); }
};

inline bool detect_divergence(double energy_error) {
    return !(energy_error <= 1000.0);
}

namespace detail {

template <typename Target>
struct PhasePoint {
    std::vector<double> q, p, grad;
    double value = 0.0;

    void eval(const Target& t) {
        auto lp = t.log_posterior(std::span<const double>(q));
        value = lp.value;
        grad = std::move(lp.grad);
    }
    double kinetic(const std::vector<double>& inv_mass) const {
        double k = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) k += inv_mass[i] * p[i] * p[i];
        return 0.5 * k;
    }
    double hamiltonian(const std::vector<double>& inv_mass) const {
        return -value + kinetic(inv_mass);
    }
};

}  // namespace detail

// Symplectic leapfrog integration of n_steps; returns false as soon as the
// state goes non-finite.
template <typename Target>
bool leapfrog(const Target& target, detail::PhasePoint<Target>& z, double step_size,
              const std::vector<double>& inv_mass, int n_steps) {
    for (int s = 0; s < n_steps; ++s) {
        for (std::size_t i = 0; i < z.p.size(); ++i) z.p[i] += 0.5 * step_size * z.grad[i];
        for (std::size_t i = 0; i < z.q.size(); ++i) z.q[i] += step_size * inv_mass[i] * z.p[i];
        z.eval(target);
        if (!std::isfinite(z.value)) return false;
        for (std::size_t i = 0; i < z.p.size(); ++i) z.p[i] += 0.5 * step_size * z.grad[i];
        for (double v : z.p)
            if (!std::isfinite(v)) return false;
    }
    return true;
}

struct TrajectoryResult {
    std::vector<double> q, p;
    double energy_error = 0.0;  // H(end) - H(start); +inf when non-finite
    bool divergent = false;
};

// One full trajectory from (q, p); exposed for reversibility and energy
// scaling checks as much as for the sampler itself.
template <typename Target>
TrajectoryResult leapfrog_trajectory(const Target& target, std::span<const double> q,
                                     std::span<const double> p, double step_size, int n_steps,
                                     const std::vector<double>& inv_mass) {
    detail::PhasePoint<Target> z;
    z.q.assign(q.begin(), q.end());
    z.p.assign(p.begin(), p.end());
    z.eval(target);
    TrajectoryResult out;
    if (!std::isfinite(z.value)) {
        out.q = z.q;
        out.p = z.p;
        out.energy_error = special::inf;
        out.divergent = true;
        return out;
    }
    const double h0 = z.hamiltonian(inv_mass);
    const bool ok = leapfrog(target, z, step_size, inv_mass, n_steps);
    out.q = z.q;
    out.p = z.p;
    out.energy_error = ok ? z.hamiltonian(inv_mass) - h0 : special::inf;
    out.divergent = detect_divergence(out.energy_error);
    return out;
}

namespace detail {

// Nesterov-style dual averaging of log step size (Hoffman & Gelman's
// schedule; gamma controls the oscillation amplitude of the noisy iterate).
struct DualAveraging {
    double target = 0.8;
    double gamma = 0.2;
    double t0 = 10.0;
    double kappa = 0.75;
    double mu = 0.0, log_eps = 0.0, log_eps_bar = 0.0, h_bar = 0.0;
    int m = 0;

    void init(double eps0) {
        mu = std::log(10.0 * eps0);
        log_eps = std::log(eps0);
        log_eps_bar = std::log(eps0);
        h_bar = 0.0;
        m = 0;
    }
    void update(double accept_prob) {
        ++m;
        const double md = static_cast<double>(m);
        h_bar = (1.0 - 1.0 / (md + t0)) * h_bar + (target - accept_prob) / (md + t0);
        log_eps = mu - std::sqrt(md) / gamma * h_bar;
        const double eta = std::pow(md, -kappa);
        log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar;
    }
    double eps() const { return std::exp(log_eps); }
    double eps_bar() const { return std::exp(log_eps_bar); }
};

template <typename Target>
double one_step_accept_prob(const Target& target, const PhasePoint<Target>& z0, double eps,
                            const std::vector<double>& inv_mass) {
    PhasePoint<Target> z = z0;
    const double h0 = z.hamiltonian(inv_mass);
    if (!leapfrog(target, z, eps, inv_mass, 1)) return 0.0;
    const double dh = z.hamiltonian(inv_mass) - h0;
    if (!std::isfinite(dh)) return 0.0;
    return std::min(1.0, std::exp(-dh));
}

// Stan-style heuristic: scale eps by powers of 2 until the one-step
// acceptance probability crosses 1/2.
template <typename Target>
double find_reasonable_step_size(const Target& target, PhasePoint<Target> z,
                                 const std::vector<double>& inv_mass, RngStream& rng) {
    for (std::size_t i = 0; i < z.p.size(); ++i)
        z.p[i] = rng.normal() / std::sqrt(inv_mass[i]);
    double eps = 1.0;
    double a = one_step_accept_prob(target, z, eps, inv_mass);
    const int dir = a > 0.5 ? 1 : -1;
    for (int it = 0; it < 60; ++it) {
        eps = dir > 0 ? eps * 2.0 : eps * 0.5;
        a = one_step_accept_prob(target, z, eps, inv_mass);
        if ((dir > 0 && a < 0.5) || (dir < 0 && a > 0.5)) break;
    }
    return std::clamp(eps, 1e-10, 1e3);
}

struct AdaptationSchedule {
    int init_buffer = 0;
    int term_buffer = 0;
    std::vector<std::pair<int, int>> windows;  // [start, end) mass-estimation spans

    static AdaptationSchedule make(int nburnin) {
        AdaptationSchedule s;
        if (nburnin <= 0) return s;
        s.init_buffer = std::max(1, static_cast<int>(std::lround(0.15 * nburnin)));
        s.term_buffer = std::max(1, static_cast<int>(std::lround(0.10 * nburnin)));
        const int middle_end = nburnin - s.term_buffer;
        int w = 25;
        int start = s.init_buffer;
        while (middle_end - start >= w) {
            int end = start + w;
            // absorb a remainder too small for the next doubling
            if (middle_end - end < 2 * w) end = middle_end;
            s.windows.emplace_back(start, end);
            start = end;
            w *= 2;
        }
        return s;
    }
};

}  // namespace detail

template <typename Target>
ChainResult sample_chain(const Target& target, std::vector<double> q0, const SamplerConfig& cfg,
                         RngStream rng) {
    cfg.validate();
    const std::size_t dim = target.n_params();
    if (q0.size() != dim) throw std::invalid_argument("sample_chain: init length mismatch");

    detail::PhasePoint<Target> z;
    z.q = std::move(q0);
    z.p.assign(dim, 0.0);
    z.eval(target);
    if (!std::isfinite(z.value))
        throw std::runtime_error("sample_chain: non-finite log posterior at initial value");

    std::vector<double> inv_mass(dim, 1.0);
    const auto schedule = detail::AdaptationSchedule::make(cfg.nburnin);

    detail::DualAveraging da;
    da.target = cfg.adapt_delta;
    double eps = detail::find_reasonable_step_size(target, z, inv_mass, rng);
    da.init(eps);

    std::size_t window_idx = 0;
    std::vector<std::vector<double>> window_draws;

    ChainResult res;
    const int retained = cfg.retained_per_chain();
    res.draws.reserve(retained);
    res.divergent.reserve(retained);
    double accept_sum = 0.0;
    int accept_n = 0;

    for (int iter = 0; iter < cfg.nsamples; ++iter) {
        const bool warm = iter < cfg.nburnin;
        eps = warm ? da.eps() : da.eps_bar();
        if (!(eps > 0.0) || !std::isfinite(eps)) eps = 1e-6;
        // jitter the step size per iteration; near-quadratic targets otherwise
        // lock trajectory phases and the acceptance rate stops responding to eps
        const double eps_iter = eps * rng.uniform(0.75, 1.25);

        for (std::size_t i = 0; i < dim; ++i) z.p[i] = rng.normal() / std::sqrt(inv_mass[i]);
        const int l_max =
            std::clamp(static_cast<int>(std::ceil(1.6 / eps_iter)), 1, cfg.max_leapfrog);
        int n_steps = 1 + static_cast<int>(rng.uniform() * l_max);
        n_steps = std::clamp(n_steps, 1, l_max);

        const double h0 = z.hamiltonian(inv_mass);
        detail::PhasePoint<Target> zp = z;
        const bool ok = leapfrog(target, zp, eps_iter, inv_mass, n_steps);
        const double dh = ok ? zp.hamiltonian(inv_mass) - h0 : special::inf;
        const bool divergent = detect_divergence(dh);
        const double accept_prob = divergent ? 0.0 : std::min(1.0, std::exp(-dh));
        if (!divergent && rng.uniform() < accept_prob) z = std::move(zp);

        if (warm) {
            da.update(accept_prob);
            if (window_idx < schedule.windows.size()) {
                const auto [wstart, wend] = schedule.windows[window_idx];
                if (iter >= wstart) window_draws.push_back(z.q);
                if (iter + 1 == wend) {
                    // regularized diagonal variance of the window draws
                    const double n = static_cast<double>(window_draws.size());
                    for (std::size_t j = 0; j < dim; ++j) {
                        double mean = 0.0;
                        for (const auto& d : window_draws) mean += d[j];
                        mean /= n;
                        double var = 0.0;
                        for (const auto& d : window_draws) var += (d[j] - mean) * (d[j] - mean);
                        var = n > 1.5 ? var / (n - 1.0) : 1.0;
                        inv_mass[j] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
                        if (!(inv_mass[j] > 0.0) || !std::isfinite(inv_mass[j])) inv_mass[j] = 1.0;
                    }
                    window_draws.clear();
                    ++window_idx;
                    da.init(detail::find_reasonable_step_size(target, z, inv_mass, rng));
                }
            }
        } else {
            accept_sum += accept_prob;
            ++accept_n;
            if (divergent) ++res.divergences;
            const int s = iter - cfg.nburnin;
            if ((s + 1) % cfg.thinning == 0 && static_cast<int>(res.draws.size()) < retained) {
                res.draws.push_back(z.q);
                res.divergent.push_back(divergent ? 1 : 0);
            }
        }
    }

    res.step_size = da.eps_bar();
    res.accept_rate = accept_n > 0 ? accept_sum / accept_n : 0.0;
    return res;
}

// Runs cfg.nchain chains of the model with distinct RNG streams and jittered
// initial values, at most cfg.nworkers at a time. Draws are stored on the
// constrained scale; chains merge deterministically by index.
inline PosteriorDraws run_chains(const Model& model, const SamplerConfig& cfg) {
    cfg.validate();
    PosteriorDraws out;
    out.param_names = model.param_names();
    out.chains.resize(cfg.nchain);

    std::vector<std::exception_ptr> errors(cfg.nchain);
    auto run_one = [&](int c) {
        try {
            RngStream rng(cfg.seed, static_cast<std::uint64_t>(c));
            std::vector<double> init;
            bool found = false;
            for (int attempt = 0; attempt < 100; ++attempt) {
                init = model.initial_values(rng);
                if (std::isfinite(model.log_posterior(init).value)) {
                    found = true;
                    break;
                }
            }
            if (!found)
                throw std::runtime_error(
                    "chain " + std::to_string(c + 1) +
                    ": failed to find a finite initial value after 100 attempts");
            ChainResult cr = sample_chain(model, std::move(init), cfg, rng);
            for (auto& d : cr.draws) d = model.to_constrained(d);
            out.chains[c] = std::move(cr);
        } catch (...) {
            errors[c] = std::current_exception();
        }
    };

    for (int base = 0; base < cfg.nchain; base += cfg.nworkers) {
        std::vector<std::thread> pool;
        for (int c = base; c < std::min(cfg.nchain, base + cfg.nworkers); ++c)
            pool.emplace_back(run_one, c);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace fecr::hmc
