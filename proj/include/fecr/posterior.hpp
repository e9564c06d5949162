#pragma once

// Convergence diagnostics, posterior summaries and derived reduction
// quantities. Empirical quantiles interpolate order statistics at
// p(n-1)+1 so summary goldens are reproducible.

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fecr/hmc.hpp"
#include "fecr/model.hpp"
#include "fecr/summary_stats.hpp"

namespace fecr {

// Split potential scale reduction factor: every chain is halved, and the
// factor compares between- and within-half-chain variances. Returns +inf
// when the within variance degenerates to zero.
inline double split_rhat(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 1) throw std::invalid_argument("split_rhat: no chains");
    std::vector<std::vector<double>> halves;
    for (const auto& c : chains) {
        const std::size_t n = c.size() / 2;
        if (n < 2) throw std::invalid_argument("split_rhat: need at least 4 draws per chain");
        halves.emplace_back(c.begin(), c.begin() + n);
        halves.emplace_back(c.end() - n, c.end());
    }
    if (halves.size() < 2) throw std::invalid_argument("split_rhat: need at least 2 half-chains");
    const double n = static_cast<double>(halves.front().size());
    const double m = static_cast<double>(halves.size());

    std::vector<double> means;
    double w = 0.0;
    for (const auto& h : halves) {
        means.push_back(stats::mean(h));
        w += stats::sample_variance(h);
    }
    w /= m;
    if (!(w > 0.0)) return std::numeric_limits<double>::infinity();
    double b = 0.0;
    const double grand = stats::mean(means);
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= n / (m - 1.0);
    return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

struct DerivedDraws {
    // Indexed [chain][draw], aligned with PosteriorDraws.
    std::vector<std::vector<double>> fecr;
    std::vector<std::vector<double>> mean_epg_untreated;
    std::vector<std::vector<double>> mean_epg_treated;

    std::vector<double> pooled_fecr() const {
        std::vector<double> out;
        for (const auto& c : fecr) out.insert(out.end(), c.begin(), c.end());
        return out;
    }
};

// Per-draw reduction quantities. Group-efficacy kinds report FECR = 1 -
// delta with meanEPG following the group latent mean; the individual-
// efficacy kind uses the sample median of the per-animal reductions and
// per-animal latent means.
inline DerivedDraws derive_fecr(const Model& model, const hmc::PosteriorDraws& draws) {
    const ParamLayout& L = model.layout();
    DerivedDraws out;
    out.fecr.resize(draws.chains.size());
    out.mean_epg_untreated.resize(draws.chains.size());
    out.mean_epg_treated.resize(draws.chains.size());
    for (std::size_t c = 0; c < draws.chains.size(); ++c) {
        for (const auto& th : draws.chains[c].draws) {
            double fecr_val, untreated, treated;
            if (kind_is_individual(model.kind())) {
                std::vector<double> deltas(L.n_di);
                double mu_sum = 0.0, treated_sum = 0.0;
                for (std::size_t i = 0; i < L.n_di; ++i) {
                    deltas[i] = th[L.delta_i0 + i];
                    mu_sum += th[L.mu_c0 + i];
                    treated_sum += th[L.delta_i0 + i] * th[L.mu_c0 + i];
                }
                fecr_val = 1.0 - stats::median(deltas);
                const double n = static_cast<double>(L.n_di);
                untreated = mu_sum / n;
                treated = treated_sum / n;
            } else {
                const double delta = th[L.delta];
                const double mu = th[L.mu];
                fecr_val = 1.0 - delta;
                untreated = mu;
                treated = delta * mu;
            }
            out.fecr[c].push_back(fecr_val);
            out.mean_epg_untreated[c].push_back(untreated);
            out.mean_epg_treated[c].push_back(treated);
        }
    }
    return out;
}

// Percentage of draws whose reduction falls below the threshold.
inline double fecr_probs(const std::vector<double>& fecr_draws, double threshold = 0.95) {
    if (fecr_draws.empty()) throw std::invalid_argument("fecr_probs: no draws");
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw std::domain_error("fecr_probs: threshold must be in (0,1]");
    std::size_t below = 0;
    for (double v : fecr_draws)
        if (v < threshold) ++below;
    return 100.0 * static_cast<double>(below) / static_cast<double>(fecr_draws.size());
}

struct SummaryRow {
    std::string name;
    double mean, sd, q2_5, q25, q50, q75, q97_5;
};

enum class WarningKind { non_convergence, divergences, small_sample };

struct FitWarning {
    WarningKind kind;
    std::string message;
};

struct FitSummary {
    std::string model_name;
    std::vector<SummaryRow> rows;
    std::map<std::string, double> rhat;  // sampled parameters + FECR
    int divergences = 0;
    std::vector<FitWarning> warnings;
};

namespace summary_detail {

inline SummaryRow make_row(const std::string& name, std::vector<double> pooled) {
    SummaryRow r;
    r.name = name;
    r.mean = stats::mean(pooled);
    r.sd = pooled.size() > 1 ? std::sqrt(stats::sample_variance(pooled)) : 0.0;
    std::sort(pooled.begin(), pooled.end());
    r.q2_5 = stats::quantile_sorted(pooled, 0.025);
    r.q25 = stats::quantile_sorted(pooled, 0.25);
    r.q50 = stats::quantile_sorted(pooled, 0.50);
    r.q75 = stats::quantile_sorted(pooled, 0.75);
    r.q97_5 = stats::quantile_sorted(pooled, 0.975);
    return r;
}

inline std::vector<std::vector<double>> column(const hmc::PosteriorDraws& draws, std::size_t j) {
    std::vector<std::vector<double>> per_chain(draws.chains.size());
    for (std::size_t c = 0; c < draws.chains.size(); ++c)
        for (const auto& d : draws.chains[c].draws) per_chain[c].push_back(d[j]);
    return per_chain;
}

inline std::vector<double> pool(const std::vector<std::vector<double>>& per_chain) {
    std::vector<double> out;
    for (const auto& c : per_chain) out.insert(out.end(), c.begin(), c.end());
    return out;
}

}  // namespace summary_detail

inline FitSummary summarize(const Model& model, const hmc::PosteriorDraws& draws) {
    using namespace summary_detail;
    FitSummary s;
    s.model_name = model_kind_name(model.kind());
    s.divergences = draws.total_divergences();

    const DerivedDraws derived = derive_fecr(model, draws);
    s.rows.push_back(make_row("FECR", pool(derived.fecr)));
    s.rows.push_back(make_row("meanEPG.untreated", pool(derived.mean_epg_untreated)));
    s.rows.push_back(make_row("meanEPG.treated", pool(derived.mean_epg_treated)));

    const ParamLayout& L = model.layout();
    auto add_group_row = [&](const char* name, int idx) {
        if (idx < 0) return;
        s.rows.push_back(make_row(name, pool(column(draws, static_cast<std::size_t>(idx)))));
    };
    add_group_row("delta", L.delta);
    add_group_row("mu", L.mu);
    add_group_row("kappa", L.kappa);
    add_group_row("phi", L.phi);
    add_group_row("tau", L.tau);
    add_group_row("nu", L.nu);
    add_group_row("alpha", L.alpha);

    for (std::size_t j = 0; j < draws.param_names.size(); ++j)
        s.rhat[draws.param_names[j]] = split_rhat(column(draws, j));
    s.rhat["FECR"] = split_rhat(derived.fecr);

    bool converged = true;
    for (const auto& [name, r] : s.rhat)
        if (!(r < 1.1)) converged = false;
    if (!converged)
        s.warnings.push_back(
            {WarningKind::non_convergence,
             "There is evidence of non-convergence: some parameters have potential scale "
             "reduction factors of 1.1 or above. Consider more iterations or a different model."});
    if (s.divergences > 0)
        s.warnings.push_back(
            {WarningKind::divergences,
             "There were " + std::to_string(s.divergences) +
                 " divergent transitions after warmup. The tuning parameter adapt_delta "
                 "should be increased; rerun with a value closer to 1."});
    if (model.small_sample_warning())
        s.warnings.push_back(
            {WarningKind::small_sample,
             "The sample size is less than 10. Consider informative priors (see the elicit "
             "command) or the simplified model for paired data."});
    return s;
}

}  // namespace fecr
