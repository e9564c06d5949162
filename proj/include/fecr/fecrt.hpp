#pragma once

// The classical reduction test: point estimate from group means, an
// asymptotic t-interval on the log ratio, and a nonparametric percentile
// bootstrap. Works on epg-scale values for both designs; paired data feeds
// pre as control and post as treatment, which is also how the bootstrap
// resamples pairs.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fecr/dataset.hpp"
#include "fecr/distributions.hpp"
#include "fecr/rng.hpp"
#include "fecr/summary_stats.hpp"

namespace fecr {

enum class FecrtMethod { asymptotic_t, bootstrap };

struct FecrtResult {
    double reduction_pct = 0.0;
    double ci_lower_pct = 0.0;
    double ci_upper_pct = 0.0;
    FecrtMethod method = FecrtMethod::asymptotic_t;
    std::size_t n_control = 0;
    std::size_t n_treatment = 0;
    int bootstrap_b = 0;
    int bootstrap_redraws = 0;  // replicates redrawn for a zero control mean
};

inline std::string fecrt_method_name(FecrtMethod m) {
    return m == FecrtMethod::asymptotic_t ? "asymptotic_t" : "bootstrap";
}

// 100 (1 - mean(treatment) / mean(control)).
inline double fecrt_point(const std::vector<double>& control, const std::vector<double>& treatment) {
    if (control.empty() || treatment.empty())
        throw std::invalid_argument("fecrt: both groups need at least one observation");
    const double yc = stats::mean(control);
    if (!(yc > 0.0))
        throw std::invalid_argument("fecrt: control mean is zero, reduction undefined");
    return 100.0 * (1.0 - stats::mean(treatment) / yc);
}

inline FecrtResult fecrt_asymptotic_ci(const std::vector<double>& control,
                                       const std::vector<double>& treatment,
                                       double level = 0.95) {
    if (control.size() < 2 || treatment.size() < 2)
        throw std::invalid_argument("fecrt CI: need at least 2 observations per group");
    if (!(level > 0.0 && level < 1.0))
        throw std::domain_error("fecrt CI: level must be in (0,1)");
    const double yc = stats::mean(control);
    const double yt = stats::mean(treatment);
    if (!(yc > 0.0))
        throw std::invalid_argument("fecrt: control mean is zero, reduction undefined");
    if (!(yt > 0.0))
        throw std::invalid_argument(
            "fecrt: all after-treatment counts are zero; the asymptotic interval is undefined "
            "(use the Bayesian models for this case)");

    const double nc = static_cast<double>(control.size());
    const double nt = static_cast<double>(treatment.size());
    const double var_log_ratio = stats::sample_variance(treatment) / (nt * yt * yt) +
                                 stats::sample_variance(control) / (nc * yc * yc);
    const double df = nt + nc - 2.0;
    const double t = dist::student_t_quantile(0.5 + level / 2.0, df);
    const double log_ratio = std::log(yt / yc);
    const double half = t * std::sqrt(var_log_ratio);

    FecrtResult r;
    r.method = FecrtMethod::asymptotic_t;
    r.n_control = control.size();
    r.n_treatment = treatment.size();
    r.reduction_pct = 100.0 * (1.0 - yt / yc);
    r.ci_lower_pct = 100.0 * (1.0 - std::exp(log_ratio + half));
    r.ci_upper_pct = 100.0 * (1.0 - std::exp(log_ratio - half));
    return r;
}

// Percentile bootstrap. Unpaired data resamples the groups independently;
// paired data resamples animal pairs, keeping each pre/post pair intact.
// Replicates whose control mean is zero are redrawn, capped at 10 B attempts.
inline FecrtResult bootstrap_ci(const CountDataset& ds, int b, double level, RngStream stream) {
    if (b < 100) throw std::domain_error("bootstrap: B must be >= 100");
    if (!(level > 0.0 && level < 1.0))
        throw std::domain_error("bootstrap: level must be in (0,1)");
    const std::vector<double> control = ds.pre_epg();
    const std::vector<double> treatment = ds.post_epg();

    FecrtResult r;
    r.method = FecrtMethod::bootstrap;
    r.n_control = control.size();
    r.n_treatment = treatment.size();
    r.bootstrap_b = b;
    r.reduction_pct = fecrt_point(control, treatment);

    const bool paired = ds.design == Design::paired;
    std::vector<double> reductions;
    reductions.reserve(static_cast<std::size_t>(b));
    const std::int64_t max_attempts = 10LL * b;
    std::int64_t attempts = 0;
    int redraws = 0;
    while (reductions.size() < static_cast<std::size_t>(b)) {
        if (++attempts > max_attempts)
            throw std::runtime_error(
                "bootstrap: resampled control mean was zero in too many replicates; "
                "data too degenerate for a bootstrap interval");
        // replicates draw from per-replicate substreams so results do not
        // depend on evaluation order
        RngStream rep = stream.substream(static_cast<std::uint64_t>(attempts));
        double c_sum = 0.0, t_sum = 0.0;
        if (paired) {
            const std::size_t n = control.size();
            for (std::size_t i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(rep.uniform() * static_cast<double>(n));
                const std::size_t idx = k < n ? k : n - 1;
                c_sum += control[idx];
                t_sum += treatment[idx];
            }
            c_sum /= static_cast<double>(n);
            t_sum /= static_cast<double>(n);
        } else {
            for (std::size_t i = 0; i < control.size(); ++i) {
                const auto k = static_cast<std::size_t>(rep.uniform() * static_cast<double>(control.size()));
                c_sum += control[k < control.size() ? k : control.size() - 1];
            }
            for (std::size_t i = 0; i < treatment.size(); ++i) {
                const auto k = static_cast<std::size_t>(rep.uniform() * static_cast<double>(treatment.size()));
                t_sum += treatment[k < treatment.size() ? k : treatment.size() - 1];
            }
            c_sum /= static_cast<double>(control.size());
            t_sum /= static_cast<double>(treatment.size());
        }
        if (!(c_sum > 0.0)) {
            ++redraws;
            continue;
        }
        reductions.push_back(100.0 * (1.0 - t_sum / c_sum));
    }
    r.bootstrap_redraws = redraws;
    std::sort(reductions.begin(), reductions.end());
    r.ci_lower_pct = stats::quantile_sorted(reductions, (1.0 - level) / 2.0);
    r.ci_upper_pct = stats::quantile_sorted(reductions, 0.5 + level / 2.0);
    return r;
}

}  // namespace fecr
