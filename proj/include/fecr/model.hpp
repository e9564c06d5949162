#pragma once

// The model zoo: every variant is an unnormalized log-posterior over
// unconstrained parameters with exact gradients.
//
// The binomial counting layer is marginalized analytically throughout: a
// Poisson(mu) true count subsampled Binomial(., 1/f) is Poisson(mu/f), and
// the same thinning carries through zero-inflated and weighted-mixture
// latents componentwise. Observed raw counts therefore contribute Poisson
// (or ZIPoisson / weighted Poisson mixture) terms with all rates divided
// by f, leaving a fully continuous parameter space.

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fecr/dataset.hpp"
#include "fecr/distributions.hpp"
#include "fecr/priors.hpp"
#include "fecr/rng.hpp"
#include "fecr/summary_stats.hpp"

namespace fecr {

enum class ModelKind {
    PairedBaseline,
    UnpairedBaseline,
    PairedZI,
    UnpairedZI,
    PairedIndividual,
    PairedSimple,
    PairedOutlier,
    UnpairedOutlier,
    PairedZIOutlier,
    UnpairedZIOutlier,
};

inline bool kind_is_paired(ModelKind k) {
    switch (k) {
        case ModelKind::UnpairedBaseline:
        case ModelKind::UnpairedZI:
        case ModelKind::UnpairedOutlier:
        case ModelKind::UnpairedZIOutlier:
            return false;
        default:
            return true;
    }
}

inline bool kind_has_zi(ModelKind k) {
    return k == ModelKind::PairedZI || k == ModelKind::UnpairedZI ||
           k == ModelKind::PairedZIOutlier || k == ModelKind::UnpairedZIOutlier;
}

inline bool kind_has_outlier(ModelKind k) {
    return k == ModelKind::PairedOutlier || k == ModelKind::UnpairedOutlier ||
           k == ModelKind::PairedZIOutlier || k == ModelKind::UnpairedZIOutlier;
}

inline bool kind_is_individual(ModelKind k) { return k == ModelKind::PairedIndividual; }
inline bool kind_is_simple(ModelKind k) { return k == ModelKind::PairedSimple; }

// Resolve CLI-style switches to a model kind, rejecting incompatible
// combinations.
inline ModelKind model_kind_from_flags(bool paired, bool zero_inflation, bool individual_efficacy,
                                       bool simple, bool outlier) {
    if (individual_efficacy) {
        if (!paired)
            throw std::invalid_argument("individual efficacy requires the paired design");
        if (zero_inflation)
            throw std::invalid_argument("individual efficacy and zero-inflation cannot be combined");
        if (simple || outlier)
            throw std::invalid_argument("individual efficacy cannot be combined with the simple or outlier models");
        return ModelKind::PairedIndividual;
    }
    if (simple) {
        if (!paired) throw std::invalid_argument("the simplified model requires the paired design");
        if (zero_inflation || outlier)
            throw std::invalid_argument("the simplified model cannot be combined with zero-inflation or outlier handling");
        return ModelKind::PairedSimple;
    }
    if (outlier) {
        if (paired)
            return zero_inflation ? ModelKind::PairedZIOutlier : ModelKind::PairedOutlier;
        return zero_inflation ? ModelKind::UnpairedZIOutlier : ModelKind::UnpairedOutlier;
    }
    if (paired) return zero_inflation ? ModelKind::PairedZI : ModelKind::PairedBaseline;
    return zero_inflation ? ModelKind::UnpairedZI : ModelKind::UnpairedBaseline;
}

inline std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::PairedBaseline:
            return "Bayesian model without zero-inflation for paired design";
        case ModelKind::UnpairedBaseline:
            return "Bayesian model without zero-inflation for unpaired design";
        case ModelKind::PairedZI:
            return "Bayesian model with zero-inflation for paired design";
        case ModelKind::UnpairedZI:
            return "Bayesian model with zero-inflation for unpaired design";
        case ModelKind::PairedIndividual:
            return "Bayesian model without zero-inflation for paired design allowing individual efficacy";
        case ModelKind::PairedSimple:
            return "Simplified Bayesian model for paired design";
        case ModelKind::PairedOutlier:
            return "Bayesian model without zero-inflation for paired design with outlier handling";
        case ModelKind::UnpairedOutlier:
            return "Bayesian model without zero-inflation for unpaired design with outlier handling";
        case ModelKind::PairedZIOutlier:
            return "Bayesian model with zero-inflation for paired design with outlier handling";
        case ModelKind::UnpairedZIOutlier:
            return "Bayesian model with zero-inflation for unpaired design with outlier handling";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Outlier weight preprocessing
// ---------------------------------------------------------------------------

struct OutlierWeights {
    std::vector<double> weights;        // one per treatment-group observation
    std::vector<std::size_t> outliers;  // indices classified as outliers
};

// Unpaired rule: trim counts above Q3 + 1.5 IQR, take the mean m of what is
// left, and classify counts above the 95th Poisson(m) percentile as
// outliers. The largest outlier gets weight 0.01; the rest scale as
// min(1, 0.01 * y_max / y).
inline OutlierWeights outlier_weights_unpaired(const std::vector<double>& post_counts) {
    if (post_counts.size() < 4)
        throw std::invalid_argument(
            "outlier weighting needs at least 4 after-treatment observations; "
            "use the corresponding model without outlier handling");
    std::vector<double> sorted = post_counts;
    std::sort(sorted.begin(), sorted.end());
    const double q1 = stats::quantile_sorted(sorted, 0.25);
    const double q3 = stats::quantile_sorted(sorted, 0.75);
    const double fence = q3 + 1.5 * (q3 - q1);
    double sum = 0.0;
    std::size_t k = 0;
    for (double v : post_counts)
        if (v <= fence) {
            sum += v;
            ++k;
        }
    const double m = k > 0 ? sum / static_cast<double>(k) : 0.0;
    const double threshold = m > 0.0 ? static_cast<double>(dist::poisson_quantile(0.95, m)) : 0.0;

    OutlierWeights res;
    res.weights.assign(post_counts.size(), 1.0);
    double y_max = 0.0;
    for (std::size_t i = 0; i < post_counts.size(); ++i)
        if (post_counts[i] > threshold) {
            res.outliers.push_back(i);
            y_max = std::max(y_max, post_counts[i]);
        }
    for (std::size_t i : res.outliers)
        res.weights[i] = std::min(1.0, 0.01 * y_max / post_counts[i]);
    return res;
}

// Paired rule: an increased after-treatment count marks an outlier, weighted
// by the before/after ratio. A zero pre count with a positive post count has
// no defined ratio and takes the floor weight 0.01.
inline OutlierWeights outlier_weights_paired(const std::vector<double>& pre_counts,
                                             const std::vector<double>& post_counts) {
    if (pre_counts.size() != post_counts.size())
        throw std::invalid_argument("outlier_weights_paired: length mismatch");
    OutlierWeights res;
    res.weights.assign(pre_counts.size(), 1.0);
    for (std::size_t i = 0; i < pre_counts.size(); ++i) {
        if (post_counts[i] <= pre_counts[i]) continue;
        res.outliers.push_back(i);
        res.weights[i] = pre_counts[i] > 0.0 ? pre_counts[i] / post_counts[i] : 0.01;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Parameter layout and transforms
// ---------------------------------------------------------------------------

enum class Transform {
    log_positive,    // theta = exp(u)
    logit_interval,  // theta = upper * sigmoid(u)
    log_shift_one,   // theta = 1 + exp(u)
};

struct ParamInfo {
    std::string name;
    Transform transform;
    double upper = 1.0;  // logit_interval only
};

struct ParamLayout {
    std::vector<ParamInfo> params;
    int mu = -1, kappa = -1, delta = -1, tau = -1, nu = -1, phi = -1, alpha = -1;
    int mu_c0 = -1, mu_t0 = -1, delta_i0 = -1;
    std::size_t n_c = 0, n_t = 0, n_di = 0;

    std::size_t size() const { return params.size(); }
};

struct LogPosterior {
    double value = 0.0;
    std::vector<double> grad;
    bool divergent = false;  // non-finite evaluation
};

namespace model_detail {

inline double sigmoid(double u) {
    return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

// Poisson observation term; accumulates d/dlambda.
inline double pois_obs(std::int64_t y, double lambda, double lg_y1, double& dlambda) {
    if (!(lambda > 0.0)) {
        if (y == 0 && lambda == 0.0) {
            dlambda += -1.0;
            return 0.0;
        }
        return -special::inf;
    }
    dlambda += static_cast<double>(y) / lambda - 1.0;
    if (y == 0) return -lambda;
    return static_cast<double>(y) * std::log(lambda) - lambda - lg_y1;
}

// Zero-inflated Poisson observation term. Exact at phi == 0.
inline double zip_obs(std::int64_t y, double lambda, double phi, double lg_y1, double& dlambda,
                      double& dphi) {
    if (!(lambda > 0.0) || phi >= 1.0) return -special::inf;
    if (y == 0) {
        const double lB = std::log1p(-phi) - lambda;
        const double ll = phi > 0.0 ? special::log_sum_exp(std::log(phi), lB) : lB;
        dlambda += -std::exp(lB - ll);
        dphi += (1.0 - std::exp(-lambda)) / std::exp(ll);
        return ll;
    }
    dlambda += static_cast<double>(y) / lambda - 1.0;
    dphi += -1.0 / (1.0 - phi);
    return std::log1p(-phi) + static_cast<double>(y) * std::log(lambda) - lambda - lg_y1;
}

// Weighted two-component Poisson mixture w Pois(lambda) + (1-w) Pois(alpha lambda).
inline double mix_pois_obs(std::int64_t y, double lambda, double alpha, double w, double lg_y1,
                           double& dlambda, double& dalpha) {
    if (w >= 1.0) return pois_obs(y, lambda, lg_y1, dlambda);
    if (!(lambda > 0.0)) return -special::inf;
    const double yd = static_cast<double>(y);
    const double lp1 = yd * std::log(lambda) - lambda - lg_y1;
    const double lp2 = yd * std::log(alpha * lambda) - alpha * lambda - lg_y1;
    const double l1 = std::log(w) + lp1;
    const double l2 = std::log1p(-w) + lp2;
    const double ll = special::log_sum_exp(l1, l2);
    const double r1 = std::exp(l1 - ll);
    const double r2 = std::exp(l2 - ll);
    dlambda += r1 * (yd / lambda - 1.0) + r2 * (yd / lambda - alpha);
    dalpha += r2 * (yd / alpha - lambda);
    return ll;
}

// Mixture with zero inflation: phi 1{y=0} + (1-phi)(w Pois + (1-w) Pois).
inline double mix_zip_obs(std::int64_t y, double lambda, double alpha, double w, double phi,
                          double lg_y1, double& dlambda, double& dalpha, double& dphi) {
    if (w >= 1.0) return zip_obs(y, lambda, phi, lg_y1, dlambda, dphi);
    if (!(lambda > 0.0) || phi >= 1.0) return -special::inf;
    if (y > 0) {
        const double ll = mix_pois_obs(y, lambda, alpha, w, lg_y1, dlambda, dalpha);
        dphi += -1.0 / (1.0 - phi);
        return std::log1p(-phi) + ll;
    }
    const double lw = std::log(w) - lambda;
    const double lo = std::log1p(-w) - alpha * lambda;
    const double lM = special::log_sum_exp(lw, lo);
    const double lB = std::log1p(-phi) + lM;
    const double ll = phi > 0.0 ? special::log_sum_exp(std::log(phi), lB) : lB;
    const double rB = std::exp(lB - ll);
    const double rw = std::exp(lw - lM);
    const double ro = std::exp(lo - lM);
    dlambda += -rB * (rw + ro * alpha);
    dalpha += -rB * ro * lambda;
    dphi += (1.0 - std::exp(lM)) / std::exp(ll);
    return ll;
}

}  // namespace model_detail

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

class Model {
public:
    static Model build(ModelKind kind, CountDataset data, PriorSet user_priors = {},
                       double delta_upper = 1.0) {
        if (kind_is_paired(kind) && data.design != Design::paired)
            throw std::invalid_argument(model_kind_name(kind) + " requires paired data");
        if (!kind_is_paired(kind) && data.design != Design::unpaired)
            throw std::invalid_argument(model_kind_name(kind) + " requires unpaired data");
        data.validate();
        if (!(delta_upper > 0.0))
            throw std::invalid_argument("delta upper bound must be positive");

        Model m;
        m.kind_ = kind;
        m.data_ = std::move(data);
        m.delta_upper_ = delta_upper;
        m.pre_epg_ = m.data_.pre_epg();
        m.post_epg_ = m.data_.post_epg();

        if (kind_has_outlier(kind)) {
            const OutlierWeights ow = kind_is_paired(kind)
                ? outlier_weights_paired(m.pre_epg_, m.post_epg_)
                : outlier_weights_unpaired(m.post_epg_);
            m.weights_ = ow.weights;
            m.alpha_prior_mean_ = alpha_prior_mean(m.post_epg_, ow);
        } else {
            m.weights_.assign(m.post_epg_.size(), 1.0);
        }

        m.small_sample_ = std::min(m.data_.n_pre(), m.data_.n_post()) < 10;
        m.build_layout();
        m.resolve_priors(user_priors);
        m.cache_tables();
        return m;
    }

    ModelKind kind() const { return kind_; }
    const CountDataset& data() const { return data_; }
    const ParamLayout& layout() const { return layout_; }
    std::size_t n_params() const { return layout_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    bool small_sample_warning() const { return small_sample_; }
    double delta_upper() const { return delta_upper_; }
    const std::map<std::string, PriorSpec>& priors() const { return priors_; }

    std::vector<std::string> param_names() const {
        std::vector<std::string> names;
        names.reserve(layout_.size());
        for (const auto& p : layout_.params) names.push_back(p.name);
        return names;
    }

    // Log-likelihood + log-prior and its gradient on the constrained scale.
    // Returns -inf (grad unspecified) outside the support.
    double log_density_constrained(std::span<const double> theta,
                                   std::vector<double>* grad = nullptr) const {
        if (theta.size() != layout_.size())
            throw std::invalid_argument("log_density_constrained: parameter length mismatch");
        if (grad) grad->assign(layout_.size(), 0.0);
        return eval_theta(theta.data(), grad ? grad->data() : nullptr);
    }

    LogPosterior log_posterior(std::span<const double> u) const {
        const std::size_t n = layout_.size();
        if (u.size() != n) throw std::invalid_argument("log_posterior: parameter length mismatch");
        LogPosterior out;
        out.grad.assign(n, 0.0);
        for (double v : u)
            if (!std::isfinite(v)) {
                out.value = -special::inf;
                out.divergent = true;
                return out;
            }

        std::vector<double> theta(n);
        double log_jac = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            switch (layout_.params[j].transform) {
                case Transform::log_positive:
                    theta[j] = std::exp(u[j]);
                    log_jac += u[j];
                    break;
                case Transform::logit_interval: {
                    const double s = model_detail::sigmoid(u[j]);
                    theta[j] = layout_.params[j].upper * s;
                    log_jac += std::log(layout_.params[j].upper) + std::log(s) + std::log1p(-s);
                    break;
                }
                case Transform::log_shift_one:
                    theta[j] = 1.0 + std::exp(u[j]);
                    log_jac += u[j];
                    break;
            }
        }
        if (!std::isfinite(log_jac)) {
            out.value = -special::inf;
            out.divergent = true;
            return out;
        }

        std::vector<double> gtheta(n, 0.0);
        const double base = eval_theta(theta.data(), gtheta.data());
        double value = base + log_jac;
        if (std::isfinite(value)) {
            for (std::size_t j = 0; j < n; ++j) {
                double g = 0.0;
                switch (layout_.params[j].transform) {
                    case Transform::log_positive:
                        g = gtheta[j] * theta[j] + 1.0;
                        break;
                    case Transform::logit_interval: {
                        const double s = model_detail::sigmoid(u[j]);
                        g = gtheta[j] * layout_.params[j].upper * s * (1.0 - s) + (1.0 - 2.0 * s);
                        break;
                    }
                    case Transform::log_shift_one:
                        g = gtheta[j] * (theta[j] - 1.0) + 1.0;
                        break;
                }
                if (!std::isfinite(g)) {
                    value = -special::inf;
                    break;
                }
                out.grad[j] = g;
            }
        }
        if (!std::isfinite(value)) {
            out.value = -special::inf;
            out.grad.assign(n, 0.0);
            out.divergent = true;
            return out;
        }
        out.value = value;
        return out;
    }

    std::vector<double> to_constrained(std::span<const double> u) const {
        std::vector<double> theta(u.size());
        for (std::size_t j = 0; j < u.size(); ++j) {
            switch (layout_.params[j].transform) {
                case Transform::log_positive: theta[j] = std::exp(u[j]); break;
                case Transform::logit_interval:
                    theta[j] = layout_.params[j].upper * model_detail::sigmoid(u[j]);
                    break;
                case Transform::log_shift_one: theta[j] = 1.0 + std::exp(u[j]); break;
            }
        }
        return theta;
    }

    std::vector<double> to_unconstrained(std::span<const double> theta) const {
        std::vector<double> u(theta.size());
        for (std::size_t j = 0; j < theta.size(); ++j) {
            switch (layout_.params[j].transform) {
                case Transform::log_positive: u[j] = std::log(theta[j]); break;
                case Transform::logit_interval: {
                    const double s = theta[j] / layout_.params[j].upper;
                    u[j] = std::log(s) - std::log1p(-s);
                    break;
                }
                case Transform::log_shift_one: u[j] = std::log(theta[j] - 1.0); break;
            }
        }
        return u;
    }

    // Moment-matched starting point: group and per-animal means sit on the
    // data, everything else is drawn uniform(-1,1) on the unconstrained scale
    // so chains start dispersed.
    std::vector<double> initial_values(RngStream& rng) const {
        std::vector<double> u(layout_.size());
        for (std::size_t j = 0; j < u.size(); ++j) u[j] = rng.uniform(-1.0, 1.0);
        const double mu0 = std::max(1.0, stats::mean(pre_epg_));
        u[layout_.mu] = std::log(mu0);
        for (std::size_t i = 0; i < layout_.n_c; ++i)
            u[layout_.mu_c0 + i] = std::log(std::max(1.0, pre_epg_[i]));
        for (std::size_t i = 0; i < layout_.n_t; ++i)
            u[layout_.mu_t0 + i] = std::log(std::max(1.0, post_epg_[i]));
        return u;
    }

private:
    // Location of alpha's truncated-normal prior: weighted mean of the
    // outlying after-treatment counts over the mean of all of them. The
    // truncation at 1 carries the support; the location may sit below it.
    static double alpha_prior_mean(const std::vector<double>& post_counts,
                                   const OutlierWeights& ow) {
        if (ow.outliers.empty()) return 1.0;
        double wy = 0.0, wsum = 0.0;
        for (std::size_t i : ow.outliers) {
            wy += ow.weights[i] * post_counts[i];
            wsum += ow.weights[i];
        }
        const double all_mean = stats::mean(post_counts);
        if (!(all_mean > 0.0) || !(wsum > 0.0)) return 1.0;
        return (wy / wsum) / all_mean;
    }

    void build_layout() {
        auto add = [&](const std::string& name, Transform t, double upper = 1.0) {
            layout_.params.push_back({name, t, upper});
            return static_cast<int>(layout_.params.size() - 1);
        };
        layout_.mu = add("mu", Transform::log_positive);
        if (!kind_is_simple(kind_)) layout_.kappa = add("kappa", Transform::log_positive);
        if (kind_is_individual(kind_)) {
            layout_.tau = add("tau", Transform::log_positive);
            layout_.nu = add("nu", Transform::logit_interval, 1.0);
        } else {
            layout_.delta = add("delta", Transform::logit_interval, delta_upper_);
        }
        if (kind_has_zi(kind_)) layout_.phi = add("phi", Transform::logit_interval, 1.0);
        if (kind_has_outlier(kind_)) layout_.alpha = add("alpha", Transform::log_shift_one);
        if (!kind_is_simple(kind_)) {
            layout_.n_c = data_.n_pre();
            layout_.mu_c0 = add("mu_c[1]", Transform::log_positive);
            for (std::size_t i = 1; i < layout_.n_c; ++i)
                add("mu_c[" + std::to_string(i + 1) + "]", Transform::log_positive);
        }
        if (!kind_is_paired(kind_)) {
            layout_.n_t = data_.n_post();
            layout_.mu_t0 = add("mu_t[1]", Transform::log_positive);
            for (std::size_t i = 1; i < layout_.n_t; ++i)
                add("mu_t[" + std::to_string(i + 1) + "]", Transform::log_positive);
        }
        if (kind_is_individual(kind_)) {
            layout_.n_di = data_.n_pre();
            layout_.delta_i0 = add("delta_i[1]", Transform::log_positive);
            for (std::size_t i = 1; i < layout_.n_di; ++i)
                add("delta_i[" + std::to_string(i + 1) + "]", Transform::log_positive);
        }
    }

    void resolve_priors(const PriorSet& user) {
        PriorSet defaults;
        defaults["mu"] = PriorSpec::gamma_prior(1.0, 0.001);
        defaults["kappa"] = PriorSpec::gamma_prior(1.0, 0.7);
        defaults["delta"] = PriorSpec::beta_prior(1.0, 1.0);
        defaults["phi"] = PriorSpec::beta_prior(1.0, 1.0);
        defaults["nu"] = PriorSpec::beta_prior(1.0, 1.0);
        defaults["tau"] = PriorSpec::trunc_normal_prior(2.0, 1.0, 0.0);
        defaults["alpha"] = PriorSpec::trunc_normal_prior(alpha_prior_mean_, 10.0, 1.0);

        auto want = [&](const char* name, int idx) {
            if (idx < 0) return;
            auto it = user.find(name);
            priors_[name] = it != user.end() ? it->second : defaults.at(name);
        };
        want("mu", layout_.mu);
        want("kappa", layout_.kappa);
        want("delta", layout_.delta);
        want("phi", layout_.phi);
        want("nu", layout_.nu);
        want("tau", layout_.tau);
        want("alpha", layout_.alpha);
        for (const auto& [name, spec] : user)
            if (!priors_.count(name))
                throw std::invalid_argument("prior override for unknown parameter '" + name + "'");
        for (const auto& [name, spec] : priors_) {
            const bool interval = name == "delta" || name == "phi" || name == "nu";
            if (interval && spec.dist == PriorDist::gamma)
                throw std::invalid_argument("gamma prior is not supported for interval parameter " + name);
            if (!interval && spec.dist == PriorDist::beta)
                throw std::invalid_argument("beta prior is not supported for positive parameter " + name);
        }
    }

    void cache_tables() {
        lg_pre_.resize(data_.n_pre());
        for (std::size_t i = 0; i < lg_pre_.size(); ++i)
            lg_pre_[i] = std::lgamma(static_cast<double>(data_.pre_raw[i]) + 1.0);
        lg_post_.resize(data_.n_post());
        for (std::size_t i = 0; i < lg_post_.size(); ++i)
            lg_post_[i] = std::lgamma(static_cast<double>(data_.post_raw[i]) + 1.0);
    }

    // Aggregated Gamma(a, a/m) layer over a parameter block.
    // Adds d/dx_i, d/da, d/dm into the gradient slots when grad is set.
    double gamma_layer(const double* th, double* g, int x0, std::size_t n, int a_idx,
                       int m_idx) const {
        const double a = th[a_idx];
        const double m = th[m_idx];
        if (!(a > 0.0) || !(m > 0.0)) return -special::inf;
        double sum_log_x = 0.0, sum_x = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = th[x0 + i];
            if (!(x > 0.0)) return -special::inf;
            sum_log_x += std::log(x);
            sum_x += x;
            if (g) g[x0 + i] += (a - 1.0) / x - a / m;
        }
        const double nd = static_cast<double>(n);
        const double log_rate = std::log(a / m);
        if (g) {
            g[a_idx] += nd * (log_rate + 1.0 - special::digamma(a)) + sum_log_x - sum_x / m;
            g[m_idx] += a * (sum_x - nd * m) / (m * m);
        }
        return nd * (a * log_rate - std::lgamma(a)) + (a - 1.0) * sum_log_x - (a / m) * sum_x;
    }

    double eval_theta(const double* th, double* g) const {
        using namespace model_detail;
        const ParamLayout& L = layout_;
        const bool zi = kind_has_zi(kind_);
        const bool outlier = kind_has_outlier(kind_);
        const bool individual = kind_is_individual(kind_);
        const bool simple = kind_is_simple(kind_);
        const bool paired = kind_is_paired(kind_);

        const double phi = zi ? th[L.phi] : 0.0;
        const double alpha = outlier ? th[L.alpha] : 1.0;
        if (zi && !(phi >= 0.0 && phi < 1.0)) return -special::inf;
        if (outlier && !(alpha >= 1.0 && std::isfinite(alpha))) return -special::inf;

        double dphi = 0.0, dalpha = 0.0;
        double ll = 0.0;

        // Control / before-treatment rows.
        for (std::size_t i = 0; i < data_.n_pre(); ++i) {
            const int rate_idx = simple ? L.mu : L.mu_c0 + static_cast<int>(i);
            const double rate = th[rate_idx];
            const double f = data_.f_pre[i];
            const double lambda = rate / f;
            double dl = 0.0;
            const double term = zi ? zip_obs(data_.pre_raw[i], lambda, phi, lg_pre_[i], dl, dphi)
                                   : pois_obs(data_.pre_raw[i], lambda, lg_pre_[i], dl);
            if (!std::isfinite(term)) return -special::inf;
            ll += term;
            if (g) g[rate_idx] += dl / f;
        }

        // Treatment / after-treatment rows.
        for (std::size_t i = 0; i < data_.n_post(); ++i) {
            const int base_idx = simple ? L.mu
                : paired ? L.mu_c0 + static_cast<int>(i)
                         : L.mu_t0 + static_cast<int>(i);
            const int scale_idx = individual ? L.delta_i0 + static_cast<int>(i) : L.delta;
            const double base = th[base_idx];
            const double scale = th[scale_idx];
            const double f = data_.f_post[i];
            const double lambda = scale * base / f;
            const double w = weights_[i];
            double dl = 0.0;
            double term;
            if (outlier) {
                term = zi ? mix_zip_obs(data_.post_raw[i], lambda, alpha, w, phi, lg_post_[i], dl,
                                        dalpha, dphi)
                          : mix_pois_obs(data_.post_raw[i], lambda, alpha, w, lg_post_[i], dl,
                                         dalpha);
            } else {
                term = zi ? zip_obs(data_.post_raw[i], lambda, phi, lg_post_[i], dl, dphi)
                          : pois_obs(data_.post_raw[i], lambda, lg_post_[i], dl);
            }
            if (!std::isfinite(term)) return -special::inf;
            ll += term;
            if (g) {
                g[base_idx] += dl * scale / f;
                g[scale_idx] += dl * base / f;
            }
        }

        if (zi && g) g[L.phi] += dphi;
        if (outlier && g) g[L.alpha] += dalpha;

        // Latent hierarchy layers.
        if (!simple) {
            const double t1 = gamma_layer(th, g, L.mu_c0, L.n_c, L.kappa, L.mu);
            if (!std::isfinite(t1)) return -special::inf;
            ll += t1;
            if (!paired) {
                const double t2 = gamma_layer(th, g, L.mu_t0, L.n_t, L.kappa, L.mu);
                if (!std::isfinite(t2)) return -special::inf;
                ll += t2;
            }
        }
        if (individual) {
            const double t3 = gamma_layer(th, g, L.delta_i0, L.n_di, L.tau, L.nu);
            if (!std::isfinite(t3)) return -special::inf;
            ll += t3;
        }

        // Group-parameter priors.
        for (const auto& [name, spec] : priors_) {
            int idx = -1;
            double upper = 0.0;
            if (name == "mu") idx = L.mu;
            else if (name == "kappa") idx = L.kappa;
            else if (name == "delta") { idx = L.delta; upper = delta_upper_; }
            else if (name == "phi") { idx = L.phi; upper = 1.0; }
            else if (name == "nu") { idx = L.nu; upper = 1.0; }
            else if (name == "tau") idx = L.tau;
            else if (name == "alpha") idx = L.alpha;
            if (idx < 0) continue;
            double dx = 0.0;
            const double term = prior_log_pdf(spec, th[idx], upper, &dx);
            if (!std::isfinite(term)) return -special::inf;
            ll += term;
            if (g) g[idx] += dx;
        }
        return ll;
    }

    ModelKind kind_ = ModelKind::PairedBaseline;
    CountDataset data_;
    double delta_upper_ = 1.0;
    std::vector<double> pre_epg_, post_epg_;
    std::vector<double> weights_;
    double alpha_prior_mean_ = 1.0;
    bool small_sample_ = false;
    ParamLayout layout_;
    std::map<std::string, PriorSpec> priors_;
    std::vector<double> lg_pre_, lg_post_;
};

}  // namespace fecr
