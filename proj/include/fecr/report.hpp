#pragma once

// Text and JSON rendering of fit results, classical test results and
// elicitation output. The JSON schemas are documented in the README; the
// text block mirrors what the fit subcommand prints.

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "fecr/elicit.hpp"
#include "fecr/fecrt.hpp"
#include "fecr/posterior.hpp"
#include "fecr/simulate.hpp"

namespace fecr::report {

using nlohmann::json;

struct FecrProbsResult {
    double threshold = 0.95;
    double percent = 0.0;
};

inline json sampler_config_json(const hmc::SamplerConfig& cfg) {
    return json{{"nsamples", cfg.nsamples},     {"nburnin", cfg.nburnin},
                {"thinning", cfg.thinning},     {"nchain", cfg.nchain},
                {"nworkers", cfg.nworkers},     {"adapt_delta", cfg.adapt_delta},
                {"max_leapfrog", cfg.max_leapfrog}, {"seed", cfg.seed}};
}

inline json summary_json(const FitSummary& s) {
    json rows = json::array();
    for (const auto& r : s.rows)
        rows.push_back(json{{"name", r.name},
                            {"mean", r.mean},
                            {"sd", r.sd},
                            {"q2.5", r.q2_5},
                            {"q25", r.q25},
                            {"q50", r.q50},
                            {"q75", r.q75},
                            {"q97.5", r.q97_5}});
    json warnings = json::array();
    for (const auto& w : s.warnings) warnings.push_back(w.message);
    json rhat = json::object();
    for (const auto& [k, v] : s.rhat)
        rhat[k] = std::isfinite(v) ? json(v) : json("inf");
    return json{{"model", s.model_name},
                {"summary", rows},
                {"rhat", rhat},
                {"divergences", s.divergences},
                {"warnings", warnings}};
}

inline json fit_report_json(const FitSummary& s, const hmc::SamplerConfig& cfg,
                            const FecrProbsResult& probs) {
    json j = summary_json(s);
    j["config"] = sampler_config_json(cfg);
    j["fecr_probs"] = json{{"threshold", probs.threshold}, {"percent", probs.percent}};
    return j;
}

inline void render_fit_text(std::ostream& out, const FitSummary& s,
                            const hmc::SamplerConfig& cfg) {
    out << "Model:  " << s.model_name << "\n";
    out << " Number of Samples:  " << cfg.nsamples << "\n";
    out << " Warm-up samples:  " << cfg.nburnin << "\n";
    out << " Thinning:  " << cfg.thinning << "\n";
    out << " Number of Chains " << cfg.nchain << "\n";
    out << std::setw(18) << std::left << "" << std::right;
    for (const char* h : {"mean", "sd", "2.5%", "25%", "50%", "75%", "97.5%"})
        out << std::setw(10) << h;
    out << "\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& r : s.rows) {
        out << std::setw(18) << std::left << r.name << std::right;
        for (double v : {r.mean, r.sd, r.q2_5, r.q25, r.q50, r.q75, r.q97_5})
            out << std::setw(10) << v;
        out << "\n";
    }
    out.unsetf(std::ios::fixed);
    out << std::setprecision(6);
    out << "\n";
    if (s.warnings.empty()) {
        out << "NOTE: There is no evidence of non-convergence since all parameters have\n"
               "      potential scale reduction factors less than 1.1.\n";
    } else {
        for (const auto& w : s.warnings) out << "NOTE: " << w.message << "\n";
    }
}

inline json fecrt_report_json(const FecrtResult& r, double level, std::uint64_t seed) {
    json j{{"reduction_pct", r.reduction_pct},
           {"ci", json{{"lower_pct", r.ci_lower_pct}, {"upper_pct", r.ci_upper_pct}, {"level", level}}},
           {"method", fecrt_method_name(r.method)},
           {"n_control", r.n_control},
           {"n_treatment", r.n_treatment}};
    if (r.method == FecrtMethod::bootstrap) {
        j["B"] = r.bootstrap_b;
        j["seed"] = seed;
    }
    return j;
}

inline void render_fecrt_text(std::ostream& out, const FecrtResult& r, double level) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "Faecal egg count reduction test (" << fecrt_method_name(r.method) << ")\n";
    os << " Observed reduction: " << r.reduction_pct << "%\n";
    os << " " << 100.0 * level << "% CI: (" << r.ci_lower_pct << "%, " << r.ci_upper_pct << "%)\n";
    os << " n control: " << r.n_control << ", n treatment: " << r.n_treatment;
    if (r.method == FecrtMethod::bootstrap) os << ", B: " << r.bootstrap_b;
    os << "\n";
    out << os.str();
}

inline json elicit_report_json(ElicitFamily family, const ElicitResult& r,
                               const std::string& target_param) {
    const std::string dist = family == ElicitFamily::gamma ? "gamma" : "beta";
    std::ostringstream prior;
    prior.precision(10);
    prior << target_param << "=" << dist << "(" << r.theta1 << "," << r.theta2 << ")";
    return json{{"family", dist},
                {"hyperpars", json::array({r.theta1, r.theta2})},
                {"max_residual", r.max_residual},
                {"prior", prior.str()}};
}

inline json simulate_report_json(const SimTable& table, const std::string& output_path) {
    return json{{"config", json::parse(sim_config_json(table.config))},
                {"rows", table.rows.size()},
                {"output", output_path}};
}

// Flat draw export: one row per retained draw with constrained parameters
// and derived quantities, for external trace or density plotting.
inline void write_draws_csv(std::ostream& out, const hmc::PosteriorDraws& draws,
                            const DerivedDraws& derived) {
    out << "chain,draw";
    for (const auto& n : draws.param_names) out << ',' << n;
    out << ",FECR,meanEPG.untreated,meanEPG.treated\n";
    out.precision(17);
    for (std::size_t c = 0; c < draws.chains.size(); ++c) {
        const auto& chain = draws.chains[c];
        for (std::size_t d = 0; d < chain.draws.size(); ++d) {
            out << (c + 1) << ',' << (d + 1);
            for (double v : chain.draws[d]) out << ',' << v;
            out << ',' << derived.fecr[c][d] << ',' << derived.mean_epg_untreated[c][d] << ','
                << derived.mean_epg_treated[c][d] << '\n';
        }
    }
}

}  // namespace fecr::report
