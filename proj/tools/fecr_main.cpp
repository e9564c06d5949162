// Command-line front end: simulate, fit, fecrt, elicit and an end-to-end
// demo pipeline. Text reports go to stdout; --json writes a machine-readable
// report; errors exit nonzero with a message naming the offending flag or
// data row.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fecr/dataset.hpp"
#include "fecr/elicit.hpp"
#include "fecr/fecrt.hpp"
#include "fecr/hmc.hpp"
#include "fecr/model.hpp"
#include "fecr/posterior.hpp"
#include "fecr/report.hpp"
#include "fecr/simulate.hpp"

using nlohmann::json;

namespace {

struct DataFlags {
    std::string path;
    std::string control_path;
    std::string treatment_path;
    bool paired = false;
    bool unpaired = false;
    bool raw_counts = false;
    double f = 1.0;
    double f_pre = 0.0;
    double f_post = 0.0;
    CLI::Option* f_opt = nullptr;
    CLI::Option* f_pre_opt = nullptr;
    CLI::Option* f_post_opt = nullptr;
};

void add_data_flags(CLI::App* cmd, DataFlags& d, bool need_design) {
    cmd->add_option("data", d.path, "CSV dataset (see README for accepted layouts)");
    cmd->add_option("--control", d.control_path, "control-group CSV (unpaired two-file layout)");
    cmd->add_option("--treatment", d.treatment_path, "treatment-group CSV");
    if (need_design) {
        cmd->add_flag("--paired", d.paired, "samples are paired per animal");
        cmd->add_flag("--unpaired", d.unpaired, "independent control and treatment groups");
    }
    cmd->add_flag("--raw-counts", d.raw_counts, "counts are raw chamber counts, not epg");
    d.f_opt = cmd->add_option("--f", d.f, "analytical sensitivity for all samples");
    d.f_pre_opt = cmd->add_option("--fpre", d.f_pre, "sensitivity override for pre/control samples");
    d.f_post_opt = cmd->add_option("--fpost", d.f_post, "sensitivity override for post/treatment samples");
}

fecr::CountDataset load_from_flags(const DataFlags& d) {
    const bool two_files = !d.control_path.empty() || !d.treatment_path.empty();
    if (two_files) {
        if (d.control_path.empty() || d.treatment_path.empty())
            throw std::invalid_argument("--control and --treatment must be given together");
        if (d.paired)
            throw std::invalid_argument("--control/--treatment imply --unpaired");
        fecr::CountDataset ds = fecr::load_csv_unpaired(d.control_path, d.treatment_path,
                                                        d.raw_counts, d.f_opt->count() ? d.f : 1.0);
        if (d.f_pre_opt->count()) ds.f_pre.assign(ds.f_pre.size(), d.f_pre);
        if (d.f_post_opt->count()) ds.f_post.assign(ds.f_post.size(), d.f_post);
        return ds;
    }
    if (d.path.empty()) throw std::invalid_argument("missing dataset path");
    if (d.paired == d.unpaired)
        throw std::invalid_argument("specify exactly one of --paired or --unpaired");
    fecr::LoadOptions opt;
    opt.design = d.paired ? fecr::Design::paired : fecr::Design::unpaired;
    opt.raw_counts = d.raw_counts;
    opt.f_default = d.f_opt->count() ? d.f : 1.0;
    if (d.f_pre_opt->count()) opt.f_pre_override = d.f_pre;
    if (d.f_post_opt->count()) opt.f_post_override = d.f_post;
    if (d.f_opt->count()) {
        if (!opt.f_pre_override) opt.f_pre_override = d.f;
        if (!opt.f_post_override) opt.f_post_override = d.f;
    }
    return fecr::load_csv(d.path, opt);
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

fecr::PriorSet parse_prior_flags(const std::vector<std::string>& texts) {
    fecr::PriorSet priors;
    for (const auto& t : texts) {
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--prior expects name=dist(a,b), got '" + t + "'");
        priors[t.substr(0, eq)] = fecr::parse_prior(t.substr(eq + 1));
    }
    return priors;
}

struct FitOutcome {
    fecr::FitSummary summary;
    fecr::report::FecrProbsResult probs;
};

std::string fecr_probs_line(const fecr::report::FecrProbsResult& probs) {
    std::ostringstream line;
    line.precision(2);
    line << std::fixed;
    line << "The probability that the reduction is less than " << probs.threshold << " is "
         << probs.percent << "\n";
    return line.str();
}

FitOutcome run_fit(std::ostream& out, const fecr::Model& model, const fecr::hmc::SamplerConfig& cfg,
                   double threshold, const std::string& json_path, const std::string& draws_path,
                   bool print_probs = true) {
    const auto draws = fecr::hmc::run_chains(model, cfg);
    const auto summary = fecr::summarize(model, draws);
    const auto derived = fecr::derive_fecr(model, draws);

    fecr::report::FecrProbsResult probs;
    probs.threshold = threshold;
    probs.percent = fecr::fecr_probs(derived.pooled_fecr(), threshold);

    fecr::report::render_fit_text(out, summary, cfg);
    if (print_probs) out << "\n" << fecr_probs_line(probs);
    if (!json_path.empty())
        write_json_file(json_path, fecr::report::fit_report_json(summary, cfg, probs));
    if (!draws_path.empty()) {
        std::ofstream dout(draws_path);
        if (!dout) throw std::runtime_error("cannot write file: " + draws_path);
        fecr::report::write_draws_csv(dout, draws, derived);
    }
    return {summary, probs};
}

int run_demo(std::uint64_t seed, const std::string& json_path) {
    std::cout << "== simulate ==\n";
    fecr::SimConfig sim_cfg;
    sim_cfg.n = 15;
    sim_cfg.pre_mean = 500.0;
    sim_cfg.delta = 0.1;
    sim_cfg.kappa = 1.0;
    sim_cfg.f = 15.0;
    sim_cfg.paired = true;
    sim_cfg.seed = seed;
    fecr::RngStream sim_stream(seed, 0);
    const auto table = fecr::simulate(sim_cfg, sim_stream);
    std::cout << "obsPre masterPre truePre obsPost masterPost truePost\n";
    for (std::size_t i = 0; i < 3 && i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        std::cout << r.obs_pre << ' ' << r.master_pre << ' ' << r.true_pre << ' ' << r.obs_post
                  << ' ' << r.master_post << ' ' << r.true_post << "\n";
    }

    std::cout << "\n== fit ==\n";
    const auto ds = table.to_dataset();
    const auto model = fecr::Model::build(fecr::ModelKind::PairedIndividual, ds);
    fecr::hmc::SamplerConfig cfg;
    cfg.seed = seed;
    const FitOutcome fit = run_fit(std::cout, model, cfg, 0.95, "", "", false);

    std::cout << "\n== fecr_probs ==\n";
    std::cout << fecr_probs_line(fit.probs);

    std::cout << "\n== fecrt ==\n";
    const auto fr = fecr::fecrt_asymptotic_ci(ds.pre_epg(), ds.post_epg());
    fecr::report::render_fecrt_text(std::cout, fr, 0.95);

    if (!json_path.empty()) {
        json j;
        j["simulate"] = fecr::report::simulate_report_json(table, "");
        j["fit"] = fecr::report::fit_report_json(fit.summary, cfg, fit.probs);
        j["fecrt"] = fecr::report::fecrt_report_json(fr, 0.95, seed);
        write_json_file(json_path, j);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian and classical faecal egg count reduction estimation"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "generate a synthetic count dataset");
    fecr::SimConfig sim_cfg;
    bool sim_unpaired = false;
    std::string sim_out, sim_json;
    sim->add_option("--n", sim_cfg.n, "number of animals per group")->capture_default_str();
    sim->add_option("--pre-mean", sim_cfg.pre_mean, "true mean epg before treatment")
        ->capture_default_str();
    sim->add_option("--delta", sim_cfg.delta, "proportion of epg remaining after treatment")
        ->capture_default_str();
    sim->add_option("--kappa", sim_cfg.kappa, "between-animal dispersion")->capture_default_str();
    sim->add_option("--f", sim_cfg.f, "analytical sensitivity")->capture_default_str();
    sim->add_flag("--unpaired", sim_unpaired, "independent animals before and after treatment");
    sim->add_option("--phi", sim_cfg.phi, "proportion of unexposed animals")->capture_default_str();
    sim->add_option("--seed", sim_cfg.seed, "random seed")->envname("FECR_SEED");
    sim->add_option("-o,--output", sim_out, "output CSV path (stdout when omitted)");
    sim->add_option("--json", sim_json, "write a JSON report to this path");

    // ---- fit ----
    auto* fit = app.add_subcommand("fit", "fit a Bayesian reduction model");
    DataFlags fit_data;
    add_data_flags(fit, fit_data, true);
    bool zero_inflation = false, individual = false, simple = false, outlier = false;
    fit->add_flag("--zero-inflation", zero_inflation, "zero-inflated counts (unexposed animals)");
    fit->add_flag("--individual-efficacy", individual, "per-animal reductions (paired only)");
    fit->add_flag("--simple", simple, "two-parameter model without between-animal variation");
    fit->add_flag("--outlier", outlier, "weighted mixture for outlying after-treatment counts");
    fecr::hmc::SamplerConfig cfg;
    fit->add_option("--nsamples", cfg.nsamples, "total iterations per chain (warmup included)")
        ->capture_default_str();
    fit->add_option("--nburnin", cfg.nburnin, "warmup iterations per chain")->capture_default_str();
    fit->add_option("--thinning", cfg.thinning, "keep every k-th draw")->capture_default_str();
    fit->add_option("--nchain", cfg.nchain, "number of chains")->capture_default_str();
    fit->add_option("--ncore", cfg.nworkers, "worker threads for chains")->capture_default_str();
    fit->add_option("--adapt-delta", cfg.adapt_delta, "target acceptance rate in (0.6,1)")
        ->capture_default_str();
    fit->add_option("--max-leapfrog", cfg.max_leapfrog, "leapfrog step cap per trajectory")
        ->capture_default_str();
    fit->add_option("--seed", cfg.seed, "random seed")->envname("FECR_SEED");
    std::vector<std::string> prior_texts;
    fit->add_option("--prior", prior_texts,
                    "prior override, e.g. mu=gamma(1,0.001) or delta=beta(1,1)");
    double delta_upper = 1.0;
    fit->add_option("--delta-upper", delta_upper,
                    "upper bound for the reduction-remaining parameter delta")
        ->capture_default_str();
    double threshold = 0.95;
    fit->add_option("--threshold", threshold, "reduction threshold for the probability report")
        ->capture_default_str();
    std::string fit_json, fit_draws;
    bool strict = false;
    fit->add_option("--json", fit_json, "write a JSON report to this path");
    fit->add_option("--draws", fit_draws, "export retained draws as CSV to this path");
    fit->add_flag("--strict", strict, "exit nonzero when the fit raises warnings");

    // ---- fecrt ----
    auto* fecrt_cmd = app.add_subcommand("fecrt", "classical reduction test");
    DataFlags fecrt_data;
    add_data_flags(fecrt_cmd, fecrt_data, true);
    bool use_bootstrap = false;
    int bootstrap_b = 2000;
    double level = 0.95;
    std::uint64_t fecrt_seed = 0;
    std::string fecrt_json;
    fecrt_cmd->add_flag("--bootstrap", use_bootstrap, "percentile bootstrap instead of the t interval");
    fecrt_cmd->add_option("--B", bootstrap_b, "bootstrap replicates")->capture_default_str();
    fecrt_cmd->add_option("--level", level, "confidence level")->capture_default_str();
    fecrt_cmd->add_option("--seed", fecrt_seed, "random seed (bootstrap)")->envname("FECR_SEED");
    fecrt_cmd->add_option("--json", fecrt_json, "write a JSON report to this path");

    // ---- elicit ----
    auto* elicit_cmd = app.add_subcommand("elicit", "prior hyperparameters from expert statements");
    std::string family_text;
    elicit_cmd->add_option("family", family_text, "gamma (for mu) or beta (for delta)")->required();
    std::vector<std::string> q_texts;
    elicit_cmd->add_option("--q", q_texts, "quantile statement p=Q (give exactly two)");
    double mode_value = 0.0, concentration = 0.0;
    auto* mode_opt = elicit_cmd->add_option("--mode", mode_value, "beta mode in (0,1)");
    auto* conc_opt =
        elicit_cmd->add_option("--concentration", concentration, "beta concentration > 2");
    std::string elicit_target_name, elicit_json;
    elicit_cmd->add_option("--target", elicit_target_name,
                           "parameter name for the printed prior snippet");
    elicit_cmd->add_option("--json", elicit_json, "write a JSON report to this path");

    // ---- demo ----
    auto* demo = app.add_subcommand("demo", "simulate, fit, and test one dataset end to end");
    std::uint64_t demo_seed = 1;
    std::string demo_json;
    demo->add_option("--seed", demo_seed, "random seed")->envname("FECR_SEED");
    demo->add_option("--json", demo_json, "write a JSON report to this path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            sim_cfg.paired = !sim_unpaired;
            fecr::RngStream stream(sim_cfg.seed, 0);
            const auto table = fecr::simulate(sim_cfg, stream);
            if (sim_out.empty()) {
                fecr::write_sim_csv(std::cout, table);
            } else {
                fecr::write_sim_csv(sim_out, table);
                std::cout << "wrote " << table.rows.size() << " rows to " << sim_out << "\n";
            }
            if (!sim_json.empty())
                write_json_file(sim_json, fecr::report::simulate_report_json(table, sim_out));
            return 0;
        }
        if (fit->parsed()) {
            if (individual && !fit_data.paired)
                throw std::invalid_argument("--individual-efficacy requires --paired");
            if (individual && zero_inflation)
                throw std::invalid_argument(
                    "--individual-efficacy cannot be combined with --zero-inflation");
            if (simple && !fit_data.paired)
                throw std::invalid_argument("--simple requires --paired");
            const auto ds = load_from_flags(fit_data);
            const auto kind = fecr::model_kind_from_flags(ds.design == fecr::Design::paired,
                                                          zero_inflation, individual, simple,
                                                          outlier);
            const auto model =
                fecr::Model::build(kind, ds, parse_prior_flags(prior_texts), delta_upper);
            const FitOutcome outcome =
                run_fit(std::cout, model, cfg, threshold, fit_json, fit_draws);
            if (strict && !outcome.summary.warnings.empty()) return 1;
            return 0;
        }
        if (fecrt_cmd->parsed()) {
            const auto ds = load_from_flags(fecrt_data);
            const fecr::FecrtResult r = use_bootstrap
                ? fecr::bootstrap_ci(ds, bootstrap_b, level, fecr::RngStream(fecrt_seed, 0))
                : fecr::fecrt_asymptotic_ci(ds.pre_epg(), ds.post_epg(), level);
            fecr::report::render_fecrt_text(std::cout, r, level);
            if (!fecrt_json.empty())
                write_json_file(fecrt_json, fecr::report::fecrt_report_json(r, level, fecrt_seed));
            return 0;
        }
        if (elicit_cmd->parsed()) {
            fecr::ElicitFamily family;
            if (family_text == "gamma")
                family = fecr::ElicitFamily::gamma;
            else if (family_text == "beta")
                family = fecr::ElicitFamily::beta;
            else
                throw std::invalid_argument("family must be gamma or beta, got '" + family_text + "'");

            fecr::ElicitResult result;
            if (mode_opt->count() || conc_opt->count()) {
                if (family != fecr::ElicitFamily::beta)
                    throw std::invalid_argument("--mode/--concentration apply to the beta family only");
                if (!mode_opt->count() || !conc_opt->count())
                    throw std::invalid_argument("--mode and --concentration must be given together");
                result = fecr::beta_from_mode_concentration(mode_value, concentration);
            } else {
                if (q_texts.size() != 2)
                    throw std::invalid_argument("give exactly two --q p=Q statements");
                fecr::ElicitationTarget target;
                target.family = family;
                double ps[2], qs[2];
                for (int i = 0; i < 2; ++i) {
                    const auto eq = q_texts[i].find('=');
                    if (eq == std::string::npos)
                        throw std::invalid_argument("--q expects p=Q, got '" + q_texts[i] + "'");
                    ps[i] = std::stod(q_texts[i].substr(0, eq));
                    qs[i] = std::stod(q_texts[i].substr(eq + 1));
                }
                if (ps[0] > ps[1]) {
                    std::swap(ps[0], ps[1]);
                    std::swap(qs[0], qs[1]);
                }
                target.p1 = ps[0];
                target.q1 = qs[0];
                target.p2 = ps[1];
                target.q2 = qs[1];
                result = fecr::solve_from_quantiles(target);
            }
            const std::string target_param = !elicit_target_name.empty()
                ? elicit_target_name
                : (family == fecr::ElicitFamily::gamma ? "mu" : "delta");
            const json j = fecr::report::elicit_report_json(family, result, target_param);
            std::cout << "hyperparameters: theta1 = " << result.theta1
                      << ", theta2 = " << result.theta2 << "\n";
            std::cout << "prior snippet:   --prior " << j["prior"].get<std::string>() << "\n";
            if (!elicit_json.empty()) write_json_file(elicit_json, j);
            return 0;
        }
        if (demo->parsed()) return run_demo(demo_seed, demo_json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
