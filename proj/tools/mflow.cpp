// Command-line front end: scenario simulation, regime classification, and
// report table emission.
//
// Exit codes: 0 success, 1 input/validation error, 2 runtime abort.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mflow/mflow.hpp"

namespace {

int run_simulate(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                 std::optional<std::size_t> trials, bool learning, std::optional<std::string> out,
                 bool lenient, unsigned workers) {
    mflow::Scenario sc;
    try {
        sc = mflow::parse_scenario(scenario_path, lenient);
    } catch (const mflow::DataError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 1;
    }
    if (seed) sc.master_seed = *seed;
    if (trials) {
        if (*trials < 1) {
            std::cerr << "scenario error: --trials must be >= 1\n";
            return 1;
        }
        sc.n_trials = *trials;
    }
    if (learning) sc.reset_experience = false;
    if (out) sc.out_dir = *out;
    if (!sc.reset_experience && workers > 1) {
        std::cerr << "scenario error: learning mode is sequential; --workers must be 1\n";
        return 1;
    }

    mflow::SimReport report;
    try {
        report = mflow::run_monte_carlo(sc.workflow, sc.assignment(), sc.n_trials,
                                        sc.master_seed, sc.reset_experience, workers);
        mflow::write_report(report, sc.out_dir);
    } catch (const mflow::DataError& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime abort: " << e.what() << "\n";
        return 2;
    }
    for (const auto& ns : report.nodes)
        std::printf("%s: rate %.4f +/- %.4f, mean time %.4f, entropy %.4f bits%s\n",
                    ns.id.c_str(), ns.success_rate, ns.standard_error, ns.mean_time,
                    ns.entropy_bits, ns.saturated ? ", saturated" : "");
    return 0;
}

int run_classify(const std::string& observations_path, double alpha) {
    try {
        const auto obs = mflow::read_observations_csv(observations_path);
        mflow::ClassifierConfig cfg;
        cfg.alpha = alpha;
        const auto result = mflow::classify_regime(obs, cfg);
        nlohmann::json record;
        record["regime"] = mflow::regime_name(result.kind);
        record["confidence"] = result.confidence;
        record["evidence"] = {
            {"support",
             result.evidence.support == mflow::Support::Discrete ? "discrete" : "continuous"},
            {"distinct_values", result.evidence.distinct_values},
            {"experience_trend", result.evidence.experience_trend},
            {"exp_gt_info_fraction", result.evidence.exp_gt_info_fraction},
            {"d_plus", result.evidence.dominance.d_plus},
            {"d_minus", result.evidence.dominance.d_minus},
            {"critical", result.evidence.dominance.critical},
            {"dominance", mflow::dominance_name(result.evidence.dominance.verdict)},
            {"max_covariate_correlation", result.evidence.max_covariate_correlation},
            {"note", result.evidence.note}};
        std::cout << record.dump() << "\n";
        return 0;
    } catch (const mflow::DataError& e) {
        std::cerr << "classification input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime abort: " << e.what() << "\n";
        return 2;
    }
}

int run_report(const std::string& report_path, const std::string& out_dir) {
    try {
        const auto report = mflow::read_report(report_path);
        mflow::emit_report_tables(report, out_dir);
        return 0;
    } catch (const mflow::DataError& e) {
        std::cerr << "report input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime abort: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"m-distribution workflow simulator and classifier"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> out;
    bool learning = false;
    bool lenient = false;
    unsigned workers = 1;
    auto* sim = app.add_subcommand("simulate", "run a scenario and write report files");
    sim->add_option("scenario", scenario_path, "scenario JSON file")->required();
    sim->add_option("--seed", seed, "override the master seed");
    sim->add_option("--trials", trials, "override the trial count");
    sim->add_flag("--learning", learning, "persist experience across trials");
    sim->add_option("--out", out, "output directory");
    sim->add_flag("--lenient", lenient, "allow unknown scenario keys");
    sim->add_option("--workers", workers, "concurrent workers (i.i.d. mode only)");

    std::string observations_path;
    double alpha = 0.05;
    auto* cls = app.add_subcommand("classify", "classify an observation CSV");
    cls->add_option("observations", observations_path, "observation CSV file")->required();
    cls->add_option("--alpha", alpha, "dominance test significance level");

    std::string report_path;
    std::string report_out = "tables";
    auto* rep = app.add_subcommand("report", "emit plot-ready tables from a report");
    rep->add_option("report", report_path, "report.json from simulate")->required();
    rep->add_option("--out", report_out, "output directory for tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (sim->parsed())
        return run_simulate(scenario_path, seed, trials, learning, out, lenient, workers);
    if (cls->parsed()) return run_classify(observations_path, alpha);
    if (rep->parsed()) return run_report(report_path, report_out);
    return 1;
}
