// targeval: compare two targeting methods' field-trial designs on a finite
// population. Subcommands cover synthetic data generation, precision curves,
// the law of the worst selected rank, the split-half trial (analytic + Monte
// Carlo), the rescaled survey estimator (exact law + simulation), the
// side-by-side comparison, and the bias sweep over resource levels.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "targeval/io.hpp"
#include "targeval/report.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitGuard = 3;

struct CommonOptions {
    std::string input_path;
    std::string tie_break = "id";
    std::uint64_t tie_seed = 0;
    targeval::RunConfig config;
};

targeval::TieBreak tie_policy(const CommonOptions& options) {
    if (options.tie_break == "id") return targeval::TieBreak::by_id();
    return targeval::TieBreak::seeded(options.tie_seed);
}

void add_input_options(CLI::App* cmd, CommonOptions& options) {
    cmd->add_option("input", options.input_path, "population CSV file")->required();
    cmd->add_option("--tie-break", options.tie_break, "tie policy for score columns: id | seeded")
        ->check(CLI::IsMember({"id", "seeded"}))
        ->capture_default_str();
    cmd->add_option("--tie-seed", options.tie_seed, "seed for the seeded tie policy")
        ->capture_default_str();
}

void print_written(const std::vector<std::string>& paths) {
    for (const auto& path : paths) std::cout << "wrote " << path << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"field-trial designs for evaluating targeting methods"};
    app.require_subcommand(1);

    CommonOptions opt;

    // synth
    std::int64_t synth_n = 1000;
    double synth_rate = 0.3;
    double synth_association = 0.5;
    std::uint64_t synth_seed = 0;
    std::string synth_out = "population.csv";
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic population file");
    synth_cmd->add_option("--n", synth_n, "population size (even)")->required();
    synth_cmd->add_option("--rate", synth_rate, "positive outcome rate in [0,1]")
        ->capture_default_str();
    synth_cmd
        ->add_option("--correlation", synth_association,
                     "rank-outcome association in [0,1]: 0 flat, 1 maximal")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "output file path")->capture_default_str();

    // precision-curve
    auto* curve_cmd = app.add_subcommand("precision-curve", "emit both precision curves");
    add_input_options(curve_cmd, opt);
    curve_cmd->add_option("--out", opt.config.out_dir, "output directory")->capture_default_str();

    // m-dist
    std::int64_t mdist_n = 0;
    auto* mdist_cmd =
        app.add_subcommand("m-dist", "emit the pmf of the worst selected rank for one (N, k)");
    mdist_cmd->add_option("--n", mdist_n, "population size (even)")->required();
    mdist_cmd->add_option("--k", opt.config.k, "resource level (even)")->required();
    mdist_cmd->add_option("--out", opt.config.out_dir, "output directory")->capture_default_str();

    // rct
    auto* rct_cmd =
        app.add_subcommand("rct", "analytic split-half expectation, bias, and simulation");
    add_input_options(rct_cmd, opt);
    rct_cmd->add_option("--k", opt.config.k, "resource level (even)")->required();
    rct_cmd->add_option("--replicates", opt.config.replicates, "simulation replicates")
        ->capture_default_str();
    rct_cmd->add_option("--seed", opt.config.seed, "simulation seed")->capture_default_str();
    rct_cmd->add_option("--threads", opt.config.threads, "worker threads")->capture_default_str();
    rct_cmd->add_option("--out", opt.config.out_dir, "output directory")->capture_default_str();

    // survey
    auto* survey_cmd = app.add_subcommand("survey", "survey design: exact estimator law");
    add_input_options(survey_cmd, opt);
    survey_cmd->add_option("--k", opt.config.k, "resource level")->required();
    survey_cmd->add_option("--replicates", opt.config.replicates, "simulation replicates")
        ->capture_default_str();
    survey_cmd->add_option("--seed", opt.config.seed, "simulation seed")->capture_default_str();
    survey_cmd->add_option("--threads", opt.config.threads, "worker threads")
        ->capture_default_str();
    survey_cmd->add_flag("--sample-intersection", opt.config.sample_intersection,
                         "also sample the intersection and report absolute precision estimates");
    survey_cmd->add_option("--out", opt.config.out_dir, "output directory")->capture_default_str();

    // compare
    auto* compare_cmd = app.add_subcommand("compare", "full side-by-side report for one k");
    add_input_options(compare_cmd, opt);
    compare_cmd->add_option("--k", opt.config.k, "resource level (even)")->required();
    compare_cmd->add_option("--replicates", opt.config.replicates, "simulation replicates")
        ->capture_default_str();
    compare_cmd->add_option("--seed", opt.config.seed, "simulation seed")->capture_default_str();
    compare_cmd->add_option("--threads", opt.config.threads, "worker threads")
        ->capture_default_str();
    compare_cmd->add_option("--out", opt.config.out_dir, "output directory")
        ->capture_default_str();

    // sweep
    auto* sweep_cmd =
        app.add_subcommand("sweep", "true vs expected split-half precision over even k");
    add_input_options(sweep_cmd, opt);
    sweep_cmd->add_option("--k-min", opt.config.k_min, "sweep start")->required();
    sweep_cmd->add_option("--k-max", opt.config.k_max, "sweep end (inclusive)")->required();
    sweep_cmd->add_option("--out", opt.config.out_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (synth_cmd->parsed()) {
            targeval::write_population_file(
                synth_out, targeval::synth(synth_n, synth_rate, synth_association, synth_seed));
            std::cout << "wrote " << synth_out << '\n';
            return 0;
        }
        if (mdist_cmd->parsed()) {
            print_written(targeval::report_m_pmf(opt.config.out_dir, mdist_n, opt.config.k));
            return 0;
        }

        const targeval::IngestResult data = targeval::ingest(opt.input_path, tie_policy(opt));
        if (curve_cmd->parsed()) {
            print_written(targeval::report_precision_curves(opt.config.out_dir, data.population,
                                                            data.method_s, data.method_t));
        } else if (rct_cmd->parsed()) {
            print_written(targeval::report_rct(opt.config.out_dir, data.population, data.method_s,
                                               data.method_t, opt.config));
        } else if (survey_cmd->parsed()) {
            print_written(targeval::report_survey(opt.config.out_dir, data.population,
                                                  data.method_s, data.method_t, opt.config));
        } else if (compare_cmd->parsed()) {
            print_written(targeval::report_compare(opt.config.out_dir, data.population,
                                                   data.method_s, data.method_t, opt.config));
        } else if (sweep_cmd->parsed()) {
            print_written(targeval::report_sweep(opt.config.out_dir, data.population,
                                                 data.method_s, data.method_t, opt.config.k_min,
                                                 opt.config.k_max));
        }
        return 0;
    } catch (const targeval::GuardError& e) {
        std::cerr << "guard error: " << e.what() << '\n';
        return kExitGuard;
    } catch (const targeval::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}
