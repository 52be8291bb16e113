#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "targeval/combinatorics.hpp"
#include "targeval/core.hpp"
#include "targeval/errors.hpp"
#include "targeval/io.hpp"
#include "targeval/rct.hpp"
#include "targeval/survey.hpp"

namespace targeval {

/// One run of the analysis pipeline.
struct RunConfig {
    std::int64_t k = 0;
    std::int64_t replicates = 100000;
    std::uint64_t seed = 0;
    int threads = 1;
    std::int64_t k_min = 0, k_max = 0; // sweep range
    bool sample_intersection = false;  // survey: also estimate absolute precisions
    std::string out_dir = ".";
};

namespace detail {

/// Tracks files written by one command and removes them all if the command
/// fails partway, so a failed run leaves no partial outputs behind.
class OutputSet {
public:
    explicit OutputSet(const std::string& dir) : dir_(dir) {
        std::filesystem::create_directories(dir_);
    }

    ~OutputSet() {
        if (dismissed_) return;
        for (const auto& path : written_) {
            std::error_code ec;
            std::filesystem::remove(path, ec);
        }
    }

    std::string path(const std::string& filename) {
        const auto full = (std::filesystem::path(dir_) / filename).string();
        written_.push_back(full);
        return full;
    }

    void dismiss() { dismissed_ = true; }
    const std::vector<std::string>& written() const { return written_; }

private:
    std::string dir_;
    std::vector<std::string> written_;
    bool dismissed_ = false;
};

inline std::ofstream open_table(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write report file '" + path + "'");
    return out;
}

/// Bins simulator draws back onto their exact atoms: every draw equals
/// value(d)/denominator for an integer d, so llround recovers the key.
inline std::map<std::int64_t, std::int64_t> histogram_by_key(const EmpiricalDistribution& draws,
                                                             double scale) {
    std::map<std::int64_t, std::int64_t> counts;
    for (const double v : draws.values) {
        ++counts[static_cast<std::int64_t>(std::llround(v * scale))];
    }
    return counts;
}

inline void write_distribution_table(std::ofstream& out,
                                     const std::map<std::int64_t, std::int64_t>& counts,
                                     double scale, std::int64_t total) {
    out << "value,probability\n";
    for (const auto& [key, count] : counts) {
        out << format_value(static_cast<double>(key) / scale) << ','
            << format_value(static_cast<double>(count) / static_cast<double>(total)) << '\n';
    }
}

} // namespace detail

inline std::vector<std::string> report_precision_curves(const std::string& dir,
                                                        const Population& population,
                                                        const TargetingMethod& method_s,
                                                        const TargetingMethod& method_t) {
    detail::OutputSet outputs(dir);
    const PrecisionCurve cs = precision_curve(method_s, population);
    const PrecisionCurve ct = precision_curve(method_t, population);
    auto out = detail::open_table(outputs.path("precision_curves.csv"));
    out << "j,mu_s,mu_t\n";
    for (std::size_t j = 1; j <= population.size(); ++j) {
        out << j << ',' << format_value(cs.at(j)) << ',' << format_value(ct.at(j)) << '\n';
    }
    out.close();
    outputs.dismiss();
    return outputs.written();
}

inline std::vector<std::string> report_m_pmf(const std::string& dir, std::int64_t population_size,
                                             std::int64_t k) {
    detail::OutputSet outputs(dir);
    const RankDistribution dist = m_distribution(population_size, k);
    auto out = detail::open_table(outputs.path("m_pmf.csv"));
    out << "m,pmf\n";
    for (std::int64_t m = dist.support_lo; m <= dist.support_hi; ++m) {
        out << m << ',' << format_value(dist.pmf_at(m)) << '\n';
    }
    out.close();
    outputs.dismiss();
    return outputs.written();
}

inline std::vector<std::string> report_rct(const std::string& dir, const Population& population,
                                           const TargetingMethod& method_s,
                                           const TargetingMethod& method_t,
                                           const RunConfig& config) {
    detail::OutputSet outputs(dir);
    const RctAnalysis analysis = rct_analysis(method_s, method_t, population, config.k);
    const EmpiricalDistribution draws = simulate_rct(method_s, method_t, population, config.k,
                                                     config.replicates, config.seed, config.threads);
    {
        auto out = detail::open_table(outputs.path("rct_analysis.csv"));
        out << "k,expected_precision_s,expected_precision_t,expected_delta,true_delta,bias,"
               "mc_mean,mc_std_dev,replicates,seed\n";
        out << analysis.k << ',' << format_value(analysis.expected_precision_s) << ','
            << format_value(analysis.expected_precision_t) << ','
            << format_value(analysis.expected_delta) << ',' << format_value(analysis.true_delta)
            << ',' << format_value(analysis.bias) << ',' << format_value(draws.mean()) << ','
            << format_value(draws.std_dev()) << ',' << draws.replicate_count << ',' << draws.seed
            << '\n';
    }
    {
        const double scale = static_cast<double>(config.k / 2);
        auto out = detail::open_table(outputs.path("rct_distribution.csv"));
        detail::write_distribution_table(out, detail::histogram_by_key(draws, scale), scale,
                                         draws.replicate_count);
    }
    outputs.dismiss();
    return outputs.written();
}

inline std::vector<std::string> report_survey(const std::string& dir, const Population& population,
                                              const TargetingMethod& method_s,
                                              const TargetingMethod& method_t,
                                              const RunConfig& config) {
    detail::OutputSet outputs(dir);
    const SurveyDesign design = build_survey_design(method_s, method_t, population, config.k);
    const ExactEstimatorDistribution exact = exact_survey_distribution(design);
    const double true_delta = delta_true(method_s, method_t, population, config.k);
    {
        auto out = detail::open_table(outputs.path("survey_analysis.csv"));
        out << "k,intersection_size,alpha,arm_size,sample_size,positives_s_excl,positives_t_excl,"
               "exact_mean,exact_std_dev,true_delta,bias\n";
        out << design.k << ',' << design.intersection_size() << ',' << format_value(design.alpha)
            << ',' << design.excluded_size() << ',' << design.sample_size_s << ','
            << design.positives_s_excl << ',' << design.positives_t_excl << ','
            << format_value(exact.mean) << ',' << format_value(std::sqrt(exact.variance)) << ','
            << format_value(true_delta) << ',' << format_value(exact.mean - true_delta) << '\n';
    }
    {
        auto out = detail::open_table(outputs.path("survey_distribution.csv"));
        out << "value,probability\n";
        for (std::size_t i = 0; i < exact.support.size(); ++i) {
            out << format_value(exact.support[i]) << ',' << format_value(exact.pmf[i]) << '\n';
        }
    }
    if (config.sample_intersection) {
        const SurveyAbsoluteSimulation sim = simulate_survey_with_intersection(
            design, config.replicates, config.seed, config.threads);
        auto out = detail::open_table(outputs.path("absolute_estimates.csv"));
        out << "estimate,mean,std_dev,replicates,seed\n";
        out << "delta_hat," << format_value(sim.delta_hat.mean()) << ','
            << format_value(sim.delta_hat.std_dev()) << ',' << sim.delta_hat.replicate_count << ','
            << sim.delta_hat.seed << '\n';
        out << "mu_s_hat," << format_value(sim.mu_s_hat.mean()) << ','
            << format_value(sim.mu_s_hat.std_dev()) << ',' << sim.mu_s_hat.replicate_count << ','
            << sim.mu_s_hat.seed << '\n';
        out << "mu_t_hat," << format_value(sim.mu_t_hat.mean()) << ','
            << format_value(sim.mu_t_hat.std_dev()) << ',' << sim.mu_t_hat.replicate_count << ','
            << sim.mu_t_hat.seed << '\n';
    }
    outputs.dismiss();
    return outputs.written();
}

/// The full side-by-side pipeline: precision curves, the law of M at k, both
/// estimator distributions, and a summary row per design. The RCT row's mean
/// and bias are analytic and its spread comes from the seeded simulation;
/// the survey row comes entirely from the exact law.
inline std::vector<std::string> report_compare(const std::string& dir,
                                               const Population& population,
                                               const TargetingMethod& method_s,
                                               const TargetingMethod& method_t,
                                               const RunConfig& config) {
    detail::OutputSet outputs(dir);
    const auto n = static_cast<std::int64_t>(population.size());

    const PrecisionCurve cs = precision_curve(method_s, population);
    const PrecisionCurve ct = precision_curve(method_t, population);
    {
        auto out = detail::open_table(outputs.path("precision_curves.csv"));
        out << "j,mu_s,mu_t\n";
        for (std::size_t j = 1; j <= population.size(); ++j) {
            out << j << ',' << format_value(cs.at(j)) << ',' << format_value(ct.at(j)) << '\n';
        }
    }
    {
        const RankDistribution dist = m_distribution(n, config.k);
        auto out = detail::open_table(outputs.path("m_pmf.csv"));
        out << "m,pmf\n";
        for (std::int64_t m = dist.support_lo; m <= dist.support_hi; ++m) {
            out << m << ',' << format_value(dist.pmf_at(m)) << '\n';
        }
    }

    const RctAnalysis analysis = rct_analysis(method_s, method_t, population, config.k);
    const EmpiricalDistribution draws = simulate_rct(method_s, method_t, population, config.k,
                                                     config.replicates, config.seed, config.threads);
    {
        const double scale = static_cast<double>(config.k / 2);
        auto out = detail::open_table(outputs.path("rct_distribution.csv"));
        detail::write_distribution_table(out, detail::histogram_by_key(draws, scale), scale,
                                         draws.replicate_count);
    }

    const SurveyDesign design = build_survey_design(method_s, method_t, population, config.k);
    const ExactEstimatorDistribution exact = exact_survey_distribution(design);
    {
        auto out = detail::open_table(outputs.path("survey_distribution.csv"));
        out << "value,probability\n";
        for (std::size_t i = 0; i < exact.support.size(); ++i) {
            out << format_value(exact.support[i]) << ',' << format_value(exact.pmf[i]) << '\n';
        }
    }
    {
        auto out = detail::open_table(outputs.path("summary.csv"));
        out << "design,mean,std_dev,bias\n";
        out << "rct," << format_value(analysis.expected_delta) << ','
            << format_value(draws.std_dev()) << ',' << format_value(analysis.bias) << '\n';
        out << "survey," << format_value(exact.mean) << ','
            << format_value(std::sqrt(exact.variance)) << ','
            << format_value(exact.mean - analysis.true_delta) << '\n';
    }
    outputs.dismiss();
    return outputs.written();
}

/// True precision versus expected split-half estimate for both methods over
/// an even-k sweep; the gap between the columns is the design's bias curve.
inline std::vector<std::string> report_sweep(const std::string& dir, const Population& population,
                                             const TargetingMethod& method_s,
                                             const TargetingMethod& method_t, std::int64_t k_min,
                                             std::int64_t k_max) {
    const auto n = static_cast<std::int64_t>(population.size());
    if (k_min < 2 || k_max > n || k_min > k_max) {
        throw ValidationError("sweep range [" + std::to_string(k_min) + ", " +
                              std::to_string(k_max) + "] out of bounds for N=" + std::to_string(n));
    }
    detail::OutputSet outputs(dir);
    const PrecisionCurve cs = precision_curve(method_s, population);
    const PrecisionCurve ct = precision_curve(method_t, population);
    auto out = detail::open_table(outputs.path("bias_curve.csv"));
    out << "k,true_precision_s,expected_precision_s,bias_s,"
           "true_precision_t,expected_precision_t,bias_t\n";
    for (std::int64_t k = k_min + (k_min % 2); k <= k_max; k += 2) {
        const double expected_s = expected_rct_precision(cs, k);
        const double expected_t = expected_rct_precision(ct, k);
        const double true_s = cs.at(static_cast<std::size_t>(k));
        const double true_t = ct.at(static_cast<std::size_t>(k));
        out << k << ',' << format_value(true_s) << ',' << format_value(expected_s) << ','
            << format_value(expected_s - true_s) << ',' << format_value(true_t) << ','
            << format_value(expected_t) << ',' << format_value(expected_t - true_t) << '\n';
    }
    out.close();
    outputs.dismiss();
    return outputs.written();
}

} // namespace targeval
