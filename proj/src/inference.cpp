#include "vcergm/inference.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <optional>

#include "vcergm/errors.hpp"
#include "vcergm/parallel.hpp"

namespace vcergm {

double test_statistic(const DesignSystem& design, const CoefficientMatrix& h1, const CoefficientMatrix& h0) {
    return 2.0 * (pseudo_log_likelihood(design, h1) - pseudo_log_likelihood(design, h0));
}

double test_statistic(const FitResult& h1, const NullFit& h0, const DynamicNetwork& data) {
    const auto design = assemble_design(data, h1.spec, h1.basis);
    return test_statistic(design, h1.phi, CoefficientMatrix::constant(h0.phi0, h1.phi.q()));
}

double exceedance_pvalue(std::span<const double> stats, double t) {
    if (stats.empty()) throw UsageError("no bootstrap statistics");
    const auto count = std::count_if(stats.begin(), stats.end(), [t](double s) { return s > t; });
    return static_cast<double>(count) / static_cast<double>(stats.size());
}

double empirical_critical_value(std::vector<double> stats, double alpha) {
    if (stats.empty()) throw UsageError("no bootstrap statistics");
    std::sort(stats.begin(), stats.end());
    const double pos = std::ceil((1.0 - alpha) * static_cast<double>(stats.size()) - 1e-9);
    const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(stats.size()))) - 1;
    return stats[idx];
}

std::pair<double, int> chisq_pvalue(double t_observed, int p, int q) {
    if (p < 1 || q < 1) throw UsageError("chi-squared degrees of freedom need p, q >= 1");
    const int df = p * (q - 1);
    if (df == 0) {
        spdlog::warn("basis dimension 1: the chi-squared test has no degrees of freedom and is vacuous");
        return {t_observed <= 0.0 ? 1.0 : 0.0, 0};
    }
    if (t_observed <= 0.0) return {1.0, df};
    const boost::math::chi_squared dist(df);
    return {boost::math::cdf(boost::math::complement(dist, t_observed)), df};
}

TestResult bootstrap_test(const DynamicNetwork& data, const StatisticSpec& spec, const TestOptions& opts) {
    if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
    if (opts.method == TestMethod::Bootstrap && opts.replicates < 1)
        throw UsageError("the bootstrap needs at least one replicate");

    const auto h1 = fit_vcergm(data, spec, opts.fit);
    const auto design = assemble_design(data, spec, h1.basis, opts.fit.threads);
    const auto h0 = fit_null_pooled(design, opts.fit.irls);
    const int q = h1.phi.q();
    const int p = h1.phi.p();

    TestResult out;
    out.t_observed = test_statistic(design, h1.phi, CoefficientMatrix::constant(h0.phi0, q));
    out.alpha = opts.alpha;
    out.method = opts.method;
    out.lambda = h1.lambda;
    out.phi_h0 = h0.phi0;
    out.phi_h1 = h1.phi;
    std::tie(out.p_value_chisq, out.df_chisq) = chisq_pvalue(out.t_observed, p, q);

    if (opts.method == TestMethod::ChiSquared) {
        out.p_value_bootstrap = std::numeric_limits<double>::quiet_NaN();
        out.critical_value = std::numeric_limits<double>::quiet_NaN();
        out.reject = out.p_value_chisq <= opts.alpha;
        return out;
    }

    out.replicates = opts.replicates;
    const auto times = data.times();
    std::vector<int> node_counts;
    for (const auto& snap : data.snapshots()) node_counts.push_back(snap.graph.n());
    const Eigen::VectorXd phi0 = h0.phi0;
    const PhiCurve null_curve = [phi0](double) { return phi0; };
    IrlsOptions irls = opts.fit.irls;
    const bool reselect = opts.reselect_lambda && !opts.fit.lambda && h1.basis.omega().trace() > 0.0;

    std::vector<std::optional<double>> stats(static_cast<std::size_t>(opts.replicates));
    parallel_for(stats.size(), opts.threads, [&](std::size_t b) {
        SamplerConfig cfg = opts.sampler;
        cfg.seed = make_rng(opts.seed, b)();
        try {
            const auto sample = sample_sequence(null_curve, times, spec, node_counts, data.directed(), cfg);
            const auto rep_design = assemble_design(sample, spec, h1.basis);
            const auto rep_h1 = reselect ? select_lambda(rep_design, opts.fit.lambda_grid.empty()
                                                                         ? default_lambda_grid(rep_design)
                                                                         : opts.fit.lambda_grid,
                                                         opts.fit.gcv, irls)
                                               .fit
                                         : fit_penalized(rep_design, h1.lambda, irls);
            const auto rep_h0 = fit_null_pooled(rep_design, irls);
            if (!rep_h1.converged || !rep_h0.converged) {
                spdlog::info("bootstrap replicate {} dropped: refit did not converge", b);
                return;
            }
            stats[b] = test_statistic(rep_design, rep_h1.phi, CoefficientMatrix::constant(rep_h0.phi0, q));
        } catch (const NumericalError& e) {
            spdlog::info("bootstrap replicate {} dropped: {}", b, e.what());
        }
    });

    for (std::size_t b = 0; b < stats.size(); ++b) {
        if (stats[b])
            out.bootstrap_stats.push_back(*stats[b]);
        else
            out.dropped_replicates.push_back(static_cast<int>(b));
    }
    const double dropped = static_cast<double>(out.dropped_replicates.size()) / opts.replicates;
    if (dropped > opts.max_dropped_fraction || out.bootstrap_stats.empty())
        throw NumericalError("bootstrap: " + std::to_string(out.dropped_replicates.size()) + " of " +
                             std::to_string(opts.replicates) + " replicate refits failed");
    if (!out.dropped_replicates.empty())
        spdlog::warn("bootstrap: dropped {} of {} replicates", out.dropped_replicates.size(), opts.replicates);

    out.p_value_bootstrap = exceedance_pvalue(out.bootstrap_stats, out.t_observed);
    out.critical_value = empirical_critical_value(out.bootstrap_stats, opts.alpha);
    out.reject = out.p_value_bootstrap <= opts.alpha;
    return out;
}

}  // namespace vcergm
