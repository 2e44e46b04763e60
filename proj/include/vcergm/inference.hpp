#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vcergm/mple.hpp"
#include "vcergm/sampler.hpp"

namespace vcergm {

enum class TestMethod { Bootstrap, ChiSquared };

struct TestOptions {
    int replicates = 200;  ///< B
    double alpha = 0.05;
    std::uint64_t seed = 1;
    TestMethod method = TestMethod::Bootstrap;
    FitOptions fit;
    SamplerConfig sampler;  ///< its seed is replaced per replicate
    int threads = 1;
    /// Largest tolerated fraction of replicates whose refit failed.
    double max_dropped_fraction = 0.10;
    /// Reselect lambda by GCV on every replicate instead of reusing the
    /// observed one. Ignored when fit.lambda is fixed.
    bool reselect_lambda = false;
};

struct TestResult {
    double t_observed = 0.0;
    std::vector<double> bootstrap_stats;  ///< retained T*(b), in replicate order
    std::vector<int> dropped_replicates;
    double p_value_bootstrap = 0.0;       ///< NaN when the bootstrap was not run
    double critical_value = 0.0;          ///< (1 - alpha) empirical quantile of T*
    double p_value_chisq = 0.0;
    int df_chisq = 0;
    int replicates = 0;                   ///< requested B
    double alpha = 0.05;
    TestMethod method = TestMethod::Bootstrap;
    bool reject = false;
    double lambda = 0.0;
    Eigen::VectorXd phi_h0;
    CoefficientMatrix phi_h1;
};

/// T = 2 (log PL(h1) - log PL(h0)) on the given design.
double test_statistic(const DesignSystem& design, const CoefficientMatrix& h1, const CoefficientMatrix& h0);
/// Same, assembling the design of data on h1's basis.
double test_statistic(const FitResult& h1, const NullFit& h0, const DynamicNetwork& data);

/// Proportion of stats strictly greater than t.
double exceedance_pvalue(std::span<const double> stats, double t);

/// (1 - alpha) empirical quantile: the ceil((1 - alpha) B)-th smallest value.
double empirical_critical_value(std::vector<double> stats, double alpha);

/// Chi-squared survival function with df = p (q - 1). With q = 1 the test is
/// vacuous: p-value 1 for t <= 0, else 0.
std::pair<double, int> chisq_pvalue(double t_observed, int p, int q);

/// pLRT of constant against smoothly varying coefficients. The null law is
/// approximated by sampling B sequences from the fitted null model at the
/// observed times and node counts and refitting both models. H1 refits reuse
/// the lambda selected on the observed data unless reselect_lambda is set.
TestResult bootstrap_test(const DynamicNetwork& data, const StatisticSpec& spec, const TestOptions& opts);

}  // namespace vcergm
