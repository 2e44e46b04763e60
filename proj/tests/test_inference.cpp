#include <doctest.h>

#include <cmath>

#include "vcergm/errors.hpp"
#include "vcergm/inference.hpp"

using namespace vcergm;

namespace {

DynamicNetwork small_network(std::uint64_t seed, double amplitude) {
    const auto spec = StatisticSpec::parse("edges,reciprocity");
    std::vector<double> times{1, 2, 3, 4, 5, 6, 7, 8};
    SamplerConfig cfg;
    cfg.seed = seed;
    cfg.sweeps = 30;
    cfg.burn_in = 10;
    const PhiCurve curve = [&](double t) {
        Eigen::VectorXd phi(2);
        phi << 110 * amplitude * std::sin(t / 2.0) - 20.0, 30.0;
        return phi;
    };
    return sample_sequence(curve, times, spec, 11, true, cfg);
}

TestOptions quick_options() {
    TestOptions opts;
    opts.replicates = 19;
    opts.seed = 3;
    opts.sampler.sweeps = 30;
    opts.sampler.burn_in = 10;
    return opts;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("statistic is zero when both fits coincide and non-negative otherwise") {
    const auto data = small_network(1, 1.0);
    const auto spec = StatisticSpec::parse("edges,reciprocity");
    const auto h1 = fit_vcergm(data, spec);
    const auto h0 = fit_null_pooled(data, spec);
    const double t = test_statistic(h1, h0, data);
    CHECK(t >= 0.0);
    const auto design = assemble_design(data, spec, h1.basis);
    CHECK(test_statistic(design, h1.phi, h1.phi) == 0.0);
    const auto null_matrix = CoefficientMatrix::constant(h0.phi0, h1.basis.dim());
    CHECK(test_statistic(design, h1.phi, null_matrix) == doctest::Approx(t).epsilon(1e-12));
    CHECK(2 * (h1.pseudo_loglik - pseudo_log_likelihood(design, null_matrix)) == doctest::Approx(t).epsilon(1e-12));
}

TEST_CASE("exceedance p-value counts strict exceedances") {
    const std::vector<double> stats{0.5, 1.0, 1.0, 2.0, 3.0};
    CHECK(exceedance_pvalue(stats, 1.0) == doctest::Approx(0.4));
    CHECK(exceedance_pvalue(stats, 3.0) == 0.0);
    CHECK(exceedance_pvalue(stats, -1.0) == 1.0);
    const std::vector<double> one{2.0};
    CHECK(exceedance_pvalue(one, 1.0) == 1.0);
    CHECK(exceedance_pvalue(one, 2.0) == 0.0);
    CHECK_THROWS(exceedance_pvalue(std::vector<double>{}, 1.0));
}

TEST_CASE("critical value is the ceil((1-alpha)B)-th order statistic") {
    std::vector<double> stats;
    for (int i = 20; i >= 1; --i) stats.push_back(i);
    CHECK(empirical_critical_value(stats, 0.05) == 19.0);
    CHECK(empirical_critical_value(stats, 0.10) == 18.0);
    CHECK(empirical_critical_value(stats, 0.5) == 10.0);
    CHECK(empirical_critical_value({7.0}, 0.05) == 7.0);
}

TEST_CASE("chi-squared reference") {
    auto [p0, df0] = chisq_pvalue(0.0, 2, 5);
    CHECK(p0 == 1.0);
    CHECK(df0 == 8);
    CHECK(chisq_pvalue(3.841458820694124, 1, 2).first == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chisq_pvalue(5.991464547107979, 2, 2).first == doctest::Approx(0.05).epsilon(1e-9));
    double prev = 1.0;
    for (double t = 0.5; t < 30; t += 0.5) {
        const double p = chisq_pvalue(t, 2, 4).first;
        CHECK(p <= prev);
        prev = p;
    }
    CHECK(chisq_pvalue(0.0, 2, 1) == std::pair{1.0, 0});
    CHECK(chisq_pvalue(1e-3, 2, 1) == std::pair{0.0, 0});
}

TEST_CASE("bootstrap test is deterministic and thread-invariant") {
    const auto data = small_network(2, 0.0);
    const auto spec = StatisticSpec::parse("edges,reciprocity");
    auto opts = quick_options();
    const auto a = bootstrap_test(data, spec, opts);
    opts.threads = 4;
    const auto b = bootstrap_test(data, spec, opts);
    CHECK(a.bootstrap_stats == b.bootstrap_stats);
    CHECK(a.t_observed == b.t_observed);
    CHECK(a.p_value_bootstrap == b.p_value_bootstrap);
    CHECK(a.bootstrap_stats.size() + a.dropped_replicates.size() == 19);
    for (double t : a.bootstrap_stats) CHECK(t >= 0.0);
    CHECK(a.p_value_bootstrap == exceedance_pvalue(a.bootstrap_stats, a.t_observed));
    CHECK(a.critical_value == empirical_critical_value(a.bootstrap_stats, 0.05));
    CHECK(a.reject == (a.p_value_bootstrap <= a.alpha));
    CHECK(a.df_chisq == 2 * (a.phi_h1.q() - 1));
}

TEST_CASE("per-replicate lambda reselection") {
    const auto data = small_network(2, 0.0);
    const auto spec = StatisticSpec::parse("edges,reciprocity");
    auto opts = quick_options();
    const auto reuse = bootstrap_test(data, spec, opts);
    opts.reselect_lambda = true;
    const auto a = bootstrap_test(data, spec, opts);
    opts.threads = 3;
    const auto b = bootstrap_test(data, spec, opts);
    CHECK(a.bootstrap_stats == b.bootstrap_stats);
    CHECK(a.t_observed == reuse.t_observed);
    CHECK(a.lambda == reuse.lambda);
    for (double t : a.bootstrap_stats) CHECK(t >= 0.0);

    // A fixed lambda takes precedence.
    opts.fit.lambda = reuse.lambda;
    opts.threads = 1;
    const auto fixed = bootstrap_test(data, spec, opts);
    auto plain = opts;
    plain.reselect_lambda = false;
    CHECK(fixed.bootstrap_stats == bootstrap_test(data, spec, plain).bootstrap_stats);
}

TEST_CASE("a single replicate gives p-value 0 or 1") {
    const auto data = small_network(3, 0.0);
    auto opts = quick_options();
    opts.replicates = 1;
    const auto r = bootstrap_test(data, StatisticSpec::parse("edges,reciprocity"), opts);
    CHECK((r.p_value_bootstrap == 0.0 || r.p_value_bootstrap == 1.0));
}

TEST_CASE("chi-squared method skips the bootstrap") {
    const auto data = small_network(4, 1.0);
    auto opts = quick_options();
    opts.method = TestMethod::ChiSquared;
    const auto r = bootstrap_test(data, StatisticSpec::parse("edges,reciprocity"), opts);
    CHECK(r.bootstrap_stats.empty());
    CHECK(std::isnan(r.p_value_bootstrap));
    CHECK(r.reject == (r.p_value_chisq <= r.alpha));
}

TEST_CASE("a strongly varying curve is detected") {
    const auto data = small_network(5, 1.0);
    const auto r = bootstrap_test(data, StatisticSpec::parse("edges,reciprocity"), quick_options());
    CHECK(r.p_value_bootstrap <= 0.05);
    CHECK(r.reject);
}

TEST_CASE("invalid test settings") {
    const auto data = small_network(6, 0.0);
    auto opts = quick_options();
    opts.replicates = 0;
    CHECK_THROWS_AS(bootstrap_test(data, StatisticSpec::parse("edges"), opts), UsageError);
    opts = quick_options();
    opts.alpha = 1.5;
    CHECK_THROWS_AS(bootstrap_test(data, StatisticSpec::parse("edges"), opts), UsageError);
}

}
