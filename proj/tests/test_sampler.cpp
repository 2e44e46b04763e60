#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "oracles.hpp"
#include "vcergm/errors.hpp"
#include "vcergm/sampler.hpp"

using namespace vcergm;

namespace {

// Independent enumeration of exp(phi' h(x)) / Z.
Eigen::VectorXd enumerate(const Eigen::VectorXd& phi, const StatisticSpec& spec, int n, bool directed) {
    const auto dyads = dyad_list(n, directed);
    const std::size_t states = std::size_t{1} << dyads.size();
    Eigen::VectorXd w(static_cast<Eigen::Index>(states));
    for (std::size_t s = 0; s < states; ++s) {
        Graph g(n, directed);
        for (std::size_t d = 0; d < dyads.size(); ++d)
            if (s >> d & 1) g.set_edge(dyads[d].first, dyads[d].second, true);
        w[static_cast<Eigen::Index>(s)] = phi.dot(oracle::statistics(g, spec));
    }
    w = (w.array() - w.maxCoeff()).exp();
    return w / w.sum();
}

struct Frequencies {
    Eigen::VectorXd counts;
    int draws;
};

Frequencies draw_frequencies(const Eigen::VectorXd& phi, const StatisticSpec& spec, int n, bool directed, int draws,
                             SamplerConfig config) {
    const auto dist = exact_distribution(phi, spec, n, directed);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(dist.probs.size());
    for (int i = 0; i < draws; ++i) {
        auto rng = make_rng(config.seed, static_cast<std::uint64_t>(i));
        counts[static_cast<Eigen::Index>(dist.index_of(gibbs_sample(phi, spec, n, directed, config, rng)))] += 1;
    }
    return {counts, draws};
}

double chisq_pvalue(const Frequencies& f, const Eigen::VectorXd& probs) {
    double stat = 0;
    for (Eigen::Index s = 0; s < probs.size(); ++s) {
        const double e = f.draws * probs[s];
        stat += (f.counts[s] - e) * (f.counts[s] - e) / e;
    }
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared(probs.size() - 1.0), stat));
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("exact distribution agrees with an independent enumeration") {
    const auto spec = StatisticSpec::parse("edges,reciprocity,ctriad");
    Eigen::VectorXd phi(3);
    phi << -2.0, 3.0, 1.5;
    const auto dist = exact_distribution(phi, spec, 3, true);
    CHECK(dist.probs.size() == 64);
    CHECK(dist.probs.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((dist.probs - enumerate(phi, spec, 3, true)).lpNorm<Eigen::Infinity>() < 1e-14);
    for (std::size_t s = 0; s < 64; ++s) CHECK(dist.index_of(dist.graph(s)) == s);

    const auto und = StatisticSpec::parse("edges,twostar,triangle");
    const auto d5 = exact_distribution(phi, und, 5, false);
    CHECK(d5.probs.size() == 1024);
    CHECK((d5.probs - enumerate(phi, und, 5, false)).lpNorm<Eigen::Infinity>() < 1e-13);
    CHECK_THROWS_AS(exact_distribution(phi, spec, 5, true), UsageError);
    CHECK_THROWS_AS(exact_distribution(phi, und, 6, false), UsageError);
}

TEST_CASE("edges-only model factorizes into independent dyads") {
    Eigen::VectorXd phi(1);
    phi << 4.0;
    const auto dist = exact_distribution(phi, StatisticSpec::parse("edges"), 3, true);
    const double p = 1 / (1 + std::exp(-4.0 / 6.0));
    for (Eigen::Index s = 0; s < dist.probs.size(); ++s) {
        const int k = std::popcount(static_cast<unsigned>(s));
        CHECK(dist.probs[s] == doctest::Approx(std::pow(p, k) * std::pow(1 - p, 6 - k)).epsilon(1e-12));
    }
}

TEST_CASE("zero coefficients give density one half") {
    const int n = 30;
    SamplerConfig cfg;
    cfg.seed = 3;
    const auto g = gibbs_sample(Eigen::VectorXd::Zero(2), StatisticSpec::parse("edges,reciprocity"), n, true, cfg);
    const double d = static_cast<double>(g.edge_count()) / (n * (n - 1));
    CHECK(std::abs(d - 0.5) < 4 * std::sqrt(0.25 / (n * (n - 1))));
}

TEST_CASE("edges-only density follows the standardized logistic") {
    const int n = 40;
    Eigen::VectorXd phi(1);
    phi << -1.2 * n * (n - 1);
    SamplerConfig cfg;
    cfg.seed = 9;
    const auto g = gibbs_sample(phi, StatisticSpec::parse("edges"), n, true, cfg);
    const double p = 1 / (1 + std::exp(1.2));
    const double d = static_cast<double>(g.edge_count()) / (n * (n - 1));
    CHECK(std::abs(d - p) < 4 * std::sqrt(p * (1 - p) / (n * (n - 1))));
}

TEST_CASE("Gibbs draws match the enumerated law on three nodes") {
    const auto spec = StatisticSpec::parse("edges,reciprocity");
    Eigen::VectorXd phi(2);
    phi << 1.0, 0.5;
    SamplerConfig cfg;
    cfg.sweeps = 50;
    cfg.burn_in = 10;
    cfg.seed = 2024;
    const auto probs = exact_distribution(phi, spec, 3, true).probs;
    const auto f = draw_frequencies(phi, spec, 3, true, 20000, cfg);
    CHECK(chisq_pvalue(f, probs) > 0.01);
    CHECK(total_variation(f.counts / f.draws, probs) < 0.02);
}

TEST_CASE("Gibbs draws match a strongly dependent law") {
    // Strong reciprocity and cyclic triads concentrate the mass, so mixing
    // errors would show up.
    const auto spec = StatisticSpec::parse("edges,reciprocity,ctriad");
    Eigen::VectorXd phi(3);
    phi << -9.0, 6.0, 2.0;
    SamplerConfig cfg;
    cfg.sweeps = 40;
    cfg.burn_in = 10;
    cfg.seed = 77;
    const auto probs = exact_distribution(phi, spec, 3, true).probs;
    const auto f = draw_frequencies(phi, spec, 3, true, 20000, cfg);
    CHECK(chisq_pvalue(f, probs) > 0.01);
}

TEST_CASE("sampling is deterministic in the seed") {
    const auto spec = StatisticSpec::parse("edges,reciprocity");
    Eigen::VectorXd phi(2);
    phi << -20.0, 40.0;
    SamplerConfig cfg;
    cfg.seed = 5;
    const auto a = gibbs_sample(phi, spec, 12, true, cfg);
    const auto b = gibbs_sample(phi, spec, 12, true, cfg);
    CHECK(a == b);
    cfg.seed = 6;
    CHECK_FALSE(gibbs_sample(phi, spec, 12, true, cfg) == a);

    std::vector<double> times{0, 1, 2, 3};
    const PhiCurve curve = [&](double t) { return Eigen::VectorXd(phi * (1 + 0.1 * t)); };
    const auto s1 = sample_sequence(curve, times, spec, 10, true, cfg, 1);
    const auto s4 = sample_sequence(curve, times, spec, 10, true, cfg, 4);
    CHECK(s1 == s4);
    CHECK(s1.size() == 4);
    CHECK(s1.times() == times);
}

TEST_CASE("density-matched start and variable node counts") {
    const auto spec = StatisticSpec::parse("edges,triangle");
    SamplerConfig cfg;
    cfg.init = SamplerInit::DensityMatched;
    std::vector<double> times{0, 1, 2};
    std::vector<int> sizes{5, 8, 11};
    const PhiCurve curve = [](double) { return Eigen::VectorXd::Zero(2).eval(); };
    const auto seq = sample_sequence(curve, times, spec, sizes, false, cfg);
    CHECK(seq[2].graph.n() == 11);
    CHECK_FALSE(seq.directed());
    std::vector<int> wrong{5, 8};
    CHECK_THROWS_AS(sample_sequence(curve, times, spec, wrong, false, cfg), UsageError);
}

TEST_CASE("sampler settings are validated") {
    SamplerConfig cfg;
    cfg.sweeps = 10;
    cfg.burn_in = 10;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.burn_in = -1;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
    cfg.burn_in = 0;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("difference statistics give back the marginal model") {
    for (const auto& [names, directed, n] : {std::tuple{"edges,reciprocity", true, 3},
                                             std::tuple{"edges,reciprocity,ctriad", true, 3},
                                             std::tuple{"edges,twostar,triangle", false, 4}}) {
        const auto spec = StatisticSpec::parse(names);
        Eigen::VectorXd phi = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(spec.size()), -3.0, 4.0);
        const auto rep = check_difference_statistic_equivalence(phi, spec, n, directed);
        CHECK(rep.states == (std::size_t{1} << dyad_count(n, directed)));
        CHECK(rep.max_tv < 1e-12);
    }
}

TEST_CASE("total variation") {
    Eigen::VectorXd a(3), b(3);
    a << 0.2, 0.3, 0.5;
    b << 0.5, 0.3, 0.2;
    CHECK(total_variation(a, b) == doctest::Approx(0.3));
    CHECK(total_variation(a, a) == 0.0);
}

}
