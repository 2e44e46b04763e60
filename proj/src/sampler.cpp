#include "vcergm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "vcergm/errors.hpp"
#include "vcergm/parallel.hpp"

namespace vcergm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double sigmoid(double eta) {
    return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

void check_phi(const Eigen::VectorXd& phi, const StatisticSpec& spec) {
    if (static_cast<std::size_t>(phi.size()) != spec.size())
        throw UsageError("coefficient vector length does not match the statistics");
    if (!phi.allFinite()) throw UsageError("coefficients must be finite");
}

double initial_density(const Eigen::VectorXd& phi, const StatisticSpec& spec, int n, bool directed) {
    for (std::size_t k = 0; k < spec.size(); ++k)
        if (spec[k] == Statistic::EdgeDensity) return sigmoid(phi[k] / max_count(spec[k], n, directed));
    return 0.5;
}

std::vector<Eigen::VectorXd> enumerate_statistics(const StatisticSpec& spec, int n, bool directed,
                                                  const ExactDistribution& shape) {
    const std::size_t states = std::size_t{1} << dyad_count(n, directed);
    std::vector<Eigen::VectorXd> h;
    h.reserve(states);
    for (std::size_t s = 0; s < states; ++s) h.push_back(compute_statistics(shape.graph(s), spec));
    return h;
}

Eigen::VectorXd normalized_exp(const Eigen::VectorXd& log_w) {
    const Eigen::VectorXd w = (log_w.array() - log_w.maxCoeff()).exp();
    return w / w.sum();
}

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL)));
}

void SamplerConfig::validate() const {
    if (burn_in < 0) throw UsageError("burn-in must be >= 0");
    if (sweeps <= burn_in) throw UsageError("sweeps must exceed burn-in");
}

Graph gibbs_sample(const Eigen::VectorXd& phi, const StatisticSpec& spec, int n, bool directed,
                   const SamplerConfig& config) {
    auto rng = make_rng(config.seed);
    return gibbs_sample(phi, spec, n, directed, config, rng);
}

Graph gibbs_sample(const Eigen::VectorXd& phi, const StatisticSpec& spec, int n, bool directed,
                   const SamplerConfig& config, Rng& rng) {
    config.validate();
    check_phi(phi, spec);
    spec.check_compatible(directed);
    Graph g(n, directed);
    const auto dyads = dyad_list(n, directed);

    if (config.init == SamplerInit::DensityMatched) {
        const double density = initial_density(phi, spec, n, directed);
        for (auto [i, j] : dyads) g.set_edge(i, j, uniform01(rng) < density);
    }

    const int sweeps = spec.dyad_independent() ? 1 : config.sweeps;
    std::vector<double> delta(spec.size());
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (auto [i, j] : dyads) {
            dyad_change(g, spec, i, j, delta.data());
            double eta = 0.0;
            for (std::size_t k = 0; k < delta.size(); ++k) eta += phi[static_cast<Eigen::Index>(k)] * delta[k];
            g.set_edge(i, j, uniform01(rng) < sigmoid(eta));
        }
    }
    return g;
}

DynamicNetwork sample_sequence(const PhiCurve& phi, std::span<const double> times, const StatisticSpec& spec,
                               std::span<const int> node_counts, bool directed, const SamplerConfig& config,
                               int threads) {
    if (times.empty()) throw UsageError("no sampling times");
    if (node_counts.size() != times.size()) throw UsageError("one node count per time is required");
    config.validate();
    std::vector<std::optional<Graph>> graphs(times.size());
    parallel_for(times.size(), threads, [&](std::size_t k) {
        auto rng = make_rng(config.seed, k);
        graphs[k] = gibbs_sample(phi(times[k]), spec, node_counts[k], directed, config, rng);
    });
    std::vector<Snapshot> snaps;
    snaps.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) snaps.push_back({times[k], std::move(*graphs[k])});
    return DynamicNetwork(std::move(snaps), directed);
}

DynamicNetwork sample_sequence(const PhiCurve& phi, std::span<const double> times, const StatisticSpec& spec,
                               int n, bool directed, const SamplerConfig& config, int threads) {
    const std::vector<int> counts(times.size(), n);
    return sample_sequence(phi, times, spec, counts, directed, config, threads);
}

Graph ExactDistribution::graph(std::size_t index) const {
    Graph g(n, directed);
    std::size_t d = 0;
    for (auto [i, j] : dyad_list(n, directed)) {
        if ((index >> d) & 1U) g.set_edge(i, j, true);
        ++d;
    }
    return g;
}

std::size_t ExactDistribution::index_of(const Graph& g) const {
    if (g.n() != n || g.directed() != directed) throw UsageError("graph does not belong to this support");
    std::size_t index = 0;
    std::size_t d = 0;
    g.for_each_dyad([&](int i, int j) {
        if (g.has_edge(i, j)) index |= std::size_t{1} << d;
        ++d;
    });
    return index;
}

ExactDistribution exact_distribution(const Eigen::VectorXd& phi, const StatisticSpec& spec, int n,
                                     bool directed) {
    check_phi(phi, spec);
    spec.check_compatible(directed);
    if (n < 1 || n > (directed ? 4 : 5)) throw UsageError("exact enumeration supports n <= 4 directed, n <= 5 undirected");
    ExactDistribution out{n, directed, {}};
    const auto h = enumerate_statistics(spec, n, directed, out);
    Eigen::VectorXd log_w(static_cast<Eigen::Index>(h.size()));
    for (std::size_t s = 0; s < h.size(); ++s) log_w[static_cast<Eigen::Index>(s)] = phi.dot(h[s]);
    out.probs = normalized_exp(log_w);
    return out;
}

EquivalenceReport check_difference_statistic_equivalence(const Eigen::VectorXd& phi, const StatisticSpec& spec,
                                                         int n, bool directed) {
    const auto marginal = exact_distribution(phi, spec, n, directed);
    const auto h = enumerate_statistics(spec, n, directed, marginal);
    const auto states = static_cast<Eigen::Index>(h.size());
    EquivalenceReport report;
    Eigen::VectorXd log_w(states);
    for (Eigen::Index y = 0; y < states; ++y) {
        for (Eigen::Index x = 0; x < states; ++x) log_w[x] = phi.dot(h[x] - h[y]);
        report.max_tv = std::max(report.max_tv, total_variation(normalized_exp(log_w), marginal.probs));
        ++report.states;
    }
    return report;
}

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw UsageError("distributions have different supports");
    return 0.5 * (a - b).cwiseAbs().sum();
}

}  // namespace vcergm
