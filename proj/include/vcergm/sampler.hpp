#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "vcergm/dyngraph.hpp"
#include "vcergm/netstats.hpp"

namespace vcergm {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream): both are mixed through splitmix64
/// before seeding, so nearby seeds and stream ids give unrelated sequences.
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

enum class SamplerInit { Empty, DensityMatched };

struct SamplerConfig {
    int sweeps = 200;
    int burn_in = 100;
    std::uint64_t seed = 1;
    SamplerInit init = SamplerInit::Empty;

    /// Throws UsageError unless sweeps > burn_in >= 0.
    void validate() const;
};

/// Systematic-scan Gibbs sampler for the ERGM with coefficients phi on the
/// standardized statistics. Every sweep visits the dyads in canonical order
/// and redraws each from Bernoulli(sigmoid(phi' delta_ij)). Returns the state
/// after config.sweeps sweeps. When every statistic is dyad-independent a
/// single sweep is already an exact draw, and only that sweep is run.
Graph gibbs_sample(const Eigen::VectorXd& phi, const StatisticSpec& spec, int n, bool directed,
                   const SamplerConfig& config);
Graph gibbs_sample(const Eigen::VectorXd& phi, const StatisticSpec& spec, int n, bool directed,
                   const SamplerConfig& config, Rng& rng);

/// phi(t) on the standardized scale.
using PhiCurve = std::function<Eigen::VectorXd(double)>;

/// Independent draws at each time, snapshot k seeded from (config.seed, k).
DynamicNetwork sample_sequence(const PhiCurve& phi, std::span<const double> times, const StatisticSpec& spec,
                               std::span<const int> node_counts, bool directed, const SamplerConfig& config,
                               int threads = 1);
DynamicNetwork sample_sequence(const PhiCurve& phi, std::span<const double> times, const StatisticSpec& spec,
                               int n, bool directed, const SamplerConfig& config, int threads = 1);

/// Full enumeration of the ERGM on n nodes. Graph index bit d is the state
/// of canonical dyad d.
struct ExactDistribution {
    int n = 0;
    bool directed = false;
    Eigen::VectorXd probs;

    Graph graph(std::size_t index) const;
    std::size_t index_of(const Graph& g) const;
};

/// Limits: n <= 4 directed, n <= 5 undirected; larger throws UsageError.
ExactDistribution exact_distribution(const Eigen::VectorXd& phi, const StatisticSpec& spec, int n,
                                     bool directed);

struct EquivalenceReport {
    double max_tv = 0.0;
    std::size_t states = 0;  ///< number of conditioning states checked
};

/// Builds the temporal transition kernel P(x | y) proportional to
/// exp(phi' (h(x) - h(y))) by enumeration and compares, for every previous
/// state y, the conditional law of x with the marginal ERGM on h.
EquivalenceReport check_difference_statistic_equivalence(const Eigen::VectorXd& phi, const StatisticSpec& spec,
                                                         int n, bool directed);

/// Total-variation distance between two probability vectors.
double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace vcergm
