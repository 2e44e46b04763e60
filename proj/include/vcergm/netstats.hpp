#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "vcergm/dyngraph.hpp"

namespace vcergm {

/// The closed registry of standardized statistics. Each one is a raw count
/// divided by its largest attainable value on n nodes, so h(x) lies in [0, 1]
/// and coefficients stay comparable when the node count changes.
///
/// Adding a statistic means supplying three things: the raw count, the single
/// dyad change of that count, and the normalizer (max_count).
enum class Statistic { EdgeDensity, Reciprocity, CyclicTriad, TwoStar, Triangle };

/// CLI name: edges, reciprocity, ctriad, twostar, triangle.
std::string_view statistic_name(Statistic s);
Statistic parse_statistic(std::string_view name);

/// Denominator of the standardized statistic on n nodes. Zero when the
/// configuration cannot occur (triads on fewer than 3 nodes).
double max_count(Statistic s, int n, bool directed);

/// Ordered, duplicate-free list of statistics (the feature vector h).
class StatisticSpec {
public:
    explicit StatisticSpec(std::vector<Statistic> entries);

    /// Comma-separated, case-insensitive names.
    static StatisticSpec parse(std::string_view list);

    std::size_t size() const { return entries_.size(); }
    Statistic operator[](std::size_t k) const { return entries_[k]; }
    const std::vector<Statistic>& entries() const { return entries_; }
    std::vector<std::string> names() const;

    /// Throws DataError when a statistic is undefined for this directedness.
    void check_compatible(bool directed) const;

    /// True when no change statistic depends on the rest of the graph, so
    /// dyads are independent under the model.
    bool dyad_independent() const;
    bool has_triad() const;

    /// Normalizers for every entry on n nodes.
    Eigen::VectorXd normalizers(int n, bool directed) const;

    friend bool operator==(const StatisticSpec&, const StatisticSpec&) = default;

private:
    std::vector<Statistic> entries_;
};

/// p x D matrix of change statistics; column d belongs to dyad d in the
/// canonical order of Graph::for_each_dyad.
struct ChangeMatrix {
    Eigen::MatrixXd delta;
};

/// Standardized statistics h(x, n), by direct counting.
Eigen::VectorXd compute_statistics(const Graph& g, const StatisticSpec& spec);

/// Change statistics for every dyad, from local neighbourhood counts.
ChangeMatrix change_statistics(const Graph& g, const StatisticSpec& spec);

/// Change statistics of a single dyad (i, j) given the rest of g. Writes p
/// values to out. Used by the Gibbs sampler, where g mutates between calls.
void dyad_change(const Graph& g, const StatisticSpec& spec, int i, int j, double* out);

}  // namespace vcergm
