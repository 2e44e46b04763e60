#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace vcergm {

/// Binary network on n nodes without self-loops. Nodes are 0-based.
///
/// Adjacency is held densely; undirected graphs keep the matrix symmetric so
/// that has_edge(i, j) == has_edge(j, i). The admissible dyads are the ordered
/// pairs i != j (directed) or the unordered pairs i < j (undirected), enumerated
/// row-major. That ordering is used everywhere a per-dyad vector appears.
class Graph {
public:
    Graph(int n, bool directed);

    int n() const { return n_; }
    bool directed() const { return directed_; }

    bool has_edge(int i, int j) const;
    void set_edge(int i, int j, bool present);

    /// Row i of the adjacency matrix (entry i itself is always 0).
    std::span<const std::uint8_t> row(int i) const {
        return {adj_.data() + static_cast<std::size_t>(i) * n_, static_cast<std::size_t>(n_)};
    }

    std::size_t dyad_count() const;
    std::size_t edge_count() const;

    /// Calls f(i, j) for every admissible dyad in canonical order.
    template <class F>
    void for_each_dyad(F&& f) const {
        for (int i = 0; i < n_; ++i) {
            for (int j = directed_ ? 0 : i + 1; j < n_; ++j) {
                if (i != j) f(i, j);
            }
        }
    }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    void check_pair(int i, int j) const;

    int n_;
    bool directed_;
    std::vector<std::uint8_t> adj_;
};

/// Number of admissible dyads on n nodes.
std::size_t dyad_count(int n, bool directed);

/// Canonical dyad list for n nodes (same order as Graph::for_each_dyad).
std::vector<std::pair<int, int>> dyad_list(int n, bool directed);

struct Snapshot {
    double time;
    Graph graph;

    friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// Time-ordered sequence of binary graphs sharing a directedness flag.
/// Node counts may differ between snapshots; node identity is positional.
class DynamicNetwork {
public:
    /// Sorts by time. Throws DataError on duplicate times, mixed
    /// directedness, or an empty sequence.
    DynamicNetwork(std::vector<Snapshot> snapshots, bool directed);

    bool directed() const { return directed_; }
    std::size_t size() const { return snapshots_.size(); }
    const Snapshot& operator[](std::size_t k) const { return snapshots_[k]; }
    const std::vector<Snapshot>& snapshots() const { return snapshots_; }

    std::vector<double> times() const;
    std::size_t total_dyads() const;

    /// Copy with the snapshots at the given positions removed.
    DynamicNetwork without(std::span<const std::size_t> positions) const;

    friend bool operator==(const DynamicNetwork&, const DynamicNetwork&) = default;

private:
    std::vector<Snapshot> snapshots_;
    bool directed_;
};

/// Parses the edge-list CSV (`time,from,to,node_count`, 1-based labels,
/// optional `#nodes,<time>,<count>` registry lines).
DynamicNetwork read_edge_list(std::istream& in, bool directed);

/// Writes a DynamicNetwork in the format accepted by read_edge_list. Every
/// snapshot is listed in the registry so empty graphs survive a round trip.
void write_edge_list(std::ostream& out, const DynamicNetwork& net);

}  // namespace vcergm
