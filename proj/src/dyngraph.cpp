#include "vcergm/dyngraph.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "text.hpp"
#include "vcergm/errors.hpp"

namespace vcergm {

Graph::Graph(int n, bool directed) : n_(n), directed_(directed) {
    if (n < 1) throw UsageError("graph needs at least one node");
    adj_.assign(static_cast<std::size_t>(n) * n, 0);
}

void Graph::check_pair(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_ || j >= n_)
        throw UsageError("node index out of range");
    if (i == j) throw UsageError("self-loops are not representable");
}

bool Graph::has_edge(int i, int j) const {
    check_pair(i, j);
    return adj_[static_cast<std::size_t>(i) * n_ + j] != 0;
}

void Graph::set_edge(int i, int j, bool present) {
    check_pair(i, j);
    const std::uint8_t v = present ? 1 : 0;
    adj_[static_cast<std::size_t>(i) * n_ + j] = v;
    if (!directed_) adj_[static_cast<std::size_t>(j) * n_ + i] = v;
}

std::size_t Graph::dyad_count() const { return vcergm::dyad_count(n_, directed_); }

std::size_t Graph::edge_count() const {
    std::size_t total = 0;
    for (auto v : adj_) total += v;
    return directed_ ? total : total / 2;
}

std::size_t dyad_count(int n, bool directed) {
    const auto m = static_cast<std::size_t>(n);
    return directed ? m * (m - 1) : m * (m - 1) / 2;
}

std::vector<std::pair<int, int>> dyad_list(int n, bool directed) {
    std::vector<std::pair<int, int>> out;
    out.reserve(dyad_count(n, directed));
    for (int i = 0; i < n; ++i)
        for (int j = directed ? 0 : i + 1; j < n; ++j)
            if (i != j) out.emplace_back(i, j);
    return out;
}

DynamicNetwork::DynamicNetwork(std::vector<Snapshot> snapshots, bool directed)
    : snapshots_(std::move(snapshots)), directed_(directed) {
    if (snapshots_.empty()) throw DataError("dynamic network has no snapshots");
    std::stable_sort(snapshots_.begin(), snapshots_.end(),
                     [](const Snapshot& a, const Snapshot& b) { return a.time < b.time; });
    for (std::size_t k = 0; k < snapshots_.size(); ++k) {
        if (snapshots_[k].graph.directed() != directed_)
            throw DataError("snapshot directedness differs from the network flag");
        if (k > 0 && !(snapshots_[k - 1].time < snapshots_[k].time))
            throw DataError("snapshot times must be strictly increasing (duplicate time " +
                            text::format_number(snapshots_[k].time) + ")");
    }
}

std::vector<double> DynamicNetwork::times() const {
    std::vector<double> t;
    t.reserve(snapshots_.size());
    for (const auto& s : snapshots_) t.push_back(s.time);
    return t;
}

std::size_t DynamicNetwork::total_dyads() const {
    std::size_t total = 0;
    for (const auto& s : snapshots_) total += s.graph.dyad_count();
    return total;
}

DynamicNetwork DynamicNetwork::without(std::span<const std::size_t> positions) const {
    std::vector<Snapshot> kept;
    for (std::size_t k = 0; k < snapshots_.size(); ++k) {
        if (std::find(positions.begin(), positions.end(), k) == positions.end())
            kept.push_back(snapshots_[k]);
    }
    return DynamicNetwork(std::move(kept), directed_);
}

namespace {

struct TimeEntry {
    std::optional<long long> registry_count;
    std::optional<long long> column_count;
    long long max_label = 0;
    std::vector<std::pair<long long, long long>> edges;
};

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw DataError("edge list line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

DynamicNetwork read_edge_list(std::istream& in, bool directed) {
    std::map<double, TimeEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        const auto body = text::trim(line);
        if (body.empty()) continue;
        const auto fields = text::split(body, ',');

        if (body.front() == '#') {
            if (fields[0] != "#nodes") continue;  // comment
            if (fields.size() != 3) fail(line_no, "registry line needs `#nodes,<time>,<count>`");
            const auto t = text::parse_double(fields[1]);
            const auto c = text::parse_int(fields[2]);
            if (!t || !c || *c < 1) fail(line_no, "bad registry entry");
            auto& e = entries[*t];
            if (e.registry_count && *e.registry_count != *c)
                fail(line_no, "conflicting registry node counts");
            e.registry_count = *c;
            continue;
        }

        if (!seen_header) {
            if (fields.size() != 4 || fields[0] != "time" || fields[1] != "from" ||
                fields[2] != "to" || fields[3] != "node_count")
                fail(line_no, "expected header `time,from,to,node_count`");
            seen_header = true;
            continue;
        }

        if (fields.size() != 4) fail(line_no, "expected 4 fields");
        const auto t = text::parse_double(fields[0]);
        const auto from = text::parse_int(fields[1]);
        const auto to = text::parse_int(fields[2]);
        if (!t || !from || !to) fail(line_no, "unparsable row");
        if (*from == *to) fail(line_no, "self-loop");
        if (*from < 1 || *to < 1) fail(line_no, "node labels are 1-based");

        auto& e = entries[*t];
        if (!fields[3].empty()) {
            const auto c = text::parse_int(fields[3]);
            if (!c || *c < 1) fail(line_no, "bad node_count");
            if (e.column_count && *e.column_count != *c)
                fail(line_no, "node_count differs between rows of the same time");
            e.column_count = *c;
        }
        e.max_label = std::max({e.max_label, *from, *to});
        e.edges.emplace_back(*from, *to);
    }

    if (entries.empty()) throw DataError("edge list contains no time points");

    std::vector<Snapshot> snaps;
    snaps.reserve(entries.size());
    for (const auto& [time, e] : entries) {
        if (e.registry_count && e.column_count && *e.registry_count != *e.column_count)
            throw DataError("registry and node_count column disagree at time " +
                            text::format_number(time));
        const long long n = e.registry_count ? *e.registry_count
                            : e.column_count ? *e.column_count
                                             : e.max_label;
        if (n < 1) throw DataError("no node count for time " + text::format_number(time));
        if (e.max_label > n)
            throw DataError("node label exceeds node_count at time " + text::format_number(time));
        Graph g(static_cast<int>(n), directed);
        for (auto [a, b] : e.edges) g.set_edge(static_cast<int>(a - 1), static_cast<int>(b - 1), true);
        snaps.push_back({time, std::move(g)});
    }
    return DynamicNetwork(std::move(snaps), directed);
}

void write_edge_list(std::ostream& out, const DynamicNetwork& net) {
    for (const auto& s : net.snapshots())
        out << "#nodes," << text::format_number(s.time) << ',' << s.graph.n() << '\n';
    out << "time,from,to,node_count\n";
    for (const auto& s : net.snapshots()) {
        const auto t = text::format_number(s.time);
        s.graph.for_each_dyad([&](int i, int j) {
            if (s.graph.has_edge(i, j))
                out << t << ',' << i + 1 << ',' << j + 1 << ',' << s.graph.n() << '\n';
        });
    }
}

}  // namespace vcergm
