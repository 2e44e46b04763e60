#include "vcergm/netstats.hpp"

#include <algorithm>
#include <cctype>

#include "text.hpp"
#include "vcergm/errors.hpp"

namespace vcergm {

namespace {

double choose2(double n) { return n * (n - 1.0) / 2.0; }
double choose3(double n) { return n * (n - 1.0) * (n - 2.0) / 6.0; }

bool is_triad(Statistic s) {
    return s == Statistic::CyclicTriad || s == Statistic::TwoStar || s == Statistic::Triangle;
}

// Skeleton edge: present in either direction.
inline bool tie(const Graph& g, int a, int b) {
    return g.row(a)[b] != 0 || g.row(b)[a] != 0;
}

int skeleton_degree(const Graph& g, int v) {
    int d = 0;
    for (int u = 0; u < g.n(); ++u)
        if (u != v && tie(g, v, u)) ++d;
    return d;
}

void require_normalizer(double m, Statistic s, int n) {
    if (m <= 0.0)
        throw DataError(std::string(statistic_name(s)) + " is undefined on " + std::to_string(n) +
                        " nodes");
}

}  // namespace

std::string_view statistic_name(Statistic s) {
    switch (s) {
        case Statistic::EdgeDensity: return "edges";
        case Statistic::Reciprocity: return "reciprocity";
        case Statistic::CyclicTriad: return "ctriad";
        case Statistic::TwoStar: return "twostar";
        case Statistic::Triangle: return "triangle";
    }
    return "?";
}

Statistic parse_statistic(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (auto s : {Statistic::EdgeDensity, Statistic::Reciprocity, Statistic::CyclicTriad,
                   Statistic::TwoStar, Statistic::Triangle})
        if (statistic_name(s) == lower) return s;
    throw UsageError("unknown statistic `" + std::string(name) + "`");
}

double max_count(Statistic s, int n, bool directed) {
    const double m = n;
    switch (s) {
        case Statistic::EdgeDensity: return directed ? m * (m - 1.0) : choose2(m);
        case Statistic::Reciprocity: return choose2(m);
        case Statistic::CyclicTriad: return 2.0 * choose3(m);
        case Statistic::TwoStar: return 3.0 * choose3(m);
        case Statistic::Triangle: return choose3(m);
    }
    return 0.0;
}

StatisticSpec::StatisticSpec(std::vector<Statistic> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw UsageError("statistic spec is empty");
    for (std::size_t a = 0; a < entries_.size(); ++a)
        for (std::size_t b = a + 1; b < entries_.size(); ++b)
            if (entries_[a] == entries_[b])
                throw UsageError("duplicate statistic `" + std::string(statistic_name(entries_[a])) + "`");
}

StatisticSpec StatisticSpec::parse(std::string_view list) {
    std::vector<Statistic> out;
    for (auto tok : text::split(list, ',')) {
        if (tok.empty()) continue;
        out.push_back(parse_statistic(tok));
    }
    return StatisticSpec(std::move(out));
}

std::vector<std::string> StatisticSpec::names() const {
    std::vector<std::string> out;
    for (auto s : entries_) out.emplace_back(statistic_name(s));
    return out;
}

void StatisticSpec::check_compatible(bool directed) const {
    if (directed) return;  // twostar/triangle use the symmetrized skeleton
    for (auto s : entries_)
        if (s == Statistic::Reciprocity || s == Statistic::CyclicTriad)
            throw DataError(std::string(statistic_name(s)) + " requires a directed network");
}

bool StatisticSpec::dyad_independent() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](Statistic s) { return s == Statistic::EdgeDensity; });
}

bool StatisticSpec::has_triad() const {
    return std::any_of(entries_.begin(), entries_.end(), is_triad);
}

Eigen::VectorXd StatisticSpec::normalizers(int n, bool directed) const {
    Eigen::VectorXd out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = max_count(entries_[k], n, directed);
    return out;
}

Eigen::VectorXd compute_statistics(const Graph& g, const StatisticSpec& spec) {
    spec.check_compatible(g.directed());
    const int n = g.n();
    Eigen::VectorXd h(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const auto s = spec[k];
        const double norm = max_count(s, n, g.directed());
        require_normalizer(norm, s, n);
        double count = 0.0;
        switch (s) {
            case Statistic::EdgeDensity:
                count = static_cast<double>(g.edge_count());
                break;
            case Statistic::Reciprocity:
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j) count += g.row(i)[j] * g.row(j)[i];
                break;
            case Statistic::CyclicTriad:
                // both cyclic orientations of each triple
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j)
                        for (int l = j + 1; l < n; ++l)
                            count += g.row(i)[j] * g.row(j)[l] * g.row(l)[i] +
                                     g.row(i)[l] * g.row(l)[j] * g.row(j)[i];
                break;
            case Statistic::TwoStar:
                for (int v = 0; v < n; ++v) count += choose2(skeleton_degree(g, v));
                break;
            case Statistic::Triangle:
                for (int i = 0; i < n; ++i)
                    for (int j = i + 1; j < n; ++j) {
                        if (!tie(g, i, j)) continue;
                        for (int l = j + 1; l < n; ++l)
                            if (tie(g, j, l) && tie(g, l, i)) count += 1.0;
                    }
                break;
        }
        h[k] = count / norm;
    }
    return h;
}

namespace {

// Raw (unnormalized) change of each statistic for dyad (i, j). deg holds
// skeleton degrees of the current graph, or is empty when no statistic needs it.
void raw_change(const Graph& g, const StatisticSpec& spec, int i, int j,
                std::span<const int> deg, double* out) {
    const int n = g.n();
    const auto ri = g.row(i);
    const auto rj = g.row(j);
    // Toggling a directed arc only changes the skeleton when the reverse arc is absent.
    const bool skeleton_moves = !g.directed() || rj[i] == 0;
    const int sij = tie(g, i, j) ? 1 : 0;

    for (std::size_t k = 0; k < spec.size(); ++k) {
        double c = 0.0;
        switch (spec[k]) {
            case Statistic::EdgeDensity:
                c = 1.0;
                break;
            case Statistic::Reciprocity:
                c = rj[i];
                break;
            case Statistic::CyclicTriad:
                for (int l = 0; l < n; ++l)
                    if (l != i && l != j) c += rj[l] * g.row(l)[i];
                break;
            case Statistic::TwoStar:
                if (skeleton_moves) {
                    const int di = deg.empty() ? skeleton_degree(g, i) : deg[i];
                    const int dj = deg.empty() ? skeleton_degree(g, j) : deg[j];
                    c = (di - sij) + (dj - sij);
                }
                break;
            case Statistic::Triangle:
                if (skeleton_moves) {
                    if (g.directed()) {
                        for (int l = 0; l < n; ++l)
                            if (l != i && l != j && tie(g, i, l) && tie(g, j, l)) c += 1.0;
                    } else {
                        for (int l = 0; l < n; ++l) c += ri[l] * rj[l];
                    }
                }
                break;
        }
        out[k] = c;
    }
}

}  // namespace

void dyad_change(const Graph& g, const StatisticSpec& spec, int i, int j, double* out) {
    raw_change(g, spec, i, j, {}, out);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double norm = max_count(spec[k], g.n(), g.directed());
        require_normalizer(norm, spec[k], g.n());
        out[k] /= norm;
    }
}

ChangeMatrix change_statistics(const Graph& g, const StatisticSpec& spec) {
    spec.check_compatible(g.directed());
    const int n = g.n();
    const auto p = static_cast<Eigen::Index>(spec.size());
    Eigen::VectorXd inv_norm(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        const double norm = max_count(spec[k], n, g.directed());
        require_normalizer(norm, spec[k], n);
        inv_norm[k] = 1.0 / norm;
    }

    std::vector<int> deg;
    if (std::find(spec.entries().begin(), spec.entries().end(), Statistic::TwoStar) !=
        spec.entries().end()) {
        deg.resize(n);
        for (int v = 0; v < n; ++v) deg[v] = skeleton_degree(g, v);
    }

    ChangeMatrix cm{Eigen::MatrixXd(p, static_cast<Eigen::Index>(g.dyad_count()))};
    Eigen::Index col = 0;
    g.for_each_dyad([&](int i, int j) {
        double* out = cm.delta.col(col).data();
        raw_change(g, spec, i, j, deg, out);
        for (Eigen::Index k = 0; k < p; ++k) out[k] *= inv_norm[k];
        ++col;
    });
    return cm;
}

}  // namespace vcergm
