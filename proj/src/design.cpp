#include <algorithm>
#include <bit>
#include <cstdint>

#include "vcergm/errors.hpp"
#include "vcergm/mple.hpp"
#include "vcergm/parallel.hpp"

namespace vcergm {

CoefficientMatrix CoefficientMatrix::constant(const Eigen::VectorXd& phi0, int q) {
    return CoefficientMatrix(phi0.replicate(1, q));
}

CoefficientMatrix CoefficientMatrix::from_vec(const Eigen::VectorXd& v, int p, int q) {
    if (v.size() != static_cast<Eigen::Index>(p) * q)
        throw UsageError("coefficient vector has the wrong length");
    return CoefficientMatrix(Eigen::Map<const Eigen::MatrixXd>(v.data(), p, q));
}

Eigen::VectorXd CoefficientMatrix::vec() const {
    return Eigen::Map<const Eigen::VectorXd>(values_.data(), values_.size());
}

DesignSystem::DesignSystem(std::shared_ptr<const DesignRows> rows, Eigen::MatrixXd basis_rows,
                           Eigen::MatrixXd omega)
    : rows_(std::move(rows)), basis_rows_(std::move(basis_rows)), omega_(std::move(omega)) {
    if (static_cast<std::size_t>(basis_rows_.rows()) != rows_->times.size())
        throw UsageError("basis rows do not match the number of time points");
    if (omega_.rows() != basis_rows_.cols() || omega_.cols() != basis_rows_.cols())
        throw UsageError("penalty matrix does not match the basis dimension");
}

Eigen::MatrixXd DesignSystem::penalty() const {
    const int pp = p();
    const int qq = q();
    Eigen::MatrixXd pen = Eigen::MatrixXd::Zero(pp * qq, pp * qq);
    for (int l = 0; l < qq; ++l)
        for (int m = 0; m < qq; ++m)
            for (int k = 0; k < pp; ++k) pen(l * pp + k, m * pp + k) = omega_(l, m);
    return pen;
}

RowIndex DesignSystem::row_index(std::size_t r) const {
    const auto& off = rows_->offsets;
    if (r >= n_rows()) throw UsageError("design row out of range");
    const auto it = std::upper_bound(off.begin(), off.end(), r);
    const auto k = static_cast<std::size_t>(it - off.begin()) - 1;
    return {k, r - off[k]};
}

Eigen::MatrixXd DesignSystem::dense() const {
    const int pp = p();
    const int qq = q();
    Eigen::MatrixXd h(n_rows(), pp * qq);
    for (std::size_t k = 0; k < n_times(); ++k) {
        for (std::size_t r = rows_->offsets[k]; r < rows_->offsets[k + 1]; ++r)
            for (int l = 0; l < qq; ++l)
                for (int c = 0; c < pp; ++c) h(r, l * pp + c) = basis_rows_(k, l) * rows_->delta(r, c);
    }
    return h;
}

DesignSystem DesignSystem::with_basis(Eigen::MatrixXd basis_rows, Eigen::MatrixXd omega) const {
    return DesignSystem(rows_, std::move(basis_rows), std::move(omega));
}

namespace {

void fill_snapshot(const Graph& g, const StatisticSpec& spec, DesignRows& rows, std::size_t offset) {
    const auto change = change_statistics(g, spec);
    std::size_t d = 0;
    g.for_each_dyad([&](int i, int j) {
        rows.response[offset + d] = g.has_edge(i, j) ? 1.0 : 0.0;
        rows.delta.row(offset + d) = change.delta.col(d).transpose();
        ++d;
    });
}

struct Block {
    std::vector<std::size_t> representatives;
    std::vector<double> count, ones;
};

std::uint64_t row_hash(const double* v, Eigen::Index p) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Eigen::Index c = 0; c < p; ++c) {
        const double x = v[c] == 0.0 ? 0.0 : v[c];  // -0 and +0 are one pattern
        h ^= std::bit_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h * 0xff51afd7ed558ccdULL;
}

// Patterns in order of first occurrence, found with an open-addressing table.
Block compress_block(const DesignRows& rows, std::size_t begin, std::size_t end) {
    const auto p = rows.delta.cols();
    std::size_t size = 16;
    while (size < 2 * (end - begin)) size *= 2;
    std::vector<std::int64_t> table(size, -1);
    Block out;
    for (std::size_t r = begin; r < end; ++r) {
        const double* v = rows.delta.row(static_cast<Eigen::Index>(r)).data();
        std::size_t slot = row_hash(v, p) & (size - 1);
        for (;;) {
            const auto j = table[slot];
            if (j < 0) {
                table[slot] = static_cast<std::int64_t>(out.count.size());
                out.representatives.push_back(r);
                out.count.push_back(0.0);
                out.ones.push_back(0.0);
                break;
            }
            const double* w = rows.delta.row(static_cast<Eigen::Index>(out.representatives[j])).data();
            if (std::equal(v, v + p, w)) break;
            slot = (slot + 1) & (size - 1);
        }
        const auto j = static_cast<std::size_t>(table[slot]);
        out.count[j] += 1.0;
        out.ones[j] += rows.response[static_cast<Eigen::Index>(r)];
    }
    return out;
}

void compress(DesignRows& rows, int threads) {
    const std::size_t k = rows.times.size();
    std::vector<Block> blocks(k);
    parallel_for(k, threads,
                 [&](std::size_t t) { blocks[t] = compress_block(rows, rows.offsets[t], rows.offsets[t + 1]); });
    auto& pat = rows.patterns;
    pat.offsets.assign(1, 0);
    for (const auto& b : blocks) pat.offsets.push_back(pat.offsets.back() + b.count.size());
    const auto m = static_cast<Eigen::Index>(pat.offsets.back());
    pat.delta.resize(m, rows.delta.cols());
    pat.count.resize(m);
    pat.ones.resize(m);
    for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t j = 0; j < blocks[t].count.size(); ++j) {
            const auto at = static_cast<Eigen::Index>(pat.offsets[t] + j);
            pat.delta.row(at) = rows.delta.row(static_cast<Eigen::Index>(blocks[t].representatives[j]));
            pat.count[at] = blocks[t].count[j];
            pat.ones[at] = blocks[t].ones[j];
        }
    }
}

}  // namespace

DesignSystem assemble_design(const DynamicNetwork& data, const StatisticSpec& spec,
                             const BasisSystem& basis, int threads) {
    spec.check_compatible(data.directed());
    auto rows = std::make_shared<DesignRows>();
    rows->times = data.times();
    rows->offsets.assign(1, 0);
    for (const auto& snap : data.snapshots())
        rows->offsets.push_back(rows->offsets.back() + snap.graph.dyad_count());
    const std::size_t n = rows->offsets.back();
    if (n == 0) throw DataError("the network has no dyads");
    rows->response.resize(static_cast<Eigen::Index>(n));
    rows->delta.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.size()));

    parallel_for(data.size(), threads,
                 [&](std::size_t k) { fill_snapshot(data[k].graph, spec, *rows, rows->offsets[k]); });
    if (!rows->delta.allFinite()) throw NumericalError("non-finite change statistics");
    compress(*rows, threads);

    Eigen::MatrixXd b(data.size(), basis.dim());
    for (std::size_t k = 0; k < data.size(); ++k) b.row(k) = basis.evaluate_at(rows->times[k]).transpose();
    return DesignSystem(std::move(rows), std::move(b), basis.omega());
}

DesignSystem assemble_snapshot_design(const Graph& g, double time, const StatisticSpec& spec) {
    spec.check_compatible(g.directed());
    auto rows = std::make_shared<DesignRows>();
    rows->times = {time};
    rows->offsets = {0, g.dyad_count()};
    if (rows->offsets[1] == 0) throw DataError("the snapshot has no dyads");
    rows->response.resize(static_cast<Eigen::Index>(rows->offsets[1]));
    rows->delta.resize(static_cast<Eigen::Index>(rows->offsets[1]), static_cast<Eigen::Index>(spec.size()));
    fill_snapshot(g, spec, *rows, 0);
    compress(*rows, 1);
    return DesignSystem(std::move(rows), Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1));
}

}  // namespace vcergm
