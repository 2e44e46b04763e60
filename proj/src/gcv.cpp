#include <spdlog/spdlog.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "vcergm/errors.hpp"
#include "vcergm/mple.hpp"

namespace vcergm {

namespace {

constexpr double kGcvRidge = 1e-8;

struct LinearGcvParts {
    Eigen::MatrixXd gram;  // H'H
    Eigen::VectorXd h_t_y; // H'y
    double y_sq = 0.0;
};

LinearGcvParts linear_parts(const DesignSystem& design) {
    const int p = design.p();
    const int q = design.q();
    const auto& pat = design.rows().patterns;
    LinearGcvParts parts{gram_matrix(design), Eigen::VectorXd::Zero(p * q), pat.ones.sum()};
    for (std::size_t k = 0; k < design.n_times(); ++k) {
        const auto start = static_cast<Eigen::Index>(pat.offsets[k]);
        const auto len = static_cast<Eigen::Index>(pat.offsets[k + 1] - pat.offsets[k]);
        const Eigen::VectorXd g = pat.delta.middleRows(start, len).transpose() * pat.ones.segment(start, len);
        for (int l = 0; l < q; ++l) parts.h_t_y.segment(l * p, p) += design.basis_rows()(static_cast<Eigen::Index>(k), l) * g;
    }
    return parts;
}

// (1/N) |y - S y|^2 / (1 - tr(S)/N)^2 with S = H (H'H + N lambda P)^-1 H'.
double gcv_unweighted(const DesignSystem& design, const LinearGcvParts& parts, const Eigen::MatrixXd& pen,
                      double lambda) {
    const double n = static_cast<double>(design.n_rows());
    Eigen::MatrixXd a = parts.gram + n * lambda * pen;
    a.diagonal().array() += kGcvRidge;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const Eigen::VectorXd b = ldlt.solve(parts.h_t_y);
    const double trace = ldlt.solve(parts.gram).trace();
    const double rss = std::max(parts.y_sq - 2.0 * b.dot(parts.h_t_y) + b.dot(parts.gram * b), 0.0);
    const double denom = 1.0 - trace / n;
    return (rss / n) / (denom * denom);
}

double gcv_weighted(const DesignSystem& design, const Eigen::MatrixXd& pen, const WorkingSystem& ws,
                    double lambda) {
    const double n = static_cast<double>(design.n_rows());
    Eigen::MatrixXd a = ws.hessian + 2.0 * lambda * pen;
    a.diagonal().array() += kGcvRidge;
    const double trace = a.ldlt().solve(ws.hessian).trace();
    const double denom = 1.0 - trace / n;
    return (ws.weighted_rss / n) / (denom * denom);
}

}  // namespace

std::vector<double> default_lambda_grid(const DesignSystem& design) {
    const double pen_trace = design.penalty().trace();
    if (!(pen_trace > 0.0)) return {0.0};
    const double scale = gram_matrix(design).trace() / (static_cast<double>(design.n_rows()) * pen_trace);
    std::vector<double> grid;
    for (int i = 0; i < 25; ++i) grid.push_back(scale * std::pow(10.0, -4.0 + 8.0 * i / 24.0));
    return grid;
}

LambdaSelection select_lambda(const DesignSystem& design, std::span<const double> grid, GcvKind kind,
                              const IrlsOptions& opts) {
    if (grid.empty()) throw UsageError("lambda grid is empty");
    for (double l : grid)
        if (!(l >= 0.0) || !std::isfinite(l)) throw UsageError("lambda grid values must be finite and >= 0");
    const Eigen::MatrixXd pen = design.penalty();

    // Visit from the smoothest fit downwards so each fit warm-starts from a
    // neighbour.
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] > grid[b]; });

    std::vector<double> scores(grid.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::optional<PenalizedFit>> fits(grid.size());
    if (kind == GcvKind::Unweighted) {
        // Linear smoother of the binary responses: no logistic fit needed
        // until lambda is chosen.
        const auto parts = linear_parts(design);
        for (std::size_t idx : order) scores[idx] = gcv_unweighted(design, parts, pen, grid[idx]);
    } else {
        const CoefficientMatrix* start = nullptr;
        for (std::size_t idx : order) {
            fits[idx] = fit_penalized(design, grid[idx], opts, start);
            scores[idx] = gcv_weighted(design, pen, fits[idx]->working, grid[idx]);
            if (fits[idx]->converged) start = &fits[idx]->phi;
        }
    }

    LambdaSelection sel;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double g : scores) {
        if (!std::isfinite(g)) continue;
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    if (!std::isfinite(lo)) throw NumericalError("GCV criterion is not finite anywhere on the grid");

    std::size_t best = order.front();
    if (hi - lo <= 1e-10 * std::abs(lo)) {
        sel.flat = true;
        spdlog::warn("GCV criterion is flat across the lambda grid; using the largest lambda {}", grid[best]);
    } else {
        // order is descending in lambda, so the first minimiser wins ties.
        const double tie = lo + 1e-12 * std::abs(lo);
        for (std::size_t idx : order) {
            if (std::isfinite(scores[idx]) && scores[idx] <= tie) {
                best = idx;
                break;
            }
        }
    }
    sel.lambda = grid[best];
    for (std::size_t i = 0; i < grid.size(); ++i) sel.path.emplace_back(grid[i], scores[i]);
    sel.fit = fits[best] ? std::move(*fits[best]) : fit_penalized(design, sel.lambda, opts);
    return sel;
}

}  // namespace vcergm
