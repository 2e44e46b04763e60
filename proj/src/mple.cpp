#include <spdlog/spdlog.h>

#include <cmath>
#include <limits>
#include <ostream>

#include "text.hpp"

#include "vcergm/errors.hpp"
#include "vcergm/mple.hpp"

namespace vcergm {

FitResult fit_vcergm(const DynamicNetwork& data, const StatisticSpec& spec, const FitOptions& opts) {
    if (data.size() < 2) throw DataError("a varying-coefficient fit needs at least two snapshots");
    spec.check_compatible(data.directed());
    const auto times = data.times();
    BasisOptions bopts = opts.basis;
    if (!bopts.max_dim) bopts.max_dim = data.total_dyads();
    auto basis = build_basis(times, bopts);
    const auto design = assemble_design(data, spec, basis, opts.threads);

    PenalizedFit fit;
    std::vector<std::pair<double, double>> path;
    if (opts.lambda) {
        fit = fit_penalized(design, *opts.lambda, opts.irls);
    } else if (!(basis.omega().trace() > 0.0)) {
        // Nothing to penalize (constant or linear basis).
        fit = fit_penalized(design, 0.0, opts.irls);
    } else {
        const auto grid = opts.lambda_grid.empty() ? default_lambda_grid(design) : opts.lambda_grid;
        auto sel = select_lambda(design, grid, opts.gcv, opts.irls);
        fit = std::move(sel.fit);
        path = std::move(sel.path);
    }
    if (!fit.converged) spdlog::warn("{}", fit.diagnostic);

    return FitResult{.phi = std::move(fit.phi),
                     .lambda = fit.lambda,
                     .basis = std::move(basis),
                     .spec = spec,
                     .directed = data.directed(),
                     .iterations = fit.iterations,
                     .converged = fit.converged,
                     .pseudo_loglik = fit.loglik,
                     .gcv_path = std::move(path),
                     .diagnostic = std::move(fit.diagnostic)};
}

void write_curves(std::ostream& out, const FitResult& fit, std::span<const double> grid) {
    const auto names = fit.spec.names();
    std::vector<Eigen::VectorXd> values;
    values.reserve(grid.size());
    for (double t : grid) values.push_back(fit.curve(t));
    out << "time,statistic,phi_hat\n";
    for (std::size_t g = 0; g < grid.size(); ++g)
        for (std::size_t k = 0; k < names.size(); ++k)
            out << text::format_number(grid[g]) << ',' << names[k] << ','
                << text::format_number(values[g][static_cast<Eigen::Index>(k)]) << '\n';
}

NullFit fit_null_pooled(const DesignSystem& design, const IrlsOptions& opts) {
    const auto pooled = design.with_basis(Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(design.n_times()), 1),
                                          Eigen::MatrixXd::Zero(1, 1));
    NullFit out;
    auto fit = fit_penalized(pooled, 0.0, opts);
    if (!fit.converged) {
        spdlog::warn("pooled null fit did not converge ({}); refitting with a 1e-6 ridge", fit.diagnostic);
        IrlsOptions ridged = opts;
        ridged.objective_ridge = 1e-6;
        fit = fit_penalized(pooled, 0.0, ridged);
        out.ridge_fallback = true;
    }
    out.phi0 = fit.phi.values().col(0);
    out.loglik = fit.loglik;
    out.converged = fit.converged;
    out.iterations = fit.iterations;
    return out;
}

NullFit fit_null_pooled(const DynamicNetwork& data, const StatisticSpec& spec) {
    if (data.size() == 1) return fit_null_pooled(assemble_snapshot_design(data[0].graph, data[0].time, spec));
    const auto times = data.times();
    return fit_null_pooled(assemble_design(data, spec, BasisSystem::constant(times)));
}

std::vector<CrossSectionalEstimate> fit_cross_sectional(const DynamicNetwork& data, const StatisticSpec& spec,
                                                        const IrlsOptions& opts) {
    spec.check_compatible(data.directed());
    std::vector<CrossSectionalEstimate> out;
    out.reserve(data.size());
    for (const auto& snap : data.snapshots()) {
        CrossSectionalEstimate est{snap.time, std::nullopt, 0};
        try {
            const auto design = assemble_snapshot_design(snap.graph, snap.time, spec);
            const auto fit = fit_penalized(design, 0.0, opts);
            est.iterations = fit.iterations;
            if (fit.converged)
                est.phi = fit.phi.values().col(0);
            else
                spdlog::debug("cross-sectional fit at time {} marked missing: {}", snap.time, fit.diagnostic);
        } catch (const NumericalError& e) {
            spdlog::debug("cross-sectional fit at time {} marked missing: {}", snap.time, e.what());
        }
        out.push_back(std::move(est));
    }
    return out;
}

namespace {

struct SmoothResult {
    Eigen::VectorXd coef;
    double lambda;
};

// Penalized least squares y ~ B c with penalty c' Omega c, lambda by GCV.
SmoothResult smooth_gcv(const Eigen::MatrixXd& b, const Eigen::VectorXd& y, const Eigen::MatrixXd& omega) {
    const double n = static_cast<double>(y.size());
    const Eigen::MatrixXd btb = b.transpose() * b;
    const Eigen::VectorXd bty = b.transpose() * y;
    const double ridge = 1e-12 * btb.trace() / static_cast<double>(btb.rows());
    auto solve = [&](double lambda) {
        Eigen::MatrixXd a = btb + lambda * omega;
        a.diagonal().array() += ridge;
        return a.ldlt();
    };
    if (!(omega.trace() > 0.0)) return {solve(0.0).solve(bty), 0.0};

    const double scale = btb.trace() / omega.trace();
    const double tie_abs = 1e-14 * y.squaredNorm() / n;
    double best_g = std::numeric_limits<double>::infinity();
    SmoothResult best{Eigen::VectorXd::Zero(b.cols()), 0.0};
    // Descending lambda: ties keep the smoother fit.
    for (int i = 48; i >= 0; --i) {
        const double lambda = scale * std::pow(10.0, -6.0 + 12.0 * i / 48.0);
        const auto ldlt = solve(lambda);
        const Eigen::VectorXd c = ldlt.solve(bty);
        const double trace = ldlt.solve(btb).trace();
        const double rss = (y - b * c).squaredNorm();
        const double dof = n - trace;
        if (!(dof > 1e-8 * n)) continue;
        const double g = n * rss / (dof * dof);
        if (!std::isfinite(best_g) || g < best_g - 1e-12 * best_g - tie_abs) {
            best_g = g;
            best = {c, lambda};
        }
    }
    if (!std::isfinite(best_g)) throw NumericalError("two-step smoothing: GCV undefined for every lambda");
    return best;
}

}  // namespace

TwoStepFit fit_two_step(const std::vector<CrossSectionalEstimate>& estimates, const BasisSystem& basis) {
    std::vector<const CrossSectionalEstimate*> kept;
    for (const auto& e : estimates)
        if (e.phi) kept.push_back(&e);
    if (kept.size() < 2) throw DataError("two-step smoothing needs at least two usable per-time estimates");
    const auto p = kept.front()->phi->size();

    Eigen::MatrixXd b(static_cast<Eigen::Index>(kept.size()), basis.dim());
    for (std::size_t s = 0; s < kept.size(); ++s) b.row(s) = basis.evaluate_at(kept[s]->time).transpose();

    TwoStepFit out;
    Eigen::MatrixXd coef(p, basis.dim());
    for (Eigen::Index k = 0; k < p; ++k) {
        Eigen::VectorXd y(b.rows());
        for (std::size_t s = 0; s < kept.size(); ++s) y[s] = (*kept[s]->phi)[k];
        auto sm = smooth_gcv(b, y, basis.omega());
        coef.row(k) = sm.coef.transpose();
        out.lambdas.push_back(sm.lambda);
    }
    out.phi = CoefficientMatrix(std::move(coef));
    return out;
}

TwoStepFit fit_two_step(const DynamicNetwork& data, const StatisticSpec& spec, const BasisSystem& basis) {
    return fit_two_step(fit_cross_sectional(data, spec), basis);
}

}  // namespace vcergm
