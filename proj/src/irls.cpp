#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "vcergm/errors.hpp"
#include "vcergm/mple.hpp"

namespace vcergm {

namespace {

double log1p_exp(double eta) {
    return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

// Adds kron(b b', block) into the upper-left-indexed pq x pq matrix m.
void add_kron(Eigen::MatrixXd& m, const Eigen::VectorXd& b, const Eigen::MatrixXd& block) {
    const auto p = block.rows();
    for (Eigen::Index l = 0; l < b.size(); ++l) {
        if (b[l] == 0.0) continue;
        for (Eigen::Index c = 0; c < b.size(); ++c) {
            if (b[c] == 0.0) continue;
            m.block(l * p, c * p, p, p).noalias() += (b[l] * b[c]) * block;
        }
    }
}

void add_kron(Eigen::VectorXd& v, const Eigen::VectorXd& b, const Eigen::VectorXd& part) {
    const auto p = part.size();
    for (Eigen::Index l = 0; l < b.size(); ++l)
        if (b[l] != 0.0) v.segment(l * p, p).noalias() += b[l] * part;
}

// Log pseudo-likelihood at beta and, when `full`, the working system.
WorkingSystem evaluate(const DesignSystem& design, const Eigen::VectorXd& beta, const IrlsOptions& opts,
                       bool full) {
    const int p = design.p();
    const int q = design.q();
    const Eigen::MatrixXd phi = CoefficientMatrix::from_vec(beta, p, q).values();
    WorkingSystem ws;
    if (full) {
        ws.hessian = Eigen::MatrixXd::Zero(p * q, p * q);
        ws.score = Eigen::VectorXd::Zero(p * q);
    }
    Eigen::MatrixXd g_block(p, p);
    Eigen::VectorXd g_score(p);
    const auto& pat = design.rows().patterns;
    for (std::size_t k = 0; k < design.n_times(); ++k) {
        const Eigen::VectorXd b = design.basis_rows().row(k).transpose();
        const Eigen::VectorXd phi_k = phi * b;
        if (full) {
            g_block.setZero();
            g_score.setZero();
        }
        for (std::size_t r = pat.offsets[k]; r < pat.offsets[k + 1]; ++r) {
            const auto d = pat.delta.row(r);
            const double count = pat.count[r];
            const double ones = pat.ones[r];
            const double eta = d.dot(phi_k);
            ws.loglik += ones * eta - count * log1p_exp(eta);
            if (!full) continue;
            const double eta_c = std::clamp(eta, -opts.eta_clamp, opts.eta_clamp);
            const double mu = 1.0 / (1.0 + std::exp(-eta_c));
            const double w = std::max(mu * (1.0 - mu), opts.weight_floor);
            g_block.noalias() += (count * w) * d.transpose() * d;
            g_score.noalias() += (ones - count * mu) * d.transpose();
            ws.weighted_rss += (ones * (1.0 - mu) * (1.0 - mu) + (count - ones) * mu * mu) / w;
        }
        if (full) {
            add_kron(ws.hessian, b, g_block);
            add_kron(ws.score, b, g_score);
        }
    }
    return ws;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
    return a.ldlt().solve(rhs);
}

}  // namespace

double pseudo_log_likelihood(const DesignSystem& design, const CoefficientMatrix& phi) {
    if (phi.p() != design.p() || phi.q() != design.q())
        throw UsageError("coefficient matrix does not match the design");
    return evaluate(design, phi.vec(), IrlsOptions{}, false).loglik;
}

Eigen::VectorXd penalized_score(const DesignSystem& design, const CoefficientMatrix& phi, double lambda) {
    const Eigen::VectorXd beta = phi.vec();
    const auto ws = evaluate(design, beta, IrlsOptions{}, true);
    return ws.score - 2.0 * lambda * (design.penalty() * beta);
}

Eigen::MatrixXd gram_matrix(const DesignSystem& design) {
    const int p = design.p();
    const int q = design.q();
    const auto& pat = design.rows().patterns;
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p * q, p * q);
    for (std::size_t k = 0; k < design.n_times(); ++k) {
        const auto start = static_cast<Eigen::Index>(pat.offsets[k]);
        const auto len = static_cast<Eigen::Index>(pat.offsets[k + 1] - pat.offsets[k]);
        const auto block = pat.delta.middleRows(start, len);
        const Eigen::MatrixXd g = block.transpose() * pat.count.segment(start, len).asDiagonal() * block;
        add_kron(gram, design.basis_rows().row(k).transpose(), g);
    }
    return gram;
}

PenalizedFit fit_penalized(const DesignSystem& design, double lambda, const IrlsOptions& opts,
                           const CoefficientMatrix* start) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be finite and >= 0");
    const int p = design.p();
    const int q = design.q();
    const Eigen::Index dim = static_cast<Eigen::Index>(p) * q;
    const Eigen::MatrixXd pen = design.penalty();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(dim);
    if (start) {
        if (start->p() != p || start->q() != q) throw UsageError("start value does not match the design");
        beta = start->vec();
    }
    auto objective = [&](const WorkingSystem& ws, const Eigen::VectorXd& b) {
        return ws.loglik - lambda * b.dot(pen * b) - opts.objective_ridge * b.squaredNorm();
    };

    WorkingSystem ws = evaluate(design, beta, opts, true);
    double obj = objective(ws, beta);
    if (!std::isfinite(obj)) throw NumericalError("objective is not finite at the starting value");

    PenalizedFit fit;
    fit.lambda = lambda;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const Eigen::VectorXd grad = ws.score - 2.0 * lambda * (pen * beta) - 2.0 * opts.objective_ridge * beta;
        Eigen::MatrixXd a = ws.hessian + 2.0 * lambda * pen;
        a.diagonal().array() += 2.0 * opts.objective_ridge + opts.ridge;
        const Eigen::VectorXd step = solve_spd(a, grad);
        if (!step.allFinite()) throw NumericalError("Newton step is not finite");

        double scale = 1.0;
        bool accepted = false;
        Eigen::VectorXd trial;
        WorkingSystem trial_ws;
        double trial_obj = 0.0;
        for (int h = 0; h <= opts.max_halvings; ++h, scale *= 0.5) {
            trial = beta + scale * step;
            trial_ws = evaluate(design, trial, opts, true);
            trial_obj = objective(trial_ws, trial);
            if (std::isfinite(trial_obj) && trial_obj >= obj - 1e-12 * (1.0 + std::abs(obj))) {
                accepted = true;
                break;
            }
        }
        if (!accepted && 0.5 * grad.dot(step) <= 1e-8 * (1.0 + std::abs(obj))) {
            // Newton decrement at the rounding noise of the objective: stationary.
            fit.iterations = it;
            fit.converged = true;
            fit.diagnostic = "stopped at the rounding-noise level of the objective (lambda " +
                             std::to_string(lambda) + ")";
            break;
        }
        if (!accepted) {
            std::ostringstream msg;
            msg << "penalized IRLS diverged at iteration " << it << " (lambda " << lambda
                << "): objective " << obj << " could not be increased after " << opts.max_halvings
                << " step halvings";
            throw NumericalError(msg.str());
        }
        const double change = (trial - beta).lpNorm<Eigen::Infinity>() /
                              std::max(trial.lpNorm<Eigen::Infinity>(), 1.0);
        beta = std::move(trial);
        ws = std::move(trial_ws);
        obj = trial_obj;
        fit.iterations = it;
        if (change < opts.tolerance) {
            fit.converged = true;
            break;
        }
    }
    if (!fit.converged) {
        std::ostringstream msg;
        msg << "no convergence after " << opts.max_iterations
            << " iterations (lambda " << lambda << "); the responses may be separated";
        fit.diagnostic = msg.str();
    }
    fit.phi = CoefficientMatrix::from_vec(beta, p, q);
    fit.objective = obj;
    fit.loglik = ws.loglik;
    fit.working = std::move(ws);
    return fit;
}

}  // namespace vcergm
