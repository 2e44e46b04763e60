#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace vcergm {

/// Affine map between original observation times and the unit interval on
/// which the spline basis lives.
struct TimeScale {
    double origin = 0.0;
    double span = 1.0;

    double to_unit(double t) const { return (t - origin) / span; }
    double from_unit(double u) const { return origin + u * span; }
    /// Throws UsageError when t falls outside [origin, origin + span].
    double to_unit_checked(double t) const;
};

/// How the roughness penalty integrates the squared second derivative.
enum class PenaltyKind {
    Discrete,  ///< sum over the observed (rescaled) times
    Exact,     ///< Gauss-Legendre integral over [0, 1]
};

/// Clamped B-spline basis on [0, 1] together with its roughness penalty.
class BasisSystem {
public:
    /// The one-function basis B(t) = 1 (order 1, no penalty). Fitting with it
    /// is the constant-coefficient model.
    static BasisSystem constant(std::span<const double> times);

    BasisSystem(int order, std::vector<double> interior_knots, std::vector<double> eval_times,
                TimeScale scale, PenaltyKind penalty = PenaltyKind::Discrete);

    int order() const { return order_; }
    int dim() const { return static_cast<int>(knots_.size()) - order_; }
    const std::vector<double>& knots() const { return knots_; }
    std::vector<double> interior_knots() const;
    const std::vector<double>& eval_times() const { return eval_times_; }
    const TimeScale& scale() const { return scale_; }
    PenaltyKind penalty_kind() const { return penalty_kind_; }

    /// q basis values at unit time t; throws UsageError outside [0, 1].
    Eigen::VectorXd evaluate(double t) const;
    /// Same as evaluate(scale().to_unit_checked(time)).
    Eigen::VectorXd evaluate_at(double time) const;
    /// Row r holds the r-th derivative of every basis function at t, r <= max_derivative.
    /// Knots use right limits (the last span is closed at t = 1).
    Eigen::MatrixXd derivatives(double t, int max_derivative) const;

    /// Roughness penalty matrix (q x q, symmetric PSD).
    const Eigen::MatrixXd& omega() const { return omega_; }

    /// Greville abscissae: coefficient vector a + b * greville() reproduces
    /// the affine function a + b t exactly.
    Eigen::VectorXd greville() const;

    /// Nonzero second derivatives at (t, weight) points, scaled by
    /// sqrt(weight): (index of the first nonzero function, values).
    std::vector<std::pair<int, std::vector<long double>>> second_derivatives_ld(
        std::span<const std::pair<double, double>> points) const;

private:
    int span_index(double t) const;

    int order_;
    std::vector<double> knots_;
    std::vector<double> eval_times_;
    TimeScale scale_;
    PenaltyKind penalty_kind_;
    Eigen::MatrixXd omega_;
};

struct BasisOptions {
    std::optional<int> dim;  ///< nullopt = automatic rule
    int order = 4;
    PenaltyKind penalty = PenaltyKind::Discrete;
    /// Reject dimensions above this (the total number of dyad rows).
    std::optional<std::size_t> max_dim;
};

/// Basis dimension used when none is requested.
int auto_basis_dim(std::size_t n_times, int order);

/// Builds a clamped basis on the rescaled times with interior knots at
/// quantiles of those times. times must be strictly increasing, length >= 2.
/// A requested dimension of 1 yields BasisSystem::constant.
BasisSystem build_basis(std::span<const double> times, const BasisOptions& opts = {});

/// Basis with a knot at every interior time (smoothing-spline layout).
BasisSystem smoothing_spline_basis(std::span<const double> times, int order = 4,
                                   PenaltyKind penalty = PenaltyKind::Discrete);

/// Penalty matrix of basis, recomputed with the requested integration rule.
Eigen::MatrixXd penalty_matrix(const BasisSystem& basis, PenaltyKind kind);

}  // namespace vcergm
