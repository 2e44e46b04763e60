#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vcergm/basis.hpp"
#include "vcergm/dyngraph.hpp"
#include "vcergm/netstats.hpp"

namespace vcergm {

/// p x q basis-coefficient matrix. Row k holds the spline coefficients of
/// the k-th statistic's coefficient curve: phi(t) = values * B(t).
class CoefficientMatrix {
public:
    CoefficientMatrix() = default;
    explicit CoefficientMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {}

    /// Every column equal to phi0, i.e. the constant curve phi(t) = phi0.
    static CoefficientMatrix constant(const Eigen::VectorXd& phi0, int q);
    /// Inverse of vec(): statistic index fastest, basis index slowest.
    static CoefficientMatrix from_vec(const Eigen::VectorXd& v, int p, int q);

    int p() const { return static_cast<int>(values_.rows()); }
    int q() const { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }

    Eigen::VectorXd vec() const;
    Eigen::VectorXd evaluate(const Eigen::VectorXd& basis_values) const { return values_ * basis_values; }

    friend bool operator==(const CoefficientMatrix& a, const CoefficientMatrix& b) {
        return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
               a.values_ == b.values_;
    }

private:
    Eigen::MatrixXd values_;
};

/// Row data shared between designs that differ only in their basis.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Distinct change-statistic rows of each time block with their
/// multiplicity and number of observed ties. The pseudo-likelihood, its
/// derivatives and the GCV sums only depend on these counts.
struct PatternRows {
    RowMatrix delta;                   ///< M x p
    Eigen::VectorXd count;             ///< rows sharing the pattern
    Eigen::VectorXd ones;              ///< of which have response 1
    std::vector<std::size_t> offsets;  ///< pattern block of time k
};

struct DesignRows {
    Eigen::VectorXd response;  ///< N binary outcomes
    RowMatrix delta;           ///< N x p
    std::vector<std::size_t> offsets;  ///< row block of time k is [offsets[k], offsets[k+1])
    std::vector<double> times;         ///< original observation times
    PatternRows patterns;
};

/// Provenance of one design row.
struct RowIndex {
    std::size_t time_index;
    std::size_t dyad;  ///< canonical dyad position within that snapshot
};

/// The pseudo-likelihood logistic system. The N x pq design matrix H is kept
/// in factored form: row r at time s equals kron(B(s), delta_r), so only the
/// change statistics and the K basis vectors are stored.
class DesignSystem {
public:
    DesignSystem(std::shared_ptr<const DesignRows> rows, Eigen::MatrixXd basis_rows,
                 Eigen::MatrixXd omega);

    int p() const { return static_cast<int>(rows_->delta.cols()); }
    int q() const { return static_cast<int>(basis_rows_.cols()); }
    std::size_t n_rows() const { return static_cast<std::size_t>(rows_->response.size()); }
    std::size_t n_times() const { return rows_->times.size(); }

    const DesignRows& rows() const { return *rows_; }
    std::shared_ptr<const DesignRows> shared_rows() const { return rows_; }
    /// K x q; row k is B at the k-th observation time.
    const Eigen::MatrixXd& basis_rows() const { return basis_rows_; }
    const Eigen::MatrixXd& omega() const { return omega_; }
    /// Omega kron I_p, in vec(Phi) ordering.
    Eigen::MatrixXd penalty() const;

    RowIndex row_index(std::size_t r) const;

    /// Materialized H (N x pq). Meant for tests and small problems.
    Eigen::MatrixXd dense() const;

    /// Same rows, different basis evaluated at the same times.
    DesignSystem with_basis(Eigen::MatrixXd basis_rows, Eigen::MatrixXd omega) const;

private:
    std::shared_ptr<const DesignRows> rows_;
    Eigen::MatrixXd basis_rows_;
    Eigen::MatrixXd omega_;
};

/// Builds responses and change statistics for every dyad of every snapshot,
/// time-major then canonical dyad order. The basis must have been built on
/// the network's times.
DesignSystem assemble_design(const DynamicNetwork& data, const StatisticSpec& spec,
                             const BasisSystem& basis, int threads = 1);

/// Single-snapshot design with the constant basis; used by the per-time fits.
DesignSystem assemble_snapshot_design(const Graph& g, double time, const StatisticSpec& spec);

/// log PL(Phi | x) = sum_rows [ y * eta - log(1 + exp(eta)) ] with
/// eta = delta_r' Phi B(s).
double pseudo_log_likelihood(const DesignSystem& design, const CoefficientMatrix& phi);

struct IrlsOptions {
    int max_iterations = 100;
    int max_halvings = 20;
    double tolerance = 1e-8;      ///< relative change of vec(Phi)
    double ridge = 1e-8;          ///< added to the Newton matrix only
    double weight_floor = 1e-10;
    double eta_clamp = 30.0;
    double objective_ridge = 0.0;  ///< extra penalty objective_ridge * |beta|^2
};

/// Working linear system at an IRLS iterate.
struct WorkingSystem {
    Eigen::MatrixXd hessian;   ///< H' W H
    Eigen::VectorXd score;     ///< H' (y - mu)
    double weighted_rss = 0.0; ///< sum (y - mu)^2 / w
    double loglik = 0.0;
};

struct PenalizedFit {
    CoefficientMatrix phi;
    double lambda = 0.0;
    int iterations = 0;
    bool converged = false;
    double objective = 0.0;  ///< loglik - lambda * penalty
    double loglik = 0.0;
    std::string diagnostic;
    WorkingSystem working;   ///< at the returned coefficients
};

/// Maximizes loglik(beta) - lambda * beta' (Omega kron I_p) beta by Newton /
/// IRLS with step halving. Hitting the iteration cap is reported through
/// `converged` and `diagnostic`; a step that cannot be made to ascend throws
/// NumericalError.
PenalizedFit fit_penalized(const DesignSystem& design, double lambda, const IrlsOptions& opts = {},
                           const CoefficientMatrix* start = nullptr);

/// Penalized score H'(y - mu) - 2 lambda P beta at phi.
Eigen::VectorXd penalized_score(const DesignSystem& design, const CoefficientMatrix& phi,
                                double lambda);

/// H' H, used by the unweighted GCV criterion.
Eigen::MatrixXd gram_matrix(const DesignSystem& design);

enum class GcvKind {
    Unweighted,  ///< linear smoother of y on H with H'H + N lambda P
    Weighted,    ///< working IRLS system at the penalized fit for each lambda
};

struct LambdaSelection {
    double lambda = 0.0;
    std::vector<std::pair<double, double>> path;  ///< (lambda, G(lambda)) in grid order
    bool flat = false;
    PenalizedFit fit;  ///< the fit at the selected lambda
};

/// Log-spaced 1e-4 ... 1e4 (25 points), multiplied by the balance scale
/// tr(H'H) / (N tr(P)) so the grid spans data-dominated to penalty-dominated.
std::vector<double> default_lambda_grid(const DesignSystem& design);

/// GCV selection over the grid. Ties go to the larger lambda; a flat path
/// selects the largest lambda with a warning. The returned fit is the
/// penalized logistic fit at the selected lambda.
LambdaSelection select_lambda(const DesignSystem& design, std::span<const double> grid,
                              GcvKind kind = GcvKind::Unweighted, const IrlsOptions& opts = {});

struct FitOptions {
    BasisOptions basis;
    std::optional<double> lambda;     ///< nullopt = GCV
    std::vector<double> lambda_grid;  ///< empty = default_lambda_grid
    GcvKind gcv = GcvKind::Unweighted;
    IrlsOptions irls;
    int threads = 1;
};

struct FitResult {
    CoefficientMatrix phi;
    double lambda = 0.0;
    BasisSystem basis;
    StatisticSpec spec;
    bool directed = false;
    int iterations = 0;
    bool converged = false;
    double pseudo_loglik = 0.0;
    std::vector<std::pair<double, double>> gcv_path;
    std::string diagnostic;

    /// phi(t) at an original time inside the observed range.
    Eigen::VectorXd curve(double time) const { return phi.evaluate(basis.evaluate_at(time)); }
};

/// CSV `time,statistic,phi_hat` with one row per grid time and statistic.
/// Grid times may fall between observations but not outside the fitted
/// range (UsageError). An empty grid gives the header alone.
void write_curves(std::ostream& out, const FitResult& fit, std::span<const double> grid);

/// Basis -> design -> GCV -> penalized fit. Needs at least two snapshots.
FitResult fit_vcergm(const DynamicNetwork& data, const StatisticSpec& spec, const FitOptions& opts = {});

struct NullFit {
    Eigen::VectorXd phi0;
    double loglik = 0.0;
    bool converged = false;
    bool ridge_fallback = false;
    int iterations = 0;
};

/// Unpenalized pooled logistic fit of constant coefficients (the null model).
NullFit fit_null_pooled(const DesignSystem& design, const IrlsOptions& opts = {});
NullFit fit_null_pooled(const DynamicNetwork& data, const StatisticSpec& spec);

struct CrossSectionalEstimate {
    double time;
    std::optional<Eigen::VectorXd> phi;  ///< nullopt when the per-time MLE failed
    int iterations = 0;
};

/// Independent unpenalized MPLE per snapshot.
std::vector<CrossSectionalEstimate> fit_cross_sectional(const DynamicNetwork& data,
                                                        const StatisticSpec& spec,
                                                        const IrlsOptions& opts = {});

struct TwoStepFit {
    CoefficientMatrix phi;
    std::vector<double> lambdas;  ///< per statistic
};

/// Penalized least-squares spline smoothing of the per-time estimates, one
/// statistic at a time, with GCV over default grids. Missing estimates are
/// skipped; the basis must cover the estimates' times.
TwoStepFit fit_two_step(const std::vector<CrossSectionalEstimate>& estimates,
                        const BasisSystem& basis);
TwoStepFit fit_two_step(const DynamicNetwork& data, const StatisticSpec& spec, const BasisSystem& basis);

}  // namespace vcergm
