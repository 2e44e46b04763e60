#include "vcergm/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "text.hpp"
#include "vcergm/errors.hpp"

namespace vcergm {

double TimeScale::to_unit_checked(double t) const {
    const double u = to_unit(t);
    // tolerate rounding from the affine map at the end points
    if (u < -1e-12 || u > 1.0 + 1e-12)
        throw UsageError("time " + text::format_number(t) + " is outside the basis domain [" +
                         text::format_number(origin) + ", " + text::format_number(origin + span) + "]");
    return std::clamp(u, 0.0, 1.0);
}

namespace {

TimeScale scale_for(std::span<const double> times) {
    if (times.size() < 2) throw UsageError("basis needs at least two time points");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k - 1] < times[k])) throw UsageError("basis times must be strictly increasing");
    return TimeScale{times.front(), times.back() - times.front()};
}

std::vector<double> rescale(std::span<const double> times, const TimeScale& sc) {
    std::vector<double> u;
    u.reserve(times.size());
    for (double t : times) u.push_back(std::clamp(sc.to_unit(t), 0.0, 1.0));
    u.front() = 0.0;
    u.back() = 1.0;
    return u;
}

double quantile7(const std::vector<double>& sorted, double prob) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

// Five-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

}  // namespace

BasisSystem BasisSystem::constant(std::span<const double> times) {
    const auto sc = scale_for(times);
    return BasisSystem(1, {}, rescale(times, sc), sc);
}

BasisSystem::BasisSystem(int order, std::vector<double> interior_knots,
                         std::vector<double> eval_times, TimeScale scale, PenaltyKind penalty)
    : order_(order), eval_times_(std::move(eval_times)), scale_(scale), penalty_kind_(penalty) {
    if (order < 1) throw UsageError("spline order must be positive");
    if (!(scale_.span > 0.0)) throw UsageError("time scale must have positive span");
    for (std::size_t k = 0; k < interior_knots.size(); ++k) {
        const double v = interior_knots[k];
        if (!(v > 0.0 && v < 1.0)) throw UsageError("interior knots must lie in (0, 1)");
        if (k > 0 && !(interior_knots[k - 1] < v))
            throw UsageError("interior knots must be strictly increasing");
    }
    knots_.assign(order_, 0.0);
    knots_.insert(knots_.end(), interior_knots.begin(), interior_knots.end());
    knots_.insert(knots_.end(), order_, 1.0);
    omega_ = penalty_matrix(*this, penalty_kind_);
}

std::vector<double> BasisSystem::interior_knots() const {
    return {knots_.begin() + order_, knots_.end() - order_};
}

int BasisSystem::span_index(double t) const {
    const int q = dim();
    if (t >= 1.0) return q - 1;
    // last s with knots[s] <= t, restricted to [order-1, q-1]
    const auto it = std::upper_bound(knots_.begin() + order_, knots_.begin() + q, t);
    return static_cast<int>(it - knots_.begin()) - 1;
}

namespace {

// Piegl & Tiller, "The NURBS Book", algorithm A2.3: the nonzero basis
// functions on knot span s and their first nd derivatives at t.
template <class T>
std::vector<std::vector<T>> nonzero_derivatives(const std::vector<double>& U, int deg, int s, T t, int nd) {
    std::vector<std::vector<T>> ndu(deg + 1, std::vector<T>(deg + 1, T(0)));
    std::vector<T> left(deg + 1), right(deg + 1);
    ndu[0][0] = T(1);
    for (int j = 1; j <= deg; ++j) {
        left[j] = t - T(U[s + 1 - j]);
        right[j] = T(U[s + j]) - t;
        T saved = T(0);
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const T temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    std::vector<std::vector<T>> ders(nd + 1, std::vector<T>(deg + 1, T(0)));
    for (int j = 0; j <= deg; ++j) ders[0][j] = ndu[j][deg];

    std::vector<std::vector<T>> a(2, std::vector<T>(deg + 1, T(0)));
    for (int r = 0; r <= deg; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = T(1);
        for (int k = 1; k <= nd; ++k) {
            T d = T(0);
            const int rk = r - k;
            const int pk = deg - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : deg - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::swap(s1, s2);
        }
    }
    T factor = T(deg);
    for (int k = 1; k <= nd; ++k) {
        for (int j = 0; j <= deg; ++j) ders[k][j] *= factor;
        factor *= T(deg - k);
    }
    return ders;
}

}  // namespace

Eigen::MatrixXd BasisSystem::derivatives(double t, int max_derivative) const {
    if (!(t >= 0.0 && t <= 1.0))
        throw UsageError("basis evaluation at t=" + text::format_number(t) +
                         " is outside [0, 1]; extrapolation is not supported");
    const int deg = order_ - 1;
    const int s = span_index(t);
    const int nd = std::min(max_derivative, deg);
    const auto ders = nonzero_derivatives<double>(knots_, deg, s, t, nd);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(max_derivative + 1, dim());
    for (int k = 0; k <= nd; ++k)
        for (int j = 0; j <= deg; ++j) out(k, s - deg + j) = ders[k][j];
    return out;
}

std::vector<std::pair<int, std::vector<long double>>> BasisSystem::second_derivatives_ld(
    std::span<const std::pair<double, double>> points) const {
    const int deg = order_ - 1;
    std::vector<std::pair<int, std::vector<long double>>> out;
    out.reserve(points.size());
    for (auto [t, w] : points) {
        const int s = span_index(t);
        auto ders = nonzero_derivatives<long double>(knots_, deg, s, static_cast<long double>(t), 2);
        for (auto& v : ders[2]) v *= std::sqrt(static_cast<long double>(w));
        out.emplace_back(s - deg, std::move(ders[2]));
    }
    return out;
}

Eigen::VectorXd BasisSystem::evaluate(double t) const {
    return derivatives(t, 0).row(0).transpose();
}

Eigen::VectorXd BasisSystem::evaluate_at(double time) const {
    return evaluate(scale_.to_unit_checked(time));
}

Eigen::VectorXd BasisSystem::greville() const {
    const int q = dim();
    const int deg = order_ - 1;
    Eigen::VectorXd g(q);
    for (int l = 0; l < q; ++l) {
        if (deg == 0) {
            g[l] = 0.5 * (knots_[l] + knots_[l + 1]);
            continue;
        }
        double sum = 0.0;
        for (int m = 1; m <= deg; ++m) sum += knots_[l + m];
        g[l] = sum / deg;
    }
    return g;
}

Eigen::MatrixXd penalty_matrix(const BasisSystem& basis, PenaltyKind kind) {
    const int q = basis.dim();
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(q, q);
    if (basis.order() < 3) return omega;  // second derivative vanishes piecewise

    // Second derivatives and their products in extended precision: the
    // entries grow like K / h^4 while the affine null space must survive
    // rounding to double.
    std::vector<std::pair<double, double>> points;
    if (kind == PenaltyKind::Discrete) {
        for (double t : basis.eval_times()) points.emplace_back(t, 1.0);
    } else {
        const auto& U = basis.knots();
        for (std::size_t s = 0; s + 1 < U.size(); ++s) {
            const double a = U[s], b = U[s + 1];
            if (!(b > a)) continue;
            const double half = 0.5 * (b - a);
            for (std::size_t g = 0; g < kGaussNodes.size(); ++g)
                points.emplace_back(a + half * (kGaussNodes[g] + 1.0), half * kGaussWeights[g]);
        }
    }
    std::vector<long double> acc(static_cast<std::size_t>(q) * q, 0.0L);
    for (const auto& [first, d2] : basis.second_derivatives_ld(points)) {
        const int m = static_cast<int>(d2.size());
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) acc[static_cast<std::size_t>(first + i) * q + first + j] += d2[i] * d2[j];
    }
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) omega(i, j) = static_cast<double>(acc[static_cast<std::size_t>(i) * q + j]);
    // exact symmetry
    omega = 0.5 * (omega + omega.transpose()).eval();
    return omega;
}

int auto_basis_dim(std::size_t n_times, int order) {
    const int k = static_cast<int>(n_times);
    return std::min(10, std::max(order, k / 4 + order - 1));
}

BasisSystem build_basis(std::span<const double> times, const BasisOptions& opts) {
    const auto sc = scale_for(times);
    auto unit = rescale(times, sc);

    if (opts.dim && *opts.dim == 1) return BasisSystem(1, {}, std::move(unit), sc, opts.penalty);
    if (opts.order < 2) throw UsageError("spline order must be at least 2");

    const int q = opts.dim ? *opts.dim : auto_basis_dim(times.size(), opts.order);
    if (q < opts.order)
        throw UsageError("basis dimension " + std::to_string(q) + " is below the spline order " +
                         std::to_string(opts.order));
    if (opts.max_dim && static_cast<std::size_t>(q) > *opts.max_dim)
        throw UsageError("basis dimension " + std::to_string(q) + " exceeds the number of dyad rows");

    const int m = q - opts.order;
    std::vector<double> interior;
    interior.reserve(m);
    for (int j = 1; j <= m; ++j)
        interior.push_back(quantile7(unit, static_cast<double>(j) / (m + 1)));
    return BasisSystem(opts.order, std::move(interior), std::move(unit), sc, opts.penalty);
}

BasisSystem smoothing_spline_basis(std::span<const double> times, int order, PenaltyKind penalty) {
    const auto sc = scale_for(times);
    auto unit = rescale(times, sc);
    std::vector<double> interior(unit.begin() + 1, unit.end() - 1);
    return BasisSystem(order, std::move(interior), std::move(unit), sc, penalty);
}

}  // namespace vcergm
