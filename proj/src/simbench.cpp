#include "vcergm/simbench.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "vcergm/errors.hpp"
#include "vcergm/parallel.hpp"

namespace vcergm {

namespace {

// Stream ids below keep simulation, deletion and truth draws independent.
constexpr std::uint64_t kTruthStream = std::uint64_t{1} << 40;

std::uint64_t simulation_seed(std::uint64_t seed, int replicate) {
    return make_rng(seed, 2 * static_cast<std::uint64_t>(replicate))();
}

std::string group_name(Method m, std::string_view statistic) {
    return std::string(method_name(m)) + "/" + std::string(statistic);
}

Eigen::VectorXd standardized(const Eigen::VectorXd& raw, const StatisticSpec& spec, int n, bool directed) {
    return raw.cwiseProduct(spec.normalizers(n, directed));
}

}  // namespace

double curve_value(const CurveSpec& curve, double t, double horizon) {
    switch (curve.kind) {
    case CurveSpec::Kind::Sinusoidal: return curve.a * std::sin((t + curve.b) / curve.c) + curve.d;
    case CurveSpec::Kind::Periodic: return curve.a * std::sin(2.0 * std::numbers::pi * t / horizon);
    case CurveSpec::Kind::Quadratic: {
        const double u = t - horizon / 2.0;
        return curve.a * u * u + curve.b;
    }
    case CurveSpec::Kind::Constant: return curve.a;
    case CurveSpec::Kind::NonSmooth: break;
    }
    throw UsageError("a non-smooth curve has no closed form");
}

std::vector<double> Scenario::times() const {
    if (horizon < 2) throw UsageError("a scenario needs at least two time points");
    std::vector<double> t(static_cast<std::size_t>(horizon));
    for (int k = 0; k < horizon; ++k) t[static_cast<std::size_t>(k)] = k + 1.0;
    return t;
}

Scenario sinusoidal_scenario() {
    Scenario s;
    s.name = "sinusoidal";
    s.spec = StatisticSpec({Statistic::EdgeDensity, Statistic::Reciprocity});
    s.curves = {CurveSpec::sinusoidal(1.0, 20.0, 5.0, 1.0), CurveSpec::sinusoidal(0.6, 20.0, 3.0, 0.4)};
    return s;
}

Scenario quadratic_scenario() {
    Scenario s;
    s.name = "quadratic";
    s.spec = StatisticSpec({Statistic::EdgeDensity, Statistic::Reciprocity});
    s.curves = {CurveSpec::quadratic(1.0 / 625.0, 0.0), CurveSpec::quadratic(-1.0 / 900.0, 0.5)};
    return s;
}

Scenario erdos_renyi_scenario(double p_edge) {
    if (!(p_edge > 0.0 && p_edge < 1.0)) throw UsageError("edge probability must lie in (0, 1)");
    Scenario s;
    s.name = "erdos-renyi";
    s.spec = StatisticSpec({Statistic::EdgeDensity, Statistic::Reciprocity});
    s.curves = {CurveSpec::constant(std::log(p_edge / (1.0 - p_edge))), CurveSpec::constant(0.0)};
    return s;
}

Scenario non_smooth_scenario() {
    Scenario s;
    s.name = "non-smooth";
    s.spec = StatisticSpec({Statistic::EdgeDensity, Statistic::Reciprocity});
    s.curves = {CurveSpec::non_smooth(0.0, 1.0), CurveSpec::non_smooth(1.5, 0.6)};
    return s;
}

Scenario power_scenario(double amplitude, int horizon) {
    Scenario s;
    s.name = "power";
    s.spec = StatisticSpec({Statistic::EdgeDensity});
    s.curves = {CurveSpec::periodic(amplitude)};
    s.horizon = horizon;
    return s;
}

Eigen::MatrixXd true_coefficients(const Scenario& scenario) {
    if (scenario.curves.size() != scenario.spec.size())
        throw UsageError("scenario needs one curve per statistic");
    const auto times = scenario.times();
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(scenario.curves.size()));
    auto rng = make_rng(scenario.seed, kTruthStream);
    for (std::size_t j = 0; j < scenario.curves.size(); ++j) {
        const auto& curve = scenario.curves[j];
        for (std::size_t k = 0; k < times.size(); ++k) {
            double v;
            if (curve.kind == CurveSpec::Kind::NonSmooth) {
                if (!(curve.b >= 0.0)) throw UsageError("non-smooth curve needs sd >= 0");
                v = std::normal_distribution<double>(curve.a, curve.b)(rng);
            } else {
                v = curve_value(curve, times[k], scenario.horizon);
            }
            phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return phi;
}

double iae(std::span<const double> truth, std::span<const std::optional<double>> estimate) {
    if (truth.size() != estimate.size()) throw UsageError("IAE needs paired curves");
    double total = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k)
        if (estimate[k]) total += std::abs(truth[k] - *estimate[k]);
    return total;
}

double iae(std::span<const double> truth, std::span<const double> estimate) {
    if (truth.size() != estimate.size()) throw UsageError("IAE needs paired curves");
    double total = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) total += std::abs(truth[k] - estimate[k]);
    return total;
}

DynamicNetwork simulate_replicate(const Scenario& scenario, int replicate, int threads) {
    const auto times = scenario.times();
    const Eigen::MatrixXd truth = true_coefficients(scenario);
    SamplerConfig cfg = scenario.sampler;
    cfg.seed = simulation_seed(scenario.seed, replicate);
    const PhiCurve curve = [&](double t) {
        const auto k = static_cast<Eigen::Index>(std::lround(t)) - 1;
        return standardized(truth.row(k).transpose(), scenario.spec, scenario.n, scenario.directed);
    };
    return sample_sequence(curve, times, scenario.spec, scenario.n, scenario.directed, cfg, threads);
}

std::vector<std::size_t> missing_positions(const Scenario& scenario, int replicate) {
    const auto k = static_cast<std::size_t>(scenario.horizon);
    const auto m = static_cast<std::size_t>(scenario.missing);
    if (scenario.missing < 0 || k < 2 || m > k - 2)
        throw UsageError("cannot delete " + std::to_string(scenario.missing) + " interior snapshots of " +
                         std::to_string(scenario.horizon));
    std::vector<std::size_t> interior;
    for (std::size_t i = 1; i + 1 < k; ++i) interior.push_back(i);
    auto rng = make_rng(scenario.seed, 2 * static_cast<std::uint64_t>(replicate) + 1);
    // Partial Fisher-Yates with our own uniform draw, for portable output.
    for (std::size_t i = 0; i < m; ++i) {
        const auto span = interior.size() - i;
        auto j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(span));
        j = std::min(j, interior.size() - 1);
        std::swap(interior[i], interior[j]);
    }
    interior.resize(m);
    std::sort(interior.begin(), interior.end());
    return interior;
}

std::string_view method_name(Method m) {
    switch (m) {
    case Method::Vcergm: return "vcergm";
    case Method::CrossSectional: return "cross-sectional";
    case Method::TwoStep: return "two-step";
    }
    return "?";
}

Summary summarize(std::string group, std::span<const double> values) {
    Summary s{std::move(group), 0.0, 0.0, values.size()};
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

Summary EstimationReport::iae_summary(Method m, std::string_view statistic) const {
    std::vector<double> values;
    for (const auto& r : records)
        if (r.method == m && r.statistic == statistic) values.push_back(r.iae);
    return summarize(group_name(m, statistic), values);
}

EstimationReport run_estimation_study(const Scenario& scenario, const EstimationOptions& opts) {
    scenario.spec.check_compatible(scenario.directed);
    if (scenario.replicates < 1) throw UsageError("replicates must be positive");
    const auto times = scenario.times();
    const Eigen::MatrixXd truth = true_coefficients(scenario);
    const Eigen::VectorXd norm = scenario.spec.normalizers(scenario.n, scenario.directed);
    const auto names = scenario.spec.names();
    const auto p = static_cast<Eigen::Index>(scenario.spec.size());

    std::vector<std::vector<EstimationRecord>> per_rep(static_cast<std::size_t>(scenario.replicates));
    parallel_for(per_rep.size(), opts.threads, [&](std::size_t r) {
        const int rep = static_cast<int>(r);
        const auto full = simulate_replicate(scenario, rep);
        const auto gone = missing_positions(scenario, rep);
        const auto data = full.without(gone);

        auto add = [&](Method m, Eigen::Index j, double value, int points) {
            per_rep[r].push_back({rep, m, names[static_cast<std::size_t>(j)], value, points});
        };
        // Per-count estimate of statistic j at every scenario time, or none.
        auto score_curve = [&](Method m, const std::vector<std::optional<Eigen::VectorXd>>& est) {
            for (Eigen::Index j = 0; j < p; ++j) {
                std::vector<double> tr(times.size());
                std::vector<std::optional<double>> es(times.size());
                int points = 0;
                for (std::size_t k = 0; k < times.size(); ++k) {
                    tr[k] = truth(static_cast<Eigen::Index>(k), j);
                    if (est[k]) {
                        es[k] = (*est[k])[j] / norm[j];
                        ++points;
                    }
                }
                add(m, j, iae(tr, es), points);
            }
        };
        auto evaluate_smooth = [&](const CoefficientMatrix& phi, const BasisSystem& basis) {
            std::vector<std::optional<Eigen::VectorXd>> est;
            for (double t : times) est.emplace_back(phi.evaluate(basis.evaluate_at(t)));
            return est;
        };

        std::optional<std::vector<CrossSectionalEstimate>> cross;
        for (Method m : opts.methods) {
            if (m == Method::Vcergm) {
                const auto fit = fit_vcergm(data, scenario.spec, opts.fit);
                score_curve(m, evaluate_smooth(fit.phi, fit.basis));
                continue;
            }
            if (!cross) cross = fit_cross_sectional(data, scenario.spec, opts.fit.irls);
            if (m == Method::CrossSectional) {
                std::vector<std::optional<Eigen::VectorXd>> est(times.size());
                std::size_t k = 0;
                for (const auto& e : *cross) {
                    while (times[k] != e.time) ++k;
                    est[k] = e.phi;
                }
                score_curve(m, est);
            } else {
                const auto obs = data.times();
                BasisOptions bopts = opts.fit.basis;
                const auto basis = opts.two_step_basis == TwoStepBasis::SmoothingSpline
                                       ? smoothing_spline_basis(obs, 4, bopts.penalty)
                                       : build_basis(obs, bopts);
                const auto two = fit_two_step(*cross, basis);
                score_curve(m, evaluate_smooth(two.phi, basis));
            }
        }
        spdlog::info("{}: replicate {} done", scenario.name, rep);
    });

    EstimationReport report{scenario, {}, {}};
    for (auto& recs : per_rep)
        for (auto& rec : recs) report.records.push_back(std::move(rec));
    for (Method m : opts.methods)
        for (const auto& name : names) report.summary.push_back(report.iae_summary(m, name));
    return report;
}

PowerReport run_power_study(const PowerOptions& opts) {
    if (opts.replicates < 1) throw UsageError("replicates must be positive");
    PowerReport report{opts, {}, {}};
    for (int horizon : opts.horizons) {
        for (double amplitude : opts.amplitudes) {
            Scenario sc = power_scenario(amplitude, horizon);
            sc.n = opts.n;
            sc.seed = opts.seed;
            sc.sampler = opts.sampler;
            sc.replicates = opts.replicates;
            std::vector<PowerRecord> recs(static_cast<std::size_t>(opts.replicates));
            parallel_for(recs.size(), opts.threads, [&](std::size_t r) {
                const int rep = static_cast<int>(r);
                const auto data = simulate_replicate(sc, rep);
                TestOptions topts;
                topts.replicates = opts.bootstrap;
                topts.alpha = opts.alpha;
                topts.seed = make_rng(opts.seed ^ 0x5bd1e995ULL, r)();
                topts.fit = opts.fit;
                topts.sampler = opts.sampler;
                topts.reselect_lambda = opts.reselect_lambda;
                const auto res = bootstrap_test(data, sc.spec, topts);
                recs[r] = {amplitude, horizon, rep, res.t_observed, res.p_value_bootstrap, res.p_value_chisq,
                           res.reject, res.p_value_chisq <= opts.alpha, res.lambda};
                spdlog::info("power M={} K={}: replicate {} T={} p={}", amplitude, horizon, rep, res.t_observed,
                             res.p_value_bootstrap);
            });
            PowerCell cell{amplitude, horizon, 0.0, 0.0, opts.replicates};
            for (const auto& rec : recs) {
                cell.reject_bootstrap += rec.reject_bootstrap ? 1.0 : 0.0;
                cell.reject_chisq += rec.reject_chisq ? 1.0 : 0.0;
            }
            cell.reject_bootstrap /= opts.replicates;
            cell.reject_chisq /= opts.replicates;
            report.cells.push_back(cell);
            report.records.insert(report.records.end(), recs.begin(), recs.end());
        }
    }
    return report;
}

double TimingReport::mean_seconds(std::string_view method, int horizon) const {
    std::vector<double> v;
    for (const auto& r : records)
        if (r.method == method && r.horizon == horizon) v.push_back(r.seconds);
    if (v.empty()) throw UsageError("no timing records for that method and horizon");
    return summarize("", v).mean;
}

double TimingReport::log_log_slope(std::string_view method) const {
    std::vector<double> x, y;
    for (int k : options.horizons) {
        x.push_back(std::log(static_cast<double>(k)));
        y.push_back(std::log(mean_seconds(method, k)));
    }
    if (x.size() < 2) throw UsageError("slope needs at least two horizons");
    const double mx = summarize("", x).mean;
    const double my = summarize("", y).mean;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

TimingReport run_timing_study(const TimingOptions& opts) {
    using clock = std::chrono::steady_clock;
    auto seconds_since = [](clock::time_point start) {
        return std::chrono::duration<double>(clock::now() - start).count();
    };
    TimingReport report{opts, {}, {}};
    FitOptions fit_opts = opts.fit;
    fit_opts.threads = 1;
    for (int horizon : opts.horizons) {
        Scenario sc = opts.scenario;
        sc.horizon = horizon;
        for (int rep = 0; rep < opts.replicates; ++rep) {
            const auto data = simulate_replicate(sc, rep);

            auto start = clock::now();
            const auto fit = fit_vcergm(data, sc.spec, fit_opts);
            report.records.push_back({horizon, rep, "vcergm", seconds_since(start)});

            FitOptions fixed = fit_opts;
            fixed.lambda = fit.lambda;
            start = clock::now();
            const auto refit = fit_vcergm(data, sc.spec, fixed);
            report.records.push_back({horizon, rep, "vcergm-fixed-lambda", seconds_since(start)});

            start = clock::now();
            const auto cross = fit_cross_sectional(data, sc.spec, fit_opts.irls);
            report.records.push_back({horizon, rep, "cross-sectional", seconds_since(start)});
            spdlog::info("timing K={} replicate {} done ({} per-time fits)", horizon, rep, cross.size());
            (void)refit;
        }
    }
    for (const char* method : {"vcergm", "vcergm-fixed-lambda", "cross-sectional"}) {
        for (int horizon : opts.horizons) {
            std::vector<double> v;
            for (const auto& r : report.records)
                if (r.method == method && r.horizon == horizon) v.push_back(r.seconds);
            report.summary.push_back(summarize(std::string(method) + "/" + std::to_string(horizon), v));
        }
    }
    return report;
}

}  // namespace vcergm
