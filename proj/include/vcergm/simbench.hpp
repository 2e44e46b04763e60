#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcergm/inference.hpp"
#include "vcergm/mple.hpp"
#include "vcergm/sampler.hpp"

namespace vcergm {

/// One true coefficient curve, on the per-count scale: phi_raw(t) multiplies
/// the raw change count, so the standardized coefficient is phi_raw times the
/// statistic's normalizer.
struct CurveSpec {
    enum class Kind {
        Sinusoidal,  ///< a sin((t + b) / c) + d
        Periodic,    ///< M sin(2 pi t / T)
        Quadratic,   ///< a (t - T/2)^2 + b
        Constant,    ///< a
        NonSmooth,   ///< i.i.d. N(a, b) at every observation time
    };
    Kind kind = Kind::Constant;
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;
    double d = 0.0;

    static CurveSpec sinusoidal(double a, double b, double c, double d) { return {Kind::Sinusoidal, a, b, c, d}; }
    static CurveSpec periodic(double amplitude) { return {Kind::Periodic, amplitude, 0.0, 1.0, 0.0}; }
    static CurveSpec quadratic(double a, double b) { return {Kind::Quadratic, a, b, 1.0, 0.0}; }
    static CurveSpec constant(double value) { return {Kind::Constant, value, 0.0, 1.0, 0.0}; }
    static CurveSpec non_smooth(double mean, double sd) { return {Kind::NonSmooth, mean, sd, 1.0, 0.0}; }
};

/// Closed-form value of a smooth curve at t with domain length T. Throws
/// UsageError for NonSmooth, which has no closed form.
double curve_value(const CurveSpec& curve, double t, double horizon);

struct Scenario {
    std::string name;
    StatisticSpec spec{{Statistic::EdgeDensity}};
    std::vector<CurveSpec> curves;  ///< one per statistic
    int n = 30;
    int horizon = 50;  ///< K; snapshots at t = 1..K and T = K
    bool directed = true;
    int missing = 0;   ///< interior snapshots deleted per replicate
    int replicates = 20;
    std::uint64_t seed = 1;
    SamplerConfig sampler;

    std::vector<double> times() const;
};

/// The four estimation settings (directed edges + reciprocity) and the power
/// setting (directed edges, amplitude M).
Scenario sinusoidal_scenario();
Scenario quadratic_scenario();
Scenario erdos_renyi_scenario(double p_edge = 0.85);
Scenario non_smooth_scenario();
Scenario power_scenario(double amplitude, int horizon);

/// True per-count coefficients at every scenario time: row k is phi(t_k).
/// Non-smooth curves are drawn once from the scenario seed.
Eigen::MatrixXd true_coefficients(const Scenario& scenario);

/// Sum over paired times of |truth - estimate|; times whose estimate is
/// missing are skipped.
double iae(std::span<const double> truth, std::span<const std::optional<double>> estimate);
double iae(std::span<const double> truth, std::span<const double> estimate);

/// Simulates replicate r of a scenario (all K snapshots, before deletion).
DynamicNetwork simulate_replicate(const Scenario& scenario, int replicate, int threads = 1);

/// Interior snapshot positions deleted in replicate r, sorted.
std::vector<std::size_t> missing_positions(const Scenario& scenario, int replicate);

enum class Method { Vcergm, CrossSectional, TwoStep };
std::string_view method_name(Method m);

enum class TwoStepBasis {
    SmoothingSpline,  ///< knot at every observed time
    Shared,           ///< the basis the varying-coefficient fit uses
};

struct EstimationOptions {
    std::vector<Method> methods{Method::Vcergm, Method::CrossSectional, Method::TwoStep};
    FitOptions fit;
    TwoStepBasis two_step_basis = TwoStepBasis::SmoothingSpline;
    int threads = 1;
};

struct EstimationRecord {
    int replicate = 0;
    Method method = Method::Vcergm;
    std::string statistic;
    double iae = 0.0;
    int points = 0;  ///< number of times entering the sum
};

struct Summary {
    std::string group;  ///< e.g. "vcergm/edges"
    double mean = 0.0;
    double sd = 0.0;    ///< sample standard deviation
    std::size_t count = 0;
};

/// Mean and sample SD of values.
Summary summarize(std::string group, std::span<const double> values);

struct EstimationReport {
    Scenario scenario;
    std::vector<EstimationRecord> records;
    std::vector<Summary> summary;  ///< one per method/statistic

    /// Aggregate recomputed from the records.
    Summary iae_summary(Method m, std::string_view statistic) const;
};

EstimationReport run_estimation_study(const Scenario& scenario, const EstimationOptions& opts = {});

struct PowerOptions {
    std::vector<double> amplitudes{0.0, 0.3};
    std::vector<int> horizons{30};
    int n = 30;
    int replicates = 20;
    int bootstrap = 200;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    SamplerConfig sampler;
    FitOptions fit;
    bool reselect_lambda = false;
    int threads = 1;
};

struct PowerRecord {
    double amplitude = 0.0;
    int horizon = 0;
    int replicate = 0;
    double t_observed = 0.0;
    double p_bootstrap = 0.0;
    double p_chisq = 0.0;
    bool reject_bootstrap = false;
    bool reject_chisq = false;
    double lambda = 0.0;
};

struct PowerCell {
    double amplitude = 0.0;
    int horizon = 0;
    double reject_bootstrap = 0.0;  ///< proportion
    double reject_chisq = 0.0;
    int replicates = 0;
};

struct PowerReport {
    PowerOptions options;
    std::vector<PowerRecord> records;
    std::vector<PowerCell> cells;
};

/// Replicate r uses the same simulation seed for every amplitude, so the
/// uniforms driving the sampler are shared across the M grid.
PowerReport run_power_study(const PowerOptions& opts = {});

struct TimingOptions {
    std::vector<int> horizons{20, 40, 60, 80, 100};
    int replicates = 3;
    Scenario scenario = sinusoidal_scenario();  ///< horizon is overridden
    FitOptions fit;
};

struct TimingRecord {
    int horizon = 0;
    int replicate = 0;
    std::string method;  ///< vcergm (with GCV), vcergm-fixed-lambda, cross-sectional
    double seconds = 0.0;
};

struct TimingReport {
    TimingOptions options;
    std::vector<TimingRecord> records;
    std::vector<Summary> summary;  ///< group "method/K"

    double mean_seconds(std::string_view method, int horizon) const;
    /// Least-squares slope of log(mean time) against log(K).
    double log_log_slope(std::string_view method) const;
};

/// Single-threaded wall-clock comparison on identical simulated data.
TimingReport run_timing_study(const TimingOptions& opts = {});

}  // namespace vcergm
