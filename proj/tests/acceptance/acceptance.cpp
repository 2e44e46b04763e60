// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: acceptance <path-to-vcergm-cli> [criterion ...]

#include <spdlog/spdlog.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "../oracles.hpp"
#include "vcergm/basis.hpp"
#include "vcergm/mple.hpp"
#include "vcergm/sampler.hpp"
#include "vcergm/simbench.hpp"

using namespace vcergm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int workers() { return std::max(1, std::min(4, static_cast<int>(std::thread::hardware_concurrency()))); }

Graph random_graph(int n, bool directed, double density, std::mt19937_64& rng) {
    Graph g(n, directed);
    std::uniform_real_distribution<> u(0, 1);
    for (auto [i, j] : dyad_list(n, directed)) g.set_edge(i, j, u(rng) < density);
    return g;
}

Outcome closed_form() {
    const auto t0 = Clock::now();
    const int n = 20, k = 10;
    std::mt19937_64 rng(11);
    // Fixed arc count per snapshot, so the pooled and time-varying MLEs coincide.
    std::vector<Snapshot> snaps;
    const int arcs = 133;
    for (int s = 0; s < k; ++s) {
        auto dyads = dyad_list(n, true);
        std::shuffle(dyads.begin(), dyads.end(), rng);
        Graph g(n, true);
        for (int e = 0; e < arcs; ++e) g.set_edge(dyads[e].first, dyads[e].second, true);
        snaps.push_back({1.0 + s, std::move(g)});
    }
    const DynamicNetwork data(std::move(snaps), true);
    const double nn = n * (n - 1.0);
    const double d = arcs / nn;
    const double expect = std::log(d / (1 - d)) * nn;

    // scalar Newton on sum(y) b/nn - N log(1 + exp(b/nn))
    double b = 0;
    for (int it = 0; it < 100; ++it) {
        const double mu = 1 / (1 + std::exp(-b / nn));
        b += (arcs * k - k * nn * mu) / nn / (k * nn * mu * (1 - mu) / (nn * nn));
    }

    FitOptions opts;
    opts.lambda = 0.0;
    const auto fit = fit_vcergm(data, StatisticSpec::parse("edges"), opts);
    double err = 0;
    for (double t : data.times()) err = std::max(err, std::abs(fit.curve(t)[0] - expect));
    const double newton_err = std::abs(b - expect);
    const double secs = seconds_since(t0);
    return {fit.converged && err < 1e-8 && newton_err < 1e-8 && secs < 1.0,
            fmt("max|phi-logit(d)n(n-1)|=%.2e, scalar Newton gap=%.2e (tol 1e-8), %.3fs (limit 1s)", err,
                newton_err, secs)};
}

Outcome solver_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(7);
    double worst = 0, worst_score = 0;
    bool ok = true;
    int redraws = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 4 + trial % 2;
        const int k = 4 + trial % 5;
        const auto spec = trial % 2 ? StatisticSpec::parse("edges,reciprocity") : StatisticSpec::parse("edges,ctriad");
        const double lambda = std::pow(10.0, -2.0 + trial % 5);
        for (;;) {
            std::vector<Snapshot> snaps;
            std::uniform_real_distribution<> u(0.3, 0.7);
            for (int s = 0; s < k; ++s) snaps.push_back({1.0 + s, random_graph(n, true, u(rng), rng)});
            const DynamicNetwork data(std::move(snaps), true);
            const auto design = assemble_design(data, spec, build_basis(data.times(), {.dim = 4}));
            const auto fit = fit_penalized(design, lambda);
            if (!fit.converged) {  // quasi-separated draw: no finite optimum to compare
                ++redraws;
                continue;
            }
            const Eigen::VectorXd expect =
                oracle::dense_newton(design.dense(), design.rows().response, design.penalty(), lambda);
            const double diff = (fit.phi.vec() - expect).lpNorm<Eigen::Infinity>();
            const double score = penalized_score(design, fit.phi, lambda).lpNorm<Eigen::Infinity>();
            const double n_rows = static_cast<double>(design.n_rows());
            ok = ok && n_rows <= 200 && diff < 1e-6 && score < 1e-6 * n_rows;
            worst = std::max(worst, diff);
            worst_score = std::max(worst_score, score / n_rows);
            break;
        }
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 30,
            fmt("max coef gap=%.2e (tol 1e-6), max score/N=%.2e (tol 1e-6), %d separated redraws, %.2fs (limit 30s)",
                worst, worst_score, redraws, secs)};
}

Outcome basis_properties() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<> u(0, 1);
    // Gated at the horizons of the desk-scale studies; K=100 is reported
    // only, since its discrete Omega entries (~2e6) have an ulp above 1e-10.
    double pou = 0, restricted = 0, image = 0, min_eig = 0, asym = 0, restricted_100 = 0;
    for (auto kind : {PenaltyKind::Discrete, PenaltyKind::Exact}) {
        for (int k : {30, 50, 100}) {
            std::vector<double> times;
            for (int i = 1; i <= k; ++i) times.push_back(i);
            const auto basis = build_basis(times, {.penalty = kind});
            for (int i = 0; i < 1000; ++i) pou = std::max(pou, std::abs(basis.evaluate(u(rng)).sum() - 1.0));
            const auto& omega = basis.omega();
            // Columns: coefficients of phi(t) = 1 and phi(t) = t on the unit domain.
            Eigen::MatrixXd affine(basis.dim(), 2);
            affine.col(0).setOnes();
            affine.col(1) = basis.greville();
            const double form = (affine.transpose() * omega * affine).cwiseAbs().maxCoeff();
            if (k == 100) {
                restricted_100 = std::max(restricted_100, form);
                continue;
            }
            restricted = std::max(restricted, form);
            image = std::max(image, (omega * affine).cwiseAbs().maxCoeff());
            asym = std::max(asym, (omega - omega.transpose()).cwiseAbs().maxCoeff());
            min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(omega).eigenvalues().minCoeff());
        }
    }
    return {pou < 1e-12 && restricted < 1e-10 && image < 1e-10 && asym == 0.0 && min_eig >= -1e-10,
            fmt("partition of unity err=%.2e (tol 1e-12), K=30,50: max|c'Omega c| on the affine space=%.2e, "
                "max|Omega c|=%.2e (tol 1e-10); K=100 c'Omega c=%.2e (not gated); asymmetry=%.1e, "
                "min eigenvalue=%.2e (tol -1e-10)",
                pou, restricted, image, restricted_100, asym, min_eig)};
}

Outcome sampler_exactness() {
    const auto t0 = Clock::now();
    const auto spec = StatisticSpec::parse("edges,reciprocity");
    Eigen::VectorXd phi(2);
    phi << 1.0, 0.5;
    const auto dist = exact_distribution(phi, spec, 3, true);
    const int draws = 50000;
    SamplerConfig cfg;
    cfg.seed = 20240601;
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(dist.probs.size());
    for (int i = 0; i < draws; ++i) {
        auto rng = make_rng(cfg.seed, static_cast<std::uint64_t>(i));
        counts[static_cast<Eigen::Index>(dist.index_of(gibbs_sample(phi, spec, 3, true, cfg, rng)))] += 1;
    }
    double stat = 0;
    for (Eigen::Index s = 0; s < counts.size(); ++s) {
        const double e = draws * dist.probs[s];
        stat += (counts[s] - e) * (counts[s] - e) / e;
    }
    const double p = boost::math::cdf(
        boost::math::complement(boost::math::chi_squared(static_cast<double>(counts.size() - 1)), stat));
    const double tv = total_variation(counts / draws, dist.probs);
    const double secs = seconds_since(t0);
    return {p > 0.01 && tv < 0.02 && secs < 60,
            fmt("chi2=%.1f on 63 df, p=%.3f (need >0.01), TV=%.4f (tol 0.02), %.1fs (limit 60s)", stat, p, tv, secs)};
}

Outcome difference_kernel() {
    const auto spec = StatisticSpec::parse("edges,reciprocity");
    double worst = 0;
    std::size_t states = 0;
    bool all = true;
    for (auto [a, b] : {std::pair{1.0, 0.5}, std::pair{-3.0, 4.0}}) {
        Eigen::VectorXd phi(2);
        phi << a, b;
        const auto rep = check_difference_statistic_equivalence(phi, spec, 3, true);
        worst = std::max(worst, rep.max_tv);
        all = all && rep.states == 64;
        states += rep.states;
    }
    return {all && worst < 1e-12, fmt("%zu conditioning states over 2 settings, max TV=%.2e (tol 1e-12)", states, worst)};
}

Outcome power_study() {
    const auto t0 = Clock::now();
    PowerOptions opts;
    opts.amplitudes = {0.0, 0.3};
    opts.horizons = {30};
    opts.n = 30;
    opts.replicates = 20;
    opts.bootstrap = 200;
    opts.threads = workers();
    const auto rep = run_power_study(opts);
    double size = -1, power = -1;
    for (const auto& c : rep.cells) (c.amplitude == 0.0 ? size : power) = c.reject_bootstrap;
    const double secs = seconds_since(t0);
    return {size <= 0.10 && power >= 0.90,
            fmt("rejection at M=0: %.2f (max 0.10), at M=0.3: %.2f (min 0.90), %.0fs on %d workers (target 1800s)",
                size, power, secs, opts.threads)};
}

Outcome estimation_study() {
    const auto t0 = Clock::now();
    EstimationOptions opts;
    opts.methods = {Method::Vcergm, Method::CrossSectional};
    opts.threads = workers();
    auto sc = sinusoidal_scenario();
    const auto full = run_estimation_study(sc, opts);
    sc.missing = 10;
    opts.methods = {Method::Vcergm};
    const auto gappy = run_estimation_study(sc, opts);
    const double vc = full.iae_summary(Method::Vcergm, "edges").mean;
    const double cs = full.iae_summary(Method::CrossSectional, "edges").mean;
    const double vc_missing = gappy.iae_summary(Method::Vcergm, "edges").mean;
    const double ratio = vc_missing / vc;
    const double secs = seconds_since(t0);
    return {vc < cs && ratio < 2.5,
            fmt("edges IAE: vcergm %.2f vs cross-sectional %.2f; with 10 missing %.2f, ratio %.2f (max 2.5); "
                "%.0fs (target 1200s)",
                vc, cs, vc_missing, ratio, secs)};
}

Outcome non_smooth() {
    EstimationOptions opts;
    opts.methods = {Method::Vcergm, Method::TwoStep};
    opts.threads = workers();
    const auto rep = run_estimation_study(non_smooth_scenario(), opts);
    double two = 0, vc = 0;
    for (const char* stat : {"edges", "reciprocity"}) {
        two += rep.iae_summary(Method::TwoStep, stat).mean;
        vc += rep.iae_summary(Method::Vcergm, stat).mean;
    }
    return {two <= vc, fmt("mean IAE summed over statistics: two-step %.2f, vcergm %.2f (need two-step <= vcergm)",
                           two, vc)};
}

Outcome timing() {
    TimingOptions opts;
    opts.horizons = {100};
    opts.replicates = 3;
    const auto rep = run_timing_study(opts);
    double vc = 0, cs = 0;
    for (const auto& r : rep.records) {
        if (r.method == "vcergm") vc += r.seconds;
        if (r.method == "cross-sectional") cs += r.seconds;
    }
    const double ratio = vc / cs;
    return {ratio < 1.0, fmt("K=100, 3 datasets: vcergm (GCV included) %.3fs, cross-sectional %.3fs, ratio %.2f (max 1.0)",
                             vc, cs, ratio)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome cli_determinism(const std::string& cli) {
    const auto dir = fs::temp_directory_path() / "vcergm_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto net = (dir / "net.csv").string();
    struct Command {
        std::string name;
        std::string args;
        std::vector<std::string> outputs;
    };
    const std::vector<Command> commands{
        {"simulate", "simulate --phi-curve sin --n 15 --times 12 --seed 9 --out " + net, {net}},
        {"stats", "stats --input " + net + " --directed --stats edges,reciprocity,ctriad --out " + (dir / "stats.csv").string(),
         {(dir / "stats.csv").string()}},
        {"fit",
         "fit --input " + net + " --directed --stats edges,reciprocity --out " + (dir / "fit.json").string() +
             " --curves " + (dir / "curves.csv").string(),
         {(dir / "fit.json").string(), (dir / "curves.csv").string()}},
        {"test", "test --input " + net + " --directed --stats edges,reciprocity --B 20 --seed 5 --threads 2 --out " +
                     (dir / "test.json").string(),
         {(dir / "test.json").string()}},
        {"benchmark-estimation",
         "benchmark --study estimation --n 12 --times 10 --missing 2 --replicates 2 --seed 3 --out " +
             (dir / "est.json").string(),
         {(dir / "est.json").string()}},
        {"benchmark-power",
         "benchmark --study power --n 10 --horizons 10 --amplitudes 0,0.3 --replicates 2 --B 10 --seed 3 --out " +
             (dir / "power.json").string(),
         {(dir / "power.json").string()}},
    };
    std::string detail;
    bool ok = true;
    for (const auto& c : commands) {
        std::vector<std::string> first;
        for (int run = 0; run < 2; ++run) {
            const std::string cmd = "\"" + cli + "\" " + c.args + " > " + (dir / "stdout.txt").string() + " 2>&1";
            if (std::system(cmd.c_str()) != 0) {
                ok = false;
                detail += c.name + ": command failed; ";
                break;
            }
            std::vector<std::string> contents;
            for (const auto& o : c.outputs) contents.push_back(slurp(o));
            if (run == 0) {
                first = contents;
                continue;
            }
            const bool same = first == contents;
            ok = ok && same;
            detail += c.name + (same ? " identical; " : " DIFFERS; ");
        }
    }
    detail += "benchmark --study timing is excluded (wall-clock measurements)";
    return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <vcergm-cli> [criterion ...]\n";
        return 2;
    }
    spdlog::set_level(spdlog::level::warn);
    const std::string cli = argv[1];
    std::set<int> selected;
    for (int i = 2; i < argc; ++i) selected.insert(std::atoi(argv[i]));

    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "closed-form edges MPLE", closed_form},
        {2, "penalized IRLS vs dense Newton oracle", solver_oracle},
        {3, "basis and penalty properties", basis_properties},
        {4, "Gibbs sampler vs exact enumeration", sampler_exactness},
        {5, "difference-statistic kernel equals marginal ERGM", difference_kernel},
        {6, "bootstrap test size and power", power_study},
        {7, "sinusoidal estimation accuracy and missing-data inflation", estimation_study},
        {8, "non-smooth scenario favours two-step", non_smooth},
        {9, "fit time versus cross-sectional fits", timing},
        {10, "CLI output determinism", [&] { return cli_determinism(cli); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " failing criteria" << std::endl;
    return failed ? 1 : 0;
}
