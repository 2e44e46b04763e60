#include "vcergm/cli.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <json.hpp>
#include <sstream>

#include "text.hpp"
#include "vcergm/errors.hpp"
#include "vcergm/inference.hpp"
#include "vcergm/mple.hpp"
#include "vcergm/sampler.hpp"
#include "vcergm/simbench.hpp"
#include "vcergm/version.hpp"

namespace vcergm::cli {

using nlohmann::json;
using ConfigMap = std::map<std::string, std::string>;

namespace {

// ---------------------------------------------------------------- helpers

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f) throw DataError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DataError("cannot move output into place at " + path);
    }
}

DynamicNetwork load_network(const std::string& path, bool directed) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file " + path);
    return read_edge_list(in, directed);
}

// Every option of the subcommand with its resolved value, keyed by long name.
ConfigMap resolved_config(const CLI::App& sub) {
    ConfigMap cfg;
    for (const CLI::Option* opt : sub.get_options()) {
        const auto& names = opt->get_lnames();
        if (names.empty() || names.front() == "help") continue;
        std::string value;
        if (opt->get_expected_max() == 0) {
            value = opt->count() > 0 && opt->as<bool>() ? "true" : "false";
        } else if (opt->count() > 0) {
            const auto& res = opt->results();
            for (std::size_t i = 0; i < res.size(); ++i) value += (i ? "," : "") + res[i];
        } else {
            value = opt->get_default_str();
        }
        cfg[names.front()] = value;
    }
    return cfg;
}

json provenance(std::string_view command, const ConfigMap& cfg, std::uint64_t seed) {
    json j;
    j["tool"] = "vcergm";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = cfg;
    j["seed"] = seed;
    return j;
}

std::string csv_preamble(std::string_view command, const ConfigMap& cfg, std::uint64_t seed) {
    std::ostringstream os;
    os << "# vcergm " << kVersion << "\n# command: " << command << "\n# seed: " << seed << "\n";
    for (const auto& [k, v] : cfg) os << "# config: " << k << " = " << v << "\n";
    return os.str();
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-")
        out << content;
    else
        write_atomic(path, content);
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string_view penalty_name(PenaltyKind k) { return k == PenaltyKind::Exact ? "exact" : "discrete"; }

// ------------------------------------------------------ shared model flags

struct ModelFlags {
    std::string input;
    bool directed = false;
    std::string stats = "edges";
    std::string basis_dim = "auto";
    int order = 4;
    std::string penalty = "discrete";
    std::string lambda = "auto";
    std::vector<double> lambda_grid;
    std::string gcv = "unweighted";
    std::uint64_t seed = 1;

    void add_data(CLI::App* sub) {
        sub->add_option("--input", input, "edge-list CSV (time,from,to,node_count)")->required();
        sub->add_flag("--directed", directed, "treat the edge list as directed");
        sub->add_option("--stats", stats, "comma-separated statistics: edges,reciprocity,ctriad,twostar,triangle");
    }
    void add_fit(CLI::App* sub) {
        sub->add_option("--basis-dim", basis_dim, "spline basis dimension q, or auto");
        sub->add_option("--spline-order", order, "spline order (4 = cubic)");
        sub->add_option("--penalty", penalty, "roughness penalty: discrete or exact")
            ->check(CLI::IsMember({"discrete", "exact"}));
        sub->add_option("--lambda", lambda, "smoothing parameter, or auto for GCV");
        sub->add_option("--lambda-grid", lambda_grid, "explicit GCV grid (comma-separated)")->delimiter(',');
        sub->add_option("--gcv", gcv, "GCV criterion: unweighted or weighted")
            ->check(CLI::IsMember({"unweighted", "weighted"}));
    }

    FitOptions fit_options(int threads) const {
        FitOptions o;
        if (basis_dim != "auto") {
            const auto q = text::parse_int(basis_dim);
            if (!q || *q < 1) throw UsageError("--basis-dim must be a positive integer or auto");
            o.basis.dim = static_cast<int>(*q);
        }
        o.basis.order = order;
        o.basis.penalty = penalty == "exact" ? PenaltyKind::Exact : PenaltyKind::Discrete;
        if (lambda != "auto") {
            const auto l = text::parse_double(lambda);
            if (!l || !(*l >= 0.0)) throw UsageError("--lambda must be a non-negative number or auto");
            o.lambda = *l;
        }
        o.lambda_grid = lambda_grid;
        o.gcv = gcv == "weighted" ? GcvKind::Weighted : GcvKind::Unweighted;
        o.threads = threads;
        return o;
    }
};

struct SamplerFlags {
    int sweeps = 200;
    int burn_in = 100;
    std::string init = "empty";

    void add(CLI::App* sub) {
        sub->add_option("--sweeps", sweeps, "Gibbs sweeps per network");
        sub->add_option("--burn-in", burn_in, "sweeps treated as burn-in");
        sub->add_option("--init", init, "initial state: empty or density")
            ->check(CLI::IsMember({"empty", "density"}));
    }
    SamplerConfig config(std::uint64_t seed) const {
        SamplerConfig c{sweeps, burn_in, seed, init == "density" ? SamplerInit::DensityMatched : SamplerInit::Empty};
        c.validate();
        return c;
    }
};

// ------------------------------------------------------------- commands

json fit_json(const FitResult& fit, const NullFit& null, const DynamicNetwork& data) {
    json j;
    j["statistics"] = fit.spec.names();
    j["directed"] = fit.directed;
    j["times"] = data.times();
    const auto& b = fit.basis;
    j["basis"] = {{"order", b.order()},
                  {"dim", b.dim()},
                  {"knots", b.knots()},
                  {"time_origin", b.scale().origin},
                  {"time_span", b.scale().span},
                  {"penalty", penalty_name(b.penalty_kind())}};
    j["lambda"] = fit.lambda;
    json path = json::array();
    for (auto [l, g] : fit.gcv_path) path.push_back({{"lambda", l}, {"gcv", g}});
    j["gcv_path"] = path;
    std::vector<double> values;
    const auto& phi = fit.phi.values();
    for (Eigen::Index r = 0; r < phi.rows(); ++r)
        for (Eigen::Index c = 0; c < phi.cols(); ++c) values.push_back(phi(r, c));
    j["phi"] = {{"rows", phi.rows()}, {"cols", phi.cols()}, {"values", values}};
    j["phi_null"] = to_vector(null.phi0);
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["pseudo_loglik"] = fit.pseudo_loglik;
    j["diagnostic"] = fit.diagnostic;
    return j;
}

struct CurveTable {
    StatisticSpec spec;
    std::vector<double> times;
    std::vector<Eigen::VectorXd> values;
};

CurveTable read_curve_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open curve file " + path);
    std::string line;
    bool header = false;
    std::vector<std::string> names;
    std::map<double, std::map<std::string, double>> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto s = text::trim(line);
        if (s.empty() || s.front() == '#') continue;
        const auto f = text::split(s, ',');
        if (!header) {
            if (f.size() != 3 || f[0] != "time" || f[1] != "statistic")
                throw DataError("curve file must start with the header time,statistic,phi_hat");
            header = true;
            continue;
        }
        const auto t = f.size() == 3 ? text::parse_double(f[0]) : std::nullopt;
        const auto v = f.size() == 3 ? text::parse_double(f[2]) : std::nullopt;
        if (!t || !v) throw DataError("malformed curve row at line " + std::to_string(lineno));
        const std::string name(f[1]);
        if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
        if (!rows[*t].emplace(name, *v).second)
            throw DataError("duplicate curve value at line " + std::to_string(lineno));
    }
    if (rows.empty()) throw DataError("curve file has no rows");
    std::vector<Statistic> stats;
    for (const auto& n : names) stats.push_back(parse_statistic(n));
    CurveTable table{StatisticSpec(stats), {}, {}};
    for (const auto& [t, m] : rows) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(names.size()));
        for (std::size_t k = 0; k < names.size(); ++k) {
            const auto it = m.find(names[k]);
            if (it == m.end())
                throw DataError("curve file lacks " + names[k] + " at time " + text::format_number(t));
            v[static_cast<Eigen::Index>(k)] = it->second;
        }
        table.times.push_back(t);
        table.values.push_back(v);
    }
    return table;
}

json scenario_json(const Scenario& s) {
    json curves = json::array();
    for (const auto& c : s.curves) {
        static const char* kinds[] = {"sinusoidal", "periodic", "quadratic", "constant", "non-smooth"};
        curves.push_back({{"kind", kinds[static_cast<int>(c.kind)]}, {"a", c.a}, {"b", c.b}, {"c", c.c}, {"d", c.d}});
    }
    return {{"name", s.name},   {"statistics", s.spec.names()}, {"curves", curves},
            {"n", s.n},         {"horizon", s.horizon},          {"directed", s.directed},
            {"missing", s.missing}, {"replicates", s.replicates}, {"seed", s.seed}};
}

json summary_json(const std::vector<Summary>& summary) {
    json arr = json::array();
    for (const auto& s : summary) arr.push_back({{"group", s.group}, {"mean", s.mean}, {"sd", s.sd}, {"count", s.count}});
    return arr;
}

Scenario scenario_by_name(const std::string& name) {
    if (name == "sinusoidal" || name == "sin") return sinusoidal_scenario();
    if (name == "quadratic" || name == "quad") return quadratic_scenario();
    if (name == "er" || name == "erdos-renyi") return erdos_renyi_scenario();
    if (name == "non-smooth" || name == "spiky") return non_smooth_scenario();
    throw UsageError("unknown scenario " + name);
}

void setup_logging(const std::string& level) {
    auto logger = spdlog::get("vcergm");
    if (!logger) {
        logger = spdlog::stderr_logger_mt("vcergm");
        logger->set_pattern("vcergm: %l: %v");
    }
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(level));
}

int fail(std::ostream& err, std::string_view kind, const std::string& what, int code) {
    err << "vcergm: error: kind=" << kind << " message=" << one_line(what) << '\n';
    return code;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty()) return rest;

    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto s = text::trim(line);
        if (s.empty() || s.front() == '#' || s.front() == ';') continue;
        const auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config line " + std::to_string(lineno) + " is not key = value");
        const std::string key(text::trim(s.substr(0, eq)));
        std::string value(text::trim(s.substr(eq + 1)));
        if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + " has an empty key");
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front())
            value = value.substr(1, value.size() - 2);
        if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
            std::string joined;
            for (auto part : text::split(std::string_view(value).substr(1, value.size() - 2), ','))
                joined += (joined.empty() ? "" : ",") + std::string(part);
            value = joined;
        }
        const std::string flag = "--" + key;
        const bool on_command_line = std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (!on_command_line) rest.push_back(flag + "=" + value);
    }
    return rest;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
    } catch (const UsageError& e) {
        return fail(err, "usage", e.what(), kUsage);
    }

    CLI::App app{"Varying-coefficient ERGMs for dynamic networks", "vcergm"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kVersion));
    int threads = 1;
    std::string log_level = "warn";
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--log-level", log_level, "error, warn, info or debug")
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));

    auto sub_defaults = [](CLI::App* sub) { sub->option_defaults()->always_capture_default(); };

    // fit
    ModelFlags fit_flags;
    std::string fit_out, fit_curves;
    std::vector<double> curve_times;
    auto* fit_cmd = app.add_subcommand("fit", "fit the varying-coefficient model");
    sub_defaults(fit_cmd);
    fit_flags.add_data(fit_cmd);
    fit_flags.add_fit(fit_cmd);
    fit_cmd->add_option("--seed", fit_flags.seed, "seed (echoed into outputs)");
    fit_cmd->add_option("--out", fit_out, "fit JSON path (default stdout)");
    fit_cmd->add_option("--curves", fit_curves, "CSV of the fitted curves");
    fit_cmd->add_option("--curve-times", curve_times, "times for --curves (default: observed times)")
        ->delimiter(',');

    // simulate
    std::string curve_kind = "sin", curve_file, sim_stats, sim_out;
    double amplitude = 0.3, p_edge = 0.85;
    int sim_n = 30, sim_times = 50;
    bool undirected = false;
    std::uint64_t sim_seed = 1;
    SamplerFlags sim_sampler;
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a dynamic network");
    sub_defaults(sim_cmd);
    sim_cmd->add_option("--phi-curve", curve_kind, "sin, quad, er, spiky, periodic or file")
        ->check(CLI::IsMember({"sin", "quad", "er", "spiky", "periodic", "file"}));
    sim_cmd->add_option("--phi-file", curve_file, "curve CSV (time,statistic,phi_hat) for --phi-curve file");
    sim_cmd->add_option("--amplitude", amplitude, "M for the periodic curve M sin(2 pi t / T)");
    sim_cmd->add_option("--p-edge", p_edge, "edge probability for the er curve");
    sim_cmd->add_option("--n", sim_n, "nodes per snapshot");
    sim_cmd->add_option("--times", sim_times, "number of snapshots K (times 1..K)");
    sim_cmd->add_option("--stats", sim_stats, "statistics; must match the curve");
    sim_cmd->add_flag("--undirected", undirected, "simulate undirected networks");
    sim_cmd->add_option("--seed", sim_seed, "random seed");
    sim_sampler.add(sim_cmd);
    sim_cmd->add_option("--out", sim_out, "edge-list CSV path (default stdout)");

    // test
    ModelFlags test_flags;
    SamplerFlags test_sampler;
    int replicates = 1000;
    double alpha = 0.05;
    std::string method = "bootstrap", test_out;
    bool reselect = false;
    auto* test_cmd = app.add_subcommand("test", "test for time-varying coefficients");
    sub_defaults(test_cmd);
    test_flags.add_data(test_cmd);
    test_flags.add_fit(test_cmd);
    test_cmd->add_option("--B", replicates, "bootstrap replicates");
    test_cmd->add_option("--alpha", alpha, "significance level");
    test_cmd->add_option("--method", method, "bootstrap or chisq")->check(CLI::IsMember({"bootstrap", "chisq"}));
    test_cmd->add_option("--seed", test_flags.seed, "random seed");
    test_cmd->add_flag("--reselect-lambda", reselect, "rerun GCV on every bootstrap replicate");
    test_sampler.add(test_cmd);
    test_cmd->add_option("--out", test_out, "test JSON path (default stdout)");

    // stats
    std::string stats_input, stats_list = "edges", stats_out;
    bool stats_directed = false;
    auto* stats_cmd = app.add_subcommand("stats", "standardized statistics of every snapshot");
    sub_defaults(stats_cmd);
    stats_cmd->add_option("--input", stats_input, "edge-list CSV")->required();
    stats_cmd->add_flag("--directed", stats_directed, "treat the edge list as directed");
    stats_cmd->add_option("--stats", stats_list, "comma-separated statistics");
    stats_cmd->add_option("--out", stats_out, "CSV path (default stdout)");

    // benchmark
    ModelFlags bench_flags;
    SamplerFlags bench_sampler;
    std::string study = "estimation", scenario_name = "sinusoidal", two_step_basis = "spline", bench_out;
    int bench_n = 30, bench_times = 50, bench_missing = 0, bench_reps = 20, bench_b = 200;
    double bench_alpha = 0.05;
    std::vector<double> amplitudes{0.0, 0.3};
    std::vector<int> horizons;
    std::vector<std::string> methods{"vcergm", "cross-sectional", "two-step"};
    auto* bench_cmd = app.add_subcommand("benchmark", "simulation studies");
    sub_defaults(bench_cmd);
    bench_cmd->add_option("--study", study, "estimation, power or timing")
        ->check(CLI::IsMember({"estimation", "power", "timing"}));
    bench_cmd->add_option("--scenario", scenario_name, "sinusoidal, quadratic, er or non-smooth");
    bench_cmd->add_option("--n", bench_n, "nodes per snapshot");
    bench_cmd->add_option("--times", bench_times, "snapshots per sequence (estimation)");
    bench_cmd->add_option("--missing", bench_missing, "interior snapshots deleted per replicate");
    bench_cmd->add_option("--replicates", bench_reps, "simulated sequences per setting");
    bench_cmd->add_option("--methods", methods, "vcergm, cross-sectional, two-step")->delimiter(',');
    bench_cmd->add_option("--two-step-basis", two_step_basis, "spline (knot at every time) or shared")
        ->check(CLI::IsMember({"spline", "shared"}));
    bench_cmd->add_option("--amplitudes", amplitudes, "power study amplitudes M")->delimiter(',');
    bench_cmd->add_option("--horizons", horizons, "K grid (power: 30; timing: 20,40,...,100)")->delimiter(',');
    bench_cmd->add_option("--B", bench_b, "bootstrap replicates (power)");
    bench_cmd->add_option("--alpha", bench_alpha, "significance level (power)");
    bench_cmd->add_flag("--reselect-lambda", reselect, "rerun GCV on every bootstrap replicate (power)");
    bench_cmd->add_option("--seed", bench_flags.seed, "random seed");
    bench_flags.add_fit(bench_cmd);
    bench_sampler.add(bench_cmd);
    bench_cmd->add_option("--out", bench_out, "report JSON path (default stdout)");

    // CLI11 expects argv without the program name, reversed.
    std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        return fail(err, "usage", std::string(e.what()) + " (run with --help for usage)", kUsage);
    }

    try {
        setup_logging(log_level);
        if (threads < 0) throw UsageError("--threads must be >= 0");

        if (*fit_cmd) {
            const auto cfg = resolved_config(*fit_cmd);
            const auto data = load_network(fit_flags.input, fit_flags.directed);
            const auto spec = StatisticSpec::parse(fit_flags.stats);
            const auto fit = fit_vcergm(data, spec, fit_flags.fit_options(threads));
            const auto null = fit_null_pooled(assemble_design(data, spec, fit.basis, threads));
            json j = provenance("fit", cfg, fit_flags.seed);
            j.update(fit_json(fit, null, data));
            if (!fit_curves.empty()) {
                std::ostringstream os;
                os << csv_preamble("fit", cfg, fit_flags.seed);
                write_curves(os, fit, curve_times.empty() ? data.times() : curve_times);
                write_atomic(fit_curves, os.str());
            }
            emit(fit_out, j.dump(2) + "\n", out);
        } else if (*sim_cmd) {
            const auto cfg = resolved_config(*sim_cmd);
            const auto sampler = sim_sampler.config(sim_seed);
            std::optional<DynamicNetwork> net;
            if (curve_kind == "file") {
                if (curve_file.empty()) throw UsageError("--phi-curve file needs --phi-file");
                const auto table = read_curve_table(curve_file);
                if (!sim_stats.empty() && !(StatisticSpec::parse(sim_stats) == table.spec))
                    throw UsageError("--stats does not match the statistics in the curve file");
                std::map<double, Eigen::VectorXd> lookup;
                for (std::size_t k = 0; k < table.times.size(); ++k) lookup.emplace(table.times[k], table.values[k]);
                const PhiCurve curve = [&](double t) { return lookup.at(t); };
                net.emplace(sample_sequence(curve, table.times, table.spec, sim_n, !undirected, sampler, threads));
            } else {
                Scenario sc = curve_kind == "periodic" ? power_scenario(amplitude, sim_times)
                              : curve_kind == "er"     ? erdos_renyi_scenario(p_edge)
                                                       : scenario_by_name(curve_kind);
                sc.horizon = sim_times;
                sc.n = sim_n;
                sc.directed = !undirected;
                sc.seed = sim_seed;
                sc.sampler = sampler;
                if (!sim_stats.empty() && !(StatisticSpec::parse(sim_stats) == sc.spec))
                    throw UsageError("the " + curve_kind + " curve uses statistics " +
                                     [&] {
                                         std::string s;
                                         for (const auto& n : sc.spec.names()) s += (s.empty() ? "" : ",") + n;
                                         return s;
                                     }());
                sc.spec.check_compatible(sc.directed);
                net.emplace(simulate_replicate(sc, 0, threads));
            }
            std::ostringstream os;
            os << csv_preamble("simulate", cfg, sim_seed);
            write_edge_list(os, *net);
            emit(sim_out, os.str(), out);
        } else if (*test_cmd) {
            const auto cfg = resolved_config(*test_cmd);
            const auto data = load_network(test_flags.input, test_flags.directed);
            const auto spec = StatisticSpec::parse(test_flags.stats);
            TestOptions o;
            o.replicates = replicates;
            o.alpha = alpha;
            o.seed = test_flags.seed;
            o.method = method == "chisq" ? TestMethod::ChiSquared : TestMethod::Bootstrap;
            o.fit = test_flags.fit_options(threads);
            o.sampler = test_sampler.config(test_flags.seed);
            o.threads = threads;
            o.reselect_lambda = reselect;
            const auto res = bootstrap_test(data, spec, o);
            json j = provenance("test", cfg, test_flags.seed);
            j["statistics"] = spec.names();
            j["method"] = method;
            j["t_observed"] = res.t_observed;
            j["p_value_bootstrap"] = res.p_value_bootstrap;
            j["critical_value"] = res.critical_value;
            j["p_value_chisq"] = res.p_value_chisq;
            j["df_chisq"] = res.df_chisq;
            j["B"] = res.replicates;
            j["retained"] = res.bootstrap_stats.size();
            j["dropped_replicates"] = res.dropped_replicates;
            j["alpha"] = res.alpha;
            j["reject"] = res.reject;
            j["lambda"] = res.lambda;
            j["phi_null"] = to_vector(res.phi_h0);
            j["phi_h1"] = {{"rows", res.phi_h1.p()}, {"cols", res.phi_h1.q()}, {"values", [&] {
                               std::vector<double> v;
                               const auto& m = res.phi_h1.values();
                               for (Eigen::Index r = 0; r < m.rows(); ++r)
                                   for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
                               return v;
                           }()}};
            j["bootstrap_stats"] = res.bootstrap_stats;
            emit(test_out, j.dump(2) + "\n", out);
        } else if (*stats_cmd) {
            const auto cfg = resolved_config(*stats_cmd);
            const auto data = load_network(stats_input, stats_directed);
            const auto spec = StatisticSpec::parse(stats_list);
            spec.check_compatible(data.directed());
            std::ostringstream os;
            if (!stats_out.empty()) os << csv_preamble("stats", cfg, 0);
            os << "time";
            for (const auto& n : spec.names()) os << ',' << n;
            os << '\n';
            for (const auto& snap : data.snapshots()) {
                const auto h = compute_statistics(snap.graph, spec);
                os << text::format_number(snap.time);
                for (Eigen::Index k = 0; k < h.size(); ++k) os << ',' << text::format_number(h[k]);
                os << '\n';
            }
            emit(stats_out, os.str(), out);
        } else if (*bench_cmd) {
            const auto cfg = resolved_config(*bench_cmd);
            const auto fit_opts = bench_flags.fit_options(1);
            const auto sampler = bench_sampler.config(bench_flags.seed);
            json j = provenance("benchmark", cfg, bench_flags.seed);
            j["study"] = study;
            if (study == "estimation") {
                Scenario sc = scenario_by_name(scenario_name);
                sc.n = bench_n;
                sc.horizon = bench_times;
                sc.missing = bench_missing;
                sc.replicates = bench_reps;
                sc.seed = bench_flags.seed;
                sc.sampler = sampler;
                EstimationOptions eo;
                eo.methods.clear();
                for (const auto& m : methods) {
                    if (m == "vcergm") eo.methods.push_back(Method::Vcergm);
                    else if (m == "cross-sectional") eo.methods.push_back(Method::CrossSectional);
                    else if (m == "two-step") eo.methods.push_back(Method::TwoStep);
                    else throw UsageError("unknown method " + m);
                }
                eo.fit = fit_opts;
                eo.two_step_basis = two_step_basis == "shared" ? TwoStepBasis::Shared : TwoStepBasis::SmoothingSpline;
                eo.threads = threads;
                const auto rep = run_estimation_study(sc, eo);
                j["scenario"] = scenario_json(sc);
                j["summary"] = summary_json(rep.summary);
                json recs = json::array();
                for (const auto& r : rep.records)
                    recs.push_back({{"replicate", r.replicate}, {"method", method_name(r.method)},
                                    {"statistic", r.statistic}, {"iae", r.iae}, {"points", r.points}});
                j["records"] = recs;
            } else if (study == "power") {
                PowerOptions po;
                po.amplitudes = amplitudes;
                po.horizons = horizons.empty() ? std::vector<int>{30} : horizons;
                po.n = bench_n;
                po.replicates = bench_reps;
                po.bootstrap = bench_b;
                po.alpha = bench_alpha;
                po.seed = bench_flags.seed;
                po.sampler = sampler;
                po.fit = fit_opts;
                po.threads = threads;
                po.reselect_lambda = reselect;
                const auto rep = run_power_study(po);
                json cells = json::array();
                for (const auto& c : rep.cells)
                    cells.push_back({{"amplitude", c.amplitude}, {"horizon", c.horizon},
                                     {"reject_bootstrap", c.reject_bootstrap}, {"reject_chisq", c.reject_chisq},
                                     {"replicates", c.replicates}});
                j["cells"] = cells;
                json recs = json::array();
                for (const auto& r : rep.records)
                    recs.push_back({{"amplitude", r.amplitude}, {"horizon", r.horizon}, {"replicate", r.replicate},
                                    {"t_observed", r.t_observed}, {"p_bootstrap", r.p_bootstrap},
                                    {"p_chisq", r.p_chisq}, {"reject_bootstrap", r.reject_bootstrap},
                                    {"reject_chisq", r.reject_chisq}, {"lambda", r.lambda}});
                j["records"] = recs;
            } else {
                TimingOptions to;
                if (!horizons.empty()) to.horizons = horizons;
                to.replicates = bench_reps;
                to.scenario = scenario_by_name(scenario_name);
                to.scenario.n = bench_n;
                to.scenario.seed = bench_flags.seed;
                to.scenario.sampler = sampler;
                to.fit = fit_opts;
                const auto rep = run_timing_study(to);
                j["scenario"] = scenario_json(to.scenario);
                j["summary"] = summary_json(rep.summary);
                json slopes;
                for (const char* m : {"vcergm", "vcergm-fixed-lambda", "cross-sectional"})
                    if (to.horizons.size() > 1) slopes[m] = rep.log_log_slope(m);
                j["log_log_slopes"] = slopes;
                json recs = json::array();
                for (const auto& r : rep.records)
                    recs.push_back({{"horizon", r.horizon}, {"replicate", r.replicate}, {"method", r.method},
                                    {"seconds", r.seconds}});
                j["records"] = recs;
            }
            emit(bench_out, j.dump(2) + "\n", out);
        }
        return kOk;
    } catch (const UsageError& e) {
        return fail(err, "usage", e.what(), kUsage);
    } catch (const DataError& e) {
        return fail(err, "data", e.what(), kData);
    } catch (const NumericalError& e) {
        return fail(err, "numerical", e.what(), kNumerical);
    } catch (const std::exception& e) {
        return fail(err, "numerical", e.what(), kNumerical);
    }
}

int run(int argc, char** argv) {
    return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace vcergm::cli
