#include "swmf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "swmf/analysis.hpp"
#include "swmf/coupling_lab.hpp"
#include "swmf/errors.hpp"
#include "swmf/magnetization.hpp"
#include "swmf/parallel.hpp"
#include "swmf/random_graph.hpp"
#include "swmf/sw_dynamics.hpp"

namespace swmf {

namespace {

Json base_record(const std::string& name, const Json& params, std::uint64_t seed)
{
    return Json{{"experiment", name},
                {"params", params},
                {"seed", seed},
                {"resolved_constants", Json::object()},
                {"statistics", Json::object()},
                {"confidence_intervals", Json::object()}};
}

Json interval(double lo, double hi) { return Json::array({lo, hi}); }

Json wilson(std::int64_t successes, std::int64_t trials)
{
    const Interval ci = wilson_interval(successes, trials);
    return interval(ci.lo, ci.hi);
}

std::int64_t get_int(const Json& p, const char* key) { return p.at(key).get<std::int64_t>(); }
double get_double(const Json& p, const char* key) { return p.at(key).get<double>(); }
std::string get_string(const Json& p, const char* key) { return p.at(key).get<std::string>(); }

double n_pow(std::int64_t n, double e) { return std::pow(static_cast<double>(n), e); }

// ---------------------------------------------------------------------------

ExperimentResult run_mix(const Json& p, std::uint64_t seed, unsigned threads)
{
    ExperimentResult out;
    out.json = base_record("mix", p, seed);
    const ChainParams params{get_int(p, "n"), get_double(p, "c"), parse_variant(get_string(p, "variant")), kDefaultDelta};
    MixingOptions opts;
    opts.trials = get_int(p, "trials");
    opts.threshold = get_double(p, "threshold");
    opts.horizon = get_int(p, "horizon");
    opts.seed = seed;
    opts.threads = threads;
    if (get_int(p, "start") >= 0) opts.start = get_int(p, "start");
    auto& stats = out.json["statistics"];
    std::ostringstream csv;
    try {
        const MixingResult r = mixing_time(params, opts);
        write_tv_curve_csv(csv, r.curve);
        stats["mixing_time"] = r.time;
        stats["interpolated_time"] = r.interpolated_time;
        stats["final_tv"] = r.curve.back().tv;
        stats["horizon_exceeded"] = false;
        out.json["resolved_constants"] = {{"tv_bias_allowance", r.allowance},
                                          {"heuristic_allowance", r.heuristic_allowance},
                                          {"band_half_width", r.band},
                                          {"level", opts.threshold + r.allowance}};
        out.json["confidence_intervals"]["mixing_time"] = Json::array({r.band_low, r.band_high});
    } catch (const HorizonError& e) {
        write_tv_curve_csv(csv, e.curve);
        stats["horizon_exceeded"] = true;
        stats["final_tv"] = e.curve.empty() ? 1.0 : e.curve.back().tv;
        stats["error"] = e.what();
        out.gated_failure = true;
    }
    out.csv["tv_curve"] = csv.str();
    return out;
}

ExperimentResult run_stationary(const Json& p, std::uint64_t seed, unsigned)
{
    ExperimentResult out;
    out.json = base_record("stationary", p, seed);
    const std::int64_t n = get_int(p, "n");
    const StationaryLaw law = exact_stationary(n, get_double(p, "c"));
    const double scale = n_pow(n, 0.75);
    std::vector<double> support, mass;
    double mean_abs = 0.0, second = 0.0, total = 0.0;
    for (std::size_t j = 0; j < law.folded().size(); ++j) {
        const double v = static_cast<double>(law.folded_value(j));
        support.push_back(v / scale);
        mass.push_back(law.folded()[j]);
        mean_abs += v * law.folded()[j];
        second += v * v * law.folded()[j];
        total += law.folded()[j];
    }
    auto& stats = out.json["statistics"];
    stats["mass_total"] = total;
    stats["mean_abs_scaled"] = mean_abs / scale;
    stats["second_moment_over_n"] = second / static_cast<double>(n);
    stats["ks_to_limit"] = ks_distance_discrete(support, mass, limit_cdf);
    out.json["resolved_constants"] = {{"beta", law.beta()}, {"limit_normalizer", limit_normalizer()}};
    std::ostringstream csv;
    csv.precision(12);
    csv << "s,mass\n";
    for (std::size_t k = 0; k < law.atoms().size(); ++k) csv << StationaryLaw::value_of(n, k) << ',' << law.atoms()[k] << '\n';
    out.csv["law"] = csv.str();
    return out;
}

ExperimentResult run_giant(const Json& p, std::uint64_t seed, unsigned threads)
{
    ExperimentResult out;
    out.json = base_record("giant", p, seed);
    const std::int64_t m = get_int(p, "m");
    const double eps = get_double(p, "epsilon");
    const std::int64_t trials = get_int(p, "trials");
    if (trials < 2) throw ParameterError("giant: needs at least 2 trials");
    if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("giant: epsilon must lie in (0, 1)");
    const GraphSpec spec{m, (1.0 + eps) / static_cast<double>(m)};
    spec.validate();
    std::vector<std::int64_t> largest(static_cast<std::size_t>(trials));
    parallel_for(trials, threads, [&](std::int64_t i) {
        RandomStream stream = make_stream(seed, static_cast<std::uint64_t>(i));
        largest[static_cast<std::size_t>(i)] = sample_component_sizes(spec, stream).largest();
    });
    double sum = 0.0, sq = 0.0;
    for (auto v : largest) {
        sum += static_cast<double>(v);
        sq += static_cast<double>(v) * static_cast<double>(v);
    }
    const double N = static_cast<double>(trials);
    const double mean = sum / N;
    const double se = std::sqrt(std::max(0.0, (sq - N * mean * mean) / (N - 1.0)) / N);
    const double prediction = 2.0 * eps * static_cast<double>(m) - 8.0 / 3.0 * eps * eps * static_cast<double>(m);
    auto& stats = out.json["statistics"];
    stats["mean_largest"] = mean;
    stats["standard_error"] = se;
    stats["prediction"] = prediction;
    stats["z_score"] = se > 0.0 ? (mean - prediction) / se : 0.0;
    const double center = 2.0 * eps * static_cast<double>(m);
    const double unit = std::sqrt(static_cast<double>(m) / eps);
    for (int A : {2, 3, 4}) {
        const auto count = std::count_if(largest.begin(), largest.end(), [&](std::int64_t v) {
            return std::abs(static_cast<double>(v) - center) > A * unit;
        });
        stats["deviation_freq_A" + std::to_string(A)] = static_cast<double>(count) / N;
        out.json["confidence_intervals"]["deviation_freq_A" + std::to_string(A)] = wilson(count, trials);
    }
    out.json["confidence_intervals"]["mean_largest"] = interval(mean - 1.96 * se, mean + 1.96 * se);
    out.json["resolved_constants"] = {{"giant_fraction_limit", giant_fraction(1.0 + eps).value}};
    std::ostringstream csv;
    csv << "trial,largest\n";
    for (std::size_t i = 0; i < largest.size(); ++i) csv << i << ',' << largest[i] << '\n';
    out.csv["largest"] = csv.str();
    return out;
}

ExperimentResult run_exploration(const Json& p, std::uint64_t seed, unsigned)
{
    ExperimentResult out;
    out.json = base_record("exploration", p, seed);
    const GraphSpec spec{get_int(p, "m"), get_double(p, "p")};
    RandomStream stream = make_stream(seed, 0);
    const ExplorationTrace trace = explore(spec, stream);
    const bool ok = trace.verify();
    const ApproxTrace approx = approximate(trace, spec.p);
    const double excess = static_cast<double>(approx.max_bound_excess(trace));
    const ComponentSizes sizes = trace.component_sizes();
    auto& stats = out.json["statistics"];
    stats["identities_hold"] = ok;
    stats["max_bound_excess"] = excess;
    stats["components"] = static_cast<std::int64_t>(sizes.sizes.size());
    stats["largest"] = sizes.largest();
    stats["isolated"] = sizes.isolated();
    out.gated_failure = !ok || excess > 1e-9;
    std::ostringstream csv;
    trace.write_csv(csv);
    out.csv["trace"] = csv.str();
    return out;
}

ExperimentResult run_couple(const Json& p, std::uint64_t seed, unsigned threads)
{
    ExperimentResult out;
    out.json = base_record("couple", p, seed);
    const std::string kind = get_string(p, "kind");
    const std::int64_t n = get_int(p, "n");
    const std::int64_t attempts = get_int(p, "attempts");
    if (attempts < 1) throw ParameterError("couple: attempts must be positive");
    CouplingOptions opts;
    opts.synchronized = p.at("synchronized").get<bool>();
    opts.reserve = get_int(p, "reserve");

    std::vector<char> met(static_cast<std::size_t>(attempts), 0);
    std::vector<double> overlap(met.size(), 0.0);
    std::vector<char> shortfall(met.size(), 0);
    auto& rc = out.json["resolved_constants"];
    if (kind == "supercritical") {
        const double c = get_double(p, "c") < 0.0 ? 3.0 : get_double(p, "c");
        if (!(c > 2.0)) throw ParameterError("couple: the supercritical coupling needs c > 2");
        const double g = equilibrium_magnetization(c).value;
        const double offset = get_double(p, "offset");
        const std::int64_t x = get_int(p, "x") >= 0 ? get_int(p, "x") : lattice_toward_zero(n, g * n + offset * std::sqrt(n));
        const std::int64_t y = get_int(p, "y") >= 0 ? get_int(p, "y") : x;
        rc["c"] = c;
        rc["x"] = x;
        rc["y"] = y;
        rc["gamma0"] = g;
        rc["reserve"] = opts.reserve > 0 ? opts.reserve : supercritical_reserve(n, c);
        parallel_for(attempts, threads, [&](std::int64_t i) {
            RandomStream stream = make_stream(seed, static_cast<std::uint64_t>(i));
            const auto o = couple_supercritical({x}, {y}, n, c, stream, opts);
            met[static_cast<std::size_t>(i)] = o.met;
            overlap[static_cast<std::size_t>(i)] = o.diagnostics.at("overlap");
            shortfall[static_cast<std::size_t>(i)] = o.diagnostics.at("shortfall") > 0.0;
        });
    } else if (kind == "two_dim") {
        const double c = get_double(p, "c") < 0.0 ? 1.0 : get_double(p, "c");
        const std::int64_t g1 = get_int(p, "g1") >= 0 ? get_int(p, "g1") : n / 2;
        const std::int64_t g2 = n - g1;
        const auto pick = [&](const char* key, std::int64_t fallback) {
            return get_int(p, key) >= 0 ? get_int(p, key) : fallback;
        };
        const TwoDimState a{pick("ya", g1 / 2), pick("za", (n / 2) - g1 / 2), g1, g2};
        const TwoDimState b{pick("yb", std::min(g1, (3 * n) / 10)), pick("zb", (n / 2) - std::min(g1, (3 * n) / 10)), g1, g2};
        a.validate();
        b.validate();
        rc["c"] = c;
        rc["g1"] = g1;
        rc["g2"] = g2;
        rc["ya"] = a.y;
        rc["za"] = a.z;
        rc["yb"] = b.y;
        rc["zb"] = b.z;
        parallel_for(attempts, threads, [&](std::int64_t i) {
            RandomStream stream = make_stream(seed, static_cast<std::uint64_t>(i));
            const auto o = couple_two_dim(a, b, c, stream, opts);
            met[static_cast<std::size_t>(i)] = o.met;
            overlap[static_cast<std::size_t>(i)] = o.diagnostics.at("overlap_g1") * o.diagnostics.at("overlap_g2");
            shortfall[static_cast<std::size_t>(i)] = o.diagnostics.at("shortfall") > 0.0;
        });
    } else {
        throw ParameterError("couple: kind must be supercritical or two_dim");
    }
    const auto successes = std::count(met.begin(), met.end(), 1);
    auto& stats = out.json["statistics"];
    stats["success_frequency"] = static_cast<double>(successes) / static_cast<double>(attempts);
    stats["mean_overlap"] = std::accumulate(overlap.begin(), overlap.end(), 0.0) / static_cast<double>(attempts);
    stats["shortfalls"] = std::count(shortfall.begin(), shortfall.end(), 1);
    out.json["confidence_intervals"]["success_frequency"] = wilson(successes, attempts);
    return out;
}

ExperimentResult run_crossing(const Json& p, std::uint64_t seed, unsigned threads)
{
    ExperimentResult out;
    out.json = base_record("crossing", p, seed);
    CrossingOptions opts;
    opts.n = get_int(p, "n");
    opts.c = get_double(p, "c");
    opts.x0 = get_int(p, "x0") >= 0 ? get_int(p, "x0") : opts.n;
    opts.horizon_factor = get_double(p, "K");
    opts.trials = get_int(p, "trials");
    opts.seed = seed;
    opts.threads = threads;
    if (get_int(p, "y0") >= 0) opts.y0 = get_int(p, "y0");
    const StationaryLaw law = exact_stationary(opts.n, opts.c);
    const auto records = crossing_experiment(law, opts);
    const double window = get_double(p, "window"), gap = get_double(p, "gap");
    const CrossingSummary s = summarize_crossings(records, opts.n, opts.horizon_factor, window, gap);
    auto& stats = out.json["statistics"];
    stats["event_frequency"] = s.event_frequency;
    stats["censored"] = s.censored;
    stats["median_scaled_gap"] = s.median_scaled_gap;
    stats["mean_tau"] = s.mean_tau;
    out.json["confidence_intervals"]["event_frequency"] = wilson(s.event_count, s.trials);
    out.json["resolved_constants"] = {{"horizon", crossing_horizon(opts.n, opts.horizon_factor)},
                                      {"K", opts.horizon_factor},
                                      {"A", window},
                                      {"h", gap},
                                      {"delta", s.event_frequency}};
    std::ostringstream csv;
    csv << "x0,y0,tau,x_before,y_before,gap_before,censored\n";
    for (const auto& r : records)
        csv << r.x0 << ',' << r.y0 << ',' << r.tau << ',' << r.x_before << ',' << r.y_before << ',' << r.gap_before << ','
            << (r.censored ? 1 : 0) << '\n';
    out.csv["records"] = csv.str();
    return out;
}

ExperimentResult run_hitting(const Json& p, std::uint64_t seed, unsigned threads)
{
    ExperimentResult out;
    out.json = base_record("hitting", p, seed);
    HittingConfig cfg;
    cfg.kind = parse_hitting_kind(get_string(p, "kind"));
    cfg.n = get_int(p, "n");
    cfg.c = get_double(p, "c");
    cfg.trials = get_int(p, "trials");
    cfg.seed = seed;
    cfg.threads = threads;
    if (get_int(p, "start") >= 0) cfg.start = get_int(p, "start");
    cfg.a = get_double(p, "a");
    cfg.b = get_double(p, "b");
    cfg.A = get_double(p, "A");
    cfg.K = get_double(p, "K");
    cfg.b1 = get_double(p, "b1");
    cfg.b2 = get_double(p, "b2");
    cfg.delta = get_double(p, "delta");
    cfg.h = get_double(p, "h");
    cfg.k = get_int(p, "k");
    cfg.k_max = get_int(p, "k_max");
    cfg.floor = get_double(p, "floor");
    cfg.cap = get_double(p, "cap");
    const HittingSummary s = hitting_experiment(cfg);
    auto& stats = out.json["statistics"];
    stats["event"] = s.event;
    stats["frequency"] = s.frequency;
    stats["standard_error"] = s.standard_error;
    stats["successes"] = s.successes;
    stats["bound"] = s.bound;
    stats["pass"] = s.pass;
    for (const auto& [k, v] : s.extra) stats[k] = v;
    out.json["confidence_intervals"]["frequency"] = interval(s.ci.lo, s.ci.hi);
    out.json["resolved_constants"] = {{"start", s.start}, {"steps", s.steps}, {"constant", s.resolved_constant}};
    out.gated_failure = !s.pass;
    return out;
}

ExperimentResult run_tree_mix(const Json& p, std::uint64_t seed, unsigned threads)
{
    ExperimentResult out;
    out.json = base_record("tree-mix", p, seed);
    const std::int64_t n = get_int(p, "n");
    const double pp = get_double(p, "p");
    const int q = static_cast<int>(get_int(p, "q"));
    const std::string shape = get_string(p, "tree");
    const std::int64_t trials = get_int(p, "trials");
    const std::int64_t tracked = get_int(p, "tracked");
    if (trials < 1) throw ParameterError("tree-mix: trials must be positive");
    if (tracked < 1 || tracked > 16 || tracked > n - 1) throw ParameterError("tree-mix: tracked must lie in [1, min(16, n - 1)]");
    TreeSpec tree;
    if (shape == "path") {
        tree = path_tree(n, pp, q);
    } else if (shape == "random") {
        RandomStream ts = make_stream(seed, 0xfeedULL).split(1);
        tree = random_recursive_tree(n, pp, q, ts);
    } else {
        throw ParameterError("tree-mix: tree must be path or random");
    }
    const std::int64_t t_bound = tree_mix_bound(n, pp, q);
    std::vector<std::int64_t> edges;
    for (std::int64_t j = 0; j < tracked; ++j) edges.push_back(j * (n - 1) / tracked);

    const std::size_t atoms = std::size_t{1} << tracked;
    std::vector<std::uint32_t> codes(static_cast<std::size_t>(trials));
    parallel_for(trials, threads, [&](std::int64_t i) {
        RandomStream stream = make_stream(seed, static_cast<std::uint64_t>(i));
        SpinConfig sigma = SpinConfig::constant(n, 1);
        EdgeConfig retained;
        for (std::int64_t t = 0; t < t_bound; ++t) {
            PottsStep step = potts_tree_sw_step(sigma, tree, stream);
            sigma = std::move(step.spins);
            retained = std::move(step.retained);
        }
        std::uint32_t code = 0;
        for (std::size_t j = 0; j < edges.size(); ++j)
            if (retained.bits[static_cast<std::size_t>(edges[j])]) code |= 1u << j;
        codes[static_cast<std::size_t>(i)] = code;
    });

    // Independent edges: stationary product law and the exact law at t_bound
    // started from all edges open (a monochromatic coloring).
    const double pi1 = edge_stationary_one(pp, q);
    const double lambda = pp * (1.0 - 1.0 / q);
    const double pt1 = pi1 + std::pow(lambda, static_cast<double>(t_bound)) * (1.0 - pi1);
    std::vector<double> stationary(atoms), at_t(atoms), empirical(atoms, 0.0);
    for (std::size_t code = 0; code < atoms; ++code) {
        double a = 1.0, b = 1.0;
        for (std::int64_t j = 0; j < tracked; ++j) {
            const bool one = (code >> j) & 1u;
            a *= one ? pi1 : 1.0 - pi1;
            b *= one ? pt1 : 1.0 - pt1;
        }
        stationary[code] = a;
        at_t[code] = b;
    }
    for (auto code : codes) empirical[code] += 1.0 / static_cast<double>(trials);
    double tv_emp = 0.0, tv_exact = 0.0;
    for (std::size_t code = 0; code < atoms; ++code) {
        tv_emp += std::abs(empirical[code] - stationary[code]);
        tv_exact += std::abs(at_t[code] - stationary[code]);
    }
    tv_emp *= 0.5;
    tv_exact *= 0.5;
    auto& stats = out.json["statistics"];
    stats["tv_empirical"] = tv_emp;
    stats["tv_exact"] = tv_exact;
    stats["pass"] = tv_emp <= 0.25;
    out.json["resolved_constants"] = {{"t_bound", t_bound},
                                      {"edge_stationary_one", pi1},
                                      {"tv_bias_allowance", expected_plugin_tv(stationary, trials)}};
    const double band = std::sqrt(std::log(40.0) / (2.0 * static_cast<double>(trials)));
    out.json["confidence_intervals"]["tv_empirical"] = interval(std::max(0.0, tv_emp - band), std::min(1.0, tv_emp + band));
    out.gated_failure = tv_emp > 0.25;
    return out;
}

ExperimentResult run_exact_check(const Json& p, std::uint64_t seed, unsigned)
{
    ExperimentResult out;
    out.json = base_record("exact-check", p, seed);
    const int n = static_cast<int>(get_int(p, "n"));
    const double pp = get_double(p, "p");
    const Matrix P = exact_transition_matrix(n, pp);
    const auto g = gibbs_vector(n, ising_beta(pp));
    const auto gp = left_multiply(g, P);
    double residual = 0.0, flip = 0.0, row = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) residual = std::max(residual, std::abs(gp[i] - g[i]));
    const std::size_t last = P.size() - 1;
    for (std::size_t i = 0; i < P.size(); ++i) {
        row = std::max(row, std::abs(std::accumulate(P[i].begin(), P[i].end(), 0.0) - 1.0));
        for (std::size_t j = 0; j < P.size(); ++j) flip = std::max(flip, std::abs(P[last - i][last - j] - P[i][j]));
    }
    auto& stats = out.json["statistics"];
    stats["stationarity_residual"] = residual;
    stats["flip_asymmetry"] = flip;
    stats["row_sum_error"] = row;
    stats["pass"] = residual <= 1e-10 && flip <= 1e-12 && row <= 1e-12;
    out.json["resolved_constants"] = {{"beta", ising_beta(pp)}, {"states", static_cast<std::int64_t>(P.size())}};
    out.gated_failure = !stats["pass"].get<bool>();
    std::ostringstream csv;
    write_matrix_csv(csv, P);
    out.csv["matrix"] = csv.str();
    return out;
}

ExperimentResult run_moments(const Json& p, std::uint64_t seed, unsigned threads)
{
    ExperimentResult out;
    out.json = base_record("moments", p, seed);
    const MomentReport report = moment_battery(get_int(p, "m"), get_double(p, "epsilon"), get_int(p, "trials"), seed, threads);
    auto& stats = out.json["statistics"];
    stats["records"] = report.records;
    stats["all_pass"] = report.all_pass();
    for (const auto& r : report.records) {
        if (r.skipped) continue;
        out.json["confidence_intervals"][r.name] = interval(r.prediction - r.tolerance, r.prediction + r.tolerance);
    }
    out.gated_failure = !report.all_pass();
    return out;
}

ExperimentResult run_fixed_points(const Json& p, std::uint64_t seed, unsigned)
{
    ExperimentResult out;
    out.json = base_record("fixed-points", p, seed);
    std::vector<double> cs;
    std::stringstream ss(get_string(p, "c_values"));
    for (std::string tok; std::getline(ss, tok, ',');) {
        if (tok.empty()) throw ParameterError("fixed-points: empty entry in c_values");
        try {
            cs.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ParameterError("fixed-points: cannot parse '" + tok + "'");
        }
    }
    if (cs.empty()) throw ParameterError("fixed-points: c_values is empty");
    std::ostringstream csv;
    csv.precision(12);
    csv << "c,giant_fraction,gamma0,gamma0_residual\n";
    Json rows = Json::array();
    for (double c : cs) {
        const FixedPointResult beta = giant_fraction(c);
        Json row{{"c", c}, {"giant_fraction", beta.value}};
        csv << c << ',' << beta.value << ',';
        if (c > 2.0) {
            const FixedPointResult g = equilibrium_magnetization(c);
            row["gamma0"] = g.value;
            row["gamma0_residual"] = g.residual;
            csv << g.value << ',' << g.residual << '\n';
        } else {
            csv << ",\n";
        }
        rows.push_back(row);
    }
    out.json["statistics"]["rows"] = rows;
    out.csv["fixed_points"] = csv.str();
    return out;
}

std::vector<ExperimentSpec> build_specs()
{
    std::vector<ExperimentSpec> s;
    s.push_back({"mix",
                 "TV mixing time of the magnetization chain from X_0 = n",
                 {{"n", 1024, "vertex count"},
                  {"c", 2.0, "percolation strength, p = c/n"},
                  {"variant", "standard", "standard or modified_largest"},
                  {"trials", 20000, "ensemble size"},
                  {"threshold", 0.25, "TV threshold"},
                  {"horizon", 500, "maximum number of steps"},
                  {"start", -1, "start state (-1 for n)"}},
                 run_mix});
    s.push_back({"stationary",
                 "exact stationary magnetization law and its distance to the x^4 limit",
                 {{"n", 4096, "vertex count"}, {"c", 2.0, "percolation strength"}},
                 run_stationary});
    s.push_back({"giant",
                 "largest component of G(m, (1+eps)/m)",
                 {{"m", 100000, "vertex count"}, {"epsilon", 0.05, "supercritical offset"}, {"trials", 500, "sampled graphs"}},
                 run_giant});
    s.push_back({"exploration",
                 "one exploration trace with identity and approximation checks",
                 {{"m", 1000, "vertex count"}, {"p", 0.002, "edge probability"}},
                 run_exploration});
    s.push_back({"couple",
                 "one-step couplings (supercritical or two_dim)",
                 {{"kind", "supercritical", "supercritical or two_dim"},
                  {"n", 10000, "vertex count"},
                  {"c", -1.0, "percolation strength (-1: 3 for supercritical, 1 for two_dim)"},
                  {"attempts", 10000, "independent coupling attempts"},
                  {"x", -1, "supercritical: first state (-1: gamma0 n + offset sqrt n)"},
                  {"y", -1, "supercritical: second state (-1: same as x)"},
                  {"offset", 2.0, "supercritical: default start offset in units of sqrt n"},
                  {"g1", -1, "two_dim: size of G1 (-1: n/2)"},
                  {"ya", -1, "two_dim: positives of chain a in G1"},
                  {"za", -1, "two_dim: positives of chain a in G2"},
                  {"yb", -1, "two_dim: positives of chain b in G1"},
                  {"zb", -1, "two_dim: positives of chain b in G2"},
                  {"synchronized", false, "feed both chains the same randomness"},
                  {"reserve", 0, "unsigned isolated vertices (0: ceil(n / (3 e^c)))"}},
                 run_couple});
    s.push_back({"crossing",
                 "first sign change of X_t - Y_t for independent modified chains",
                 {{"n", 4096, "vertex count"},
                  {"c", 2.0, "percolation strength"},
                  {"x0", -1, "start of X (-1 for n)"},
                  {"y0", -1, "fixed start of Y (-1: draw |S| from the stationary law)"},
                  {"K", 20.0, "horizon K n^{1/4}"},
                  {"trials", 1000, "trials"},
                  {"window", 10.0, "state window [n^{3/4}/A, A n^{3/4}]"},
                  {"gap", 10.0, "overshoot bound h n^{5/8}"}},
                 run_crossing});
    s.push_back({"hitting",
                 "hitting and window experiments at criticality",
                 {{"kind", "tau_a", "tau_a, pushdown, pushup, window_stay or local_clt"},
                  {"n", 4096, "vertex count"},
                  {"c", 2.0, "percolation strength"},
                  {"trials", 10000, "trials"},
                  {"start", -1, "start state (-1: kind default)"},
                  {"a", 1.0, "level a n^{3/4}"},
                  {"b", 24.0, "time b n^{1/4} (tau_a)"},
                  {"A", 10.0, "window I = [-A n^{2/3}, A n^{2/3}]"},
                  {"K", 4.0, "time K n^{1/4} (pushdown, pushup)"},
                  {"b1", 1.0, "window_stay lower start bound"},
                  {"b2", 2.0, "window_stay upper start bound"},
                  {"delta", 0.2, "window_stay time delta n^{1/4}"},
                  {"h", 0.5, "local_clt target radius h n^{5/8}"},
                  {"k", 0, "local_clt steps (0: pilot run)"},
                  {"k_max", 4, "local_clt pilot range"},
                  {"floor", 0.01, "local_clt floor"},
                  {"cap", 10.0, "window_stay cap on the resolved constant"}},
                 run_hitting});
    s.push_back({"tree-mix",
                 "edge law of the tree Potts chain at the mixing bound",
                 {{"n", 1024, "vertex count"},
                  {"p", 0.5, "edge probability"},
                  {"q", 2, "colors"},
                  {"tree", "path", "path or random"},
                  {"trials", 20000, "trials"},
                  {"tracked", 8, "edges tracked jointly"}},
                 run_tree_mix});
    s.push_back({"exact-check",
                 "stationarity of the Gibbs vector under the exact SW matrix",
                 {{"n", 3, "vertex count (at most 5)"}, {"p", 0.4, "edge probability"}},
                 run_exact_check});
    s.push_back({"moments",
                 "component-size moment battery",
                 {{"m", 10000, "vertex count"}, {"epsilon", 0.1, "supercritical offset"}, {"trials", 500, "sampled graphs"}},
                 run_moments});
    s.push_back({"fixed-points",
                 "giant fraction and equilibrium magnetization over a list of c",
                 {{"c_values", "2.1,3,5,10", "comma-separated list of c"}},
                 run_fixed_points});
    return s;
}

Json parse_flag(const ParamSpec& spec, const std::string& raw)
{
    const auto fail = [&] {
        return ParameterError("parameter --" + spec.name + ": cannot parse '" + raw + "' as " + spec.default_value.type_name());
    };
    try {
        std::size_t used = 0;
        if (spec.default_value.is_number_integer()) {
            const long long v = std::stoll(raw, &used);
            if (used != raw.size()) throw fail();
            return v;
        }
        if (spec.default_value.is_number()) {
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw fail();
            return v;
        }
    } catch (const std::logic_error&) {
        throw fail();
    }
    if (spec.default_value.is_boolean()) {
        if (raw == "true" || raw == "1") return true;
        if (raw == "false" || raw == "0") return false;
        throw fail();
    }
    return raw;
}

bool same_kind(const Json& def, const Json& v)
{
    if (def.is_number_integer()) return v.is_number_integer();
    if (def.is_number()) return v.is_number();
    if (def.is_boolean()) return v.is_boolean();
    return v.is_string();
}

std::string scalar_text(const Json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_float()) {
        std::ostringstream os;
        os.precision(10);
        os << v.get<double>();
        return os.str();
    }
    return v.dump();
}

// "a,b,c" or "a,b,...,z"; the ellipsis continues the geometric progression a,b
// when b/a is an integer above one, otherwise the arithmetic one.
std::vector<std::string> expand_grid(const std::string& key, const std::string& raw)
{
    std::vector<std::string> toks;
    std::stringstream ss(raw + ",");
    for (std::string tok; std::getline(ss, tok, ',');) {
        if (tok.empty()) throw ParameterError("sweep: empty grid value for " + key);
        toks.push_back(tok);
    }
    const auto dots = std::find(toks.begin(), toks.end(), "...");
    if (dots == toks.end()) return toks;
    if (toks.size() != 4 || dots != toks.begin() + 2)
        throw ParameterError("sweep: an ellipsis grid must read a,b,...,z for " + key);
    double a = 0.0, b = 0.0, z = 0.0;
    try {
        a = std::stod(toks[0]);
        b = std::stod(toks[1]);
        z = std::stod(toks[3]);
    } catch (const std::logic_error&) {
        throw ParameterError("sweep: non-numeric ellipsis grid for " + key);
    }
    const bool integral = toks[0].find_first_of(".eE") == std::string::npos && toks[1].find_first_of(".eE") == std::string::npos;
    const double ratio = b / a;
    const bool geometric = a > 0.0 && ratio > 1.0 && std::abs(ratio - std::round(ratio)) < 1e-12;
    if (!geometric && !(b > a)) throw ParameterError("sweep: ellipsis grid must increase for " + key);
    std::vector<std::string> out;
    for (double v = a; v <= z * (1.0 + 1e-12); v = geometric ? v * ratio : v + (b - a)) {
        if (out.size() > 10000) throw ParameterError("sweep: grid too long for " + key);
        std::ostringstream os;
        if (integral)
            os << static_cast<long long>(std::llround(v));
        else
            os << std::setprecision(12) << v;
        out.push_back(os.str());
    }
    if (out.empty() || std::abs(std::stod(out.back()) - z) > 1e-9 * std::max(1.0, std::abs(z)))
        throw ParameterError("sweep: ellipsis grid does not reach " + toks[3] + " for " + key);
    return out;
}

}  // namespace

const std::vector<ExperimentSpec>& experiment_specs()
{
    static const std::vector<ExperimentSpec> specs = build_specs();
    return specs;
}

const ExperimentSpec* find_experiment(const std::string& name)
{
    for (const auto& s : experiment_specs())
        if (s.name == name) return &s;
    return nullptr;
}

Json resolve_params(const ExperimentSpec& spec, const Json& config, const std::map<std::string, std::string>& flags)
{
    Json out = Json::object();
    for (const auto& ps : spec.params) out[ps.name] = ps.default_value;
    const auto lookup = [&](const std::string& key) -> const ParamSpec& {
        for (const auto& ps : spec.params)
            if (ps.name == key) return ps;
        throw ParameterError("unknown parameter '" + key + "' for experiment " + spec.name);
    };
    if (!config.is_null()) {
        if (!config.is_object()) throw ParameterError("config params must be a JSON object");
        for (const auto& [key, value] : config.items()) {
            const ParamSpec& ps = lookup(key);
            if (!same_kind(ps.default_value, value))
                throw ParameterError("config parameter '" + key + "' must be " + std::string(ps.default_value.type_name()));
            out[key] = value;
        }
    }
    for (const auto& [key, raw] : flags) out[key] = parse_flag(lookup(key), raw);
    return out;
}

std::string describe_params(const ExperimentSpec& spec)
{
    std::ostringstream os;
    os << spec.name << ": " << spec.help << "\n";
    for (const auto& ps : spec.params)
        os << "  --" << ps.name << " (" << ps.default_value.type_name() << ", default " << ps.default_value.dump() << ")  "
           << ps.help << "\n";
    return os.str();
}

ExperimentResult run_experiment(const std::string& name, const Json& params, std::uint64_t seed, unsigned threads)
{
    const ExperimentSpec* spec = find_experiment(name);
    if (!spec) throw ParameterError("unknown experiment '" + name + "'");
    return spec->run(params, seed, std::max(1u, threads));
}

SweepResult run_sweep(const std::string& experiment, const Json& config, const std::map<std::string, std::string>& flags,
                      std::uint64_t seed, unsigned threads)
{
    const ExperimentSpec* spec = find_experiment(experiment);
    if (!spec) throw ParameterError("unknown experiment '" + experiment + "'");
    SweepResult out;
    for (const auto& [key, raw] : flags) {
        if (raw.find(',') == std::string::npos) continue;
        if (!out.axis.empty()) throw ParameterError("sweep: exactly one grid axis is allowed (found " + out.axis + " and " + key + ")");
        out.axis = key;
        out.values = expand_grid(key, raw);
    }
    if (out.axis.empty()) throw ParameterError("sweep: no grid axis (give one parameter a comma-separated list)");
    if (out.values.empty()) throw ParameterError("sweep: empty grid");

    std::vector<std::string> columns;
    std::vector<std::map<std::string, std::string>> rows;
    Json json_rows = Json::array();
    for (const auto& value : out.values) {
        auto point_flags = flags;
        point_flags[out.axis] = value;
        const Json params = resolve_params(*spec, config, point_flags);
        const ExperimentResult r = spec->run(params, seed, std::max(1u, threads));
        out.gated_failure = out.gated_failure || r.gated_failure;
        std::map<std::string, std::string> row;
        for (const auto& [k, v] : r.json.at("statistics").items()) {
            if (!(v.is_number() || v.is_boolean())) continue;
            if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
            row[k] = scalar_text(v);
        }
        rows.push_back(row);
        json_rows.push_back(r.json);
    }
    std::ostringstream csv;
    csv << out.axis;
    for (const auto& c : columns) csv << ',' << c;
    csv << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        csv << out.values[i];
        for (const auto& c : columns) {
            const auto it = rows[i].find(c);
            csv << ',' << (it == rows[i].end() ? "" : it->second);
        }
        csv << '\n';
    }
    out.csv = csv.str();

    Json base = resolve_params(*spec, config, [&] {
        auto f = flags;
        f.erase(out.axis);
        return f;
    }());
    base.erase(out.axis);
    out.json = base_record("sweep", Json{{"experiment", experiment}, {"axis", out.axis}, {"values", out.values}, {"fixed", base}}, seed);
    out.json["statistics"]["points"] = json_rows;

    // Exponent and log-growth fits when sweeping n for mixing times.
    if (experiment == "mix" && out.axis == "n" && out.values.size() >= 3) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : json_rows) {
            const auto& st = r.at("statistics");
            if (!st.contains("interpolated_time")) {
                pts.clear();
                break;
            }
            pts.emplace_back(r.at("params").at("n").get<double>(), st.at("interpolated_time").get<double>());
        }
        if (pts.size() >= 3 && std::all_of(pts.begin(), pts.end(), [](const auto& q) { return q.second > 0.0; })) {
            const LinearFit pl = power_law_fit(pts);
            const LinearFit sl = semilog_fit(pts);
            out.json["resolved_constants"] = {{"power_law_slope", pl.slope},
                                              {"power_law_r2", pl.r2},
                                              {"semilog_slope", sl.slope},
                                              {"semilog_r2", sl.r2}};
        }
    }
    return out;
}

}  // namespace swmf
