#include "swmf/random_graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>

#include "swmf/disjoint_set.hpp"
#include "swmf/errors.hpp"

namespace swmf {

void GraphSpec::validate() const
{
    if (m < 1) throw ParameterError("GraphSpec: m must be at least 1");
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("GraphSpec: p must lie in [0, 1]");
}

std::int64_t ComponentSizes::total() const
{
    return std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});
}

std::int64_t ComponentSizes::isolated() const
{
    return std::count(sizes.begin(), sizes.end(), std::int64_t{1});
}

long double ComponentSizes::sum_of_squares() const
{
    long double acc = 0;
    for (auto s : sizes) acc += static_cast<long double>(s) * static_cast<long double>(s);
    return acc;
}

ComponentSizes ComponentSizes::from_discovery_order(std::vector<std::int64_t> sizes)
{
    std::stable_sort(sizes.begin(), sizes.end(), std::greater<>());
    return ComponentSizes{std::move(sizes)};
}

// ---------------------------------------------------------------------------
// Exploration trace

ExplorationTrace ExplorationTrace::from_eta(std::int64_t m, const std::vector<std::int64_t>& eta_1_to_m)
{
    if (m < 1) throw ParameterError("ExplorationTrace: m must be at least 1");
    if (static_cast<std::int64_t>(eta_1_to_m.size()) != m)
        throw ParameterError("ExplorationTrace: need exactly m eta values");

    ExplorationTrace tr;
    tr.m = m;
    const auto len = static_cast<std::size_t>(m + 1);
    tr.eta.assign(len, 0);
    tr.active.assign(len, 0);
    tr.neutral.assign(len, 0);
    tr.y.assign(len, 0);
    tr.z.assign(len, 0);

    tr.active[0] = 1;
    tr.neutral[0] = m - 1;
    tr.y[0] = 1;
    std::int64_t completed = 0;  // #{1 <= j <= t-1 : A_j = 0}
    for (std::int64_t t = 1; t <= m; ++t) {
        const auto i = static_cast<std::size_t>(t);
        const std::int64_t eta = eta_1_to_m[i - 1];
        const bool restart = tr.active[i - 1] == 0;
        const std::int64_t available = tr.neutral[i - 1] - (restart ? 1 : 0);
        if (eta < 0 || eta > available)
            throw ParameterError("ExplorationTrace: eta_" + std::to_string(t) + " exceeds available neutral vertices");
        tr.eta[i] = eta;
        tr.neutral[i] = available - eta;
        tr.active[i] = restart ? eta : tr.active[i - 1] + eta - 1;
        tr.y[i] = tr.y[i - 1] + eta - 1;
        tr.z[i] = completed;
        if (tr.active[i] == 0) {
            tr.boundaries.push_back(t);
            ++completed;
        }
    }
    return tr;
}

std::vector<std::int64_t> ExplorationTrace::discovery_sizes() const
{
    std::vector<std::int64_t> out;
    out.reserve(boundaries.size());
    std::int64_t prev = 0;
    for (auto b : boundaries) {
        out.push_back(b - prev);
        prev = b;
    }
    return out;
}

ComponentSizes ExplorationTrace::component_sizes() const
{
    return ComponentSizes::from_discovery_order(discovery_sizes());
}

bool ExplorationTrace::verify() const
{
    const auto len = static_cast<std::size_t>(m + 1);
    if (eta.size() != len || active.size() != len || neutral.size() != len || y.size() != len || z.size() != len)
        return false;
    if (active[0] != 1 || neutral[0] != m - 1 || y[0] != 1) return false;

    std::int64_t running_min = y[0];
    std::int64_t completed = 0;
    std::size_t next_boundary = 0;
    for (std::size_t t = 1; t < len; ++t) {
        const auto ti = static_cast<std::int64_t>(t);
        if (neutral[t] != neutral[t - 1] - eta[t] - (active[t - 1] == 0 ? 1 : 0)) return false;
        if (neutral[t] != m - ti - active[t]) return false;
        if (y[t] != y[t - 1] + eta[t] - 1) return false;
        if (active[t] != y[t] - running_min + 1) return false;
        if (z[t] != completed) return false;
        if (y[t] != active[t] - z[t]) return false;
        const bool record = y[t] < running_min;
        if (record != (active[t] == 0)) return false;
        if (active[t] == 0) {
            if (next_boundary >= boundaries.size() || boundaries[next_boundary] != ti) return false;
            ++next_boundary;
            ++completed;
        }
        running_min = std::min(running_min, y[t]);
    }
    if (next_boundary != boundaries.size()) return false;
    const auto sizes = discovery_sizes();
    return std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0}) == m;
}

void ExplorationTrace::write_csv(std::ostream& out) const
{
    out << "t,eta,A,N,Y,Z\n";
    for (std::size_t t = 0; t < eta.size(); ++t)
        out << t << ',' << eta[t] << ',' << active[t] << ',' << neutral[t] << ',' << y[t] << ',' << z[t] << '\n';
}

long double ApproxTrace::max_bound_excess(const ExplorationTrace& trace) const
{
    long double worst = -std::numeric_limits<long double>::infinity();
    const long double pl = p;
    for (std::size_t t = 1; t < ytilde.size(); ++t) {
        const long double gap = std::fabs(static_cast<long double>(trace.y[t]) - ytilde[t]);
        const long double bound = pl * static_cast<long double>(t) * static_cast<long double>(trace.z[t]);
        worst = std::max(worst, gap - bound);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Sampling

EdgeList sample_edge_set(const GraphSpec& spec, RandomStream& stream)
{
    spec.validate();
    if (spec.m > kMaxMaterializedVertices)
        throw CapacityError("sample_edge_set: m above " + std::to_string(kMaxMaterializedVertices) +
                            "; use explore() for distributional sampling");
    EdgeList edges;
    if (spec.p == 0.0) return edges;
    // Geometric skipping over the lexicographic pair index keeps the cost
    // proportional to the number of retained edges.
    const std::int64_t m = spec.m;
    std::int64_t u = 1;
    std::int64_t v = 1;  // current pair is (u, v) with u < v; start before (1, 2)
    const double log_q = std::log1p(-spec.p);
    for (;;) {
        std::int64_t skip = 0;
        if (spec.p < 1.0) {
            const double r = stream.uniform();
            skip = static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
        }
        v += skip + 1;
        while (u < m && v > m) {
            const std::int64_t overflow = v - m;
            ++u;
            v = u + overflow;
        }
        if (u >= m) break;
        edges.push_back({u, v});
    }
    return edges;
}

namespace {

void check_edges(const EdgeList& edges, std::int64_t m)
{
    if (m < 1) throw ParameterError("graph: m must be at least 1");
    for (const auto& e : edges)
        if (e.u < 1 || e.u > m || e.v < 1 || e.v > m) throw ParameterError("graph: edge endpoint out of range");
}


}  // namespace

ComponentSizes components_of(const EdgeList& edges, std::int64_t m)
{
    check_edges(edges, m);
    DisjointSet dsu(m);
    for (const auto& e : edges) dsu.unite(e.u - 1, e.v - 1);
    // Ties ordered by smallest vertex label, which is the exploration's
    // discovery order under ascending vertex ordering.
    std::vector<std::int64_t> sizes;
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    for (std::int64_t v = 0; v < m; ++v) {
        const auto root = dsu.find(v);
        if (!seen[static_cast<std::size_t>(root)]) {
            seen[static_cast<std::size_t>(root)] = 1;
            sizes.push_back(dsu.size[static_cast<std::size_t>(root)]);
        }
    }
    return ComponentSizes::from_discovery_order(std::move(sizes));
}

ExplorationTrace explore(const GraphSpec& spec, RandomStream& stream)
{
    spec.validate();
    const BinomialSampler draw(spec.p);
    std::vector<std::int64_t> eta(static_cast<std::size_t>(spec.m));
    std::int64_t active = 1;
    std::int64_t neutral = spec.m - 1;
    for (std::int64_t t = 1; t <= spec.m; ++t) {
        const bool restart = active == 0;
        const std::int64_t available = neutral - (restart ? 1 : 0);
        const std::int64_t e = draw(stream, available);
        eta[static_cast<std::size_t>(t - 1)] = e;
        neutral = available - e;
        active = restart ? e : active + e - 1;
    }
    return ExplorationTrace::from_eta(spec.m, eta);
}

ExplorationTrace explore_on_graph(const EdgeList& edges, std::int64_t m)
{
    check_edges(edges, m);
    std::vector<std::vector<std::int64_t>> adjacency(static_cast<std::size_t>(m));
    for (const auto& e : edges) {
        if (e.u == e.v) continue;
        adjacency[static_cast<std::size_t>(e.u - 1)].push_back(e.v - 1);
        adjacency[static_cast<std::size_t>(e.v - 1)].push_back(e.u - 1);
    }
    enum : char { kNeutral, kActive, kExplored };
    std::vector<char> status(static_cast<std::size_t>(m), kNeutral);
    std::priority_queue<std::int64_t, std::vector<std::int64_t>, std::greater<>> active;
    status[0] = kActive;
    active.push(0);
    std::int64_t first_neutral = 1;

    std::vector<std::int64_t> eta(static_cast<std::size_t>(m));
    for (std::int64_t t = 1; t <= m; ++t) {
        std::int64_t w;
        if (!active.empty()) {
            w = active.top();
            active.pop();
        } else {
            while (status[static_cast<std::size_t>(first_neutral)] != kNeutral) ++first_neutral;
            w = first_neutral;
        }
        status[static_cast<std::size_t>(w)] = kExplored;
        std::int64_t newly_active = 0;
        for (auto nb : adjacency[static_cast<std::size_t>(w)]) {
            if (status[static_cast<std::size_t>(nb)] == kNeutral) {
                status[static_cast<std::size_t>(nb)] = kActive;
                active.push(nb);
                ++newly_active;
            }
        }
        eta[static_cast<std::size_t>(t - 1)] = newly_active;
    }
    return ExplorationTrace::from_eta(m, eta);
}

std::int64_t component_containing_time(const ExplorationTrace& trace, std::int64_t t)
{
    if (t < 1 || t > trace.m) throw ParameterError("component_containing_time: t outside [1, m]");
    const auto it = std::lower_bound(trace.boundaries.begin(), trace.boundaries.end(), t);
    if (it == trace.boundaries.end()) throw ParameterError("component_containing_time: trace has no closing boundary");
    const std::int64_t start = it == trace.boundaries.begin() ? 0 : *(it - 1);
    return *it - start;
}

ApproxTrace approximate(const ExplorationTrace& trace, double p)
{
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("approximate: p must lie in [0, 1]");
    const auto len = static_cast<std::size_t>(trace.m + 1);
    const long double pl = p;
    const long double q = 1.0L - pl;
    const long double m = static_cast<long double>(trace.m);

    ApproxTrace out;
    out.p = p;
    out.drift.assign(len, 0);
    out.delta.assign(len, 0);
    out.ydet.assign(len, 0);
    out.ytilde.assign(len, 0);
    out.ydet[0] = 1;
    out.ytilde[0] = 1;

    long double weighted = 0;  // sum_i (1-p)^{t-i} Delta_i
    long double q_pow = 1;     // (1-p)^t
    for (std::size_t t = 1; t < len; ++t) {
        const std::int64_t available = trace.neutral[t - 1] - (trace.active[t - 1] == 0 ? 1 : 0);
        out.drift[t] = pl * static_cast<long double>(available) - 1.0L;
        out.delta[t] = static_cast<long double>(trace.eta[t]) - 1.0L - out.drift[t];
        weighted = q * weighted + out.delta[t];
        q_pow *= q;
        // Center solving the same recursion as E[Y_t] with y_0 = Y_0 = 1.
        out.ydet[t] = m - static_cast<long double>(t) - (m - 1.0L) * q_pow;
        out.ytilde[t] = out.ydet[t] + weighted;
    }
    return out;
}

void sample_discovery_sizes(std::int64_t m, const BinomialSampler& sampler, RandomStream& stream,
                            std::vector<std::int64_t>& out)
{
    out.clear();
    if (m <= 0) return;
    std::int64_t active = 1;
    std::int64_t neutral = m - 1;
    std::int64_t start = 0;
    for (std::int64_t t = 1; t <= m; ++t) {
        if (active > 0) {
            const std::int64_t e = sampler(stream, neutral);
            neutral -= e;
            active += e - 1;
        } else {
            const std::int64_t e = sampler(stream, neutral - 1);
            neutral -= e + 1;
            active = e;
        }
        if (active == 0) {
            out.push_back(t - start);
            start = t;
        }
    }
}

ComponentSizes sample_component_sizes(const GraphSpec& spec, RandomStream& stream)
{
    spec.validate();
    std::vector<std::int64_t> sizes;
    sample_discovery_sizes(spec.m, BinomialSampler(spec.p), stream, sizes);
    return ComponentSizes::from_discovery_order(std::move(sizes));
}

ProbedSizes sample_sizes_with_probe(std::int64_t m, const BinomialSampler& sampler, std::int64_t probe_time,
                                    RandomStream& stream)
{
    if (probe_time < 1 || probe_time > m) throw ParameterError("sample_sizes_with_probe: probe time outside [1, m]");
    ProbedSizes out;
    sample_discovery_sizes(m, sampler, stream, out.sizes);
    std::int64_t end = 0;
    for (std::size_t j = 0; j < out.sizes.size(); ++j) {
        end += out.sizes[j];
        if (end >= probe_time) {
            out.probe_index = j;
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Walks

WalkTrace iid_walk(std::int64_t m, double p, const WalkOptions& options, RandomStream& stream)
{
    if (options.horizon < 1) throw ParameterError("iid_walk: horizon must be positive");
    if (m < 0) throw ParameterError("iid_walk: m must be nonnegative");
    const BinomialSampler draw(p);
    WalkTrace out;
    out.w.reserve(static_cast<std::size_t>(std::min<std::int64_t>(options.horizon, 1 << 20)) + 1);
    std::int64_t w = options.start;
    out.w.push_back(w);
    out.record_minima_count = 1;
    out.last_record_minimum = 0;
    std::int64_t running_min = w;
    for (std::int64_t t = 1; t <= options.horizon; ++t) {
        w += draw(stream, m) - 1;
        out.w.push_back(w);
        if (w < running_min) {
            running_min = w;
            ++out.record_minima_count;
            out.last_record_minimum = t;
        }
        if (w == 0 && !out.hitting_time) {
            out.hitting_time = t;
            if (options.stop_at_zero) return out;
        }
    }
    out.censored = !out.hitting_time.has_value();
    return out;
}

WalkSummary walk_summary(std::int64_t m, double p, const WalkOptions& options, RandomStream& stream)
{
    if (options.horizon < 1) throw ParameterError("walk_summary: horizon must be positive");
    if (m < 0) throw ParameterError("walk_summary: m must be nonnegative");
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("walk_summary: p must lie in [0, 1]");
    WalkSummary out;
    std::int64_t t = 0;
    std::int64_t w = options.start;
    std::int64_t running_min = w;
    out.record_minima_count = 1;
    if (w == 0) {
        out.hitting_time = 0;
        if (options.stop_at_zero) {
            out.final_value = 0;
            return out;
        }
    }
    while (t < options.horizon) {
        const std::int64_t needed = w - running_min + 1;
        const std::int64_t k = std::min(needed, options.horizon - t);
        w += binomial(stream, m * k, p) - k;
        t += k;
        if (w < running_min) {
            running_min = w;
            ++out.record_minima_count;
            out.last_record_minimum = t;
            if (w == 0 && !out.hitting_time) {
                out.hitting_time = t;
                if (options.stop_at_zero) break;
            }
        }
    }
    out.final_time = t;
    out.final_value = w;
    out.censored = !out.hitting_time.has_value();
    return out;
}

long double binomial_log_pmf(std::int64_t trials, double p, std::int64_t k)
{
    if (k < 0 || k > trials) return -std::numeric_limits<long double>::infinity();
    if (p == 0.0) return k == 0 ? 0.0L : -std::numeric_limits<long double>::infinity();
    if (p == 1.0) return k == trials ? 0.0L : -std::numeric_limits<long double>::infinity();
    const long double n = static_cast<long double>(trials);
    const long double kk = static_cast<long double>(k);
    return std::lgamma(n + 1) - std::lgamma(kk + 1) - std::lgamma(n - kk + 1) + kk * std::log(static_cast<long double>(p)) +
           (n - kk) * std::log1p(-static_cast<long double>(p));
}

std::vector<double> hitting_time_exact(std::int64_t m, double p, std::int64_t t_max)
{
    if (t_max < 1) throw ParameterError("hitting_time_exact: t_max must be positive");
    if (m < 1) throw ParameterError("hitting_time_exact: m must be positive");
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("hitting_time_exact: p must lie in [0, 1]");
    if (m * t_max > kMaxHittingStates) throw CapacityError("hitting_time_exact: m * t_max exceeds state guard");

    std::vector<long double> step(static_cast<std::size_t>(m + 1));
    for (std::int64_t j = 0; j <= m; ++j) step[static_cast<std::size_t>(j)] = std::exp(binomial_log_pmf(m, p, j));

    // alive[w] = P(W_t = w, tau > t) for 1 <= w <= t_max.
    const auto cap = static_cast<std::size_t>(t_max);
    std::vector<long double> alive(cap + 1, 0), next(cap + 1, 0);
    alive[1] = 1;
    long double dropped = 0;
    long double absorbed_total = 0;
    std::vector<double> result(cap, 0.0);
    for (std::int64_t t = 1; t <= t_max; ++t) {
        std::fill(next.begin(), next.end(), 0.0L);
        const std::int64_t reachable = t_max - t;  // values still able to hit 0 by t_max
        long double absorbed = 0;
        for (std::size_t w = 1; w <= cap; ++w) {
            const long double mass = alive[w];
            if (mass == 0) continue;
            for (std::int64_t j = 0; j <= m; ++j) {
                const long double contrib = mass * step[static_cast<std::size_t>(j)];
                const std::int64_t nv = static_cast<std::int64_t>(w) + j - 1;
                if (nv == 0)
                    absorbed += contrib;
                else if (nv <= reachable)
                    next[static_cast<std::size_t>(nv)] += contrib;
                else
                    dropped += contrib;
            }
        }
        alive.swap(next);
        result[static_cast<std::size_t>(t - 1)] = static_cast<double>(absorbed);
        absorbed_total += absorbed;
    }
    long double remaining = 0;
    for (auto v : alive) remaining += v;
    if (std::fabs(absorbed_total + dropped + remaining - 1.0L) > 1e-12L)
        throw std::logic_error("hitting_time_exact: probability mass not conserved");
    return result;
}

std::vector<double> hitting_time_spitzer(std::int64_t m, double p, std::int64_t t_max)
{
    if (t_max < 1) throw ParameterError("hitting_time_spitzer: t_max must be positive");
    std::vector<double> out(static_cast<std::size_t>(t_max));
    for (std::int64_t t = 1; t <= t_max; ++t)
        out[static_cast<std::size_t>(t - 1)] =
            static_cast<double>(std::exp(binomial_log_pmf(m * t, p, t - 1)) / static_cast<long double>(t));
    return out;
}

}  // namespace swmf
