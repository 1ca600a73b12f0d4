#include "swmf/sw_dynamics.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "swmf/disjoint_set.hpp"
#include "swmf/errors.hpp"
#include "swmf/random_graph.hpp"

namespace swmf {

std::int64_t SpinConfig::magnetization() const
{
    return std::accumulate(spins.begin(), spins.end(), std::int64_t{0});
}

void SpinConfig::validate_ising() const
{
    if (spins.empty()) throw ParameterError("SpinConfig: empty configuration");
    for (int s : spins)
        if (s != 1 && s != -1) throw ParameterError("SpinConfig: Ising spins must be -1 or +1");
}

void SpinConfig::validate_potts(int q) const
{
    if (spins.empty()) throw ParameterError("SpinConfig: empty configuration");
    for (int s : spins)
        if (s < 1 || s > q) throw ParameterError("SpinConfig: Potts colors must lie in 1..q");
}

SpinConfig SpinConfig::all_plus(std::int64_t n) { return constant(n, 1); }

SpinConfig SpinConfig::constant(std::int64_t n, int color)
{
    if (n < 1) throw ParameterError("SpinConfig: n must be positive");
    return SpinConfig{std::vector<int>(static_cast<std::size_t>(n), color)};
}

double ising_beta(double p)
{
    if (!(p >= 0.0 && p < 1.0)) throw ParameterError("ising_beta: p must lie in [0, 1)");
    return -0.5 * std::log1p(-p);
}

SpinConfig sw_step_complete(const SpinConfig& sigma, double c, RandomStream& stream)
{
    sigma.validate_ising();
    const std::int64_t n = sigma.n();
    if (c < 0) throw ParameterError("sw_step_complete: c must be nonnegative");
    const double p = edge_probability(c, n);
    if (p > 1.0) throw ParameterError("sw_step_complete: c/n exceeds 1");
    if (n > kMaxMaterializedVertices) throw CapacityError("sw_step_complete: configuration too large");

    std::vector<std::int64_t> cls[2];
    for (std::int64_t v = 0; v < n; ++v) cls[sigma.spins[static_cast<std::size_t>(v)] > 0 ? 0 : 1].push_back(v);

    DisjointSet dsu(n);
    for (const auto& members : cls) {
        if (members.empty()) continue;
        const auto k = static_cast<std::int64_t>(members.size());
        for (const auto& e : sample_edge_set({k, p}, stream))
            dsu.unite(members[static_cast<std::size_t>(e.u - 1)], members[static_cast<std::size_t>(e.v - 1)]);
    }

    std::vector<int> sign(static_cast<std::size_t>(n), 0);
    SpinConfig out{std::vector<int>(static_cast<std::size_t>(n))};
    for (std::int64_t v = 0; v < n; ++v) {
        auto& s = sign[static_cast<std::size_t>(dsu.find(v))];
        if (s == 0) s = rademacher(stream);
        out.spins[static_cast<std::size_t>(v)] = s;
    }
    return out;
}

std::size_t ising_state_index(const SpinConfig& sigma)
{
    std::size_t idx = 0;
    for (std::size_t v = 0; v < sigma.spins.size(); ++v)
        if (sigma.spins[v] > 0) idx |= std::size_t{1} << v;
    return idx;
}

SpinConfig ising_state(int n, std::size_t index)
{
    SpinConfig s{std::vector<int>(static_cast<std::size_t>(n))};
    for (int v = 0; v < n; ++v) s.spins[static_cast<std::size_t>(v)] = (index >> v) & 1 ? 1 : -1;
    return s;
}

namespace {

struct PairEdge {
    int u;
    int v;
};

}  // namespace

Matrix exact_transition_matrix(int n, double p)
{
    if (n < 1) throw ParameterError("exact_transition_matrix: n must be positive");
    if (n > kMaxExactVertices) throw CapacityError("exact_transition_matrix: n above " + std::to_string(kMaxExactVertices));
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("exact_transition_matrix: p must lie in [0, 1]");

    const std::size_t states = std::size_t{1} << n;
    Matrix out(states, std::vector<double>(states, 0.0));
    for (std::size_t from = 0; from < states; ++from) {
        // Edges whose endpoints share a spin are the only ones percolated.
        std::vector<PairEdge> mono;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (((from >> u) & 1) == ((from >> v) & 1)) mono.push_back({u, v});
        const std::size_t outcomes = std::size_t{1} << mono.size();
        for (std::size_t mask = 0; mask < outcomes; ++mask) {
            const int kept = __builtin_popcountll(mask);
            const double weight =
                std::pow(p, kept) * std::pow(1.0 - p, static_cast<int>(mono.size()) - kept);
            if (weight == 0.0) continue;
            DisjointSet dsu(n);
            for (std::size_t e = 0; e < mono.size(); ++e)
                if ((mask >> e) & 1) dsu.unite(mono[e].u, mono[e].v);
            // Each component takes one sign with probability 1/2: the reachable
            // targets are those constant on components, each with 2^-components.
            std::vector<int> roots;
            std::size_t component_mask[kMaxExactVertices] = {};
            for (int v = 0; v < n; ++v) {
                const auto r = static_cast<int>(dsu.find(v));
                std::size_t k = 0;
                while (k < roots.size() && roots[k] != r) ++k;
                if (k == roots.size()) roots.push_back(r);
                component_mask[k] |= std::size_t{1} << v;
            }
            const std::size_t assignments = std::size_t{1} << roots.size();
            const double share = weight / static_cast<double>(assignments);
            for (std::size_t a = 0; a < assignments; ++a) {
                std::size_t to = 0;
                for (std::size_t k = 0; k < roots.size(); ++k)
                    if ((a >> k) & 1) to |= component_mask[k];
                out[from][to] += share;
            }
        }
    }
    return out;
}

std::vector<double> gibbs_vector(int n, double beta)
{
    if (n < 1) throw ParameterError("gibbs_vector: n must be positive");
    if (n > kMaxExactVertices) throw CapacityError("gibbs_vector: n above " + std::to_string(kMaxExactVertices));
    if (!(beta >= 0.0)) throw ParameterError("gibbs_vector: beta must be nonnegative");
    const std::size_t states = std::size_t{1} << n;
    std::vector<double> w(states);
    // Work relative to the maximal energy n(n-1)/2 to avoid overflow.
    const double top = 0.5 * n * (n - 1);
    double total = 0;
    for (std::size_t s = 0; s < states; ++s) {
        const int plus = __builtin_popcountll(s);
        const int mag = 2 * plus - n;
        const double pair_sum = 0.5 * (static_cast<double>(mag) * mag - n);
        w[s] = std::exp(beta * (pair_sum - top));
        total += w[s];
    }
    for (auto& x : w) x /= total;
    return w;
}

std::vector<double> left_multiply(const std::vector<double>& v, const Matrix& m)
{
    if (m.size() != v.size()) throw ParameterError("left_multiply: dimension mismatch");
    std::vector<double> out(m.empty() ? 0 : m.front().size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[i] * m[i][j];
    return out;
}

void write_matrix_csv(std::ostream& out, const Matrix& m)
{
    const auto old = out.precision(17);
    for (const auto& row : m) {
        for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << row[j];
        out << '\n';
    }
    out.precision(old);
}

// ---------------------------------------------------------------------------
// Trees

void TreeSpec::validate() const
{
    if (parent.empty()) throw ParameterError("TreeSpec: tree needs at least one vertex");
    if (q < 2) throw ParameterError("TreeSpec: q must be at least 2");
    if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("TreeSpec: p must lie in [0, 1]");
    if (parent[0] != -1) throw ParameterError("TreeSpec: vertex 0 must be the root");
    const std::int64_t count = n();
    // Every vertex must reach the root without revisiting a vertex.
    std::vector<std::int8_t> state(static_cast<std::size_t>(count), 0);  // 0 new, 1 on path, 2 done
    state[0] = 2;
    for (std::int64_t v = 1; v < count; ++v) {
        std::vector<std::int64_t> path;
        std::int64_t u = v;
        while (state[static_cast<std::size_t>(u)] == 0) {
            state[static_cast<std::size_t>(u)] = 1;
            path.push_back(u);
            const auto par = parent[static_cast<std::size_t>(u)];
            if (par < 0 || par >= count || par == u) throw ParameterError("TreeSpec: invalid parent entry");
            u = par;
        }
        if (state[static_cast<std::size_t>(u)] == 1) throw ParameterError("TreeSpec: parent array contains a cycle");
        for (auto w : path) state[static_cast<std::size_t>(w)] = 2;
    }
}

TreeSpec path_tree(std::int64_t n, double p, int q)
{
    if (n < 1) throw ParameterError("path_tree: n must be positive");
    TreeSpec t;
    t.parent.resize(static_cast<std::size_t>(n));
    t.parent[0] = -1;
    for (std::int64_t v = 1; v < n; ++v) t.parent[static_cast<std::size_t>(v)] = v - 1;
    t.p = p;
    t.q = q;
    t.validate();
    return t;
}

TreeSpec random_recursive_tree(std::int64_t n, double p, int q, RandomStream& stream)
{
    if (n < 1) throw ParameterError("random_recursive_tree: n must be positive");
    TreeSpec t;
    t.parent.resize(static_cast<std::size_t>(n));
    t.parent[0] = -1;
    for (std::int64_t v = 1; v < n; ++v)
        t.parent[static_cast<std::size_t>(v)] = static_cast<std::int64_t>(stream.below(static_cast<std::uint64_t>(v)));
    t.p = p;
    t.q = q;
    t.validate();
    return t;
}

EdgeConfig potts_edge_step(const EdgeConfig& eta, const TreeSpec& tree, RandomStream& stream)
{
    if (static_cast<std::int64_t>(eta.bits.size()) != tree.edge_count())
        throw ParameterError("potts_edge_step: edge configuration length differs from tree edge count");
    const double up = tree.p / tree.q;
    EdgeConfig out;
    out.bits.resize(eta.bits.size());
    for (std::size_t e = 0; e < eta.bits.size(); ++e)
        out.bits[e] = bernoulli(stream, eta.bits[e] ? tree.p : up) ? 1 : 0;
    return out;
}

double edge_stationary_one(double p, int q)
{
    const double up = p / q;
    const double down = 1.0 - p;
    if (up + down == 0.0) throw ParameterError("edge_stationary_one: degenerate chain");
    return up / (up + down);
}

PottsStep potts_tree_sw_step(const SpinConfig& sigma, const TreeSpec& tree, RandomStream& stream)
{
    sigma.validate_potts(tree.q);
    if (sigma.n() != tree.n()) throw ParameterError("potts_tree_sw_step: configuration size differs from tree");
    const std::int64_t n = tree.n();
    PottsStep out;
    out.retained.bits.assign(static_cast<std::size_t>(tree.edge_count()), 0);
    DisjointSet dsu(n);
    for (std::int64_t v = 1; v < n; ++v) {
        const auto par = tree.parent[static_cast<std::size_t>(v)];
        if (sigma.spins[static_cast<std::size_t>(v)] != sigma.spins[static_cast<std::size_t>(par)]) continue;
        if (bernoulli(stream, tree.p)) {
            out.retained.bits[static_cast<std::size_t>(v - 1)] = 1;
            dsu.unite(v, par);
        }
    }
    std::vector<int> color(static_cast<std::size_t>(n), 0);
    out.spins.spins.resize(static_cast<std::size_t>(n));
    for (std::int64_t v = 0; v < n; ++v) {
        auto& c = color[static_cast<std::size_t>(dsu.find(v))];
        if (c == 0) c = 1 + static_cast<int>(stream.below(static_cast<std::uint64_t>(tree.q)));
        out.spins.spins[static_cast<std::size_t>(v)] = c;
    }
    return out;
}

std::int64_t tree_mix_bound(std::int64_t n, double p, int q)
{
    if (n < 1) throw ParameterError("tree_mix_bound: n must be positive");
    if (q < 2) throw ParameterError("tree_mix_bound: q must be at least 2");
    const double rate = p * (1.0 - 1.0 / q);
    if (!(rate > 0.0 && rate < 1.0)) throw ParameterError("tree_mix_bound: p (1 - 1/q) must lie in (0, 1)");
    const double t = (std::log(static_cast<double>(n)) + std::log(4.0)) / (-std::log(rate));
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(t)));
}

std::size_t potts_state_index(const SpinConfig& sigma, int q)
{
    std::size_t idx = 0;
    for (std::size_t v = sigma.spins.size(); v-- > 0;) idx = idx * static_cast<std::size_t>(q) + static_cast<std::size_t>(sigma.spins[v] - 1);
    return idx;
}

std::vector<double> potts_tree_measure(const TreeSpec& tree)
{
    tree.validate();
    if (tree.p >= 1.0) throw ParameterError("potts_tree_measure: p must be below 1");
    const std::int64_t n = tree.n();
    double states = 1;
    for (std::int64_t v = 0; v < n; ++v) states *= tree.q;
    if (states > static_cast<double>(kMaxExactPottsStates)) throw CapacityError("potts_tree_measure: too many states");
    const auto count = static_cast<std::size_t>(states);
    const double same = -std::log1p(-tree.p);  // log weight of a monochromatic edge
    std::vector<double> w(count);
    std::vector<int> color(static_cast<std::size_t>(n));
    double total = 0;
    for (std::size_t s = 0; s < count; ++s) {
        std::size_t rest = s;
        for (std::int64_t v = 0; v < n; ++v) {
            color[static_cast<std::size_t>(v)] = static_cast<int>(rest % static_cast<std::size_t>(tree.q));
            rest /= static_cast<std::size_t>(tree.q);
        }
        int agree = 0;
        for (std::int64_t v = 1; v < n; ++v)
            agree += color[static_cast<std::size_t>(v)] == color[static_cast<std::size_t>(tree.parent[static_cast<std::size_t>(v)])];
        w[s] = std::exp(same * agree);
        total += w[s];
    }
    for (auto& x : w) x /= total;
    return w;
}

}  // namespace swmf
