#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "swmf/stochastic.hpp"

namespace swmf {

/// G(m, p): the complete graph on m vertices with every edge kept
/// independently with probability p.
struct GraphSpec {
    std::int64_t m = 1;
    double p = 0.0;

    void validate() const;
};

/// Unordered edge between 1-based vertex labels.
struct Edge {
    std::int64_t u = 0;
    std::int64_t v = 0;
};

using EdgeList = std::vector<Edge>;

/// Component sizes of one realization, descending. Ties keep discovery order.
struct ComponentSizes {
    std::vector<std::int64_t> sizes;

    std::int64_t total() const;
    std::int64_t largest() const { return sizes.empty() ? 0 : sizes.front(); }
    std::int64_t isolated() const;
    long double sum_of_squares() const;

    /// Sorts descending; stable so equal sizes keep their input order.
    static ComponentSizes from_discovery_order(std::vector<std::int64_t> sizes);
};

/// Exploration process on m vertices. Every sequence is indexed by time t
/// with slot 0 holding the initial value (eta[0] and z[0] are unused and 0).
///
/// Invariants, checked by `verify()`:
///   A_0 = 1, N_0 = m - 1, Y_0 = 1;
///   N_t = N_{t-1} - eta_t - 1{A_{t-1} = 0};
///   N_t = m - t - A_t;
///   Y_t = Y_{t-1} + eta_t - 1;
///   A_t = Y_t - min_{s <= t-1} Y_s + 1;
///   Z_t = #{1 <= j <= t-1 : A_j = 0};
///   boundaries are the times with A_t = 0.
struct ExplorationTrace {
    std::int64_t m = 0;
    std::vector<std::int64_t> eta;
    std::vector<std::int64_t> active;
    std::vector<std::int64_t> neutral;
    std::vector<std::int64_t> y;
    std::vector<std::int64_t> z;
    std::vector<std::int64_t> boundaries;

    /// Builds the full trace from eta_1..eta_m. Throws ParameterError when an
    /// eta_t exceeds the number of neutral vertices available at step t.
    static ExplorationTrace from_eta(std::int64_t m, const std::vector<std::int64_t>& eta_1_to_m);

    /// Component sizes in discovery order (gaps between boundaries).
    std::vector<std::int64_t> discovery_sizes() const;
    ComponentSizes component_sizes() const;

    /// Recomputes every invariant from eta; returns false on any mismatch.
    bool verify() const;

    /// Columnar CSV with header t,eta,A,N,Y,Z.
    void write_csv(std::ostream& out) const;
};

/// Martingale approximation of the exploration walk, indexed like
/// ExplorationTrace (slot 0 holds t = 0).
struct ApproxTrace {
    double p = 0.0;
    std::vector<long double> drift;   // D_t = E[eta_t - 1 | F_{t-1}]
    std::vector<long double> delta;   // Delta_t = eta_t - 1 - D_t
    std::vector<long double> ydet;    // deterministic center
    std::vector<long double> ytilde;  // ydet_t + sum_i (1-p)^{t-i} Delta_i

    /// max_t (|Y_t - Ytilde_t| - p t Z_t) over t = 1..m.
    long double max_bound_excess(const ExplorationTrace& trace) const;
};

/// Trajectory of W_0 = start, W_t = W_{t-1} + Bin(m, p) - 1.
struct WalkTrace {
    std::vector<std::int64_t> w;
    std::optional<std::int64_t> hitting_time;
    bool censored = false;  // horizon reached without hitting zero
    std::int64_t record_minima_count = 0;
    std::int64_t last_record_minimum = 0;
};

/// Outcome of a walk simulated without storing the path.
struct WalkSummary {
    std::optional<std::int64_t> hitting_time;
    bool censored = false;
    std::int64_t record_minima_count = 0;
    std::int64_t last_record_minimum = 0;
    std::int64_t final_time = 0;
    std::int64_t final_value = 0;
};

struct WalkOptions {
    std::int64_t start = 1;
    std::int64_t horizon = 1;
    bool stop_at_zero = true;
};

constexpr std::int64_t kMaxMaterializedVertices = 100000;
constexpr std::int64_t kMaxHittingStates = 1000000;

/// Explicit edge list of a G(m, p) sample. Throws CapacityError above
/// kMaxMaterializedVertices (use `explore` for large graphs).
EdgeList sample_edge_set(const GraphSpec& spec, RandomStream& stream);

/// Disjoint-set component sizes of an explicit graph on vertices 1..m.
ComponentSizes components_of(const EdgeList& edges, std::int64_t m);

/// Distributional exploration: eta_t ~ Bin(N_{t-1} - 1{A_{t-1}=0}, p).
ExplorationTrace explore(const GraphSpec& spec, RandomStream& stream);

/// Exploration of a realized graph; vertices are visited by ascending label.
ExplorationTrace explore_on_graph(const EdgeList& edges, std::int64_t m);

/// Size of the component whose exploration interval contains time t.
std::int64_t component_containing_time(const ExplorationTrace& trace, std::int64_t t);

ApproxTrace approximate(const ExplorationTrace& trace, double p);

/// Component sizes of G(m, p) in discovery order, without storing a trace.
/// `out` is cleared and reused.
void sample_discovery_sizes(std::int64_t m, const BinomialSampler& sampler, RandomStream& stream,
                            std::vector<std::int64_t>& out);

ComponentSizes sample_component_sizes(const GraphSpec& spec, RandomStream& stream);

/// Discovery-order sizes plus the index of the component whose exploration
/// interval contains `probe_time` (1 <= probe_time <= m).
struct ProbedSizes {
    std::vector<std::int64_t> sizes;
    std::size_t probe_index = 0;
};
ProbedSizes sample_sizes_with_probe(std::int64_t m, const BinomialSampler& sampler,
                                    std::int64_t probe_time, RandomStream& stream);

/// Stepwise walk with increments Bin(m, p) - 1, truncated at the horizon
/// (and at the first zero when options.stop_at_zero).
WalkTrace iid_walk(std::int64_t m, double p, const WalkOptions& options, RandomStream& stream);

/// Same law as `iid_walk` but jumps ahead: from W with running minimum w_min
/// no new record (in particular no zero) can occur within W - w_min steps,
/// and the sum of k increments is Bin(m k, p) - k, so the walk advances
/// W - w_min + 1 steps per draw.
WalkSummary walk_summary(std::int64_t m, double p, const WalkOptions& options, RandomStream& stream);

/// P(tau = t), t = 1..t_max, for the walk started at 1, by forward dynamic
/// programming with absorption at zero. Values above t_max - t + 1 at time t
/// cannot reach zero by t_max and are dropped. Throws CapacityError when
/// m * t_max > kMaxHittingStates.
std::vector<double> hitting_time_exact(std::int64_t m, double p, std::int64_t t_max);

/// (1/t) P(Bin(m t, p) = t - 1), t = 1..t_max.
std::vector<double> hitting_time_spitzer(std::int64_t m, double p, std::int64_t t_max);

/// log P(Bin(trials, p) = k).
long double binomial_log_pmf(std::int64_t trials, double p, std::int64_t k);

}  // namespace swmf
