#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "swmf/stochastic.hpp"

namespace swmf {

/// Spin configuration. Ising spins are -1/+1; Potts colors are 1..q.
struct SpinConfig {
    std::vector<int> spins;

    std::int64_t n() const { return static_cast<std::int64_t>(spins.size()); }
    std::int64_t magnetization() const;

    void validate_ising() const;
    void validate_potts(int q) const;

    static SpinConfig all_plus(std::int64_t n);
    static SpinConfig constant(std::int64_t n, int color);
};

using Matrix = std::vector<std::vector<double>>;

constexpr int kMaxExactVertices = 5;

/// Ising coupling matching percolation parameter p: p = 1 - exp(-2 beta).
double ising_beta(double p);

/// One SW step on K_n with p = c/n: independent p-percolation of the
/// plus and minus classes, then a uniform sign for every component.
SpinConfig sw_step_complete(const SpinConfig& sigma, double c, RandomStream& stream);

/// Index of a configuration in binary counting order (vertex 1 is the least
/// significant bit, bit set = +1).
std::size_t ising_state_index(const SpinConfig& sigma);
SpinConfig ising_state(int n, std::size_t index);

/// Exact SW transition matrix over the 2^n Ising states on K_n.
Matrix exact_transition_matrix(int n, double p);

/// Gibbs weights exp(beta sum_{u<v} s_u s_v) on K_n, normalized.
std::vector<double> gibbs_vector(int n, double beta);

/// row vector times matrix.
std::vector<double> left_multiply(const std::vector<double>& v, const Matrix& m);

void write_matrix_csv(std::ostream& out, const Matrix& m);

// ---------------------------------------------------------------------------
// Potts model on trees

/// Rooted tree as a parent array (parent[0] = -1); edge i - 1 joins vertex i
/// to parent[i] for i = 1..n-1.
struct TreeSpec {
    std::vector<std::int64_t> parent;
    int q = 2;
    double p = 0.5;

    std::int64_t n() const { return static_cast<std::int64_t>(parent.size()); }
    std::int64_t edge_count() const { return n() - 1; }
    void validate() const;
};

TreeSpec path_tree(std::int64_t n, double p, int q);

/// Uniform random recursive tree: parent of vertex i uniform on 0..i-1.
TreeSpec random_recursive_tree(std::int64_t n, double p, int q, RandomStream& stream);

struct EdgeConfig {
    std::vector<std::uint8_t> bits;
};

/// Edge-dual chain: each bit moves independently with P(0 -> 1) = p/q and
/// P(1 -> 1) = p.
EdgeConfig potts_edge_step(const EdgeConfig& eta, const TreeSpec& tree, RandomStream& stream);

/// Stationary probability of a bit in the edge-dual chain.
double edge_stationary_one(double p, int q);

struct PottsStep {
    SpinConfig spins;
    EdgeConfig retained;  // edges kept by the percolation of this step
};

/// SW step for the q-state Potts model on a tree.
PottsStep potts_tree_sw_step(const SpinConfig& sigma, const TreeSpec& tree, RandomStream& stream);

/// ceil((ln n + ln 4) / (-ln(p (1 - 1/q)))).
std::int64_t tree_mix_bound(std::int64_t n, double p, int q);

constexpr std::int64_t kMaxExactPottsStates = 1 << 20;

/// Exact Potts measure on the tree over q^n colorings, in q-ary counting
/// order (vertex 1 least significant, digit d = color d + 1). Edge weight is
/// 1/(1-p) for equal colors.
std::vector<double> potts_tree_measure(const TreeSpec& tree);

std::size_t potts_state_index(const SpinConfig& sigma, int q);

}  // namespace swmf
