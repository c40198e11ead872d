#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vdbelief/bounds.hpp"

namespace vdbelief {

// Node of the projection-scheme lattice. The constraint set is the downward
// closure of the marginals (every nonempty subset of each marginal), stored
// as sorted bitmasks over the variable indices; it identifies the node.
struct LatticeNode {
    ProjectionScheme scheme;
    std::vector<std::uint32_t> constraints;

    static LatticeNode root(int num_vars);
    static LatticeNode from_scheme(const ProjectionScheme& scheme, int num_vars);
    int constraint_count() const { return static_cast<int>(constraints.size()); }
};

// S1 contains S2 iff every subset of S2 lies within some subset of S1
// (S2 is the finer projection; S1 imposes more constraints).
bool contains(const ProjectionScheme& s1, const ProjectionScheme& s2);

// Nodes reachable by adding exactly one constraining subset; every proper
// nonempty subset of the added set must already be present.
std::vector<LatticeNode> children(const LatticeNode& node, int num_vars);

// Practical = joint reconstruction is easy = marginals admit a
// running-intersection ordering. Partitions always qualify.
bool is_practical(const ProjectionScheme& scheme);

// Every practical scheme whose closure has at most max_constraints subsets.
std::vector<LatticeNode> enumerate_practical(int num_vars, int max_constraints);

enum class ChildOrdering { ALess, BLess, Tie };

// Streamlined node comparison: candidates are examined in decreasing order
// of contributed error until one is switchable under exactly one of the two
// nodes; that node has the larger one-stage bound. Equivalent to comparing
// the fully computed bounds, usually after a handful of LPs.
ChildOrdering compare_children(int alpha_id, const LatticeNode& node_a, const LatticeNode& node_b,
                               const ValueFunction& vf, const StateSpace& space,
                               const SwitchOptions& opts = {});

struct SearchEdge {
    int stage = 0;
    int alpha_id = 0;
    ProjectionScheme parent;
    ProjectionScheme child;
    double parent_score = 0.0;
    double child_score = 0.0;
};

struct SearchTrace {
    std::vector<SearchEdge> edges;
    std::int64_t nodes_examined = 0;
    std::int64_t max_nodes_per_alpha = 0;
};

struct SearchResult {
    SchemeAssignment assignment;
    ErrorBound bound;
    BoundReport report;
    SearchTrace trace;
};

struct SearchOptions {
    BoundOptions bounds;
    // Anytime hook: called with the best assignment so far after each
    // per-alpha search completes.
    std::function<void(const SchemeAssignment&)> on_progress;
};

// The generic greedy anytime search, one lattice descent per alpha vector.
// Finite variants take the per-stage value functions (U processes stages in
// any order, E from the last execution stage backward); infinite variants
// take the single infinite-horizon set.
SearchResult greedy_search(const FactoredPOMDP& pomdp, const std::vector<ValueFunction>& vfs,
                           BoundKind kind, int max_constraints, const SearchOptions& opts = {});

SearchResult greedy_search_infinite(const FactoredPOMDP& pomdp, const ValueFunction& vf_star,
                                    BoundKind kind, int max_constraints,
                                    const SearchOptions& opts = {});

} // namespace vdbelief
