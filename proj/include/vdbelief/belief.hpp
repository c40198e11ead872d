#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vdbelief/model.hpp"

namespace vdbelief {

// Dense joint distribution over flat states. Entries >= 0, sum 1 within 1e-9.
struct BeliefState {
    Vector probabilities;

    static BeliefState validated(Vector p);
    double dot(const Vector& v) const;
};

// A covering set of variable subsets, canonical form: each subset sorted by
// variable index, no subset contained in another, subsets sorted
// lexicographically. Canonicalization drops contained subsets.
struct ProjectionScheme {
    std::vector<std::vector<int>> marginals;

    static ProjectionScheme make(std::vector<std::vector<int>> subsets, int num_vars);
    bool operator==(const ProjectionScheme&) const = default;

    bool is_full_joint(int num_vars) const;
    std::string label(const std::vector<VariableSpec>& vars) const;
};

// One probability table per marginal subset, each mixed-radix ordered.
struct FactoredBelief {
    ProjectionScheme scheme;
    std::vector<Vector> tables;

    // Checks normalization and agreement of overlapping marginals (1e-9).
    static FactoredBelief validated(ProjectionScheme scheme, std::vector<Vector> tables,
                                    const StateSpace& space);
};

// Bayes filter step: b'(t) proportional to Pr(z|t,a) * sum_s b(s) Pr(s,a,t).
BeliefState exact_update(const BeliefState& b, const FactoredPOMDP& pomdp, int action, int stage,
                         int observation);

FactoredBelief project(const BeliefState& b, const ProjectionScheme& scheme,
                       const StateSpace& space);

// Joint reconstruction along a running-intersection ordering of the
// marginals. Requires a decomposable (practical) scheme; 0/0 conditionals
// contribute 0. For partition schemes this is the plain product.
BeliefState reconstruct(const FactoredBelief& f, const StateSpace& space);

// True iff the marginals admit a running-intersection ordering. Partitions
// always qualify. (The lattice module re-exports this as is_practical.)
bool decomposable(const ProjectionScheme& scheme);

// Running-intersection ordering of the marginal indices, if one exists.
std::optional<std::vector<int>> rip_ordering(const ProjectionScheme& scheme);

double kl(const BeliefState& b, const BeliefState& approx, double log_base = 0.0); // 0 = natural
double l1(const BeliefState& b, const BeliefState& approx);
double l2(const BeliefState& b, const BeliefState& approx);

} // namespace vdbelief
