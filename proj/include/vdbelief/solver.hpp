#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vdbelief/belief.hpp"
#include "vdbelief/model.hpp"

namespace vdbelief {

inline constexpr int kInfiniteStage = -1;

// Value of a conditional plan: take `action`, then on observation z follow
// the previous-stage vector strategy[z]. Stage-1 strategies point at the
// terminal zero vector (id 0 of the stage-0 set).
struct AlphaVector {
    Vector values;
    std::string action;
    std::vector<int> strategy; // per observation: id in the previous stage's set
    int id = 0;
};

struct ValueFunction {
    int stage = 0; // stages-to-go; kInfiniteStage marks an infinite-horizon set
    std::vector<AlphaVector> vectors;

    const AlphaVector& by_id(int id) const;
};

struct SolveOptions {
    std::int64_t backup_cap = 1000000; // max vectors emitted by one backup
    int max_iterations = 10000;        // infinite-horizon cap
};

// Monahan enumeration: every available action crossed with every
// observation strategy into `prev`. Unpruned.
std::vector<AlphaVector> dp_backup(const ValueFunction& prev, const FactoredPOMDP& pomdp,
                                   int stage, const SolveOptions& opts = {});

// Backup of a single (action, per-observation continuation values) plan;
// the kernel shared by dp_backup and the alternative-plan machinery.
Vector backup_plan_values(const FactoredPOMDP& pomdp, int action, int stage,
                          const std::vector<const Vector*>& continuation);

// Keeps exactly the vectors maximal at some belief; canonicalizes order and
// ids. Ties keep one witness (lowest in the canonical order).
ValueFunction prune_dominated(std::vector<AlphaVector> vectors, int stage);

// Mirror image: keeps the vectors minimal at some belief (lower surface).
std::vector<Vector> prune_anti_dominated(std::vector<Vector> vectors);

// Stage-0 terminal set: the zero vector.
ValueFunction terminal_value_function(const FactoredPOMDP& pomdp);

// Returns value functions for stages 1..k (index 0 = stage 1).
std::vector<ValueFunction> solve_finite(const FactoredPOMDP& pomdp, int horizon,
                                        const SolveOptions& opts = {});

// Iterates backups until gamma * residual / (1 - gamma) <= epsilon, where
// residual bounds the sup-norm distance between successive value functions.
// The returned set has strategies remapped onto itself.
ValueFunction solve_infinite(const FactoredPOMDP& pomdp, double epsilon,
                             const SolveOptions& opts = {});

struct ValueAt {
    double value = 0.0;
    int alpha_id = 0;
};

// Maximizing dot product; exact ties broken by lowest id.
ValueAt value_at(const BeliefState& b, const ValueFunction& vf);

} // namespace vdbelief
