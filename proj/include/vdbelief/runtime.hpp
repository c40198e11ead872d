#pragma once

#include <cstdint>
#include <vector>

#include "vdbelief/assignment.hpp"
#include "vdbelief/solver.hpp"

namespace vdbelief {

enum class Monitoring { Exact, Projected };

struct ExecutionConfig {
    Monitoring monitoring = Monitoring::Exact;
    SchemeAssignment assignment; // used when projected
    BeliefState prior;
    int horizon = 0;
    // Stages-to-go at which the approximation takes effect: projection is
    // applied on entering every stage <= approx_from. 0 means the horizon
    // (approximate throughout). The first decision always sees the exact prior.
    int approx_from = 0;
    std::uint64_t rng_seed = 0; // Monte Carlo only
};

struct ExecutionReport {
    double realized_expected_value = 0.0;
    double optimal_expected_value = 0.0;
    double loss = 0.0;
    std::vector<std::vector<int>> chosen_alpha_ids; // per stage (k..1), unique ids in visit order
    int suboptimal_action_count = 0;                // positive-probability nodes, action Q-gap > 1e-9
    // Monte Carlo extras
    int trials = 0;
    double std_error = 0.0;
};

// Enumerates the full observation tree, carrying the true belief (Bayes on
// the executed actions) and the agent's belief (exact Bayes from the previous
// approximate belief, then projected). The scheme applied on entering a stage
// is that of the plan currently implemented: the previously selected alpha's
// strategy target for the observed symbol. Branch weights come from the true
// belief.
ExecutionReport execute_exact_loss(const FactoredPOMDP& pomdp,
                                   const std::vector<ValueFunction>& vfs,
                                   const ExecutionConfig& config);

// Sampling estimator of the same quantity; per-trial RNG streams derive from
// the seed, so reports are bit-identical across runs.
ExecutionReport monte_carlo_loss(const FactoredPOMDP& pomdp,
                                 const std::vector<ValueFunction>& vfs,
                                 const ExecutionConfig& config, int trials);

// Per-stage uniform scheme choice minimizing the chosen distance between the
// exact belief along the optimal trajectory and its projection, within the
// lattice budget.
enum class DistanceMeasure { Kl, L1, L2 };

SchemeAssignment distance_directed_assignment(const FactoredPOMDP& pomdp,
                                              const std::vector<ValueFunction>& vfs,
                                              const BeliefState& prior, DistanceMeasure measure,
                                              int max_constraints, double kl_base = 0.0);

} // namespace vdbelief
