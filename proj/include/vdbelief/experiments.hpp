#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vdbelief/factory.hpp"
#include "vdbelief/runtime.hpp"

namespace vdbelief {

struct ExperimentResult {
    std::string name;
    nlohmann::json parameters;
    std::vector<nlohmann::json> rows;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;

    nlohmann::json to_json() const;
};

// Distance-measure comparison: for each pair-preserving scheme and each
// measurement stage 4..1, the L1/L2/KL distances between the exact belief
// entering that stage and its projection, plus the exact execution loss with
// the approximation active from that stage on. Rows matching the built-in
// reference values (within 5e-4) are flagged.
ExperimentResult run_table2(const FactoredPOMDP& factory, const std::vector<ValueFunction>& vfs,
                            double prior_fm, double kl_base = 0.0);

enum class PriorModel { Dirichlet, NormalizedUniform, FmOnly };

struct RandomPriorsOptions {
    int trials = 1000;
    std::uint64_t seed = 1;
    PriorModel prior_model = PriorModel::Dirichlet;
    bool use_f3f4 = false; // preserve F3/F4 instead of F1/F2
    bool full_joint = false;
};

// Random-prior loss experiment: sample priors, execute with only one pair
// correlation preserved, report the suboptimal-run count and both readings
// of the average loss (conditional on suboptimal runs, and unconditional).
ExperimentResult run_random_priors(const FactoredPOMDP& factory,
                                   const std::vector<ValueFunction>& vfs,
                                   const RandomPriorsOptions& opts);

BeliefState sample_prior(const FactoredPOMDP& pomdp, PriorModel model, std::uint64_t seed,
                         int trial);

// Exact beliefs entering each stage (k..1) along the optimal trajectory;
// index [stage] holds weighted beliefs for that stages-to-go value.
std::vector<std::vector<std::pair<double, BeliefState>>>
exact_stage_beliefs(const FactoredPOMDP& pomdp, const std::vector<ValueFunction>& vfs,
                    const BeliefState& prior);

} // namespace vdbelief
