#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vdbelief/state_space.hpp"

namespace vdbelief {

using Vector = std::vector<double>;

// Dense row-major matrix, sized for desk-scale state spaces.
struct Matrix {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::int64_t r, std::int64_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& at(std::int64_t r, std::int64_t c) { return data[r * cols + c]; }
    double at(std::int64_t r, std::int64_t c) const { return data[r * cols + c]; }
};

struct VariableSpec {
    std::string name;
    std::vector<std::string> domain; // size >= 2, declared order
};

// Conditional distribution of one next-slice variable given a set of
// previous-slice parents. Rows are ordered by the mixed-radix encoding of
// the parent assignment; each row is a distribution over the child domain.
struct Cpt {
    std::vector<int> parents;              // indices into variables, previous slice
    std::vector<std::vector<double>> table;
};

struct RewardTerm {
    std::vector<std::pair<int, int>> when; // (variable index, value index), conjunctive
    double value = 0.0;
};

struct ActionSpec {
    std::string name;
    std::optional<std::set<int>> available_stages; // stages-to-go; absent = all stages
    std::vector<Cpt> transitions;                  // one per variable, variable order
    std::optional<Cpt> observation;                // parents are post-transition variables
    std::vector<RewardTerm> rewards;

    bool available_at(int stage) const {
        return !available_stages || available_stages->count(stage) > 0;
    }
};

struct FactoredPOMDP {
    std::vector<VariableSpec> variables;
    std::vector<std::string> observations;
    std::vector<ActionSpec> actions;
    double discount = 1.0;
    std::optional<int> horizon; // nullopt = infinite

    StateSpace space;

    int var_index(const std::string& name) const;
    int num_states() const { return static_cast<int>(space.size()); }
    int num_observations() const { return static_cast<int>(observations.size()); }

    std::vector<int> actions_at(int stage) const; // indices of available actions
};

struct FlatState {
    std::int64_t index = 0;
    std::vector<int> assignment; // one value index per variable
};

inline constexpr std::int64_t kDefaultStateCap = 1 << 20;

// Validates all model invariants (CPT row sums, parent references, stage
// numbers, action coverage of every stage, discount range) and fills in
// the state space. Throws DomainError on violation.
FactoredPOMDP validate_model(FactoredPOMDP model, std::int64_t state_cap = kDefaultStateCap);

std::vector<FlatState> enumerate_states(const FactoredPOMDP& pomdp,
                                        std::int64_t state_cap = kDefaultStateCap);

// |S| x |S| matrix of Pr(s -> t) under the action; rows sum to 1.
Matrix transition_matrix(const FactoredPOMDP& pomdp, int action, int stage);

// |S| x |Z| matrix; row t conditions on the post-transition state t.
Matrix observation_matrix(const FactoredPOMDP& pomdp, int action);

// Entry s = sum of reward terms whose partial assignment matches s.
Vector reward_vector(const FactoredPOMDP& pomdp, int action);

} // namespace vdbelief
