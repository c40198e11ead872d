#pragma once

// Independent oracles and shared fixture models for the test suites. The
// oracles deliberately avoid the library's production code paths: the LP
// oracle enumerates basic solutions with its own Gaussian elimination, the
// POMDP oracle evaluates conditional plans by direct CPT products.

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "vdbelief/belief.hpp"
#include "vdbelief/lp.hpp"
#include "vdbelief/model.hpp"
#include "vdbelief/solver.hpp"

namespace vdbelief::test {

inline double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

inline BeliefState random_belief(int n, std::mt19937_64& rng) {
    Vector b(n);
    double sum = 0.0;
    for (double& x : b) {
        x = -std::log(std::max(uniform01(rng), 1e-300));
        sum += x;
    }
    for (double& x : b) x /= sum;
    return BeliefState{std::move(b)};
}

// ---------------------------------------------------------------------------
// Vertex-enumeration LP oracle (inequality rows only, nonnegative variables).

inline std::optional<Vector> solve_square(std::vector<Vector> a, Vector b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        double best = 1e-10;
        for (int r = col; r < n; ++r)
            if (std::abs(a[r][col]) > best) { best = std::abs(a[r][col]); piv = r; }
        if (piv < 0) return std::nullopt;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

// Max objective over all basic feasible points of {rows, x >= 0}. Returns
// nullopt when no feasible vertex exists. The LP must be bounded for the
// result to equal the LP optimum.
inline std::optional<double> vertex_enumeration_max(const LinearProgram& lp) {
    const int n = lp.num_vars;
    // Candidate tight sets: each row as equality, or x_i = 0.
    std::vector<std::pair<Vector, double>> planes;
    for (const auto& r : lp.rows) planes.push_back({r.coeffs, r.rhs});
    for (int i = 0; i < n; ++i) {
        Vector e(n, 0.0);
        e[i] = 1.0;
        planes.push_back({e, 0.0});
    }
    const int p = static_cast<int>(planes.size());
    std::vector<int> pick(n, 0);
    std::optional<double> best;

    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n) {
            std::vector<Vector> a;
            Vector b;
            for (int i = 0; i < n; ++i) {
                a.push_back(planes[pick[i]].first);
                b.push_back(planes[pick[i]].second);
            }
            auto x = solve_square(a, b);
            if (!x) return;
            for (int i = 0; i < n; ++i)
                if ((*x)[i] < -1e-7) return;
            for (const auto& r : lp.rows) {
                double lhs = 0.0;
                for (int i = 0; i < n; ++i) lhs += r.coeffs[i] * (*x)[i];
                if (r.rel == Relation::LessEq && lhs > r.rhs + 1e-7) return;
                if (r.rel == Relation::GreaterEq && lhs < r.rhs - 1e-7) return;
                if (r.rel == Relation::Equal && std::abs(lhs - r.rhs) > 1e-7) return;
            }
            double obj = 0.0;
            for (int i = 0; i < n; ++i) obj += lp.objective[i] * (*x)[i];
            if (!best || obj > *best) best = obj;
            return;
        }
        for (int i = start; i < p; ++i) {
            pick[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

// ---------------------------------------------------------------------------
// Belief-simplex grid enumeration (compositions of 1/step).

inline void for_each_grid_belief(int n, int steps, const std::function<void(const Vector&)>& fn) {
    Vector b(n, 0.0);
    std::function<void(int, int)> rec = [&](int idx, int left) {
        if (idx == n - 1) {
            b[idx] = static_cast<double>(left) / steps;
            fn(b);
            return;
        }
        for (int take = 0; take <= left; ++take) {
            b[idx] = static_cast<double>(take) / steps;
            rec(idx + 1, left - take);
        }
    };
    rec(0, steps);
}

// ---------------------------------------------------------------------------
// Direct-CPT plan evaluation oracle.

inline double oracle_transition_prob(const FactoredPOMDP& m, std::int64_t s, int a,
                                     std::int64_t t) {
    double p = 1.0;
    for (int v = 0; v < m.space.num_vars(); ++v) {
        const Cpt& c = m.actions[a].transitions[v];
        p *= c.table[m.space.sub_index(s, c.parents)][m.space.digit(t, v)];
    }
    return p;
}

inline double oracle_observation_prob(const FactoredPOMDP& m, std::int64_t t, int a, int z) {
    if (!m.actions[a].observation) return z == 0 ? 1.0 : 0.0;
    const Cpt& c = *m.actions[a].observation;
    return c.table[m.space.sub_index(t, c.parents)][z];
}

inline double oracle_reward(const FactoredPOMDP& m, std::int64_t s, int a) {
    double r = 0.0;
    for (const auto& term : m.actions[a].rewards) {
        bool match = true;
        for (auto [v, val] : term.when)
            if (m.space.digit(s, v) != val) { match = false; break; }
        if (match) r += term.value;
    }
    return r;
}

// A conditional plan: an action plus per-observation subplans.
struct Plan {
    int action = -1;
    std::vector<int> next; // indices into the previous depth's plan list; empty at depth 1
};

// All depth-k conditional plans, respecting stage-dependent availability
// (depth d uses actions available at stage d).
struct PlanSet {
    std::vector<std::vector<Plan>> by_depth; // [d-1] = plans of depth d
    std::vector<std::vector<Vector>> values; // value vectors per depth
};

inline PlanSet enumerate_plans(const FactoredPOMDP& m, int horizon) {
    PlanSet ps;
    const std::int64_t n = m.space.size();
    const int nz = m.num_observations();
    for (int depth = 1; depth <= horizon; ++depth) {
        std::vector<Plan> plans;
        std::vector<Vector> values;
        const std::int64_t prev_count = depth == 1 ? 1 : ps.by_depth[depth - 2].size();
        for (int a : m.actions_at(depth)) {
            std::vector<int> sigma(nz, 0);
            for (;;) {
                Plan plan;
                plan.action = a;
                if (depth > 1) plan.next = sigma;
                Vector val(n, 0.0);
                for (std::int64_t s = 0; s < n; ++s) {
                    double acc = oracle_reward(m, s, a);
                    if (depth > 1) {
                        double cont = 0.0;
                        for (std::int64_t t = 0; t < n; ++t) {
                            double pt = oracle_transition_prob(m, s, a, t);
                            if (pt == 0.0) continue;
                            double inner = 0.0;
                            for (int z = 0; z < nz; ++z)
                                inner += oracle_observation_prob(m, t, a, z) *
                                         ps.values[depth - 2][sigma[z]][t];
                            cont += pt * inner;
                        }
                        acc += m.discount * cont;
                    }
                    val[s] = acc;
                }
                plans.push_back(plan);
                values.push_back(std::move(val));
                if (depth == 1) break;
                int z = nz - 1;
                for (; z >= 0; --z) {
                    if (++sigma[z] < prev_count) break;
                    sigma[z] = 0;
                }
                if (z < 0) break;
            }
        }
        ps.by_depth.push_back(std::move(plans));
        ps.values.push_back(std::move(values));
    }
    return ps;
}

inline double oracle_optimal_value(int horizon, const BeliefState& prior, const PlanSet& ps) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& val : ps.values[horizon - 1]) best = std::max(best, prior.dot(val));
    return best;
}

// ---------------------------------------------------------------------------
// Fixture models.

inline Cpt persist2(int var) { return Cpt{{var}, {{1.0, 0.0}, {0.0, 1.0}}}; }

// Two binary variables, one coupling action, one correlation-sensitive bet.
inline FactoredPOMDP toy_2var(int horizon = 2, double discount = 1.0) {
    FactoredPOMDP m;
    m.variables = {{"X", {"t", "f"}}, {"Y", {"t", "f"}}};
    m.observations = {"none"};
    m.discount = discount;
    if (horizon > 0) m.horizon = horizon;

    ActionSpec mix;
    mix.name = "mix";
    mix.transitions = {Cpt{{0}, {{0.7, 0.3}, {0.2, 0.8}}}, Cpt{{0}, {{0.9, 0.1}, {0.3, 0.7}}}};
    m.actions.push_back(mix);

    ActionSpec bet;
    bet.name = "bet-match";
    bet.transitions = {persist2(0), persist2(1)};
    bet.rewards = {{{}, -1.0}, {{{0, 0}, {1, 0}}, 3.0}, {{{0, 1}, {1, 1}}, 3.0}};
    m.actions.push_back(bet);

    ActionSpec safe;
    safe.name = "safe";
    safe.transitions = {persist2(0), persist2(1)};
    safe.rewards = {{{}, 0.6}};
    m.actions.push_back(safe);

    return validate_model(std::move(m));
}

// Three binary variables correlated through A.
inline FactoredPOMDP toy_3var(int horizon = 3) {
    FactoredPOMDP m;
    m.variables = {{"A", {"t", "f"}}, {"B", {"t", "f"}}, {"C", {"t", "f"}}};
    m.observations = {"none"};
    m.discount = 1.0;
    m.horizon = horizon;

    ActionSpec link;
    link.name = "link";
    link.transitions = {persist2(0), Cpt{{0}, {{0.85, 0.15}, {0.2, 0.8}}},
                        Cpt{{0}, {{0.75, 0.25}, {0.35, 0.65}}}};
    m.actions.push_back(link);

    ActionSpec bet;
    bet.name = "bet-bc";
    bet.transitions = {persist2(0), persist2(1), persist2(2)};
    bet.rewards = {{{}, -1.0}, {{{1, 0}, {2, 0}}, 2.5}, {{{1, 1}, {2, 1}}, 2.2}};
    m.actions.push_back(bet);

    ActionSpec beta;
    beta.name = "bet-a";
    beta.transitions = {persist2(0), persist2(1), persist2(2)};
    beta.rewards = {{{{0, 0}}, 1.1}};
    m.actions.push_back(beta);

    return validate_model(std::move(m));
}

// Two binary variables with a noisy sensor of X (two observations).
inline FactoredPOMDP toy_sensor(int horizon = 3) {
    FactoredPOMDP m;
    m.variables = {{"X", {"t", "f"}}, {"Y", {"t", "f"}}};
    m.observations = {"hot", "cold"};
    m.discount = 1.0;
    m.horizon = horizon;

    Cpt sensor{{0}, {{0.85, 0.15}, {0.15, 0.85}}};

    ActionSpec stir;
    stir.name = "stir";
    stir.transitions = {Cpt{{0}, {{0.6, 0.4}, {0.3, 0.7}}}, Cpt{{0}, {{0.8, 0.2}, {0.25, 0.75}}}};
    stir.observation = sensor;
    m.actions.push_back(stir);

    ActionSpec bet;
    bet.name = "bet-xy";
    bet.transitions = {persist2(0), persist2(1)};
    bet.observation = sensor;
    bet.rewards = {{{}, -0.5}, {{{0, 0}, {1, 0}}, 2.0}, {{{0, 1}, {1, 1}}, 1.7}};
    m.actions.push_back(bet);

    return validate_model(std::move(m));
}

// Discounted, stage-free variant for infinite-horizon tests.
inline FactoredPOMDP toy_discounted() {
    FactoredPOMDP m = toy_2var(0, 0.9);
    m.horizon = std::nullopt;
    return validate_model(std::move(m));
}

} // namespace vdbelief::test
