#include "vdbelief/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "vdbelief/error.hpp"
#include "vdbelief/lattice.hpp"

namespace vdbelief {

namespace {

constexpr double kLossTol = 1e-9;

int action_index(const FactoredPOMDP& pomdp, const std::string& name) {
    for (std::size_t a = 0; a < pomdp.actions.size(); ++a)
        if (pomdp.actions[a].name == name) return static_cast<int>(a);
    throw DomainError("unknown action: " + name);
}

// Q(b, a) with optimal continuation, for flagging executed suboptimal actions.
double q_value(const FactoredPOMDP& pomdp, const std::vector<ValueFunction>& vfs,
               const BeliefState& b, int action, int stage) {
    Vector r = reward_vector(pomdp, action);
    double q = b.dot(r);
    if (stage == 1) return q;
    Matrix t = transition_matrix(pomdp, action, stage);
    Matrix o = observation_matrix(pomdp, action);
    const std::int64_t n = pomdp.space.size();
    Vector pushed(n, 0.0);
    for (std::int64_t s = 0; s < n; ++s) {
        double bs = b.probabilities[s];
        if (bs == 0.0) continue;
        for (std::int64_t tt = 0; tt < n; ++tt) pushed[tt] += bs * t.at(s, tt);
    }
    for (int z = 0; z < pomdp.num_observations(); ++z) {
        Vector post(n, 0.0);
        double pz = 0.0;
        for (std::int64_t tt = 0; tt < n; ++tt) {
            post[tt] = pushed[tt] * o.at(tt, z);
            pz += post[tt];
        }
        if (pz <= 0.0) continue;
        for (double& x : post) x /= pz;
        q += pomdp.discount * pz * value_at(BeliefState{post}, vfs[stage - 2]).value;
    }
    return q;
}

struct ExecState {
    const FactoredPOMDP& pomdp;
    const std::vector<ValueFunction>& vfs;
    const ExecutionConfig& cfg;
    int approx_from;
    double realized = 0.0;
    int suboptimal = 0;
    std::vector<std::vector<int>> chosen;
};

// `implemented` is the continuation vector of the previously selected plan
// (its strategy target for the observed symbol): a stage-`stage` id whose
// scheme governs the projection on entering this stage. The root passes -1.
void run_tree(ExecState& st, int stage, const BeliefState& b_true, const BeliefState& b_agent,
              double weight, int implemented) {
    if (stage == 0) return;
    const FactoredPOMDP& p = st.pomdp;
    const ValueFunction& vf = st.vfs[stage - 1];

    BeliefState b_sel = b_agent;
    if (st.cfg.monitoring == Monitoring::Projected && stage < st.cfg.horizon &&
        stage <= st.approx_from) {
        const ProjectionScheme& scheme = st.cfg.assignment.at(stage, implemented);
        b_sel = reconstruct(project(b_agent, scheme, p.space), p.space);
    }

    ValueAt sel = value_at(b_sel, vf);
    auto& stage_ids = st.chosen[st.cfg.horizon - stage];
    if (std::find(stage_ids.begin(), stage_ids.end(), sel.alpha_id) == stage_ids.end())
        stage_ids.push_back(sel.alpha_id);

    const AlphaVector& alpha = vf.by_id(sel.alpha_id);
    const int a = action_index(p, alpha.action);

    double v_true = value_at(b_true, vf).value;
    if (q_value(p, st.vfs, b_true, a, stage) < v_true - kLossTol) st.suboptimal += 1;

    Vector r = reward_vector(p, a);
    st.realized += weight * std::pow(p.discount, st.cfg.horizon - stage) * b_true.dot(r);
    if (stage == 1) return;

    // True observation branch weights.
    Matrix t = transition_matrix(p, a, stage);
    Matrix o = observation_matrix(p, a);
    const std::int64_t n = p.space.size();
    Vector pushed(n, 0.0);
    for (std::int64_t s = 0; s < n; ++s) {
        double bs = b_true.probabilities[s];
        if (bs == 0.0) continue;
        for (std::int64_t tt = 0; tt < n; ++tt) pushed[tt] += bs * t.at(s, tt);
    }
    for (int z = 0; z < p.num_observations(); ++z) {
        double pz = 0.0;
        for (std::int64_t tt = 0; tt < n; ++tt) pz += pushed[tt] * o.at(tt, z);
        if (pz <= 0.0) continue;
        BeliefState next_true = exact_update(b_true, p, a, stage, z);
        BeliefState next_agent = exact_update(b_sel, p, a, stage, z);
        run_tree(st, stage - 1, next_true, next_agent, weight * pz, alpha.strategy[z]);
    }
}

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

int sample_index(const Vector& dist, std::mt19937_64& rng) {
    double u = uniform01(rng), acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(dist.size()) - 1;
}

} // namespace

ExecutionReport execute_exact_loss(const FactoredPOMDP& pomdp,
                                   const std::vector<ValueFunction>& vfs,
                                   const ExecutionConfig& config) {
    if (config.horizon < 1 || config.horizon > static_cast<int>(vfs.size()))
        throw DomainError("horizon outside the solved stage range");
    if (config.horizon > 12 && pomdp.num_observations() > 1)
        throw DomainError("trajectory enumeration infeasible: horizon > 12 with observations");

    ExecState st{pomdp, vfs, config,
                 config.approx_from > 0 ? config.approx_from : config.horizon, 0.0, 0, {}};
    st.chosen.resize(config.horizon);

    run_tree(st, config.horizon, config.prior, config.prior, 1.0, -1);

    ExecutionReport rep;
    rep.realized_expected_value = st.realized;
    rep.optimal_expected_value = value_at(config.prior, vfs[config.horizon - 1]).value;
    rep.loss = rep.optimal_expected_value - rep.realized_expected_value;
    rep.chosen_alpha_ids = std::move(st.chosen);
    rep.suboptimal_action_count = st.suboptimal;
    if (rep.loss < -kLossTol)
        throw DomainError("executor realized more than the optimal value; solver inconsistency");
    return rep;
}

ExecutionReport monte_carlo_loss(const FactoredPOMDP& pomdp,
                                 const std::vector<ValueFunction>& vfs,
                                 const ExecutionConfig& config, int trials) {
    if (trials < 1) throw DomainError("trials must be >= 1");
    const int k = config.horizon;
    if (k < 1 || k > static_cast<int>(vfs.size()))
        throw DomainError("horizon outside the solved stage range");
    const int approx_from = config.approx_from > 0 ? config.approx_from : k;

    double sum = 0.0, sumsq = 0.0;
    int flagged_trials = 0;
    std::vector<std::vector<int>> chosen(k);

    for (int trial = 0; trial < trials; ++trial) {
        std::mt19937_64 rng(config.rng_seed + 0x9e3779b97f4a7c15ULL * (trial + 1));
        int s = sample_index(config.prior.probabilities, rng);
        BeliefState b_true = config.prior;
        BeliefState b_agent = config.prior;
        double total = 0.0;
        bool any_suboptimal = false;
        int implemented = -1; // continuation of the previous plan at this stage

        for (int stage = k; stage >= 1; --stage) {
            BeliefState b_sel = b_agent;
            if (config.monitoring == Monitoring::Projected && stage < k && stage <= approx_from) {
                const ProjectionScheme& scheme = config.assignment.at(stage, implemented);
                b_sel = reconstruct(project(b_agent, scheme, pomdp.space), pomdp.space);
            }
            ValueAt sel = value_at(b_sel, vfs[stage - 1]);
            auto& ids = chosen[k - stage];
            ids.push_back(sel.alpha_id);
            const AlphaVector& alpha = vfs[stage - 1].by_id(sel.alpha_id);
            const int a = action_index(pomdp, alpha.action);

            if (q_value(pomdp, vfs, b_true, a, stage) <
                value_at(b_true, vfs[stage - 1]).value - kLossTol)
                any_suboptimal = true;

            total += std::pow(pomdp.discount, k - stage) * reward_vector(pomdp, a)[s];
            if (stage == 1) break;

            Matrix t = transition_matrix(pomdp, a, stage);
            Vector trow(pomdp.space.size());
            for (std::int64_t tt = 0; tt < pomdp.space.size(); ++tt) trow[tt] = t.at(s, tt);
            int next_s = sample_index(trow, rng);
            Matrix o = observation_matrix(pomdp, a);
            Vector orow(pomdp.num_observations());
            for (int z = 0; z < pomdp.num_observations(); ++z) orow[z] = o.at(next_s, z);
            int z = sample_index(orow, rng);

            implemented = alpha.strategy[z];
            b_true = exact_update(b_true, pomdp, a, stage, z);
            b_agent = exact_update(b_sel, pomdp, a, stage, z);
            s = next_s;
        }
        sum += total;
        sumsq += total * total;
        if (any_suboptimal) ++flagged_trials;
    }

    ExecutionReport rep;
    rep.trials = trials;
    rep.realized_expected_value = sum / trials;
    rep.optimal_expected_value = value_at(config.prior, vfs[k - 1]).value;
    rep.loss = rep.optimal_expected_value - rep.realized_expected_value;
    rep.suboptimal_action_count = flagged_trials;
    double var = std::max(0.0, sumsq / trials - rep.realized_expected_value * rep.realized_expected_value);
    rep.std_error = std::sqrt(var / trials);
    // Deduplicate per-stage chosen ids, preserving first-visit order.
    rep.chosen_alpha_ids.resize(k);
    for (int i = 0; i < k; ++i) {
        std::set<int> seen;
        for (int id : chosen[i])
            if (seen.insert(id).second) rep.chosen_alpha_ids[i].push_back(id);
    }
    return rep;
}

SchemeAssignment distance_directed_assignment(const FactoredPOMDP& pomdp,
                                              const std::vector<ValueFunction>& vfs,
                                              const BeliefState& prior, DistanceMeasure measure,
                                              int max_constraints, double kl_base) {
    const int n = pomdp.space.num_vars();
    if (max_constraints < n)
        throw DomainError("constraint budget must be at least the variable count");
    const int k = static_cast<int>(vfs.size());
    auto nodes = enumerate_practical(n, max_constraints);

    auto dist = [&](const BeliefState& b, const ProjectionScheme& s) {
        BeliefState approx = reconstruct(project(b, s, pomdp.space), pomdp.space);
        switch (measure) {
        case DistanceMeasure::Kl: return kl(b, approx, kl_base);
        case DistanceMeasure::L1: return l1(b, approx);
        case DistanceMeasure::L2: return l2(b, approx);
        }
        return 0.0;
    };

    // Exact-monitoring trajectory beliefs entering each stage.
    std::vector<std::vector<std::pair<double, BeliefState>>> at_stage(k + 1);
    at_stage[k] = {{1.0, prior}};
    for (int stage = k; stage >= 2; --stage) {
        for (const auto& [w, b] : at_stage[stage]) {
            ValueAt sel = value_at(b, vfs[stage - 1]);
            int a = action_index(pomdp, vfs[stage - 1].by_id(sel.alpha_id).action);
            Matrix t = transition_matrix(pomdp, a, stage);
            Matrix o = observation_matrix(pomdp, a);
            Vector pushed(pomdp.space.size(), 0.0);
            for (std::int64_t s = 0; s < pomdp.space.size(); ++s)
                for (std::int64_t tt = 0; tt < pomdp.space.size(); ++tt)
                    pushed[tt] += b.probabilities[s] * t.at(s, tt);
            for (int z = 0; z < pomdp.num_observations(); ++z) {
                double pz = 0.0;
                for (std::int64_t tt = 0; tt < pomdp.space.size(); ++tt)
                    pz += pushed[tt] * o.at(tt, z);
                if (pz <= 0.0) continue;
                at_stage[stage - 1].push_back({w * pz, exact_update(b, pomdp, a, stage, z)});
            }
        }
    }

    SchemeAssignment assignment;
    for (int stage = 1; stage <= k; ++stage) {
        double best = std::numeric_limits<double>::infinity();
        const ProjectionScheme* best_scheme = nullptr;
        for (const auto& node : nodes) {
            double d = 0.0;
            for (const auto& [w, b] : at_stage[stage]) d += w * dist(b, node.scheme);
            if (d < best - 1e-15) { // nodes are sorted: ties keep fewer constraints
                best = d;
                best_scheme = &node.scheme;
            }
        }
        for (const auto& v : vfs[stage - 1].vectors) assignment.set(stage, v.id, *best_scheme);
    }
    return assignment;
}

} // namespace vdbelief
