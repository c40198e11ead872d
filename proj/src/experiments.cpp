#include "vdbelief/experiments.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "vdbelief/error.hpp"

namespace vdbelief {

namespace {

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

// The distance rows this experiment is expected to land on for the default
// prior; used only to flag matching sweep cells in the output.
struct ReferenceRow {
    const char* correlation;
    double l1, l2, kl;
};
constexpr ReferenceRow kReference[] = {
    {"F1/F2", 0.7704, 0.3092, 0.4325},
    {"F3/F4", 0.9451, 0.3442, 0.5599},
};
constexpr double kReferenceTol = 5e-4;

} // namespace

nlohmann::json ExperimentResult::to_json() const {
    return nlohmann::json{{"name", name},
                          {"parameters", parameters},
                          {"rows", rows},
                          {"seed", seed},
                          {"wall_seconds", wall_seconds}};
}

std::vector<std::vector<std::pair<double, BeliefState>>>
exact_stage_beliefs(const FactoredPOMDP& pomdp, const std::vector<ValueFunction>& vfs,
                    const BeliefState& prior) {
    const int k = static_cast<int>(vfs.size());
    std::vector<std::vector<std::pair<double, BeliefState>>> at_stage(k + 1);
    at_stage[k] = {{1.0, prior}};
    for (int stage = k; stage >= 2; --stage) {
        for (const auto& [w, b] : at_stage[stage]) {
            ValueAt sel = value_at(b, vfs[stage - 1]);
            const std::string& aname = vfs[stage - 1].by_id(sel.alpha_id).action;
            int a = -1;
            for (std::size_t i = 0; i < pomdp.actions.size(); ++i)
                if (pomdp.actions[i].name == aname) a = static_cast<int>(i);
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
    return at_stage;
}

ExperimentResult run_table2(const FactoredPOMDP& factory, const std::vector<ValueFunction>& vfs,
                            double prior_fm, double kl_base) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.name = "table2";
    res.parameters = {{"prior_fm", prior_fm}, {"kl_base", kl_base == 0.0 ? "e" : "2"}};

    BeliefState prior = factory_prior(factory, prior_fm);
    auto stage_beliefs = exact_stage_beliefs(factory, vfs, prior);

    const ProjectionScheme schemes[] = {factory_scheme_f1f2(factory),
                                        factory_scheme_f3f4(factory)};
    const char* names[] = {"F1/F2", "F3/F4"};

    for (int sc = 0; sc < 2; ++sc) {
        for (int stage = 4; stage >= 1; --stage) {
            // Factory has a single observation, so exactly one belief per stage.
            const BeliefState& b = stage_beliefs[stage].front().second;
            BeliefState approx = reconstruct(project(b, schemes[sc], factory.space), factory.space);
            double d1 = l1(b, approx), d2 = l2(b, approx);
            double dkl_e = kl(b, approx), dkl_2 = kl(b, approx, 2.0);
            double dkl = kl_base == 0.0 ? dkl_e : kl(b, approx, kl_base);

            ExecutionConfig cfg;
            cfg.monitoring = Monitoring::Projected;
            cfg.assignment = SchemeAssignment::make_uniform(schemes[sc]);
            cfg.prior = prior;
            cfg.horizon = static_cast<int>(vfs.size());
            cfg.approx_from = stage;
            ExecutionReport rep = execute_exact_loss(factory, vfs, cfg);

            bool matches = std::abs(d1 - kReference[sc].l1) < kReferenceTol &&
                           std::abs(d2 - kReference[sc].l2) < kReferenceTol &&
                           (std::abs(dkl_e - kReference[sc].kl) < kReferenceTol ||
                            std::abs(dkl_2 - kReference[sc].kl) < kReferenceTol);

            res.rows.push_back({{"correlation", names[sc]},
                                {"stage", stage},
                                {"l1", d1},
                                {"l2", d2},
                                {"kl", dkl},
                                {"kl_e", dkl_e},
                                {"kl_2", dkl_2},
                                {"loss", rep.loss},
                                {"matches_reference", matches}});
        }
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

BeliefState sample_prior(const FactoredPOMDP& pomdp, PriorModel model, std::uint64_t seed,
                         int trial) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (trial + 1));
    const std::int64_t n = pomdp.space.size();
    Vector b(n, 0.0);
    switch (model) {
    case PriorModel::Dirichlet: {
        double sum = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            double u = std::max(uniform01(rng), 1e-300);
            b[i] = -std::log(u);
            sum += b[i];
        }
        for (double& x : b) x /= sum;
        break;
    }
    case PriorModel::NormalizedUniform: {
        double sum = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            b[i] = uniform01(rng);
            sum += b[i];
        }
        for (double& x : b) x /= sum;
        break;
    }
    case PriorModel::FmOnly: {
        return factory_prior(pomdp, uniform01(rng));
    }
    }
    return BeliefState::validated(std::move(b));
}

ExperimentResult run_random_priors(const FactoredPOMDP& factory,
                                   const std::vector<ValueFunction>& vfs,
                                   const RandomPriorsOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.name = "random-priors";
    res.seed = opts.seed;

    ProjectionScheme scheme =
        opts.full_joint
            ? ProjectionScheme::make({{0, 1, 2, 3, 4}}, factory.space.num_vars())
            : (opts.use_f3f4 ? factory_scheme_f3f4(factory) : factory_scheme_f1f2(factory));
    const char* model_name = opts.prior_model == PriorModel::Dirichlet ? "dirichlet"
                             : opts.prior_model == PriorModel::NormalizedUniform
                                 ? "normalized-uniform"
                                 : "fm-only";
    res.parameters = {{"trials", opts.trials},
                      {"prior_model", model_name},
                      {"scheme", opts.full_joint ? "full-joint" : (opts.use_f3f4 ? "f3f4" : "f1f2")}};

    int suboptimal_runs = 0;
    double loss_sum_all = 0.0, loss_sum_sub = 0.0;
    for (int trial = 0; trial < opts.trials; ++trial) {
        BeliefState prior = sample_prior(factory, opts.prior_model, opts.seed, trial);
        ExecutionConfig cfg;
        cfg.monitoring = Monitoring::Projected;
        cfg.assignment = SchemeAssignment::make_uniform(scheme);
        cfg.prior = prior;
        cfg.horizon = static_cast<int>(vfs.size());
        ExecutionReport rep = execute_exact_loss(factory, vfs, cfg);
        loss_sum_all += rep.loss;
        if (rep.suboptimal_action_count > 0) {
            ++suboptimal_runs;
            loss_sum_sub += rep.loss;
        }
    }

    res.rows.push_back(
        {{"trials", opts.trials},
         {"suboptimal_runs", suboptimal_runs},
         {"suboptimal_fraction", static_cast<double>(suboptimal_runs) / opts.trials},
         {"avg_loss_conditional", suboptimal_runs ? loss_sum_sub / suboptimal_runs : 0.0},
         {"avg_loss_unconditional", loss_sum_all / opts.trials}});
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace vdbelief
