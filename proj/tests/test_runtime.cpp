#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vdbelief/error.hpp"
#include "vdbelief/experiments.hpp"
#include "vdbelief/factory.hpp"
#include "vdbelief/json_io.hpp"
#include "vdbelief/lattice.hpp"
#include "vdbelief/runtime.hpp"

using namespace vdbelief;

TEST_CASE("exact monitoring never loses value") {
    FactoredPOMDP f = factory_model();
    auto vfs = solve_finite(f, 7);
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 25; ++trial) {
        ExecutionConfig cfg;
        cfg.monitoring = Monitoring::Exact;
        cfg.prior = test::random_belief(32, rng);
        cfg.horizon = 7;
        ExecutionReport rep = execute_exact_loss(f, vfs, cfg);
        CHECK(rep.loss == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(rep.suboptimal_action_count == 0);
    }
}

TEST_CASE("pair-preserving schemes reproduce the published losses") {
    FactoredPOMDP f = factory_model();
    auto vfs = solve_finite(f, 7);
    BeliefState prior = factory_prior(f, 0.5);

    ExecutionConfig cfg;
    cfg.monitoring = Monitoring::Projected;
    cfg.prior = prior;
    cfg.horizon = 7;
    cfg.approx_from = 3; // approximation takes effect once everything is correlated

    cfg.assignment = SchemeAssignment::make_uniform(factory_scheme_f1f2(f));
    ExecutionReport keep_f1f2 = execute_exact_loss(f, vfs, cfg);
    CHECK(keep_f1f2.loss == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(keep_f1f2.suboptimal_action_count == 1);

    cfg.assignment = SchemeAssignment::make_uniform(factory_scheme_f3f4(f));
    ExecutionReport keep_f3f4 = execute_exact_loss(f, vfs, cfg);
    CHECK(keep_f3f4.loss == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(keep_f3f4.suboptimal_action_count == 0);
}

TEST_CASE("the searched assignment certifies lossless monitoring") {
    FactoredPOMDP f = factory_model();
    auto vfs = solve_finite(f, 7);
    SearchResult sr = greedy_search(f, vfs, BoundKind::EFinite, 6);
    REQUIRE(sr.bound.value == doctest::Approx(0.0));

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        ExecutionConfig cfg;
        cfg.monitoring = Monitoring::Projected;
        cfg.assignment = sr.assignment;
        cfg.prior = trial == 0 ? factory_prior(f, 0.5) : test::random_belief(32, rng);
        cfg.horizon = 7;
        ExecutionReport rep = execute_exact_loss(f, vfs, cfg);
        CHECK(rep.loss <= 1e-9);
    }
}

TEST_CASE("loss is never negative") {
    FactoredPOMDP m = test::toy_3var(3);
    auto vfs = solve_finite(m, 3);
    std::mt19937_64 rng(5);
    for (const auto& node : enumerate_practical(3, 7)) {
        for (int trial = 0; trial < 50; ++trial) {
            ExecutionConfig cfg;
            cfg.monitoring = Monitoring::Projected;
            cfg.assignment = SchemeAssignment::make_uniform(node.scheme);
            cfg.prior = test::random_belief(8, rng);
            cfg.horizon = 3;
            CHECK(execute_exact_loss(m, vfs, cfg).loss >= -1e-9);
        }
    }
}

TEST_CASE("observation branches are weighted by the true belief") {
    FactoredPOMDP m = test::toy_sensor(3);
    auto vfs = solve_finite(m, 3);
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        ExecutionConfig cfg;
        cfg.monitoring = Monitoring::Exact;
        cfg.prior = test::random_belief(4, rng);
        cfg.horizon = 3;
        ExecutionReport rep = execute_exact_loss(m, vfs, cfg);
        CHECK(rep.loss == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(rep.realized_expected_value ==
              doctest::Approx(rep.optimal_expected_value).epsilon(1e-9));
    }
}

TEST_CASE("deterministic model gives identical Monte Carlo trials") {
    // Persistent dynamics, deterministic prior: every trajectory is the same.
    FactoredPOMDP m = test::toy_2var(2);
    m.actions.erase(m.actions.begin()); // drop the stochastic mixing action
    m = validate_model(std::move(m));
    auto vfs = solve_finite(m, 2);
    Vector p(4, 0.0);
    p[0] = 1.0;
    ExecutionConfig cfg;
    cfg.monitoring = Monitoring::Exact;
    cfg.prior = BeliefState{p};
    cfg.horizon = 2;
    cfg.rng_seed = 99;
    ExecutionReport exact = execute_exact_loss(m, vfs, cfg);
    ExecutionReport mc = monte_carlo_loss(m, vfs, cfg, 64);
    CHECK(mc.realized_expected_value == doctest::Approx(exact.realized_expected_value));
    CHECK(mc.std_error == doctest::Approx(0.0));
}

TEST_CASE("Monte Carlo estimate converges to the exact loss") {
    FactoredPOMDP f = factory_model();
    auto vfs = solve_finite(f, 7);
    ExecutionConfig cfg;
    cfg.monitoring = Monitoring::Projected;
    cfg.assignment = SchemeAssignment::make_uniform(factory_scheme_f1f2(f));
    cfg.prior = factory_prior(f, 0.5);
    cfg.horizon = 7;
    cfg.rng_seed = 2026;

    ExecutionReport exact = execute_exact_loss(f, vfs, cfg);
    ExecutionReport mc = monte_carlo_loss(f, vfs, cfg, 10000);
    CHECK(std::abs(mc.realized_expected_value - exact.realized_expected_value) <=
          3.0 * mc.std_error + 1e-9);

    // Fixed seed: bit-identical reports across runs.
    ExecutionReport again = monte_carlo_loss(f, vfs, cfg, 10000);
    CHECK(again.realized_expected_value == mc.realized_expected_value);
    CHECK(again.std_error == mc.std_error);
    CHECK(again.suboptimal_action_count == mc.suboptimal_action_count);
    CHECK(execution_report_csv(again, cfg.prior) == execution_report_csv(mc, cfg.prior));
}

TEST_CASE("distance-directed choice prefers the large correlation") {
    FactoredPOMDP f = factory_model();
    auto vfs = solve_finite(f, 7);
    BeliefState prior = factory_prior(f, 0.5);
    ProjectionScheme f1f2 = factory_scheme_f1f2(f);
    ProjectionScheme f3f4 = factory_scheme_f3f4(f);
    auto beliefs = exact_stage_beliefs(f, vfs, prior);

    for (DistanceMeasure measure : {DistanceMeasure::Kl, DistanceMeasure::L1, DistanceMeasure::L2}) {
        SchemeAssignment a = distance_directed_assignment(f, vfs, prior, measure, 6);
        auto dist = [&](const BeliefState& b, const ProjectionScheme& s) {
            BeliefState approx = reconstruct(project(b, s, f.space), f.space);
            if (measure == DistanceMeasure::Kl) return kl(b, approx);
            if (measure == DistanceMeasure::L1) return l1(b, approx);
            return l2(b, approx);
        };
        for (int stage : {3, 2, 1}) {
            const BeliefState& b = beliefs[stage].front().second;
            // The pairwise comparison: every measure prefers keeping F1/F2
            // over F3/F4 once all parts are stamped.
            CHECK(dist(b, f1f2) < dist(b, f3f4));
            // The chosen scheme is at least as close as either named pair.
            const ProjectionScheme& s = a.at(stage, vfs[stage - 1].vectors.front().id);
            CHECK(dist(b, s) <= dist(b, f1f2) + 1e-12);
        }
    }

    // Unlimited budget: a distance-zero scheme wins at every stage. (It need
    // not be the full joint: the stamped belief factorizes through FM, so the
    // star of FM pairs already reproduces it exactly with fewer constraints.)
    SchemeAssignment full =
        distance_directed_assignment(f, vfs, prior, DistanceMeasure::L1, 1 << 10);
    for (int stage = 7; stage >= 1; --stage) {
        const BeliefState& b = beliefs[stage].front().second;
        const ProjectionScheme& s = full.at(stage, vfs[stage - 1].vectors.front().id);
        CHECK(l1(b, reconstruct(project(b, s, f.space), f.space)) <= 1e-12);
    }
}

TEST_CASE("distance-directed choice agrees with the distance functions") {
    FactoredPOMDP f = factory_model();
    auto vfs = solve_finite(f, 7);
    BeliefState prior = factory_prior(f, 0.5);
    auto beliefs = exact_stage_beliefs(f, vfs, prior);
    const BeliefState& b3 = beliefs[3].front().second;

    double d_f1f2 = l1(b3, reconstruct(project(b3, factory_scheme_f1f2(f), f.space), f.space));
    double d_f3f4 = l1(b3, reconstruct(project(b3, factory_scheme_f3f4(f), f.space), f.space));
    CHECK(d_f1f2 < d_f3f4); // the cross-module numbers drive the preference
}

TEST_CASE("execution guard rejects infeasible enumerations") {
    FactoredPOMDP m = test::toy_sensor(3);
    auto vfs = solve_finite(m, 3);
    ExecutionConfig cfg;
    cfg.monitoring = Monitoring::Exact;
    cfg.prior = BeliefState{Vector(4, 0.25)};
    cfg.horizon = 13; // beyond both the solved range and the guard
    CHECK_THROWS_AS(execute_exact_loss(m, vfs, cfg), DomainError);
}
