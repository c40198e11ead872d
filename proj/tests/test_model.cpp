#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vdbelief/error.hpp"
#include "vdbelief/factory.hpp"
#include "vdbelief/json_io.hpp"
#include "vdbelief/model.hpp"

using namespace vdbelief;

TEST_CASE("state enumeration follows the mixed-radix order") {
    FactoredPOMDP m;
    for (int i = 0; i < 5; ++i)
        m.variables.push_back({"v" + std::to_string(i), {"a", "b"}});
    m.observations = {"none"};
    ActionSpec noop;
    noop.name = "noop";
    for (int i = 0; i < 5; ++i) noop.transitions.push_back(test::persist2(i));
    m.actions.push_back(noop);
    m.discount = 1.0;
    m.horizon = 1;
    m = validate_model(std::move(m));

    auto states = enumerate_states(m);
    CHECK(states.size() == 32);
    CHECK(states[0].assignment == std::vector<int>{0, 0, 0, 0, 0});
    CHECK(states[31].assignment == std::vector<int>{1, 1, 1, 1, 1});
    // Last declared variable is the least significant digit.
    CHECK(states[1].assignment == std::vector<int>{0, 0, 0, 0, 1});
}

TEST_CASE("ternary times binary gives six states") {
    FactoredPOMDP m;
    m.variables = {{"t", {"a", "b", "c"}}, {"u", {"x", "y"}}};
    m.observations = {"none"};
    ActionSpec noop;
    noop.name = "noop";
    noop.transitions.push_back(Cpt{{0}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
    noop.transitions.push_back(test::persist2(1));
    m.actions.push_back(noop);
    m.discount = 1.0;
    m.horizon = 1;
    m = validate_model(std::move(m));
    CHECK(enumerate_states(m).size() == 6);
}

TEST_CASE("factory model has 32 states and the published structure") {
    FactoredPOMDP f = factory_model();
    CHECK(f.space.size() == 32);
    CHECK(f.variables.size() == 5);
    CHECK(f.actions.size() == 10);
    CHECK(f.observations.size() == 1);
    for (int stage = 1; stage <= 7; ++stage) {
        auto acts = f.actions_at(stage);
        CHECK(acts.size() == (stage <= 3 ? 2 : 1));
    }
}

TEST_CASE("stamping transition row matches the fault probabilities") {
    FactoredPOMDP f = factory_model();
    Matrix t = transition_matrix(f, 0, 7); // stamp-p1
    // FM true, everything else false: next state flips F1 with p = 0.8.
    std::int64_t s = f.space.encode({0, 1, 1, 1, 1});
    std::int64_t t_faulty = f.space.encode({0, 0, 1, 1, 1});
    CHECK(t.at(s, t_faulty) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(t.at(s, s) == doctest::Approx(0.2).epsilon(1e-12));
    // All other rows mass only on those two targets.
    double sum = 0.0;
    for (std::int64_t j = 0; j < 32; ++j) sum += t.at(s, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("persistent action yields the identity matrix") {
    FactoredPOMDP f = factory_model();
    Matrix t = transition_matrix(f, 5, 3); // reject-p1
    for (std::int64_t i = 0; i < 32; ++i)
        for (std::int64_t j = 0; j < 32; ++j)
            CHECK(t.at(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("independent coin flips give a uniform transition matrix") {
    FactoredPOMDP m;
    m.variables = {{"X", {"t", "f"}}, {"Y", {"t", "f"}}};
    m.observations = {"none"};
    ActionSpec flip;
    flip.name = "flip";
    flip.transitions = {Cpt{{}, {{0.5, 0.5}}}, Cpt{{}, {{0.5, 0.5}}}};
    m.actions.push_back(flip);
    m.discount = 1.0;
    m.horizon = 1;
    m = validate_model(std::move(m));
    Matrix t = transition_matrix(m, 0, 1);
    for (std::int64_t i = 0; i < 4; ++i)
        for (std::int64_t j = 0; j < 4; ++j) CHECK(t.at(i, j) == doctest::Approx(0.25));
}

TEST_CASE("transition matrix equals the direct CPT product oracle") {
    std::mt19937_64 rng(42);
    FactoredPOMDP m = test::toy_3var();
    for (int a = 0; a < static_cast<int>(m.actions.size()); ++a) {
        Matrix t = transition_matrix(m, a, 1);
        for (std::int64_t s = 0; s < m.space.size(); ++s) {
            double row = 0.0;
            for (std::int64_t tt = 0; tt < m.space.size(); ++tt) {
                CHECK(t.at(s, tt) ==
                      doctest::Approx(test::oracle_transition_prob(m, s, a, tt)).epsilon(1e-12));
                row += t.at(s, tt);
            }
            CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("six-variable random model matches the CPT product oracle") {
    std::mt19937_64 rng(4242);
    FactoredPOMDP m;
    for (int i = 0; i < 6; ++i)
        m.variables.push_back({"v" + std::to_string(i), {"a", "b"}});
    m.observations = {"none"};
    m.discount = 1.0;
    m.horizon = 1;
    ActionSpec act;
    act.name = "churn";
    for (int v = 0; v < 6; ++v) {
        Cpt c;
        // Parent set of size <= 2, sampled from the previous slice.
        int p1 = static_cast<int>(test::uniform01(rng) * 6);
        int p2 = static_cast<int>(test::uniform01(rng) * 6);
        c.parents = {p1};
        if (p2 != p1) c.parents.push_back(p2);
        std::sort(c.parents.begin(), c.parents.end());
        int rows = 1 << c.parents.size();
        for (int r = 0; r < rows; ++r) {
            double p = 0.05 + 0.9 * test::uniform01(rng);
            c.table.push_back({p, 1.0 - p});
        }
        act.transitions.push_back(std::move(c));
    }
    m.actions.push_back(std::move(act));
    m = validate_model(std::move(m));

    Matrix t = transition_matrix(m, 0, 1);
    for (std::int64_t s = 0; s < 64; ++s) {
        double row = 0.0;
        for (std::int64_t tt = 0; tt < 64; ++tt) {
            CHECK(t.at(s, tt) ==
                  doctest::Approx(test::oracle_transition_prob(m, s, 0, tt)).epsilon(1e-12));
            row += t.at(s, tt);
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("factory observation matrix is the all-ones column") {
    FactoredPOMDP f = factory_model();
    Matrix o = observation_matrix(f, 0);
    CHECK(o.cols == 1);
    for (std::int64_t i = 0; i < 32; ++i) CHECK(o.at(i, 0) == 1.0);
}

TEST_CASE("noiseless and noisy sensors fill observation rows from the CPT") {
    FactoredPOMDP m = test::toy_sensor();
    Matrix o = observation_matrix(m, 0);
    for (std::int64_t t = 0; t < 4; ++t) {
        bool x_true = m.space.digit(t, 0) == 0;
        CHECK(o.at(t, 0) == doctest::Approx(x_true ? 0.85 : 0.15));
        CHECK(o.at(t, 1) == doctest::Approx(x_true ? 0.15 : 0.85));
    }

    // Deterministic sensor: a 0/1 matrix.
    FactoredPOMDP d = test::toy_sensor();
    d.actions[0].observation = Cpt{{0}, {{1.0, 0.0}, {0.0, 1.0}}};
    d = validate_model(std::move(d));
    Matrix od = observation_matrix(d, 0);
    for (std::int64_t t = 0; t < 4; ++t)
        CHECK(od.at(t, m.space.digit(t, 0)) == 1.0);
}

TEST_CASE("reward vectors sum matching terms") {
    FactoredPOMDP f = factory_model();
    Vector process_p1 = reward_vector(f, 4);
    Vector reject_p34 = reward_vector(f, 9);
    for (std::int64_t s = 0; s < 32; ++s) {
        bool f1 = f.space.digit(s, 1) == 0;
        CHECK(process_p1[s] == (f1 ? 0.0 : 8.0));
        CHECK(reject_p34[s] == 3.3);
    }
    Vector p34 = reward_vector(f, 8);
    for (std::int64_t s = 0; s < 32; ++s) {
        bool f3 = f.space.digit(s, 3) == 0, f4 = f.space.digit(s, 4) == 0;
        double want = f3 && f4 ? -2000.0 : (!f3 && !f4 ? 16.0 : 8.0);
        CHECK(p34[s] == doctest::Approx(want));
    }

    ActionSpec& stamp = f.actions[0];
    CHECK(stamp.rewards.empty());
    Vector zero = reward_vector(f, 0);
    for (double r : zero) CHECK(r == 0.0);
}

TEST_CASE("model JSON round-trips through the canonical form") {
    FactoredPOMDP f = factory_model();
    std::string text = serialize_model(f);
    FactoredPOMDP parsed = parse_model(text);
    CHECK(serialize_model(parsed) == text);
    CHECK(parsed.actions.size() == f.actions.size());
    CHECK(parsed.space.size() == 32);

    // Spot-check Table-1 numbers survive the round trip.
    Matrix t = transition_matrix(parsed, 0, 7);
    std::int64_t s = parsed.space.encode({0, 1, 1, 1, 1});
    CHECK(t.at(s, parsed.space.encode({0, 0, 1, 1, 1})) == doctest::Approx(0.8));
}

TEST_CASE("parse rejects malformed models") {
    CHECK_THROWS_AS(parse_model("{\"variables\": []}"), ParseError);
    CHECK_THROWS_AS(parse_model("not json at all"), ParseError);

    // CPT row off by more than the tolerance.
    FactoredPOMDP f = factory_model();
    Json j = Json::parse(serialize_model(f));
    j["actions"][0]["transitions"]["F1"]["table"][0][0] = 0.9; // row sums to 1.1
    CHECK_THROWS_WITH_AS(parse_model(j.dump()), doctest::Contains("unnormalized CPT"), ParseError);
}

TEST_CASE("oversized state spaces are rejected") {
    FactoredPOMDP m;
    for (int i = 0; i < 21; ++i)
        m.variables.push_back({"v" + std::to_string(i), {"a", "b"}});
    m.observations = {"none"};
    ActionSpec noop;
    noop.name = "noop";
    for (int i = 0; i < 21; ++i) noop.transitions.push_back(test::persist2(i));
    m.actions.push_back(noop);
    m.discount = 1.0;
    m.horizon = 1;
    CHECK_THROWS_WITH_AS(validate_model(std::move(m)), doctest::Contains("model too large"),
                         DomainError);
}
