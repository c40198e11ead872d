#include "vdbelief/factory.hpp"

namespace vdbelief {

namespace {

Cpt persist(int var) {
    Cpt c;
    c.parents = {var};
    c.table = {{1.0, 0.0}, {0.0, 1.0}};
    return c;
}

// Stamping overwrites the part fault: new value depends on FM only.
Cpt stamp(int fm, double p_if_faulty, double p_if_ok) {
    Cpt c;
    c.parents = {fm};
    c.table = {{p_if_faulty, 1.0 - p_if_faulty}, {p_if_ok, 1.0 - p_if_ok}};
    return c;
}

} // namespace

FactoredPOMDP factory_model() {
    FactoredPOMDP m;
    for (const char* name : {"FM", "F1", "F2", "F3", "F4"})
        m.variables.push_back({name, {"true", "false"}});
    m.observations = {"none"};
    m.discount = 1.0;
    m.horizon = 7;

    const int FM = 0, F1 = 1, F2 = 2, F3 = 3, F4 = 4;
    auto persist_all = [&] {
        std::vector<Cpt> t;
        for (int v = 0; v < 5; ++v) t.push_back(persist(v));
        return t;
    };

    auto stamp_action = [&](const char* name, int stage, int part, double p_faulty, double p_ok) {
        ActionSpec a;
        a.name = name;
        a.available_stages = std::set<int>{stage};
        a.transitions = persist_all();
        a.transitions[part] = stamp(FM, p_faulty, p_ok);
        return a;
    };

    m.actions.push_back(stamp_action("stamp-p1", 7, F1, 0.8, 0.1));
    m.actions.push_back(stamp_action("stamp-p2", 6, F2, 0.8, 0.1));
    m.actions.push_back(stamp_action("stamp-p3", 5, F3, 0.1, 0.05));
    m.actions.push_back(stamp_action("stamp-p4", 4, F4, 0.1, 0.05));

    auto persistent_action = [&](const char* name, int stage, std::vector<RewardTerm> rewards) {
        ActionSpec a;
        a.name = name;
        a.available_stages = std::set<int>{stage};
        a.transitions = persist_all();
        a.rewards = std::move(rewards);
        return a;
    };

    const int kTrue = 0, kFalse = 1;
    m.actions.push_back(persistent_action("process-p1", 3, {{{{F1, kFalse}}, 8.0}}));
    m.actions.push_back(persistent_action("reject-p1", 3, {{{}, 4.0}}));
    m.actions.push_back(persistent_action("process-p2", 2, {{{{F2, kFalse}}, 8.0}}));
    m.actions.push_back(persistent_action("reject-p2", 2, {{{}, 4.0}}));
    // Process both: 16 when neither faulty, 8 when exactly one, -2000 when both.
    m.actions.push_back(persistent_action(
        "process-p34", 1,
        {{{}, 8.0}, {{{F3, kTrue}, {F4, kTrue}}, -2008.0}, {{{F3, kFalse}, {F4, kFalse}}, 8.0}}));
    m.actions.push_back(persistent_action("reject-p34", 1, {{{}, 3.3}}));

    return validate_model(std::move(m));
}

BeliefState factory_prior(const FactoredPOMDP& factory, double p_fm) {
    Vector b(factory.space.size(), 0.0);
    const int kTrue = 0, kFalse = 1;
    b[factory.space.encode({kTrue, kFalse, kFalse, kFalse, kFalse})] = p_fm;
    b[factory.space.encode({kFalse, kFalse, kFalse, kFalse, kFalse})] = 1.0 - p_fm;
    return BeliefState::validated(std::move(b));
}

ProjectionScheme factory_scheme_f1f2(const FactoredPOMDP& factory) {
    int f1 = factory.var_index("F1"), f2 = factory.var_index("F2");
    int fm = factory.var_index("FM"), f3 = factory.var_index("F3"), f4 = factory.var_index("F4");
    return ProjectionScheme::make({{f1, f2}, {fm}, {f3}, {f4}}, factory.space.num_vars());
}

ProjectionScheme factory_scheme_f3f4(const FactoredPOMDP& factory) {
    int f3 = factory.var_index("F3"), f4 = factory.var_index("F4");
    int fm = factory.var_index("FM"), f1 = factory.var_index("F1"), f2 = factory.var_index("F2");
    return ProjectionScheme::make({{f3, f4}, {fm}, {f1}, {f2}}, factory.space.num_vars());
}

} // namespace vdbelief
