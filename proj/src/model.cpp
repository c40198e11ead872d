#include "vdbelief/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vdbelief/error.hpp"

namespace vdbelief {

namespace {
constexpr double kRowSumTol = 1e-9;
} // namespace

int FactoredPOMDP::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return static_cast<int>(i);
    throw DomainError("unknown variable: " + name);
}

std::vector<int> FactoredPOMDP::actions_at(int stage) const {
    std::vector<int> out;
    for (std::size_t a = 0; a < actions.size(); ++a)
        if (actions[a].available_at(stage)) out.push_back(static_cast<int>(a));
    return out;
}

FactoredPOMDP validate_model(FactoredPOMDP model, std::int64_t state_cap) {
    if (model.variables.empty()) throw DomainError("model has no variables");
    std::set<std::string> names;
    std::vector<int> radices;
    for (const auto& v : model.variables) {
        if (v.domain.size() < 2) throw DomainError("variable " + v.name + ": domain size < 2");
        if (!names.insert(v.name).second) throw DomainError("duplicate variable name: " + v.name);
        radices.push_back(static_cast<int>(v.domain.size()));
    }
    std::int64_t n = 1;
    for (int r : radices) {
        n *= r;
        if (n > state_cap) throw DomainError("model too large");
    }
    model.space = StateSpace(radices);

    if (model.observations.empty()) throw DomainError("model has no observation symbols");
    if (model.actions.empty()) throw DomainError("model has no actions");
    if (!(model.discount > 0.0 && model.discount <= 1.0))
        throw DomainError("discount must lie in (0, 1]");
    if (!model.horizon && model.discount == 1.0)
        throw DomainError("discount = 1 requires a finite horizon");
    if (model.horizon && *model.horizon < 1) throw DomainError("horizon must be >= 1");

    const int nvars = static_cast<int>(model.variables.size());
    for (auto& act : model.actions) {
        if (act.available_stages) {
            for (int s : *act.available_stages)
                if (s < 1) throw DomainError("action " + act.name + ": stage < 1");
        }
        if (static_cast<int>(act.transitions.size()) != nvars)
            throw DomainError("action " + act.name + ": needs one transition CPT per variable");
        for (int v = 0; v < nvars; ++v) {
            const Cpt& cpt = act.transitions[v];
            for (int p : cpt.parents)
                if (p < 0 || p >= nvars)
                    throw DomainError("action " + act.name + ": CPT parent out of range");
            std::int64_t rows = model.space.sub_size(cpt.parents);
            if (static_cast<std::int64_t>(cpt.table.size()) != rows)
                throw DomainError("action " + act.name + ", variable " + model.variables[v].name +
                                  ": CPT row count mismatch");
            for (const auto& row : cpt.table) {
                if (static_cast<int>(row.size()) != radices[v])
                    throw DomainError("action " + act.name + ": CPT row width mismatch");
                double sum = 0.0;
                for (double p : row) {
                    if (p < -kRowSumTol || p > 1.0 + 1e-9)
                        throw DomainError("action " + act.name + ": CPT entry outside [0,1]");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > 1e-6)
                    throw DomainError("unnormalized CPT in action " + act.name);
            }
        }
        if (act.observation) {
            const Cpt& cpt = *act.observation;
            for (int p : cpt.parents)
                if (p < 0 || p >= nvars)
                    throw DomainError("action " + act.name + ": observation parent out of range");
            std::int64_t rows = model.space.sub_size(cpt.parents);
            if (static_cast<std::int64_t>(cpt.table.size()) != rows)
                throw DomainError("action " + act.name + ": observation CPT row count mismatch");
            for (const auto& row : cpt.table) {
                if (row.size() != model.observations.size())
                    throw DomainError("action " + act.name + ": observation CPT row width mismatch");
                double sum = 0.0;
                for (double p : row) sum += p;
                if (std::abs(sum - 1.0) > 1e-6)
                    throw DomainError("unnormalized CPT in action " + act.name);
            }
        }
        for (const auto& term : act.rewards) {
            for (auto [v, val] : term.when) {
                if (v < 0 || v >= nvars) throw DomainError("reward term variable out of range");
                if (val < 0 || val >= radices[v]) throw DomainError("reward term value out of range");
            }
        }
    }

    if (model.horizon) {
        for (int stage = 1; stage <= *model.horizon; ++stage)
            if (model.actions_at(stage).empty())
                throw DomainError("no action available at stage " + std::to_string(stage));
    }
    return model;
}

std::vector<FlatState> enumerate_states(const FactoredPOMDP& pomdp, std::int64_t state_cap) {
    if (pomdp.space.size() > state_cap) throw DomainError("model too large");
    std::vector<FlatState> out;
    out.reserve(pomdp.space.size());
    for (std::int64_t s = 0; s < pomdp.space.size(); ++s)
        out.push_back(FlatState{s, pomdp.space.decode(s)});
    return out;
}

Matrix transition_matrix(const FactoredPOMDP& pomdp, int action, int stage) {
    const ActionSpec& act = pomdp.actions.at(action);
    if (!act.available_at(stage))
        throw DomainError("action not available at stage: " + act.name + " @ " +
                          std::to_string(stage));
    const StateSpace& sp = pomdp.space;
    const std::int64_t n = sp.size();
    const int nvars = sp.num_vars();
    Matrix m(n, n);
    for (std::int64_t s = 0; s < n; ++s) {
        // Row CPT lookups depend on s only, so hoist them.
        std::vector<const std::vector<double>*> rows(nvars);
        for (int v = 0; v < nvars; ++v)
            rows[v] = &act.transitions[v].table[sp.sub_index(s, act.transitions[v].parents)];
        for (std::int64_t t = 0; t < n; ++t) {
            double p = 1.0;
            for (int v = 0; v < nvars && p > 0.0; ++v) p *= (*rows[v])[sp.digit(t, v)];
            m.at(s, t) = p;
        }
    }
    return m;
}

Matrix observation_matrix(const FactoredPOMDP& pomdp, int action) {
    const ActionSpec& act = pomdp.actions.at(action);
    const std::int64_t n = pomdp.space.size();
    const int nz = pomdp.num_observations();
    Matrix m(n, nz);
    if (!act.observation) {
        // Deterministic null observation: the first declared symbol.
        for (std::int64_t t = 0; t < n; ++t) m.at(t, 0) = 1.0;
        return m;
    }
    const Cpt& cpt = *act.observation;
    for (std::int64_t t = 0; t < n; ++t) {
        const auto& row = cpt.table[pomdp.space.sub_index(t, cpt.parents)];
        for (int z = 0; z < nz; ++z) m.at(t, z) = row[z];
    }
    return m;
}

Vector reward_vector(const FactoredPOMDP& pomdp, int action) {
    const ActionSpec& act = pomdp.actions.at(action);
    const std::int64_t n = pomdp.space.size();
    Vector r(n, 0.0);
    for (const auto& term : act.rewards) {
        for (std::int64_t s = 0; s < n; ++s) {
            bool match = true;
            for (auto [v, val] : term.when)
                if (pomdp.space.digit(s, v) != val) { match = false; break; }
            if (match) r[s] += term.value;
        }
    }
    return r;
}

} // namespace vdbelief
