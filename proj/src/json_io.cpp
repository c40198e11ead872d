#include "vdbelief/json_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "vdbelief/error.hpp"
#include "vdbelief/solver.hpp"

namespace vdbelief {

namespace {

bool is_persistence(const Cpt& cpt, int var, const StateSpace& space) {
    if (cpt.parents != std::vector<int>{var}) return false;
    const int r = space.radix(var);
    for (int row = 0; row < r; ++row)
        for (int col = 0; col < r; ++col)
            if (cpt.table[row][col] != (row == col ? 1.0 : 0.0)) return false;
    return true;
}

Cpt persistence_cpt(int var, const StateSpace& space) {
    Cpt c;
    c.parents = {var};
    const int r = space.radix(var);
    c.table.assign(r, std::vector<double>(r, 0.0));
    for (int i = 0; i < r; ++i) c.table[i][i] = 1.0;
    return c;
}

Cpt cpt_from_json(const Json& j, const FactoredPOMDP& model, const std::string& path) {
    Cpt c;
    if (!j.contains("parents") || !j["parents"].is_array())
        throw ParseError(path + ": missing 'parents' array");
    for (const auto& p : j["parents"]) c.parents.push_back(model.var_index(p.get<std::string>()));
    if (!j.contains("table") || !j["table"].is_array())
        throw ParseError(path + ": missing 'table' array");
    for (const auto& row : j["table"]) c.table.push_back(row.get<std::vector<double>>());
    return c;
}

Json cpt_to_json(const Cpt& c, const FactoredPOMDP& model) {
    Json j;
    j["parents"] = Json::array();
    for (int p : c.parents) j["parents"].push_back(model.variables[p].name);
    j["table"] = c.table;
    return j;
}

int domain_value_index(const FactoredPOMDP& model, int var, const std::string& label,
                       const std::string& path) {
    const auto& dom = model.variables[var].domain;
    for (std::size_t i = 0; i < dom.size(); ++i)
        if (dom[i] == label) return static_cast<int>(i);
    throw ParseError(path + ": unknown domain value '" + label + "'");
}

} // namespace

FactoredPOMDP parse_model(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
    FactoredPOMDP m;
    try {
        if (!j.contains("variables") || !j["variables"].is_array() || j["variables"].empty())
            throw ParseError("variables: must be a nonempty array");
        for (const auto& v : j["variables"]) {
            VariableSpec spec;
            spec.name = v.at("name").get<std::string>();
            spec.domain = v.at("domain").get<std::vector<std::string>>();
            m.variables.push_back(std::move(spec));
        }
        m.observations = j.at("observations").get<std::vector<std::string>>();
        m.discount = j.at("discount").get<double>();
        if (j.at("horizon").is_string()) {
            if (j["horizon"].get<std::string>() != "infinite")
                throw ParseError("horizon: expected integer or \"infinite\"");
        } else {
            m.horizon = j.at("horizon").get<int>();
        }

        // Radices are needed for defaulted CPTs before full validation.
        std::vector<int> radices;
        for (const auto& v : m.variables) radices.push_back(static_cast<int>(v.domain.size()));
        StateSpace space(radices);

        for (const auto& aj : j.at("actions")) {
            ActionSpec a;
            const std::string path = "actions/" + aj.at("name").get<std::string>();
            a.name = aj.at("name").get<std::string>();
            if (aj.contains("stages")) {
                std::set<int> st;
                for (const auto& s : aj["stages"]) st.insert(s.get<int>());
                a.available_stages = std::move(st);
            }
            a.transitions.resize(m.variables.size());
            std::vector<bool> given(m.variables.size(), false);
            if (aj.contains("transitions")) {
                for (const auto& [var_name, cj] : aj["transitions"].items()) {
                    int v = -1;
                    for (std::size_t i = 0; i < m.variables.size(); ++i)
                        if (m.variables[i].name == var_name) v = static_cast<int>(i);
                    if (v < 0) throw ParseError(path + "/transitions: unknown variable " + var_name);
                    a.transitions[v] = cpt_from_json(cj, m, path + "/transitions/" + var_name);
                    given[v] = true;
                }
            }
            for (std::size_t v = 0; v < m.variables.size(); ++v)
                if (!given[v]) a.transitions[v] = persistence_cpt(static_cast<int>(v), space);
            if (aj.contains("observation"))
                a.observation = cpt_from_json(aj["observation"], m, path + "/observation");
            if (aj.contains("rewards")) {
                for (const auto& rj : aj["rewards"]) {
                    RewardTerm term;
                    term.value = rj.at("value").get<double>();
                    if (rj.contains("when")) {
                        for (const auto& [var_name, val] : rj["when"].items()) {
                            int v = -1;
                            for (std::size_t i = 0; i < m.variables.size(); ++i)
                                if (m.variables[i].name == var_name) v = static_cast<int>(i);
                            if (v < 0)
                                throw ParseError(path + "/rewards: unknown variable " + var_name);
                            term.when.push_back(
                                {v, domain_value_index(m, v, val.get<std::string>(),
                                                       path + "/rewards")});
                        }
                    }
                    a.rewards.push_back(std::move(term));
                }
            }
            m.actions.push_back(std::move(a));
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("model JSON: ") + e.what());
    }
    try {
        return validate_model(std::move(m));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

std::string serialize_model(const FactoredPOMDP& m) {
    Json j;
    j["variables"] = Json::array();
    for (const auto& v : m.variables) j["variables"].push_back({{"name", v.name}, {"domain", v.domain}});
    j["observations"] = m.observations;
    j["discount"] = m.discount;
    if (m.horizon) j["horizon"] = *m.horizon;
    else j["horizon"] = "infinite";
    j["actions"] = Json::array();
    for (const auto& a : m.actions) {
        Json aj;
        aj["name"] = a.name;
        if (a.available_stages) {
            aj["stages"] = Json::array();
            for (int s : *a.available_stages) aj["stages"].push_back(s);
        }
        Json tj = Json::object();
        for (std::size_t v = 0; v < m.variables.size(); ++v)
            if (!is_persistence(a.transitions[v], static_cast<int>(v), m.space))
                tj[m.variables[v].name] = cpt_to_json(a.transitions[v], m);
        if (!tj.empty()) aj["transitions"] = tj;
        if (a.observation) aj["observation"] = cpt_to_json(*a.observation, m);
        if (!a.rewards.empty()) {
            aj["rewards"] = Json::array();
            for (const auto& t : a.rewards) {
                Json rj;
                Json when = Json::object();
                for (auto [v, val] : t.when)
                    when[m.variables[v].name] = m.variables[v].domain[val];
                rj["when"] = when;
                rj["value"] = t.value;
                aj["rewards"].push_back(rj);
            }
        }
        j["actions"].push_back(std::move(aj));
    }
    return j.dump(2) + "\n";
}

Json belief_to_json(const BeliefState& b) { return Json{{"joint", b.probabilities}}; }

Json factored_belief_to_json(const FactoredBelief& f, const FactoredPOMDP& pomdp) {
    Json scheme = Json::array();
    Json tables = Json::object();
    for (std::size_t i = 0; i < f.scheme.marginals.size(); ++i) {
        Json block = Json::array();
        std::string key;
        for (int v : f.scheme.marginals[i]) {
            block.push_back(pomdp.variables[v].name);
            if (!key.empty()) key += ",";
            key += pomdp.variables[v].name;
        }
        scheme.push_back(block);
        tables[key] = f.tables[i];
    }
    return Json{{"scheme", scheme}, {"tables", tables}};
}

BeliefState belief_from_json(const Json& j, const FactoredPOMDP& pomdp) {
    try {
        if (j.contains("joint")) {
            auto v = j["joint"].get<Vector>();
            if (static_cast<std::int64_t>(v.size()) != pomdp.space.size())
                throw ParseError("belief: joint length mismatch");
            return BeliefState::validated(std::move(v));
        }
        if (j.contains("scheme")) {
            std::vector<std::vector<int>> subsets;
            for (const auto& block : j["scheme"]) {
                std::vector<int> s;
                for (const auto& name : block) s.push_back(pomdp.var_index(name.get<std::string>()));
                subsets.push_back(std::move(s));
            }
            ProjectionScheme scheme = ProjectionScheme::make(subsets, pomdp.space.num_vars());
            std::vector<Vector> tables;
            for (const auto& m : scheme.marginals) {
                std::string key;
                for (int v : m) {
                    if (!key.empty()) key += ",";
                    key += pomdp.variables[v].name;
                }
                tables.push_back(j.at("tables").at(key).get<Vector>());
            }
            FactoredBelief f = FactoredBelief::validated(scheme, std::move(tables), pomdp.space);
            return reconstruct(f, pomdp.space);
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("belief JSON: ") + e.what());
    }
    throw ParseError("belief JSON: expected 'joint' or 'scheme'");
}

Json value_functions_to_json(const std::vector<ValueFunction>& vfs, const FactoredPOMDP& pomdp) {
    Json stages = Json::array();
    for (const auto& vf : vfs) {
        Json vectors = Json::array();
        for (const auto& v : vf.vectors) {
            Json strategy = Json::object();
            for (int z = 0; z < static_cast<int>(v.strategy.size()); ++z)
                strategy[pomdp.observations[z]] = v.strategy[z];
            vectors.push_back({{"id", v.id},
                               {"action", v.action},
                               {"values", v.values},
                               {"strategy", strategy}});
        }
        stages.push_back(
            {{"stage", vf.stage == kInfiniteStage ? Json("infinite") : Json(vf.stage)},
             {"vectors", vectors}});
    }
    return Json{{"discount", pomdp.discount}, {"stages", stages}};
}

std::vector<ValueFunction> value_functions_from_json(const Json& j, const FactoredPOMDP& pomdp) {
    std::vector<ValueFunction> out;
    try {
        for (const auto& sj : j.at("stages")) {
            ValueFunction vf;
            vf.stage = sj.at("stage").is_string() ? kInfiniteStage : sj.at("stage").get<int>();
            for (const auto& vj : sj.at("vectors")) {
                AlphaVector v;
                v.id = vj.at("id").get<int>();
                v.action = vj.at("action").get<std::string>();
                v.values = vj.at("values").get<Vector>();
                if (static_cast<std::int64_t>(v.values.size()) != pomdp.space.size())
                    throw ParseError("value function: vector length mismatch");
                v.strategy.assign(pomdp.num_observations(), 0);
                for (const auto& [obs, target] : vj.at("strategy").items()) {
                    int z = -1;
                    for (int i = 0; i < pomdp.num_observations(); ++i)
                        if (pomdp.observations[i] == obs) z = i;
                    if (z < 0) throw ParseError("value function: unknown observation " + obs);
                    v.strategy[z] = target.get<int>();
                }
                vf.vectors.push_back(std::move(v));
            }
            out.push_back(std::move(vf));
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("value function JSON: ") + e.what());
    }
    return out;
}

Json assignment_to_json(const SchemeAssignment& a, const FactoredPOMDP& pomdp) {
    auto scheme_json = [&](const ProjectionScheme& s) {
        Json blocks = Json::array();
        for (const auto& m : s.marginals) {
            Json block = Json::array();
            for (int v : m) block.push_back(pomdp.variables[v].name);
            blocks.push_back(block);
        }
        return blocks;
    };
    Json j = Json::object();
    if (a.uniform) j["uniform"] = scheme_json(*a.uniform);
    Json per = Json::object();
    for (const auto& [key, scheme] : a.per_alpha) {
        std::string stage = key.first == kInfiniteStage ? "infinite" : std::to_string(key.first);
        per[stage][std::to_string(key.second)] = scheme_json(scheme);
    }
    j["assignment"] = per;
    return j;
}

SchemeAssignment assignment_from_json(const Json& j, const FactoredPOMDP& pomdp) {
    auto scheme_from = [&](const Json& blocks) {
        std::vector<std::vector<int>> subsets;
        for (const auto& block : blocks) {
            std::vector<int> s;
            for (const auto& name : block) s.push_back(pomdp.var_index(name.get<std::string>()));
            subsets.push_back(std::move(s));
        }
        return ProjectionScheme::make(subsets, pomdp.space.num_vars());
    };
    SchemeAssignment a;
    try {
        if (j.contains("uniform")) a.uniform = scheme_from(j["uniform"]);
        if (j.contains("assignment")) {
            for (const auto& [stage_key, ids] : j["assignment"].items()) {
                int stage = stage_key == "infinite" ? kInfiniteStage : std::stoi(stage_key);
                for (const auto& [id_key, blocks] : ids.items())
                    a.set(stage, std::stoi(id_key), scheme_from(blocks));
            }
        }
    } catch (const Json::exception& e) {
        throw ParseError(std::string("assignment JSON: ") + e.what());
    }
    return a;
}

Json bound_report_to_json(const BoundReport& r, const FactoredPOMDP& pomdp) {
    static const char* names[] = {"u_finite", "u_infinite", "e_finite", "e_infinite"};
    Json per_alpha = Json::object();
    for (const auto& d : r.per_alpha) {
        Json blocks = Json::array();
        for (const auto& m : d.scheme.marginals) {
            Json block = Json::array();
            for (int v : m) block.push_back(pomdp.variables[v].name);
            blocks.push_back(block);
        }
        std::string stage = d.stage == kInfiniteStage ? "infinite" : std::to_string(d.stage);
        per_alpha[stage][std::to_string(d.alpha_id)] = {{"B", d.one_stage},
                                                        {"scheme", blocks},
                                                        {"switch_members", d.switch_members},
                                                        {"e_contribution", d.e_contribution}};
    }
    return Json{{"kind", names[static_cast<int>(r.bound.kind)]},
                {"value", r.bound.value},
                {"gamma", r.bound.gamma},
                {"stages", r.bound.stages},
                {"per_stage", r.bound.per_stage},
                {"per_alpha", per_alpha}};
}

Json execution_report_to_json(const ExecutionReport& r) {
    Json j{{"realized_expected_value", r.realized_expected_value},
           {"optimal_expected_value", r.optimal_expected_value},
           {"loss", r.loss},
           {"chosen_alpha_ids", r.chosen_alpha_ids},
           {"suboptimal_action_count", r.suboptimal_action_count}};
    if (r.trials > 0) {
        j["trials"] = r.trials;
        j["std_error"] = r.std_error;
    }
    return j;
}

std::string execution_report_csv(const ExecutionReport& r, const BeliefState& prior) {
    // FNV-1a over the prior bytes; stable fingerprint for experiment rows.
    std::uint64_t h = 1469598103934665603ULL;
    for (double p : prior.probabilities) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(p));
        std::memcpy(&bits, &p, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xff;
            h *= 1099511628211ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << h << std::dec << "," << r.loss << "," << r.suboptimal_action_count;
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

} // namespace vdbelief
