#include "vdbelief/solver.hpp"

#include <algorithm>
#include <cmath>

#include "vdbelief/error.hpp"
#include "vdbelief/lp.hpp"

namespace vdbelief {

namespace {

// Upper bound on sup_b (max_i b.alpha_i - max_j b.beta_j).
double surface_gap(const std::vector<AlphaVector>& a, const std::vector<AlphaVector>& b) {
    double worst = 0.0;
    for (const auto& ai : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& bj : b) {
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < ai.values.size(); ++s)
                m = std::max(m, ai.values[s] - bj.values[s]);
            best = std::min(best, m);
        }
        worst = std::max(worst, best);
    }
    return worst;
}

bool pointwise_leq(const Vector& a, const Vector& b) {
    for (std::size_t s = 0; s < a.size(); ++s)
        if (a[s] > b[s]) return false;
    return true;
}

} // namespace

const AlphaVector& ValueFunction::by_id(int id) const {
    for (const auto& v : vectors)
        if (v.id == id) return v;
    throw DomainError("unknown alpha vector id " + std::to_string(id));
}

Vector backup_plan_values(const FactoredPOMDP& pomdp, int action, int stage,
                          const std::vector<const Vector*>& continuation) {
    const std::int64_t n = pomdp.space.size();
    const int nz = pomdp.num_observations();
    Matrix t = transition_matrix(pomdp, action, stage);
    Matrix o = observation_matrix(pomdp, action);
    Vector r = reward_vector(pomdp, action);
    Vector out(n, 0.0);
    for (std::int64_t s = 0; s < n; ++s) {
        double acc = 0.0;
        for (std::int64_t tt = 0; tt < n; ++tt) {
            double pt = t.at(s, tt);
            if (pt == 0.0) continue;
            double inner = 0.0;
            for (int z = 0; z < nz; ++z) inner += o.at(tt, z) * (*continuation[z])[tt];
            acc += pt * inner;
        }
        out[s] = r[s] + pomdp.discount * acc;
    }
    return out;
}

std::vector<AlphaVector> dp_backup(const ValueFunction& prev, const FactoredPOMDP& pomdp,
                                   int stage, const SolveOptions& opts) {
    const std::vector<int> acts = pomdp.actions_at(stage);
    if (acts.empty()) throw DomainError("no action available at stage " + std::to_string(stage));
    const int nz = pomdp.num_observations();
    const std::int64_t prev_n = static_cast<std::int64_t>(prev.vectors.size());

    std::int64_t strategies = 1;
    for (int z = 0; z < nz; ++z) {
        strategies *= prev_n;
        if (strategies > opts.backup_cap) throw DomainError("backup too large");
    }
    if (strategies * static_cast<std::int64_t>(acts.size()) > opts.backup_cap)
        throw DomainError("backup too large");

    std::vector<AlphaVector> out;
    out.reserve(strategies * acts.size());
    const std::int64_t n = pomdp.space.size();

    for (int a : acts) {
        Matrix t = transition_matrix(pomdp, a, stage);
        Matrix o = observation_matrix(pomdp, a);
        Vector r = reward_vector(pomdp, a);

        // g[z][i](s) = sum_t Pr(s,a,t) Pr(z|t,a) prev_i(t)
        std::vector<std::vector<Vector>> g(nz, std::vector<Vector>(prev_n, Vector(n, 0.0)));
        for (std::int64_t s = 0; s < n; ++s) {
            for (std::int64_t tt = 0; tt < n; ++tt) {
                double pt = t.at(s, tt);
                if (pt == 0.0) continue;
                for (int z = 0; z < nz; ++z) {
                    double w = pt * o.at(tt, z);
                    if (w == 0.0) continue;
                    for (std::int64_t i = 0; i < prev_n; ++i)
                        g[z][i][s] += w * prev.vectors[i].values[tt];
                }
            }
        }

        std::vector<int> sigma(nz, 0);
        for (;;) {
            AlphaVector av;
            av.action = pomdp.actions[a].name;
            av.strategy.resize(nz);
            av.values = r;
            for (int z = 0; z < nz; ++z) {
                av.strategy[z] = prev.vectors[sigma[z]].id;
                const Vector& gz = g[z][sigma[z]];
                for (std::int64_t s = 0; s < n; ++s) av.values[s] += pomdp.discount * gz[s];
            }
            out.push_back(std::move(av));
            int z = nz - 1;
            for (; z >= 0; --z) {
                if (++sigma[z] < prev_n) break;
                sigma[z] = 0;
            }
            if (z < 0) break;
        }
    }
    return out;
}

ValueFunction prune_dominated(std::vector<AlphaVector> vectors, int stage) {
    if (vectors.empty()) throw DomainError("cannot prune an empty vector set");

    // Canonical order: content-lexicographic, so ids are permutation-independent.
    std::sort(vectors.begin(), vectors.end(), [](const AlphaVector& a, const AlphaVector& b) {
        if (a.values != b.values) return a.values < b.values;
        if (a.action != b.action) return a.action < b.action;
        return a.strategy < b.strategy;
    });

    // Exact-duplicate values: keep the first of each tie class.
    std::vector<AlphaVector> cand;
    for (auto& v : vectors) {
        if (!cand.empty() && cand.back().values == v.values) continue;
        cand.push_back(std::move(v));
    }

    // Pointwise pre-filter; exact ties are gone, so plain <= suffices.
    std::vector<bool> dead(cand.size(), false);
    for (std::size_t i = 0; i < cand.size(); ++i) {
        for (std::size_t j = 0; j < cand.size() && !dead[i]; ++j) {
            if (i == j || dead[j]) continue;
            if (pointwise_leq(cand[i].values, cand[j].values)) dead[i] = true;
        }
    }

    // LP pass: drop vectors never strictly maximal against the live rest.
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (dead[i]) continue;
        std::vector<Vector> others;
        for (std::size_t j = 0; j < cand.size(); ++j)
            if (j != i && !dead[j]) others.push_back(cand[j].values);
        if (others.empty()) break;
        if (dominance_test(cand[i].values, others).dominated) dead[i] = true;
    }

    ValueFunction vf;
    vf.stage = stage;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (dead[i]) continue;
        AlphaVector v = std::move(cand[i]);
        v.id = static_cast<int>(vf.vectors.size());
        vf.vectors.push_back(std::move(v));
    }
    return vf;
}

std::vector<Vector> prune_anti_dominated(std::vector<Vector> vectors) {
    if (vectors.empty()) return vectors;
    std::sort(vectors.begin(), vectors.end());
    vectors.erase(std::unique(vectors.begin(), vectors.end()), vectors.end());

    std::vector<bool> dead(vectors.size(), false);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = 0; j < vectors.size() && !dead[i]; ++j) {
            if (i == j || dead[j]) continue;
            if (pointwise_leq(vectors[j], vectors[i])) dead[i] = true; // j everywhere below i
        }
    }
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (dead[i]) continue;
        std::vector<Vector> others;
        for (std::size_t j = 0; j < vectors.size(); ++j)
            if (j != i && !dead[j]) {
                Vector neg = vectors[j];
                for (double& x : neg) x = -x;
                others.push_back(std::move(neg));
            }
        if (others.empty()) break;
        Vector neg = vectors[i];
        for (double& x : neg) x = -x;
        if (dominance_test(neg, others).dominated) dead[i] = true;
    }
    std::vector<Vector> out;
    for (std::size_t i = 0; i < vectors.size(); ++i)
        if (!dead[i]) out.push_back(std::move(vectors[i]));
    return out;
}

ValueFunction terminal_value_function(const FactoredPOMDP& pomdp) {
    ValueFunction vf;
    vf.stage = 0;
    AlphaVector zero;
    zero.values.assign(pomdp.space.size(), 0.0);
    zero.action = "";
    zero.id = 0;
    vf.vectors.push_back(std::move(zero));
    return vf;
}

std::vector<ValueFunction> solve_finite(const FactoredPOMDP& pomdp, int horizon,
                                        const SolveOptions& opts) {
    if (horizon < 1) throw DomainError("horizon must be >= 1");
    std::vector<ValueFunction> out;
    ValueFunction prev = terminal_value_function(pomdp);
    for (int stage = 1; stage <= horizon; ++stage) {
        ValueFunction vf = prune_dominated(dp_backup(prev, pomdp, stage, opts), stage);
        out.push_back(vf);
        prev = std::move(vf);
    }
    return out;
}

ValueFunction solve_infinite(const FactoredPOMDP& pomdp, double epsilon,
                             const SolveOptions& opts) {
    if (pomdp.discount >= 1.0) throw DomainError("infinite horizon requires discount < 1");
    if (epsilon <= 0.0) throw DomainError("epsilon must be > 0");
    // Infinite-horizon solving uses the stage-independent action set.
    for (const auto& a : pomdp.actions)
        if (a.available_stages)
            throw DomainError("infinite horizon requires stage-independent actions");

    const double gamma = pomdp.discount;
    ValueFunction prev = terminal_value_function(pomdp);
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        ValueFunction next = prune_dominated(dp_backup(prev, pomdp, 1, opts), kInfiniteStage);
        double residual = std::max(surface_gap(next.vectors, prev.vectors),
                                   surface_gap(prev.vectors, next.vectors));
        if (iter > 1 && gamma * residual / (1.0 - gamma) <= epsilon) {
            // Remap strategies onto the returned set: each previous-stage target
            // becomes its nearest (sup-norm) vector in the final set.
            for (auto& v : next.vectors) {
                for (int& tgt : v.strategy) {
                    const AlphaVector& old = prev.by_id(tgt);
                    double best = std::numeric_limits<double>::infinity();
                    int best_id = next.vectors.front().id;
                    for (const auto& cand : next.vectors) {
                        double d = 0.0;
                        for (std::size_t s = 0; s < old.values.size(); ++s)
                            d = std::max(d, std::abs(old.values[s] - cand.values[s]));
                        if (d < best) { best = d; best_id = cand.id; }
                    }
                    tgt = best_id;
                }
            }
            return next;
        }
        prev = std::move(next);
    }
    throw DomainError("infinite-horizon solve did not converge within the iteration cap");
}

ValueAt value_at(const BeliefState& b, const ValueFunction& vf) {
    if (vf.vectors.empty()) throw DomainError("empty value function");
    ValueAt best{-std::numeric_limits<double>::infinity(), -1};
    for (const auto& v : vf.vectors) { // id order; ties keep the first
        double val = b.dot(v.values);
        if (val > best.value) best = ValueAt{val, v.id};
    }
    return best;
}

} // namespace vdbelief
