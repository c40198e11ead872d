#include "vdbelief/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "vdbelief/error.hpp"

namespace vdbelief {

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

int vf_index(const ValueFunction& vf, int id) {
    for (std::size_t i = 0; i < vf.vectors.size(); ++i)
        if (vf.vectors[i].id == id) return static_cast<int>(i);
    throw DomainError("unknown alpha vector id " + std::to_string(id));
}

// E contribution of one source vector against its pruned Alt set.
double e_contribution(const Vector& source, const std::vector<Vector>& alt_vectors,
                      const ValueFunction& vf, const BoundOptions& opts) {
    double e = 0.0;
    if (!opts.e_restrict_to_region) {
        for (const auto& v : alt_vectors) e = std::max(e, componentwise_gap(source, v));
        return e;
    }
    // Tighter variant: maximize b.(source - v) over the region where source
    // is optimal within vf.
    const int n = static_cast<int>(source.size());
    for (const auto& v : alt_vectors) {
        LinearProgram lp = LinearProgram::make(n);
        for (int s = 0; s < n; ++s) lp.objective[s] = source[s] - v[s];
        for (const auto& other : vf.vectors) {
            LinearProgram::Row row;
            row.coeffs.assign(n, 0.0);
            for (int s = 0; s < n; ++s) row.coeffs[s] = source[s] - other.values[s];
            row.rel = Relation::GreaterEq;
            row.rhs = 0.0;
            lp.rows.push_back(std::move(row));
        }
        LinearProgram::Row sum;
        sum.coeffs.assign(n, 1.0);
        sum.rel = Relation::Equal;
        sum.rhs = 1.0;
        lp.rows.push_back(std::move(sum));
        LpResult r = solve_lp(lp);
        if (r.status == LpStatus::Optimal) e = std::max(e, r.objective);
    }
    return std::max(e, 0.0);
}

} // namespace

const ProjectionScheme& SchemeAssignment::at(int stage, int alpha_id) const {
    auto it = per_alpha.find({stage, alpha_id});
    if (it != per_alpha.end()) return it->second;
    if (uniform) return *uniform;
    throw DomainError("scheme assignment missing entry for stage " + std::to_string(stage) +
                      ", alpha " + std::to_string(alpha_id));
}

bool SchemeAssignment::covers(const ValueFunction& vf) const {
    if (uniform) return true;
    for (const auto& v : vf.vectors)
        if (!per_alpha.count({vf.stage, v.id})) return false;
    return true;
}

double componentwise_gap(const Vector& a, const Vector& b) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < a.size(); ++s) m = std::max(m, a[s] - b[s]);
    return m;
}

SwitchSet compute_switch_set(int alpha_id, const ValueFunction& vf, const ProjectionScheme& scheme,
                             const StateSpace& space, const SwitchOptions& opts,
                             const std::vector<int>* candidate_order) {
    SwitchSet sw;
    sw.source = alpha_id;
    sw.stage = vf.stage;
    sw.scheme = scheme;
    sw.members.push_back(alpha_id);

    std::vector<Vector> values;
    values.reserve(vf.vectors.size());
    for (const auto& v : vf.vectors) values.push_back(v.values);
    const int i = vf_index(vf, alpha_id);

    std::vector<int> order;
    if (candidate_order) order = *candidate_order;
    else
        for (const auto& v : vf.vectors) order.push_back(v.id);

    auto rows = marginal_equality_rows(scheme, space);
    for (int cand : order) {
        if (cand == alpha_id) continue;
        const int j = vf_index(vf, cand);
        SwitchOutcome oc = switch_test_with_rows(i, j, values, rows, opts);
        if (oc.lp_failed) {
            sw.failed_candidates.push_back(cand);
            sw.members.push_back(cand); // bounds must stay upper bounds
        } else if (oc.feasible_positive) {
            sw.members.push_back(cand);
        }
    }
    std::sort(sw.members.begin(), sw.members.end());
    sw.members.erase(std::unique(sw.members.begin(), sw.members.end()), sw.members.end());
    return sw;
}

std::map<int, SwitchSet> compute_switch_sets(const ValueFunction& vf,
                                             const SchemeAssignment& assignment,
                                             const StateSpace& space, const BoundOptions& opts) {
    std::vector<int> ids;
    for (const auto& v : vf.vectors) ids.push_back(v.id);
    std::vector<SwitchSet> results(ids.size());
    parallel_for(static_cast<int>(ids.size()), opts.threads, [&](int k) {
        results[k] = compute_switch_set(ids[k], vf, assignment.at(vf.stage, ids[k]), space,
                                        opts.switch_opts);
    });
    std::map<int, SwitchSet> out;
    for (std::size_t k = 0; k < ids.size(); ++k) out[ids[k]] = std::move(results[k]);
    return out;
}

double one_stage_bound(const ValueFunction& vf, const SwitchSet& sw) {
    const Vector& src = vf.by_id(sw.source).values;
    double b = 0.0;
    for (int m : sw.members) b = std::max(b, componentwise_gap(src, vf.by_id(m).values));
    return b;
}

ErrorBound u_bound_finite(const std::vector<double>& per_stage_b, double gamma,
                          UWeighting weighting) {
    const int k = static_cast<int>(per_stage_b.size());
    ErrorBound eb;
    eb.kind = BoundKind::UFinite;
    eb.per_stage = per_stage_b;
    eb.gamma = gamma;
    eb.stages = k;
    for (int i = 1; i <= k; ++i) {
        double b = per_stage_b[i - 1];
        if (b < 0.0) throw DomainError("per-stage bound must be nonnegative");
        double w = (weighting == UWeighting::Paper) ? std::pow(gamma, i) : std::pow(gamma, k - i);
        eb.value += w * b;
    }
    return eb;
}

ErrorBound u_bound_infinite(double b_star, double gamma) {
    if (gamma >= 1.0) throw DomainError("undiscounted infinite bound undefined");
    ErrorBound eb;
    eb.kind = BoundKind::UInfinite;
    eb.gamma = gamma;
    eb.value = b_star / (1.0 - gamma);
    eb.per_stage = {b_star};
    return eb;
}

std::vector<Vector> falt(const FactoredPOMDP& pomdp, const AlphaVector& alpha, int stage,
                         const std::map<int, AltSet>& alt_prev, const BoundOptions& opts) {
    const int nz = pomdp.num_observations();
    std::vector<const AltSet*> per_obs(nz);
    std::int64_t combos = 1;
    for (int z = 0; z < nz; ++z) {
        auto it = alt_prev.find(alpha.strategy[z]);
        if (it == alt_prev.end())
            throw DomainError("alternative sets missing for strategy target " +
                              std::to_string(alpha.strategy[z]));
        per_obs[z] = &it->second;
        combos *= static_cast<std::int64_t>(it->second.vectors.size());
        if (combos > opts.alt_cap)
            throw DomainError("alternative-plan expansion too large (" + std::to_string(combos) +
                              " combinations)");
    }
    int action = -1;
    for (std::size_t a = 0; a < pomdp.actions.size(); ++a)
        if (pomdp.actions[a].name == alpha.action) action = static_cast<int>(a);
    if (action < 0) throw DomainError("unknown action in alpha vector: " + alpha.action);

    std::vector<Vector> out;
    out.reserve(combos);
    std::vector<std::size_t> pick(nz, 0);
    for (;;) {
        std::vector<const Vector*> continuation(nz);
        for (int z = 0; z < nz; ++z) continuation[z] = &per_obs[z]->vectors[pick[z]];
        out.push_back(backup_plan_values(pomdp, action, stage, continuation));
        int z = nz - 1;
        for (; z >= 0; --z) {
            if (++pick[z] < per_obs[z]->vectors.size()) break;
            pick[z] = 0;
        }
        if (z < 0) break;
    }
    return prune_anti_dominated(std::move(out));
}

AltSet alt(const AlphaVector& alpha, const SwitchSet& sw,
           const std::map<int, std::vector<Vector>>& falt_by_member) {
    AltSet as;
    as.source = alpha.id;
    as.stage = sw.stage;
    std::vector<Vector> pool;
    for (int m : sw.members) {
        auto it = falt_by_member.find(m);
        if (it == falt_by_member.end())
            throw DomainError("falt set missing for switch member " + std::to_string(m));
        for (const auto& v : it->second) pool.push_back(v);
    }
    as.vectors = prune_anti_dominated(std::move(pool));
    return as;
}

UBoundComputation u_bound_report(const FactoredPOMDP& pomdp,
                                 const std::vector<ValueFunction>& vfs,
                                 const SchemeAssignment& assignment, const BoundOptions& opts) {
    UBoundComputation comp;
    std::vector<double> per_stage;
    for (const auto& vf : vfs) {
        auto sws = compute_switch_sets(vf, assignment, pomdp.space, opts);
        double stage_b = 0.0;
        for (const auto& [id, sw] : sws) {
            double b = one_stage_bound(vf, sw);
            stage_b = std::max(stage_b, b);
            AlphaBoundDetail d;
            d.stage = vf.stage;
            d.alpha_id = id;
            d.scheme = sw.scheme;
            d.switch_members = sw.members;
            d.one_stage = b;
            comp.report.per_alpha.push_back(std::move(d));
        }
        per_stage.push_back(stage_b);
        comp.switch_sets.push_back(std::move(sws));
    }
    comp.report.bound = u_bound_finite(per_stage, pomdp.discount, opts.u_weighting);
    return comp;
}

EBoundComputation e_bound_finite(const FactoredPOMDP& pomdp,
                                 const std::vector<ValueFunction>& vfs,
                                 const SchemeAssignment& assignment, const BoundOptions& opts) {
    EBoundComputation comp;
    comp.switch_sets.resize(vfs.size());
    comp.alt_sets.resize(vfs.size());
    std::vector<double> per_stage;

    for (std::size_t si = 0; si < vfs.size(); ++si) {
        const ValueFunction& vf = vfs[si];
        auto sws = compute_switch_sets(vf, assignment, pomdp.space, opts);

        std::map<int, std::vector<Vector>> falt_by_id;
        if (si == 0) {
            // Base case: the alternatives are the switch-set vectors themselves.
            for (const auto& v : vf.vectors) falt_by_id[v.id] = {v.values};
        } else {
            for (const auto& v : vf.vectors)
                falt_by_id[v.id] = falt(pomdp, v, vf.stage, comp.alt_sets[si - 1], opts);
        }

        double stage_e = 0.0;
        for (const auto& v : vf.vectors) {
            AltSet as = alt(v, sws.at(v.id), falt_by_id);
            double e = e_contribution(v.values, as.vectors, vf, opts);
            stage_e = std::max(stage_e, e);
            AlphaBoundDetail d;
            d.stage = vf.stage;
            d.alpha_id = v.id;
            d.scheme = sws.at(v.id).scheme;
            d.switch_members = sws.at(v.id).members;
            d.one_stage = one_stage_bound(vf, sws.at(v.id));
            d.e_contribution = e;
            comp.report.per_alpha.push_back(std::move(d));
            comp.alt_sets[si][v.id] = std::move(as);
        }
        per_stage.push_back(stage_e);
        comp.switch_sets[si] = std::move(sws);
    }

    ErrorBound eb;
    eb.kind = BoundKind::EFinite;
    eb.gamma = pomdp.discount;
    eb.stages = static_cast<int>(vfs.size());
    eb.per_stage = per_stage;
    eb.value = per_stage.empty() ? 0.0 : per_stage.back();
    comp.report.bound = eb;
    return comp;
}

BoundReport u_bound_infinite_report(const FactoredPOMDP& pomdp, const ValueFunction& vf_star,
                                    const SchemeAssignment& assignment,
                                    const BoundOptions& opts) {
    BoundReport rep;
    auto sws = compute_switch_sets(vf_star, assignment, pomdp.space, opts);
    double b_star = 0.0;
    for (const auto& [id, sw] : sws) {
        double b = one_stage_bound(vf_star, sw);
        b_star = std::max(b_star, b);
        AlphaBoundDetail d;
        d.stage = kInfiniteStage;
        d.alpha_id = id;
        d.scheme = sw.scheme;
        d.switch_members = sw.members;
        d.one_stage = b;
        rep.per_alpha.push_back(std::move(d));
    }
    rep.bound = u_bound_infinite(b_star, pomdp.discount);
    return rep;
}

EBoundComputation e_bound_infinite(const FactoredPOMDP& pomdp, const ValueFunction& vf_star,
                                   const SchemeAssignment& assignment, const BoundOptions& opts) {
    if (pomdp.discount >= 1.0) throw DomainError("undiscounted infinite bound undefined");
    EBoundComputation comp;
    auto sws = compute_switch_sets(vf_star, assignment, pomdp.space, opts);
    comp.switch_sets.push_back(sws);

    double b_star = 0.0;
    for (const auto& [id, sw] : sws) b_star = std::max(b_star, one_stage_bound(vf_star, sw));
    const double u_star = b_star / (1.0 - pomdp.discount);

    const int k = opts.e_infinite_stages;
    double e_k = 0.0;
    if (k > 0) {
        std::map<int, AltSet> level; // Alt sets after i backup stages
        for (const auto& v : vf_star.vectors) {
            AltSet as;
            as.source = v.id;
            as.stage = kInfiniteStage;
            std::vector<Vector> pool;
            for (int m : sws.at(v.id).members) pool.push_back(vf_star.by_id(m).values);
            as.vectors = prune_anti_dominated(std::move(pool));
            level[v.id] = std::move(as);
        }
        for (int i = 2; i <= k; ++i) {
            std::map<int, std::vector<Vector>> falt_by_id;
            for (const auto& v : vf_star.vectors)
                falt_by_id[v.id] = falt(pomdp, v, 1, level, opts);
            std::map<int, AltSet> next;
            for (const auto& v : vf_star.vectors) next[v.id] = alt(v, sws.at(v.id), falt_by_id);
            level = std::move(next);
        }
        for (const auto& v : vf_star.vectors) {
            double e = e_contribution(v.values, level.at(v.id).vectors, vf_star, opts);
            e_k = std::max(e_k, e);
            AlphaBoundDetail d;
            d.stage = kInfiniteStage;
            d.alpha_id = v.id;
            d.scheme = sws.at(v.id).scheme;
            d.switch_members = sws.at(v.id).members;
            d.one_stage = one_stage_bound(vf_star, sws.at(v.id));
            d.e_contribution = e;
            comp.report.per_alpha.push_back(std::move(d));
        }
        comp.alt_sets.push_back(std::move(level));
    }

    ErrorBound eb;
    eb.kind = BoundKind::EInfinite;
    eb.gamma = pomdp.discount;
    eb.stages = k;
    eb.value = e_k + std::pow(pomdp.discount, k) * u_star;
    eb.per_stage = {e_k, u_star};
    comp.report.bound = eb;
    return comp;
}

} // namespace vdbelief
