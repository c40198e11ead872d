#include "vdbelief/lattice.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

#include "vdbelief/error.hpp"

namespace vdbelief {

namespace {

std::vector<int> mask_to_subset(std::uint32_t mask) {
    std::vector<int> out;
    for (int v = 0; mask; ++v, mask >>= 1)
        if (mask & 1u) out.push_back(v);
    return out;
}

std::uint32_t subset_to_mask(const std::vector<int>& subset) {
    std::uint32_t m = 0;
    for (int v : subset) m |= (1u << v);
    return m;
}

std::vector<std::uint32_t> closure_of(const ProjectionScheme& scheme) {
    std::set<std::uint32_t> cl;
    for (const auto& marginal : scheme.marginals) {
        std::uint32_t m = subset_to_mask(marginal);
        // All nonempty submasks of m.
        for (std::uint32_t sub = m; sub; sub = (sub - 1) & m) cl.insert(sub);
    }
    return {cl.begin(), cl.end()};
}

ProjectionScheme scheme_from_constraints(const std::vector<std::uint32_t>& constraints,
                                         int num_vars) {
    std::vector<std::vector<int>> maximal;
    for (std::uint32_t m : constraints) {
        bool is_max = true;
        for (std::uint32_t other : constraints)
            if (other != m && (other & m) == m) { is_max = false; break; }
        if (is_max) maximal.push_back(mask_to_subset(m));
    }
    return ProjectionScheme::make(std::move(maximal), num_vars);
}

} // namespace

LatticeNode LatticeNode::root(int num_vars) {
    std::vector<std::vector<int>> singletons;
    for (int v = 0; v < num_vars; ++v) singletons.push_back({v});
    return from_scheme(ProjectionScheme::make(std::move(singletons), num_vars), num_vars);
}

LatticeNode LatticeNode::from_scheme(const ProjectionScheme& scheme, int num_vars) {
    LatticeNode n;
    n.scheme = scheme;
    n.constraints = closure_of(scheme);
    (void)num_vars;
    return n;
}

bool contains(const ProjectionScheme& s1, const ProjectionScheme& s2) {
    for (const auto& m2 : s2.marginals) {
        bool inside = false;
        for (const auto& m1 : s1.marginals) {
            if (std::includes(m1.begin(), m1.end(), m2.begin(), m2.end())) { inside = true; break; }
        }
        if (!inside) return false;
    }
    return true;
}

std::vector<LatticeNode> children(const LatticeNode& node, int num_vars) {
    std::set<std::uint32_t> have(node.constraints.begin(), node.constraints.end());
    std::vector<LatticeNode> kids;
    const std::uint32_t full = (num_vars >= 32) ? ~0u : ((1u << num_vars) - 1u);
    for (std::uint32_t t = 1; t <= full; ++t) {
        if ((t & full) != t || have.count(t)) continue;
        if (std::popcount(t) < 2) continue; // singletons are always present
        bool addable = true;
        for (std::uint32_t sub = (t - 1) & t; sub; sub = (sub - 1) & t)
            if (!have.count(sub)) { addable = false; break; }
        if (!addable) continue;
        LatticeNode kid;
        kid.constraints = node.constraints;
        kid.constraints.insert(std::lower_bound(kid.constraints.begin(), kid.constraints.end(), t),
                               t);
        kid.scheme = scheme_from_constraints(kid.constraints, num_vars);
        kids.push_back(std::move(kid));
    }
    return kids;
}

bool is_practical(const ProjectionScheme& scheme) { return decomposable(scheme); }

std::vector<LatticeNode> enumerate_practical(int num_vars, int max_constraints) {
    std::vector<LatticeNode> out;
    std::set<std::vector<std::uint32_t>> seen;
    std::vector<LatticeNode> frontier{LatticeNode::root(num_vars)};
    seen.insert(frontier.front().constraints);
    while (!frontier.empty()) {
        std::vector<LatticeNode> next;
        for (const auto& node : frontier) {
            if (node.constraint_count() <= max_constraints && is_practical(node.scheme))
                out.push_back(node);
            for (auto& kid : children(node, num_vars)) {
                if (kid.constraint_count() > max_constraints) continue;
                if (seen.insert(kid.constraints).second) next.push_back(std::move(kid));
            }
        }
        frontier = std::move(next);
    }
    std::sort(out.begin(), out.end(), [](const LatticeNode& a, const LatticeNode& b) {
        if (a.constraints.size() != b.constraints.size())
            return a.constraints.size() < b.constraints.size();
        return a.constraints < b.constraints;
    });
    return out;
}

ChildOrdering compare_children(int alpha_id, const LatticeNode& node_a, const LatticeNode& node_b,
                               const ValueFunction& vf, const StateSpace& space,
                               const SwitchOptions& opts) {
    const Vector& src = vf.by_id(alpha_id).values;
    struct Cand { int id; double contrib; };
    std::vector<Cand> cands;
    for (const auto& v : vf.vectors) {
        if (v.id == alpha_id) continue;
        cands.push_back({v.id, componentwise_gap(src, v.values)});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& a, const Cand& b) { return a.contrib > b.contrib; });

    std::vector<Vector> values;
    for (const auto& v : vf.vectors) values.push_back(v.values);
    auto index_of = [&](int id) {
        for (std::size_t i = 0; i < vf.vectors.size(); ++i)
            if (vf.vectors[i].id == id) return static_cast<int>(i);
        throw DomainError("unknown alpha vector id");
    };
    const int i = index_of(alpha_id);
    auto rows_a = marginal_equality_rows(node_a.scheme, space);
    auto rows_b = marginal_equality_rows(node_b.scheme, space);

    for (const auto& c : cands) {
        if (c.contrib <= 0.0) return ChildOrdering::Tie; // both bounds are zero from here on
        const int j = index_of(c.id);
        SwitchOutcome oa = switch_test_with_rows(i, j, values, rows_a, opts);
        SwitchOutcome ob = switch_test_with_rows(i, j, values, rows_b, opts);
        bool in_a = oa.lp_failed || oa.feasible_positive;
        bool in_b = ob.lp_failed || ob.feasible_positive;
        if (in_a && !in_b) return ChildOrdering::BLess;
        if (!in_a && in_b) return ChildOrdering::ALess;
        if (in_a && in_b) return ChildOrdering::Tie; // equal bounds, the shared contribution
    }
    return ChildOrdering::Tie;
}

namespace {

// Score of one (alpha, scheme) pair plus whatever the caller needs later.
struct Scored {
    double score = 0.0;
    SwitchSet sw;
};

using ScoreFn = std::function<Scored(int alpha_id, const ProjectionScheme&)>;

bool practical_descendant_within(const LatticeNode& node, int num_vars, int budget) {
    if (node.constraint_count() > budget) return false;
    if (is_practical(node.scheme)) return true;
    std::set<std::vector<std::uint32_t>> seen{node.constraints};
    std::vector<LatticeNode> frontier{node};
    while (!frontier.empty()) {
        std::vector<LatticeNode> next;
        for (const auto& cur : frontier) {
            for (auto& kid : children(cur, num_vars)) {
                if (kid.constraint_count() > budget) continue;
                if (!seen.insert(kid.constraints).second) continue;
                if (is_practical(kid.scheme)) return true;
                next.push_back(std::move(kid));
            }
        }
        frontier = std::move(next);
    }
    return false;
}

struct PerAlphaOutcome {
    ProjectionScheme scheme;
    double score = 0.0;
    SwitchSet sw;
    std::int64_t examined = 0;
};

PerAlphaOutcome search_alpha(int alpha_id, int stage, int num_vars, int budget,
                             const ScoreFn& score, SearchTrace& trace) {
    LatticeNode node = LatticeNode::root(num_vars);
    Scored cur = score(alpha_id, node.scheme);
    PerAlphaOutcome best{node.scheme, cur.score, cur.sw, 1};

    while (true) {
        if (cur.sw.members.size() <= 1) break;       // singleton switch set
        if (node.constraint_count() >= budget) break; // constraint budget reached

        auto kids = children(node, num_vars);
        std::erase_if(kids, [&](const LatticeNode& k) { return k.constraint_count() > budget; });
        if (kids.empty()) break;

        std::vector<Scored> kid_scores;
        kid_scores.reserve(kids.size());
        for (const auto& kid : kids) kid_scores.push_back(score(alpha_id, kid.scheme));
        best.examined += static_cast<std::int64_t>(kids.size());

        // Children are generated in ascending added-mask order, so a strict
        // comparison realizes the lexicographic tie-break.
        std::size_t pick = 0;
        for (std::size_t k = 1; k < kids.size(); ++k)
            if (kid_scores[k].score < kid_scores[pick].score) pick = k;

        // Prefer a practical child of equal score over a non-practical pick.
        if (!is_practical(kids[pick].scheme)) {
            for (std::size_t k = 0; k < kids.size(); ++k) {
                if (k == pick) continue;
                if (kid_scores[k].score <= kid_scores[pick].score + 1e-12 &&
                    is_practical(kids[k].scheme)) {
                    pick = k;
                    break;
                }
            }
        }

        SearchEdge edge;
        edge.stage = stage;
        edge.alpha_id = alpha_id;
        edge.parent = node.scheme;
        edge.child = kids[pick].scheme;
        edge.parent_score = cur.score;
        edge.child_score = kid_scores[pick].score;
        trace.edges.push_back(edge);

        if (is_practical(kids[pick].scheme)) {
            node = kids[pick];
            cur = kid_scores[pick];
            if (cur.score <= best.score) best = {node.scheme, cur.score, cur.sw, best.examined};
        } else if (practical_descendant_within(kids[pick], num_vars, budget)) {
            node = kids[pick]; // traversable, never returnable
            cur = kid_scores[pick];
        } else {
            // Best practical sibling, else backtrack to the best recorded node.
            std::size_t alt_pick = kids.size();
            for (std::size_t k = 0; k < kids.size(); ++k) {
                if (!is_practical(kids[k].scheme)) continue;
                if (alt_pick == kids.size() || kid_scores[k].score < kid_scores[alt_pick].score)
                    alt_pick = k;
            }
            if (alt_pick == kids.size()) break;
            node = kids[alt_pick];
            cur = kid_scores[alt_pick];
            if (cur.score <= best.score) best = {node.scheme, cur.score, cur.sw, best.examined};
        }
    }
    return best;
}

} // namespace

SearchResult greedy_search(const FactoredPOMDP& pomdp, const std::vector<ValueFunction>& vfs,
                           BoundKind kind, int max_constraints, const SearchOptions& opts) {
    const int n = pomdp.space.num_vars();
    if (max_constraints < n)
        throw DomainError("constraint budget must be at least the variable count");
    if (kind == BoundKind::UInfinite || kind == BoundKind::EInfinite)
        throw DomainError("infinite bound kinds require greedy_search_infinite");

    SearchResult result;
    const StateSpace& space = pomdp.space;
    for (std::size_t si = 0; si < vfs.size(); ++si)
        if (vfs[si].stage != static_cast<int>(si) + 1)
            throw DomainError("value functions must be ordered by stages-to-go 1..k");

    std::vector<std::map<int, AltSet>> alt_sets(vfs.size());

    for (std::size_t si = 0; si < vfs.size(); ++si) {
        const ValueFunction& vf = vfs[si];

        // For the E variant the F-Alt sets of this stage depend only on the
        // stages already processed, so build them once up front.
        std::map<int, std::vector<Vector>> falt_by_id;
        if (kind == BoundKind::EFinite) {
            if (si == 0) {
                for (const auto& v : vf.vectors) falt_by_id[v.id] = {v.values};
            } else {
                for (const auto& v : vf.vectors)
                    falt_by_id[v.id] = falt(pomdp, v, vf.stage, alt_sets[si - 1], opts.bounds);
            }
        }

        ScoreFn score = [&](int alpha_id, const ProjectionScheme& scheme) {
            Scored s;
            s.sw = compute_switch_set(alpha_id, vf, scheme, space, opts.bounds.switch_opts);
            if (kind == BoundKind::UFinite) {
                s.score = one_stage_bound(vf, s.sw);
            } else {
                AltSet as = alt(vf.by_id(alpha_id), s.sw, falt_by_id);
                double e = 0.0;
                for (const auto& v : as.vectors)
                    e = std::max(e, componentwise_gap(vf.by_id(alpha_id).values, v));
                s.score = std::max(e, 0.0);
            }
            return s;
        };

        for (const auto& v : vf.vectors) {
            PerAlphaOutcome out = search_alpha(v.id, vf.stage, n, max_constraints, score,
                                               result.trace);
            result.trace.nodes_examined += out.examined;
            result.trace.max_nodes_per_alpha =
                std::max(result.trace.max_nodes_per_alpha, out.examined);
            result.assignment.set(vf.stage, v.id, out.scheme);

            AlphaBoundDetail d;
            d.stage = vf.stage;
            d.alpha_id = v.id;
            d.scheme = out.scheme;
            d.switch_members = out.sw.members;
            d.one_stage = one_stage_bound(vf, out.sw);
            if (kind == BoundKind::EFinite) d.e_contribution = out.score;
            result.report.per_alpha.push_back(std::move(d));

            if (kind == BoundKind::EFinite)
                alt_sets[si][v.id] = alt(vf.by_id(v.id), out.sw, falt_by_id);

            if (opts.on_progress) opts.on_progress(result.assignment);
        }
    }

    // Final bound under the chosen assignment.
    if (kind == BoundKind::UFinite) {
        std::vector<double> per_stage(vfs.size(), 0.0);
        for (const auto& d : result.report.per_alpha)
            per_stage[d.stage - 1] = std::max(per_stage[d.stage - 1], d.one_stage);
        result.bound = u_bound_finite(per_stage, pomdp.discount, opts.bounds.u_weighting);
    } else {
        std::vector<double> per_stage(vfs.size(), 0.0);
        for (const auto& d : result.report.per_alpha)
            per_stage[d.stage - 1] = std::max(per_stage[d.stage - 1], d.e_contribution);
        ErrorBound eb;
        eb.kind = BoundKind::EFinite;
        eb.gamma = pomdp.discount;
        eb.stages = static_cast<int>(vfs.size());
        eb.per_stage = per_stage;
        eb.value = per_stage.empty() ? 0.0 : per_stage.back();
        result.bound = eb;
    }
    result.report.bound = result.bound;
    return result;
}

SearchResult greedy_search_infinite(const FactoredPOMDP& pomdp, const ValueFunction& vf_star,
                                    BoundKind kind, int max_constraints,
                                    const SearchOptions& opts) {
    const int n = pomdp.space.num_vars();
    if (max_constraints < n)
        throw DomainError("constraint budget must be at least the variable count");
    if (kind == BoundKind::UFinite || kind == BoundKind::EFinite)
        throw DomainError("finite bound kinds require greedy_search");
    if (pomdp.discount >= 1.0) throw DomainError("infinite bound requires discount < 1");

    SearchResult result;
    ScoreFn score = [&](int alpha_id, const ProjectionScheme& scheme) {
        // Both infinite variants descend on the one-shot switching error; the
        // E variant tightens the final bound with Alt backups afterwards.
        Scored s;
        s.sw = compute_switch_set(alpha_id, vf_star, scheme, pomdp.space,
                                  opts.bounds.switch_opts);
        s.score = one_stage_bound(vf_star, s.sw);
        return s;
    };

    double b_star = 0.0;
    for (const auto& v : vf_star.vectors) {
        PerAlphaOutcome out =
            search_alpha(v.id, kInfiniteStage, n, max_constraints, score, result.trace);
        result.trace.nodes_examined += out.examined;
        result.trace.max_nodes_per_alpha = std::max(result.trace.max_nodes_per_alpha, out.examined);
        result.assignment.set(kInfiniteStage, v.id, out.scheme);
        b_star = std::max(b_star, out.score);

        AlphaBoundDetail d;
        d.stage = kInfiniteStage;
        d.alpha_id = v.id;
        d.scheme = out.scheme;
        d.switch_members = out.sw.members;
        d.one_stage = out.score;
        result.report.per_alpha.push_back(std::move(d));
        if (opts.on_progress) opts.on_progress(result.assignment);
    }

    if (kind == BoundKind::UInfinite) {
        result.bound = u_bound_infinite(b_star, pomdp.discount);
    } else {
        EBoundComputation comp = e_bound_infinite(pomdp, vf_star, result.assignment, opts.bounds);
        result.bound = comp.report.bound;
        result.report.per_alpha = comp.report.per_alpha;
    }
    result.report.bound = result.bound;
    return result;
}

} // namespace vdbelief
