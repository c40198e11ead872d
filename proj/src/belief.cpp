#include "vdbelief/belief.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "vdbelief/error.hpp"

namespace vdbelief {

namespace {
constexpr double kNormTol = 1e-9;
} // namespace

BeliefState BeliefState::validated(Vector p) {
    double sum = 0.0;
    for (double x : p) {
        if (x < -kNormTol) throw DomainError("belief entry < 0");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kNormTol) throw DomainError("belief does not sum to 1");
    return BeliefState{std::move(p)};
}

double BeliefState::dot(const Vector& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) s += probabilities[i] * v[i];
    return s;
}

ProjectionScheme ProjectionScheme::make(std::vector<std::vector<int>> subsets, int num_vars) {
    std::vector<bool> covered(num_vars, false);
    for (auto& m : subsets) {
        std::sort(m.begin(), m.end());
        m.erase(std::unique(m.begin(), m.end()), m.end());
        if (m.empty()) throw DomainError("projection scheme contains an empty subset");
        for (int v : m) {
            if (v < 0 || v >= num_vars) throw DomainError("projection scheme variable out of range");
            covered[v] = true;
        }
    }
    for (int v = 0; v < num_vars; ++v)
        if (!covered[v]) throw DomainError("projection scheme does not cover every variable");
    // Canonical form: drop subsets contained in another, sort, dedupe.
    std::vector<std::vector<int>> keep;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
        bool contained = false;
        for (std::size_t j = 0; j < subsets.size() && !contained; ++j) {
            if (i == j) continue;
            bool sub = std::includes(subsets[j].begin(), subsets[j].end(), subsets[i].begin(),
                                     subsets[i].end());
            if (sub && (subsets[j].size() > subsets[i].size() || j < i)) contained = true;
        }
        if (!contained) keep.push_back(subsets[i]);
    }
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    return ProjectionScheme{std::move(keep)};
}

bool ProjectionScheme::is_full_joint(int num_vars) const {
    return marginals.size() == 1 && static_cast<int>(marginals[0].size()) == num_vars;
}

std::string ProjectionScheme::label(const std::vector<VariableSpec>& vars) const {
    std::string out;
    for (const auto& m : marginals) {
        if (!out.empty()) out += " ";
        out += "{";
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i) out += ",";
            out += vars[m[i]].name;
        }
        out += "}";
    }
    return out;
}

FactoredBelief FactoredBelief::validated(ProjectionScheme scheme, std::vector<Vector> tables,
                                         const StateSpace& space) {
    if (tables.size() != scheme.marginals.size())
        throw DomainError("factored belief: one table per marginal required");
    for (std::size_t i = 0; i < tables.size(); ++i) {
        if (static_cast<std::int64_t>(tables[i].size()) != space.sub_size(scheme.marginals[i]))
            throw DomainError("factored belief: table size mismatch");
        double sum = 0.0;
        for (double p : tables[i]) {
            if (p < -kNormTol) throw DomainError("factored belief: negative entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kNormTol) throw DomainError("factored belief: table not normalized");
    }
    // Overlapping marginals must agree on shared sub-marginals.
    auto sub_marginal = [&](std::size_t mi, const std::vector<int>& shared) {
        const auto& vars = scheme.marginals[mi];
        Vector out(space.sub_size(shared), 0.0);
        std::vector<int> assign(vars.size(), 0);
        for (std::size_t row = 0; row < tables[mi].size(); ++row) {
            std::int64_t idx = 0;
            for (int v : shared) {
                auto pos = std::find(vars.begin(), vars.end(), v) - vars.begin();
                idx = idx * space.radix(v) + assign[pos];
            }
            out[idx] += tables[mi][row];
            for (int k = static_cast<int>(vars.size()) - 1; k >= 0; --k) {
                if (++assign[k] < space.radix(vars[k])) break;
                assign[k] = 0;
            }
        }
        return out;
    };
    for (std::size_t i = 0; i < tables.size(); ++i) {
        for (std::size_t j = i + 1; j < tables.size(); ++j) {
            std::vector<int> shared;
            std::set_intersection(scheme.marginals[i].begin(), scheme.marginals[i].end(),
                                  scheme.marginals[j].begin(), scheme.marginals[j].end(),
                                  std::back_inserter(shared));
            if (shared.empty()) continue;
            Vector a = sub_marginal(i, shared), b = sub_marginal(j, shared);
            for (std::size_t k = 0; k < a.size(); ++k)
                if (std::abs(a[k] - b[k]) > kNormTol)
                    throw DomainError("factored belief: overlapping marginals disagree");
        }
    }
    return FactoredBelief{std::move(scheme), std::move(tables)};
}

BeliefState exact_update(const BeliefState& b, const FactoredPOMDP& pomdp, int action, int stage,
                         int observation) {
    Matrix t = transition_matrix(pomdp, action, stage);
    Matrix o = observation_matrix(pomdp, action);
    const std::int64_t n = pomdp.space.size();
    Vector next(n, 0.0);
    for (std::int64_t s = 0; s < n; ++s) {
        double bs = b.probabilities[s];
        if (bs == 0.0) continue;
        for (std::int64_t tt = 0; tt < n; ++tt) next[tt] += bs * t.at(s, tt);
    }
    double norm = 0.0;
    for (std::int64_t tt = 0; tt < n; ++tt) {
        next[tt] *= o.at(tt, observation);
        norm += next[tt];
    }
    if (norm <= 0.0) throw DomainError("impossible observation");
    for (double& x : next) x /= norm;
    return BeliefState{std::move(next)};
}

FactoredBelief project(const BeliefState& b, const ProjectionScheme& scheme,
                       const StateSpace& space) {
    std::vector<Vector> tables;
    tables.reserve(scheme.marginals.size());
    for (const auto& m : scheme.marginals) {
        Vector tab(space.sub_size(m), 0.0);
        for (std::int64_t s = 0; s < space.size(); ++s)
            tab[space.sub_index(s, m)] += b.probabilities[s];
        tables.push_back(std::move(tab));
    }
    return FactoredBelief{scheme, std::move(tables)};
}

std::optional<std::vector<int>> rip_ordering(const ProjectionScheme& scheme) {
    const int m = static_cast<int>(scheme.marginals.size());
    std::vector<int> order;
    std::vector<bool> used(m, false);
    std::set<int> placed_union;

    // Backtracking over orderings; marginal counts are tiny at desk scale.
    std::function<bool()> extend = [&]() -> bool {
        if (static_cast<int>(order.size()) == m) return true;
        for (int i = 0; i < m; ++i) {
            if (used[i]) continue;
            std::vector<int> inter;
            for (int v : scheme.marginals[i])
                if (placed_union.count(v)) inter.push_back(v);
            bool ok = order.empty();
            for (int j : order) {
                if (std::includes(scheme.marginals[j].begin(), scheme.marginals[j].end(),
                                  inter.begin(), inter.end())) { ok = true; break; }
            }
            if (!ok) continue;
            used[i] = true;
            order.push_back(i);
            std::vector<int> added;
            for (int v : scheme.marginals[i])
                if (placed_union.insert(v).second) added.push_back(v);
            if (extend()) return true;
            for (int v : added) placed_union.erase(v);
            order.pop_back();
            used[i] = false;
        }
        return false;
    };
    if (extend()) return order;
    return std::nullopt;
}

bool decomposable(const ProjectionScheme& scheme) { return rip_ordering(scheme).has_value(); }

BeliefState reconstruct(const FactoredBelief& f, const StateSpace& space) {
    auto order = rip_ordering(f.scheme);
    if (!order) throw DomainError("scheme not practical");

    const std::int64_t n = space.size();
    Vector joint(n, 1.0);
    std::vector<int> placed; // sorted variable set reconstructed so far
    for (std::size_t step = 0; step < order->size(); ++step) {
        int mi = (*order)[step];
        const auto& vars = f.scheme.marginals[mi];
        const Vector& tab = f.tables[mi];
        std::vector<int> sep;
        std::set_intersection(vars.begin(), vars.end(), placed.begin(), placed.end(),
                              std::back_inserter(sep));
        // Separator marginal of this table.
        Vector sep_marg(space.sub_size(sep), 0.0);
        {
            std::vector<int> assign(vars.size(), 0);
            for (std::size_t row = 0; row < tab.size(); ++row) {
                std::int64_t idx = 0;
                for (int v : sep) {
                    auto pos = std::find(vars.begin(), vars.end(), v) - vars.begin();
                    idx = idx * space.radix(v) + assign[pos];
                }
                sep_marg[idx] += tab[row];
                for (int k = static_cast<int>(vars.size()) - 1; k >= 0; --k) {
                    if (++assign[k] < space.radix(vars[k])) break;
                    assign[k] = 0;
                }
            }
        }
        for (std::int64_t s = 0; s < n; ++s) {
            double num = tab[space.sub_index(s, vars)];
            double den = sep.empty() ? 1.0 : sep_marg[space.sub_index(s, sep)];
            double cond = (den == 0.0) ? 0.0 : num / den; // 0/0 contributes 0
            joint[s] *= cond;
        }
        std::vector<int> merged;
        std::set_union(placed.begin(), placed.end(), vars.begin(), vars.end(),
                       std::back_inserter(merged));
        placed = std::move(merged);
    }
    return BeliefState{std::move(joint)};
}

double kl(const BeliefState& b, const BeliefState& approx, double log_base) {
    double sum = 0.0;
    for (std::size_t i = 0; i < b.probabilities.size(); ++i) {
        double p = b.probabilities[i], q = approx.probabilities[i];
        if (p <= 0.0) continue; // 0 ln 0 = 0
        if (q <= 0.0) return std::numeric_limits<double>::infinity();
        sum += p * std::log(p / q);
    }
    if (log_base > 0.0) sum /= std::log(log_base);
    return sum;
}

double l1(const BeliefState& b, const BeliefState& approx) {
    double sum = 0.0;
    for (std::size_t i = 0; i < b.probabilities.size(); ++i)
        sum += std::abs(b.probabilities[i] - approx.probabilities[i]);
    return sum;
}

double l2(const BeliefState& b, const BeliefState& approx) {
    double sum = 0.0;
    for (std::size_t i = 0; i < b.probabilities.size(); ++i) {
        double d = b.probabilities[i] - approx.probabilities[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

} // namespace vdbelief
