#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vdbelief/assignment.hpp"
#include "vdbelief/lp.hpp"
#include "vdbelief/solver.hpp"

namespace vdbelief {

// Superset switch set computed by the marginal-equality LP.
struct SwitchSet {
    int source = 0;
    int stage = 0;
    ProjectionScheme scheme;
    std::vector<int> members;           // always contains source
    std::vector<int> failed_candidates; // LP failures, conservatively included
};

// Lower-surface set of value vectors of the plans that might actually get
// executed; the vectors carry no action or strategy metadata.
struct AltSet {
    int source = 0;
    int stage = 0;
    std::vector<Vector> vectors;
};

enum class BoundKind { UFinite, UInfinite, EFinite, EInfinite };

enum class UWeighting { Paper, Time }; // gamma^i vs gamma^(k-i) per-stage weights

struct ErrorBound {
    BoundKind kind = BoundKind::UFinite;
    double value = 0.0;
    std::vector<double> per_stage; // index 0 = 1 stage-to-go
    double gamma = 1.0;
    int stages = 0;
};

struct BoundOptions {
    SwitchOptions switch_opts;
    UWeighting u_weighting = UWeighting::Paper;
    bool e_restrict_to_region = false; // tighten E over the source's optimality region
    std::int64_t alt_cap = 1000000;
    int e_infinite_stages = 3;
    int threads = 1;
};

struct AlphaBoundDetail {
    int stage = 0;
    int alpha_id = 0;
    ProjectionScheme scheme;
    std::vector<int> switch_members;
    double one_stage = 0.0;      // B
    double e_contribution = 0.0; // per-alpha E (E bounds only)
};

struct BoundReport {
    ErrorBound bound;
    std::vector<AlphaBoundDetail> per_alpha;
};

SwitchSet compute_switch_set(int alpha_id, const ValueFunction& vf, const ProjectionScheme& scheme,
                             const StateSpace& space, const SwitchOptions& opts = {},
                             const std::vector<int>* candidate_order = nullptr);

// All switch sets of one stage under an assignment; candidates for distinct
// sources run in parallel when opts.threads > 1.
std::map<int, SwitchSet> compute_switch_sets(const ValueFunction& vf,
                                             const SchemeAssignment& assignment,
                                             const StateSpace& space, const BoundOptions& opts);

// B_S(alpha) = max over members of max_s (alpha(s) - member(s)); >= 0.
double one_stage_bound(const ValueFunction& vf, const SwitchSet& sw);

ErrorBound u_bound_finite(const std::vector<double>& per_stage_b, double gamma,
                          UWeighting weighting = UWeighting::Paper);

ErrorBound u_bound_infinite(double b_star, double gamma);

// Values of all plans <action(alpha), sigma'> with sigma'(z) drawn from the
// pruned Alt set of alpha's continuation, anti-dominance pruned.
std::vector<Vector> falt(const FactoredPOMDP& pomdp, const AlphaVector& alpha, int stage,
                         const std::map<int, AltSet>& alt_prev, const BoundOptions& opts = {});

// Union of the falt results over the switch-set members, anti-dominance pruned.
AltSet alt(const AlphaVector& alpha, const SwitchSet& sw,
           const std::map<int, std::vector<Vector>>& falt_by_member);

struct UBoundComputation {
    BoundReport report;
    std::vector<std::map<int, SwitchSet>> switch_sets; // per stage (index stage-1)
};

UBoundComputation u_bound_report(const FactoredPOMDP& pomdp,
                                 const std::vector<ValueFunction>& vfs,
                                 const SchemeAssignment& assignment, const BoundOptions& opts = {});

struct EBoundComputation {
    BoundReport report;
    std::vector<std::map<int, SwitchSet>> switch_sets;
    std::vector<std::map<int, AltSet>> alt_sets;
};

EBoundComputation e_bound_finite(const FactoredPOMDP& pomdp,
                                 const std::vector<ValueFunction>& vfs,
                                 const SchemeAssignment& assignment, const BoundOptions& opts = {});

// Switch sets computed once on the infinite-horizon set, k stages of Alt
// backups seeded from it, then E* = E_k + gamma^k U*.
EBoundComputation e_bound_infinite(const FactoredPOMDP& pomdp, const ValueFunction& vf_star,
                                   const SchemeAssignment& assignment,
                                   const BoundOptions& opts = {});

BoundReport u_bound_infinite_report(const FactoredPOMDP& pomdp, const ValueFunction& vf_star,
                                    const SchemeAssignment& assignment,
                                    const BoundOptions& opts = {});

// max_s (a(s) - b(s)); the componentwise error contribution.
double componentwise_gap(const Vector& a, const Vector& b);

} // namespace vdbelief
