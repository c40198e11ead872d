#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "vdbelief/belief.hpp"
#include "vdbelief/model.hpp"

namespace vdbelief {

inline constexpr double kFeasTol = 1e-7;
inline constexpr double kDomTol = 1e-7;    // dominance threshold
inline constexpr double kSwitchTol = 1e-7; // switch membership threshold

enum class Relation { LessEq, Equal, GreaterEq };

struct LinearProgram {
    struct Row {
        Vector coeffs;
        Relation rel = Relation::LessEq;
        double rhs = 0.0;
    };

    int num_vars = 0;
    Vector objective; // maximize
    std::vector<Row> rows;
    Vector lower; // default 0; -inf marks a free variable
    Vector upper; // default +inf

    static LinearProgram make(int num_vars) {
        LinearProgram lp;
        lp.num_vars = num_vars;
        lp.objective.assign(num_vars, 0.0);
        lp.lower.assign(num_vars, 0.0);
        lp.upper.assign(num_vars, std::numeric_limits<double>::infinity());
        return lp;
    }
    void mark_free(int var) { lower[var] = -std::numeric_limits<double>::infinity(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    double objective = 0.0;
    Vector solution;
    int pivots = 0;
};

// Two-phase dense simplex with Bland's anti-cycling rule. Deterministic.
// Throws NumericalError when the pivot cap is hit. Honors the
// VDBELIEF_LP_DUMP environment variable (directory for text dumps).
LpResult solve_lp(const LinearProgram& lp);

// Fixed-column text dump used for external cross-checking.
void dump_lp(const LinearProgram& lp, std::ostream& os);

struct DominanceOutcome {
    bool dominated = false;
    double margin = 0.0; // optimal d
    std::optional<BeliefState> witness;
};

// alpha is dominated iff max_b min_l b.(alpha - other_l) <= kDomTol.
// `others` must not contain alpha itself (ties with self count as dominated).
DominanceOutcome dominance_test(const Vector& alpha, const std::vector<Vector>& others);

struct SwitchOptions {
    bool include_ties = false; // add candidates with |d*| <= tol as members
};

struct SwitchOutcome {
    bool feasible_positive = false;
    double d_star = 0.0;
    bool lp_failed = false; // numerical failure; caller treats conservatively
};

// The plan-switching LP: variables (b, b', d); b and b' on the simplex,
// alpha_i optimal at b, alpha_j optimal at b', and b'(M=m) = b(M=m) for
// every assignment m of every nonempty subset M of every marginal of the
// scheme (deduplicated). Positive optimum means the agent monitoring under
// `scheme` may select alpha_j while alpha_i is optimal for the true belief.
SwitchOutcome switch_test(int i, int j, const std::vector<Vector>& vectors,
                          const ProjectionScheme& scheme, const StateSpace& space,
                          const SwitchOptions& opts = {});

// The coupling rows of the switch LP over the (b, b', d) variable layout;
// exposed so other linear approximation families can reuse the same test.
std::vector<LinearProgram::Row> marginal_equality_rows(const ProjectionScheme& scheme,
                                                       const StateSpace& space);

SwitchOutcome switch_test_with_rows(int i, int j, const std::vector<Vector>& vectors,
                                    const std::vector<LinearProgram::Row>& coupling_rows,
                                    const SwitchOptions& opts = {});

} // namespace vdbelief
