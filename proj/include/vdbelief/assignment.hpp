#pragma once

#include <map>
#include <optional>
#include <utility>

#include "vdbelief/belief.hpp"
#include "vdbelief/solver.hpp"

namespace vdbelief {

// Projection scheme per (stage, alpha id); a uniform scheme is the constant
// assignment. Infinite-horizon entries use stage = kInfiniteStage.
struct SchemeAssignment {
    std::map<std::pair<int, int>, ProjectionScheme> per_alpha;
    std::optional<ProjectionScheme> uniform;

    static SchemeAssignment make_uniform(ProjectionScheme s) {
        SchemeAssignment a;
        a.uniform = std::move(s);
        return a;
    }

    const ProjectionScheme& at(int stage, int alpha_id) const;
    void set(int stage, int alpha_id, ProjectionScheme s) {
        per_alpha[{stage, alpha_id}] = std::move(s);
    }
    bool covers(const ValueFunction& vf) const;
};

} // namespace vdbelief
