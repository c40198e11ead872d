#pragma once

#include "vdbelief/belief.hpp"
#include "vdbelief/model.hpp"

namespace vdbelief {

// Built-in seven-stage manufacturing scenario: machine fault FM, part
// faults F1..F4, stamping stages followed by process/reject decisions.
FactoredPOMDP factory_model();

// Prior with Pr(FM) = p and every part fault false.
BeliefState factory_prior(const FactoredPOMDP& factory, double p_fm);

// The two pair-preserving schemes the experiments compare.
ProjectionScheme factory_scheme_f1f2(const FactoredPOMDP& factory);
ProjectionScheme factory_scheme_f3f4(const FactoredPOMDP& factory);

} // namespace vdbelief
