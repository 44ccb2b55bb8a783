#pragma once

#include <optional>

#include "qfiso/milnor.hpp"

namespace qfiso {

enum class Condition { I, II, III, None };

// why the class is not single, when it is not
enum class FailTag {
    None,
    EvenLevelSelfReciprocal,  // the self-reciprocal component has an even level
    MultipleOddLevels,        // the self-reciprocal component has several odd levels
    M0TooBig,                 // two or more odd unipotent levels
    ResidualTooBig,           // the odd +-1 residual is neither a line nor a hyperbolic plane
    Mixed,                    // several self-reciprocal factors, or a combination of the above
};

struct Verdict {
    bool single_class = false;
    Condition condition = Condition::None;
    int m_0 = 0;
    int m_1 = 0;
    int m_2 = 0;
    std::optional<int> odd_level;           // 2l_1+1 for conditions II and III
    std::optional<QuadInvariant> residual;  // the odd +-1 residual class for condition III
    FailTag failing = FailTag::None;
};

// The single-class criterion: the O(V)-conjugacy class of the isometry
// equals the trace of its GL-conjugacy class iff
//   (I)   m_0 <= 1 and m_1 = 0, or
//   (II)  m_0 = 0, m_1 = 1, and the self-reciprocal component sits in one
//         odd level, or
//   (III) m_0 = m_1 = 1, the self-reciprocal component sits in one odd
//         level, and the odd unipotent residual is a line or a hyperbolic
//         plane.
// m_2 is unconstrained.
Verdict decide_single_class(const MilnorInvariant& inv, const PadicContext& ctx);

const char* condition_name(Condition c);
const char* fail_tag_name(FailTag t);

}  // namespace qfiso
