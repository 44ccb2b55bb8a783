#include "qfiso/decision.hpp"

namespace qfiso {

namespace {

bool line_or_hyperbolic(const QuadInvariant& q, const PadicContext& ctx) {
    if (q.dim == 1) return true;
    return q.dim == 2 && q.det_class == square_class(Rat(-1), ctx);
}

}  // namespace

Verdict decide_single_class(const MilnorInvariant& inv, const PadicContext& ctx) {
    Verdict v;
    v.m_0 = inv.m_0;
    v.m_1 = inv.m_1;
    v.m_2 = inv.m_2;

    const FactorRecord* self_rec = nullptr;
    std::optional<QuadInvariant> odd_pm1;
    for (const auto& f : inv.factors) {
        if (f.tag == FactorTag::SelfReciprocal && !self_rec) self_rec = &f;
        if (f.tag == FactorTag::PlusOne || f.tag == FactorTag::MinusOne)
            for (const auto& l : f.levels)
                if (l.level % 2 == 1 && l.quad) odd_pm1 = *l.quad;
    }
    int odd_levels = 0, even_levels = 0, single_odd = -1;
    if (self_rec)
        for (const auto& l : self_rec->levels) {
            if (l.level % 2 == 1) {
                ++odd_levels;
                single_odd = l.level;
            } else {
                ++even_levels;
            }
        }
    const bool concentrated = self_rec && odd_levels == 1 && even_levels == 0;

    if (inv.m_1 == 0 && inv.m_0 <= 1) {
        v.single_class = true;
        v.condition = Condition::I;
        return v;
    }
    if (inv.m_1 == 1 && inv.m_0 == 0 && concentrated) {
        v.single_class = true;
        v.condition = Condition::II;
        v.odd_level = single_odd;
        return v;
    }
    if (inv.m_1 == 1 && inv.m_0 == 1 && concentrated && odd_pm1 &&
        line_or_hyperbolic(*odd_pm1, ctx)) {
        v.single_class = true;
        v.condition = Condition::III;
        v.odd_level = single_odd;
        v.residual = odd_pm1;
        return v;
    }

    v.single_class = false;
    v.condition = Condition::None;
    if (inv.m_0 >= 2) {
        v.failing = FailTag::M0TooBig;
    } else if (inv.m_1 == 1 && odd_levels >= 2) {
        v.failing = FailTag::MultipleOddLevels;
    } else if (inv.m_1 == 1 && even_levels >= 1) {
        v.failing = FailTag::EvenLevelSelfReciprocal;
    } else if (inv.m_1 == 1 && concentrated && inv.m_0 == 1) {
        v.failing = FailTag::ResidualTooBig;
        v.residual = odd_pm1;
        v.odd_level = single_odd;
    } else {
        v.failing = FailTag::Mixed;
    }
    return v;
}

const char* condition_name(Condition c) {
    switch (c) {
        case Condition::I: return "(i)";
        case Condition::II: return "(ii)";
        case Condition::III: return "(iii)";
        default: return "none";
    }
}

const char* fail_tag_name(FailTag t) {
    switch (t) {
        case FailTag::EvenLevelSelfReciprocal: return "even-level-self-reciprocal";
        case FailTag::MultipleOddLevels: return "multiple-odd-levels";
        case FailTag::M0TooBig: return "m0-too-big";
        case FailTag::ResidualTooBig: return "residual-too-big";
        case FailTag::Mixed: return "mixed";
        default: return "none";
    }
}

}  // namespace qfiso
