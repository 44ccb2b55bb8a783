#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfiso/decision.hpp"

using namespace qfiso;

namespace {

PolyQ P(std::initializer_list<long> coeffs) {
    std::vector<Rat> c;
    for (long v : coeffs) c.emplace_back(v);
    return PolyQ(std::move(c));
}

MatQ M(int n, std::initializer_list<long> vals) {
    std::vector<Rat> d;
    for (long v : vals) d.emplace_back(v);
    return MatQ(n, n, std::move(d));
}

MatQ companion(const PolyQ& q) {
    int n = q.degree();
    MatQ a(n, n);
    for (int i = 0; i + 1 < n; ++i) a.at(i + 1, i) = 1;
    for (int i = 0; i < n; ++i) a.at(i, n - 1) = -q.coeff(i);
    return a;
}

MatQ blockdiag(const MatQ& a, const MatQ& b) {
    MatQ r(a.rows() + b.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) r.at(a.rows() + i, a.cols() + j) = b.at(i, j);
    return r;
}

IsometryPair dual_pair(const PolyQ& m, const PadicContext& ctx) {
    MatQ c = companion(m);
    auto cti = inverse(c.transpose());
    REQUIRE(cti.has_value());
    int n = m.degree();
    MatQ g(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) g.at(i, n + i) = g.at(n + i, i) = 1;
    return IsometryPair(QuadSpace(g, ctx), blockdiag(c, *cti));
}

// synthetic invariant builders for branch coverage of the pure classifier
LevelRecord level_rec(int level, int rank) { return {level, rank, std::nullopt, std::nullopt}; }

FactorRecord pm1_rec(bool plus, std::vector<LevelRecord> levels, const PadicContext& ctx) {
    FactorRecord f;
    f.factor = plus ? P({1, 1}) : P({-1, 1});
    f.tag = plus ? FactorTag::PlusOne : FactorTag::MinusOne;
    for (auto& l : levels) {
        if (l.level % 2 == 1 && !l.quad)
            l.quad = QuadInvariant{l.rank, square_class(Rat(1), ctx), 1};
        f.levels.push_back(l);
        f.multiplicity += l.level * l.rank;
    }
    return f;
}

FactorRecord self_rec(std::vector<LevelRecord> levels) {
    FactorRecord f;
    f.factor = P({1, -3, 1});
    f.tag = FactorTag::SelfReciprocal;
    for (auto& l : levels) {
        if (!l.herm) l.herm = HermInvariant{HermCase::Field, l.rank, true};
        f.levels.push_back(l);
        f.multiplicity += l.level * l.rank;
    }
    return f;
}

MilnorInvariant synth(std::vector<FactorRecord> factors) {
    MilnorInvariant inv;
    for (auto& f : factors) {
        if (f.tag == FactorTag::PlusOne || f.tag == FactorTag::MinusOne)
            for (const auto& l : f.levels)
                if (l.level % 2 == 1) ++inv.m_0;
        if (f.tag == FactorTag::SelfReciprocal) ++inv.m_1;
        if (f.tag == FactorTag::Paired) ++inv.m_2;
        inv.factors.push_back(std::move(f));
    }
    return inv;
}

}  // namespace

TEST_CASE("condition (i): unipotent and trivial cases") {
    PadicContext ctx(5, 40);
    IsometryPair id1(QuadSpace(MatQ::identity(1), ctx), MatQ::identity(1));
    auto v = decide_single_class(milnor_invariant(id1), ctx);
    CHECK(v.single_class);
    CHECK(v.condition == Condition::I);
    CHECK(v.m_0 == 1);

    // even unipotent level only: m_0 = 0
    auto v2 = decide_single_class(milnor_invariant(dual_pair(P({1, -2, 1}), ctx)), ctx);
    CHECK(v2.single_class);
    CHECK(v2.condition == Condition::I);
    CHECK(v2.m_0 == 0);
}

TEST_CASE("condition (ii): one self-reciprocal factor in one odd level") {
    PadicContext ctx(5, 40);
    IsometryPair pair(QuadSpace(M(2, {2, 3, 3, 2}), ctx), companion(P({1, -3, 1})));
    auto v = decide_single_class(milnor_invariant(pair), ctx);
    CHECK(v.single_class);
    CHECK(v.condition == Condition::II);
    CHECK(v.m_1 == 1);
    REQUIRE(v.odd_level.has_value());
    CHECK(*v.odd_level == 1);
}

TEST_CASE("condition (iii): reflection plus self-reciprocal component") {
    PadicContext ctx(5, 40);
    MatQ g = blockdiag(MatQ::identity(1), M(2, {2, 3, 3, 2}));
    MatQ s = blockdiag(Rat(-1) * MatQ::identity(1), companion(P({1, -3, 1})));
    IsometryPair pair(QuadSpace(g, ctx), s);
    auto v = decide_single_class(milnor_invariant(pair), ctx);
    CHECK(v.single_class);
    CHECK(v.condition == Condition::III);
    REQUIRE(v.odd_level.has_value());
    CHECK(*v.odd_level == 1);
    REQUIRE(v.residual.has_value());
    CHECK(*v.residual == QuadInvariant{1, square_class(Rat(1), ctx), 1});
}

TEST_CASE("failure: two odd unipotent levels") {
    PadicContext ctx(5, 40);
    IsometryPair pair(QuadSpace(MatQ::identity(2), ctx), M(2, {1, 0, 0, -1}));
    auto v = decide_single_class(milnor_invariant(pair), ctx);
    CHECK(!v.single_class);
    CHECK(v.condition == Condition::None);
    CHECK(v.failing == FailTag::M0TooBig);
    CHECK(v.m_0 == 2);
}

TEST_CASE("failure: self-reciprocal component at an even level") {
    PadicContext ctx(5, 40);
    PolyQ q2 = P({1, -3, 1}) * P({1, -3, 1});
    auto v = decide_single_class(milnor_invariant(dual_pair(q2, ctx)), ctx);
    CHECK(!v.single_class);
    CHECK(v.failing == FailTag::EvenLevelSelfReciprocal);
    CHECK(v.m_1 == 1);
    CHECK(v.m_0 == 0);
}

TEST_CASE("synthetic coverage of the remaining clauses") {
    PadicContext ctx(5, 40);

    // two odd levels of the self-reciprocal factor
    auto v1 = decide_single_class(synth({self_rec({level_rec(1, 1), level_rec(3, 1)})}), ctx);
    CHECK(v1.failing == FailTag::MultipleOddLevels);

    // odd plus even level: the even level already breaks the criterion, but
    // several odd levels take precedence in the diagnostic
    auto v2 = decide_single_class(synth({self_rec({level_rec(1, 1), level_rec(2, 1)})}), ctx);
    CHECK(v2.failing == FailTag::EvenLevelSelfReciprocal);

    // residual neither a line nor a hyperbolic plane (at p = 5 the class of
    // -1 is trivial, so a non-residue determinant is needed here)
    LevelRecord big{1, 2, QuadInvariant{2, square_class(Rat(2), ctx), 1}, std::nullopt};
    auto v3 = decide_single_class(
        synth({pm1_rec(false, {big}, ctx), self_rec({level_rec(1, 1)})}), ctx);
    CHECK(v3.failing == FailTag::ResidualTooBig);
    CHECK(!v3.single_class);

    // a hyperbolic-plane residual is fine
    LevelRecord hyp{1, 2, QuadInvariant{2, square_class(Rat(-1), ctx), 1}, std::nullopt};
    auto v4 = decide_single_class(
        synth({pm1_rec(false, {hyp}, ctx), self_rec({level_rec(1, 1)})}), ctx);
    CHECK(v4.single_class);
    CHECK(v4.condition == Condition::III);

    // two self-reciprocal factors
    auto v5 = decide_single_class(synth({self_rec({level_rec(1, 1)}),
                                         self_rec({level_rec(1, 1)})}), ctx);
    CHECK(v5.failing == FailTag::Mixed);

    // m_0 = 1 with m_1 = 1 but the self-reciprocal part not concentrated
    auto v6 = decide_single_class(
        synth({pm1_rec(true, {level_rec(1, 1)}, ctx), self_rec({level_rec(2, 1)})}), ctx);
    CHECK(!v6.single_class);
    CHECK(v6.failing == FailTag::EvenLevelSelfReciprocal);
}

TEST_CASE("exactly one clause fires and paired blocks never flip a verdict") {
    PadicContext ctx(5, 40);
    std::vector<IsometryPair> pairs = {
        IsometryPair(QuadSpace(MatQ::identity(1), ctx), MatQ::identity(1)),
        IsometryPair(QuadSpace(M(2, {2, 3, 3, 2}), ctx), companion(P({1, -3, 1}))),
        IsometryPair(QuadSpace(MatQ::identity(2), ctx), M(2, {1, 0, 0, -1})),
    };
    IsometryPair paired = dual_pair(PolyQ::linear_root(Rat(2)), ctx);
    auto vp = decide_single_class(milnor_invariant(paired), ctx);
    CHECK(vp.m_2 == 1);

    for (const auto& pr : pairs) {
        auto v = decide_single_class(milnor_invariant(pr), ctx);
        CHECK(v.single_class == (v.condition != Condition::None));
        CHECK((v.failing == FailTag::None) == v.single_class);

        IsometryPair bigger(
            QuadSpace(blockdiag(pr.space.gram, paired.space.gram), ctx),
            blockdiag(pr.iso, paired.iso));
        auto vb = decide_single_class(milnor_invariant(bigger), ctx);
        CHECK(vb.single_class == v.single_class);
        CHECK(vb.condition == v.condition);
        CHECK(vb.m_2 == v.m_2 + 1);
    }
}
