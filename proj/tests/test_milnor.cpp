#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfiso/milnor.hpp"

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

// free rank-one module over k[x]/(m) plus its dual, carrying the evaluation
// pairing: gram [[0,I],[I,0]], action blockdiag(C, (C^T)^{-1})
IsometryPair dual_pair(const PolyQ& m, const PadicContext& ctx) {
    MatQ c = companion(m);
    auto cti = inverse(c.transpose());
    REQUIRE(cti.has_value());
    int n = m.degree();
    MatQ g(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) g.at(i, n + i) = g.at(n + i, i) = 1;
    return IsometryPair(QuadSpace(g, ctx), blockdiag(c, *cti));
}

void structural_checks(const MilnorAnalysis& an, const IsometryPair& pair) {
    int total = 0;
    for (const auto& b : an.blocks) {
        const auto& fa = an.fac.factors[b.factor_index];
        int deg_eff = fa.poly.degree() * (fa.tag == FactorTag::Paired ? 2 : 1);
        CHECK(b.basis.cols() == b.level * deg_eff * b.rank);
        total += b.basis.cols();
    }
    CHECK(total == pair.dim());
    for (size_t i = 0; i < an.blocks.size(); ++i)
        for (size_t j = i + 1; j < an.blocks.size(); ++j) {
            MatQ cross = an.blocks[i].basis.transpose() * pair.space.gram * an.blocks[j].basis;
            CHECK(cross.is_zero());
        }
}

}  // namespace

TEST_CASE("isometry validation") {
    PadicContext ctx(5, 40);
    QuadSpace plane(MatQ::identity(2), ctx);
    CHECK(check_isometry(plane, M(2, {0, 1, -1, 0})));
    CHECK(!check_isometry(plane, M(2, {2, 0, 0, 1})));

    QuadSpace hyp(M(2, {0, 1, 1, 0}), ctx);
    MatQ scale(2, 2, {Rat(3), Rat(0), Rat(0), Rat(1, 3)});
    CHECK(check_isometry(hyp, scale));
    CHECK_THROWS_AS(check_isometry(plane, MatQ::identity(3)), SizeMismatch);
    CHECK_THROWS_AS(IsometryPair(plane, M(2, {2, 0, 0, 1})), std::invalid_argument);
}

TEST_CASE("eigen decomposition of a reflection") {
    PadicContext ctx(5, 40);
    IsometryPair pair(QuadSpace(MatQ::identity(2), ctx), M(2, {1, 0, 0, -1}));

    auto fac = factor_padic(char_poly(pair.iso), ctx);
    auto comps = primary_decomposition(pair, fac);
    REQUIRE(comps.size() == 2);
    for (const auto& c : comps) {
        CHECK(c.basis.cols() == 1);
        MatQ ann = eval_poly(fac.factors[c.factor_index].poly, pair.iso) * c.basis;
        CHECK(ann.is_zero());
    }

    auto blocks = block_splitting(pair, fac, comps, 0);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].level == 1);
    CHECK(blocks[0].rank == 1);
    residual_form(pair, fac, blocks[0]);
    REQUIRE(blocks[0].residual_quad.has_value());
    CHECK(blocks[0].residual_quad->dim() == 1);

    auto an = analyze(pair);
    structural_checks(an, pair);
    const auto& inv = an.invariant;
    CHECK(inv.m_0 == 2);
    CHECK(inv.m_1 == 0);
    CHECK(inv.m_2 == 0);
    CHECK(inv.m_plus == 1);
    CHECK(inv.m_minus == 1);
    REQUIRE(inv.factors.size() == 2);
    // canonical order sorts x-1 before x+1
    CHECK(inv.factors[0].factor == P({-1, 1}));
    CHECK(inv.factors[1].factor == P({1, 1}));
    for (const auto& f : inv.factors) {
        REQUIRE(f.levels.size() == 1);
        CHECK(f.levels[0].rank == 1);
        REQUIRE(f.levels[0].quad.has_value());
        CHECK(*f.levels[0].quad == QuadInvariant{1, square_class(Rat(1), ctx), 1});
    }
}

TEST_CASE("identity on a line") {
    PadicContext ctx(5, 40);
    IsometryPair pair(QuadSpace(MatQ::identity(1), ctx), MatQ::identity(1));
    auto inv = milnor_invariant(pair);
    CHECK(inv.m_0 == 1);
    CHECK(inv.m_minus == 1);
    CHECK(inv.m_plus == 0);
    REQUIRE(inv.factors.size() == 1);
    CHECK(inv.factors[0].factor == P({-1, 1}));
    REQUIRE(inv.factors[0].levels.size() == 1);
    CHECK(inv.factors[0].levels[0].level == 1);
    CHECK(*inv.factors[0].levels[0].quad == QuadInvariant{1, square_class(Rat(1), ctx), 1});
}

TEST_CASE("irreducible self-reciprocal component over Q_5") {
    PadicContext ctx(5, 40);
    PolyQ q = P({1, -3, 1});
    IsometryPair pair(QuadSpace(M(2, {2, 3, 3, 2}), ctx), companion(q));

    auto an = analyze(pair);
    structural_checks(an, pair);
    const auto& inv = an.invariant;
    CHECK(inv.m_0 == 0);
    CHECK(inv.m_1 == 1);
    CHECK(inv.m_2 == 0);
    REQUIRE(inv.factors.size() == 1);
    CHECK(inv.factors[0].tag == FactorTag::SelfReciprocal);
    REQUIRE(inv.factors[0].levels.size() == 1);
    const auto& lr = inv.factors[0].levels[0];
    CHECK(lr.level == 1);
    CHECK(lr.rank == 1);
    REQUIRE(lr.herm.has_value());
    CHECK(lr.herm->kind == HermCase::Field);
    CHECK(lr.herm->rank == 1);
    CHECK(lr.herm->det_is_norm);
}

TEST_CASE("split pair over Q_11") {
    PadicContext ctx(11, 40);
    PolyQ q = P({1, -3, 1});
    IsometryPair pair(QuadSpace(M(2, {2, 3, 3, 2}), ctx), companion(q));

    auto an = analyze(pair);
    structural_checks(an, pair);
    const auto& inv = an.invariant;
    CHECK(inv.m_0 == 0);
    CHECK(inv.m_1 == 0);
    CHECK(inv.m_2 == 1);
    REQUIRE(inv.factors.size() == 1);
    CHECK(inv.factors[0].tag == FactorTag::Paired);
    REQUIRE(inv.factors[0].levels.size() == 1);
    CHECK(inv.factors[0].levels[0].level == 1);
    CHECK(inv.factors[0].levels[0].rank == 1);
    CHECK(!inv.factors[0].levels[0].quad.has_value());
    CHECK(!inv.factors[0].levels[0].herm.has_value());
    REQUIRE(an.blocks.size() == 1);
    CHECK(an.blocks[0].basis.cols() == 2);
}

TEST_CASE("even unipotent level is hyperbolic") {
    PadicContext ctx(5, 40);
    IsometryPair pair = dual_pair(P({1, -2, 1}), ctx);  // (x-1)^2 and its dual

    auto an = analyze(pair);
    structural_checks(an, pair);
    const auto& inv = an.invariant;
    CHECK(inv.m_minus == 4);
    CHECK(inv.m_0 == 0);  // no odd level present
    REQUIRE(inv.factors.size() == 1);
    REQUIRE(inv.factors[0].levels.size() == 1);
    CHECK(inv.factors[0].levels[0].level == 2);
    CHECK(inv.factors[0].levels[0].rank == 2);
    CHECK(!inv.factors[0].levels[0].quad.has_value());

    // even-level blocks are sums of hyperbolic planes
    const auto& b = an.blocks[0];
    QuadSpace restricted(b.basis.transpose() * pair.space.gram * b.basis, ctx);
    CHECK(witt_index(restricted) == 2);
}

TEST_CASE("level three unipotent block") {
    PadicContext ctx(5, 40);
    MatQ g = M(3, {0, 0, 1, 0, 1, 0, 1, 0, 0});
    MatQ s(3, 3, {Rat(1), Rat(1), Rat(-1, 2), Rat(0), Rat(1), Rat(-1), Rat(0), Rat(0), Rat(1)});
    IsometryPair pair(QuadSpace(g, ctx), s);

    auto an = analyze(pair);
    structural_checks(an, pair);
    const auto& inv = an.invariant;
    CHECK(inv.m_minus == 3);
    CHECK(inv.m_0 == 1);
    REQUIRE(inv.factors.size() == 1);
    REQUIRE(inv.factors[0].levels.size() == 1);
    const auto& lr = inv.factors[0].levels[0];
    CHECK(lr.level == 3);
    CHECK(lr.rank == 1);
    REQUIRE(lr.quad.has_value());
    CHECK(lr.quad->dim == 1);

    // odd-level block = scaled residual plus hyperbolic filler
    const auto& b = an.blocks[0];
    REQUIRE(b.residual_quad.has_value());
    Rat r0 = b.residual_quad->gram.at(0, 0);
    QuadSpace restricted(b.basis.transpose() * pair.space.gram * b.basis, ctx);
    CHECK(quad_invariant(restricted) == diag_invariant({-r0, Rat(1), Rat(-1)}, ctx));

    // residual entries only depend on classes mod q(iso) V
    MatQ qsig = pair.iso - MatQ::identity(3);
    for (int j = 0; j < 3; ++j) {
        std::vector<Rat> w(3, Rat(0));
        w[j] = Rat(2);
        MatQ gens = b.generators;
        auto shift = qsig.apply(w);
        for (int i = 0; i < 3; ++i) gens.at(i, 0) += shift[i];
        MatQ delta = pair.iso - *inverse(pair.iso);
        MatQ t = delta * delta;
        MatQ bm = (t * gens).transpose() * pair.space.gram * gens;
        CHECK(bm.at(0, 0) == r0);
    }
}

TEST_CASE("mixed levels for a unipotent component") {
    PadicContext ctx(5, 40);
    IsometryPair h4 = dual_pair(P({1, -2, 1}), ctx);
    MatQ g = blockdiag(h4.space.gram, MatQ::identity(1));
    MatQ s = blockdiag(h4.iso, MatQ::identity(1));
    IsometryPair pair(QuadSpace(g, ctx), s);

    auto an = analyze(pair);
    structural_checks(an, pair);
    const auto& inv = an.invariant;
    CHECK(inv.m_minus == 5);
    CHECK(inv.m_0 == 1);
    REQUIRE(inv.factors.size() == 1);
    REQUIRE(inv.factors[0].levels.size() == 2);
    CHECK(inv.factors[0].levels[0].level == 1);
    CHECK(inv.factors[0].levels[0].rank == 1);
    REQUIRE(inv.factors[0].levels[0].quad.has_value());
    CHECK(*inv.factors[0].levels[0].quad == QuadInvariant{1, square_class(Rat(1), ctx), 1});
    CHECK(inv.factors[0].levels[1].level == 2);
    CHECK(inv.factors[0].levels[1].rank == 2);
}

TEST_CASE("paired component at level two") {
    PadicContext ctx(11, 40);
    PolyQ q2 = P({1, -3, 1}) * P({1, -3, 1});
    IsometryPair pair = dual_pair(q2, ctx);

    auto an = analyze(pair);
    structural_checks(an, pair);
    const auto& inv = an.invariant;
    CHECK(inv.m_2 == 1);
    CHECK(inv.m_0 == 0);
    CHECK(inv.m_1 == 0);
    REQUIRE(inv.factors.size() == 1);
    CHECK(inv.factors[0].tag == FactorTag::Paired);
    REQUIRE(inv.factors[0].levels.size() == 1);
    CHECK(inv.factors[0].levels[0].level == 2);
    CHECK(inv.factors[0].levels[0].rank == 2);
}

TEST_CASE("mixed reflection and self-reciprocal component") {
    PadicContext ctx(5, 40);
    MatQ g = blockdiag(MatQ::identity(1), M(2, {2, 3, 3, 2}));
    MatQ s = blockdiag(Rat(-1) * MatQ::identity(1), companion(P({1, -3, 1})));
    IsometryPair pair(QuadSpace(g, ctx), s);

    auto an = analyze(pair);
    structural_checks(an, pair);
    const auto& inv = an.invariant;
    CHECK(inv.m_0 == 1);
    CHECK(inv.m_1 == 1);
    CHECK(inv.m_plus == 1);
    CHECK(inv.m_minus == 0);
    REQUIRE(inv.factors.size() == 2);
    CHECK(inv.factors[0].factor == P({1, 1}));
    CHECK(inv.factors[1].tag == FactorTag::SelfReciprocal);
}

TEST_CASE("invariance under base change") {
    PadicContext ctx(5, 40);
    std::vector<IsometryPair> cases = {
        IsometryPair(QuadSpace(MatQ::identity(2), ctx), M(2, {1, 0, 0, -1})),
        IsometryPair(QuadSpace(M(2, {2, 3, 3, 2}), ctx), companion(P({1, -3, 1}))),
        dual_pair(P({1, -2, 1}), ctx),
    };
    // a fixed invertible change of basis with small entries
    auto transform = [](int n, int seed) {
        MatQ t = MatQ::identity(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i < j) t.at(i, j) = (seed + 3 * i + j) % 3 - 1;
                if (i > j) t.at(i, j) = (seed + i + 2 * j) % 2;
            }
        return t;
    };
    int seed = 1;
    for (const auto& pair : cases) {
        MatQ t = transform(pair.dim(), seed++);
        auto tinv = inverse(t);
        REQUIRE(tinv.has_value());
        IsometryPair moved(QuadSpace(t.transpose() * pair.space.gram * t, ctx),
                           *tinv * pair.iso * t);
        CHECK(same_o_class(milnor_invariant(pair), milnor_invariant(moved)));
    }
}

TEST_CASE("conjugacy comparisons") {
    PadicContext ctx(5, 40);
    IsometryPair a(QuadSpace(MatQ::identity(2), ctx), M(2, {1, 0, 0, -1}));
    IsometryPair b(QuadSpace(Rat(5) * MatQ::identity(2), ctx), M(2, {1, 0, 0, -1}));

    CHECK(gl_conjugate(a, b));
    CHECK(is_isometric(a.space, b.space));
    CHECK(!o_conjugate(a, b));
    CHECK(o_conjugate(a, a));

    IsometryPair c(QuadSpace(M(2, {1, 0, 0, 5}), ctx), M(2, {1, 0, 0, -1}));
    CHECK_THROWS_AS(o_conjugate(a, c), AmbientNotIsometric);

    IsometryPair d(QuadSpace(MatQ::identity(2), ctx), MatQ::identity(2));
    CHECK(!gl_conjugate(a, d));
}
