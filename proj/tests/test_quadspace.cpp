#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfiso/quadspace.hpp"

using namespace qfiso;

namespace {

MatQ sym(std::initializer_list<std::initializer_list<long>> rows) {
    int n = static_cast<int>(rows.size());
    MatQ m(n, n);
    int i = 0;
    for (auto& r : rows) {
        int j = 0;
        for (long v : r) m.at(i, j++) = Rat(v);
        ++i;
    }
    return m;
}

MatQ diag_mat(std::vector<Rat> d) {
    int n = static_cast<int>(d.size());
    MatQ m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = d[i];
    return m;
}

// deterministic small invertible matrices
MatQ random_gln(int n, unsigned long long& state) {
    auto next = [&state] {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<long>((state >> 33) % 7) - 3;
    };
    while (true) {
        MatQ t(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) t.at(i, j) = Rat(next());
        if (det(t) != 0) return t;
    }
}

}  // namespace

TEST_CASE("matrix layer basics") {
    MatQ a = sym({{1, 2}, {3, 4}});
    CHECK(det(a) == -2);
    auto inv = inverse(a);
    REQUIRE(inv.has_value());
    CHECK(*inv * a == MatQ::identity(2));
    CHECK(rank(sym({{1, 2}, {2, 4}})) == 1);
    auto ker = kernel(sym({{1, 2}, {2, 4}}));
    REQUIRE(ker.size() == 1);
    CHECK(ker[0][0] * 1 + ker[0][1] * 2 == 0);

    auto x = solve(a, {Rat(1), Rat(1)});
    REQUIRE(x.has_value());
    CHECK(a.apply(*x) == std::vector<Rat>{Rat(1), Rat(1)});

    // char poly of companion matrix of x^2 - 3x + 1
    MatQ c(2, 2);
    c.at(0, 1) = Rat(-1);
    c.at(1, 0) = Rat(1);
    c.at(1, 1) = Rat(3);
    CHECK(char_poly(c) == PolyQ({Rat(1), Rat(-3), Rat(1)}));
    CHECK(eval_poly(char_poly(c), c).is_zero());
}

TEST_CASE("diagonalize spec cases") {
    PadicContext c5(5);
    QuadSpace h(sym({{0, 1}, {1, 0}}), c5);
    auto [d, t] = diagonalize(h);
    CHECK(d == std::vector<Rat>{Rat(2), Rat(-1, 2)});
    MatQ check = t.transpose() * h.gram * t;
    CHECK(check == diag_mat(d));

    QuadSpace v2(sym({{1, 1}, {1, 2}}), c5);
    auto [d2, t2] = diagonalize(v2);
    CHECK(d2 == std::vector<Rat>{Rat(1), Rat(1)});
    CHECK(t2.transpose() * v2.gram * t2 == diag_mat(d2));

    QuadSpace deg(sym({{1, 1}, {1, 1}}), c5);
    CHECK_THROWS_AS(diagonalize(deg), DegenerateForm);
}

TEST_CASE("quad_invariant spec cases") {
    PadicContext c5(5);
    auto inv = quad_invariant(QuadSpace(diag_mat({Rat(1), Rat(-1)}), c5));
    CHECK(inv.dim == 2);
    CHECK(inv.det_class == square_class(Rat(-1), c5));
    CHECK(inv.hasse == 1);

    inv = quad_invariant(QuadSpace(diag_mat({Rat(5), Rat(5)}), c5));
    CHECK(inv.det_class.rep == 1);
    CHECK(inv.hasse == 1);
}

TEST_CASE("invariants are congruence invariant") {
    unsigned long long state = 42;
    for (unsigned long p : {2ul, 3ul, 5ul, 13ul}) {
        PadicContext ctx(p);
        std::vector<std::vector<Rat>> forms = {
            {Rat(1), Rat(-1)},
            {Rat(1), Rat(2), Rat(static_cast<long>(p))},
            {Rat(3), Rat(-5), Rat(7), Rat(static_cast<long>(p * p))},
            {Rat(2, 3), Rat(static_cast<long>(p)), Rat(-1), Rat(1), Rat(5)},
        };
        for (auto& d : forms) {
            QuadSpace v(diag_mat(d), ctx);
            QuadInvariant base = quad_invariant(v);
            for (int trial = 0; trial < 4; ++trial) {
                MatQ t = random_gln(v.dim(), state);
                QuadSpace w(t.transpose() * v.gram * t, ctx);
                CHECK(quad_invariant(w) == base);
            }
        }
    }
}

TEST_CASE("orthogonal sum law") {
    for (unsigned long p : {2ul, 5ul}) {
        PadicContext ctx(p);
        std::vector<std::vector<Rat>> forms = {
            {Rat(1)}, {Rat(2), Rat(-5)}, {Rat(static_cast<long>(p)), Rat(3), Rat(-1)}};
        for (auto& da : forms)
            for (auto& db : forms) {
                auto ia = diag_invariant(da, ctx);
                auto ib = diag_invariant(db, ctx);
                std::vector<Rat> dc = da;
                dc.insert(dc.end(), db.begin(), db.end());
                CHECK(diag_invariant(dc, ctx) == orthogonal_sum(ia, ib, ctx));
            }
    }
}

TEST_CASE("isometry decisions") {
    PadicContext c5(5);
    CHECK(is_isometric(QuadSpace(diag_mat({Rat(1), Rat(1)}), c5),
                       QuadSpace(diag_mat({Rat(5), Rat(5)}), c5)));
    CHECK_FALSE(is_isometric(QuadSpace(diag_mat({Rat(1)}), c5),
                             QuadSpace(diag_mat({Rat(5)}), c5)));
    QuadSpace v(diag_mat({Rat(1), Rat(7)}), c5);
    CHECK(is_isometric(v, v));
    PadicContext c7(7);
    CHECK_THROWS_AS(is_isometric(v, QuadSpace(diag_mat({Rat(1), Rat(7)}), c7)),
                    PrimeMismatch);
}

TEST_CASE("witt index and hyperbolic planes") {
    PadicContext c5(5);
    CHECK(witt_index(QuadSpace(diag_mat({Rat(1), Rat(-1)}), c5)) == 1);
    CHECK(is_hyperbolic_plane(QuadSpace(sym({{0, 1}, {1, 0}}), c5)));
    CHECK_FALSE(is_hyperbolic_plane(QuadSpace(diag_mat({Rat(1), Rat(-5)}), c5)));
    CHECK(witt_index(QuadSpace(diag_mat({Rat(1), Rat(1), Rat(1), Rat(1)}), c5)) == 2);
    // anisotropic quaternary: <1, -u, p, -u p> is the unique one
    Rat u(2);  // non-residue mod 5
    CHECK(witt_index(QuadSpace(diag_mat({Rat(1), -u, Rat(5), -u * 5}), c5)) == 0);
    // dim - 2 witt of anisotropic kernel stays in 0..4
    for (unsigned long p : {2ul, 3ul, 5ul}) {
        PadicContext ctx(p);
        std::vector<Rat> d = {Rat(1), Rat(-2), Rat(3), Rat(static_cast<long>(p)), Rat(-1)};
        int w = witt_index(QuadSpace(diag_mat(d), ctx));
        CHECK(5 - 2 * w >= 0);
        CHECK(5 - 2 * w <= 4);
    }
}

TEST_CASE("representation tests") {
    PadicContext c5(5);
    CHECK(represents(QuadSpace(diag_mat({Rat(1), Rat(-1)}), c5), Rat(7)));
    CHECK_FALSE(represents(QuadSpace(diag_mat({Rat(1)}), c5), Rat(5)));
    // diag(1,1) over Q_5 represents 2 iff diag(1,1,-2) is isotropic
    QuadSpace v(diag_mat({Rat(1), Rat(1)}), c5);
    QuadInvariant t = diag_invariant({Rat(1), Rat(1), Rat(-2)}, c5);
    CHECK(represents(v, Rat(2)) == is_isotropic(t, c5));
    CHECK_THROWS_AS(represents(v, Rat(0)), ZeroInput);
    // every nondegenerate form represents everything in dim >= 4 over Q_p
    QuadSpace big(diag_mat({Rat(1), Rat(2), Rat(15), Rat(7)}), c5);
    for (long a : {1, 2, 5, 10, 3, -7}) CHECK(represents(big, Rat(a)));
}

TEST_CASE("form_from_invariant round trip") {
    for (unsigned long p : {2ul, 5ul, 11ul}) {
        PadicContext ctx(p);
        for (int dim = 1; dim <= 5; ++dim)
            for (const Rat& dc : square_class_reps(ctx))
                for (int hasse : {1, -1}) {
                    QuadInvariant inv{dim, square_class(dc, ctx), hasse};
                    if (!invariant_admissible(inv, ctx)) {
                        CHECK_THROWS_AS(form_from_invariant(inv, ctx),
                                        InadmissibleInvariant);
                        continue;
                    }
                    QuadSpace v = form_from_invariant(inv, ctx);
                    CHECK(quad_invariant(v) == inv);
                }
    }
}

TEST_CASE("spec example: (3, class(1), -1) over Q_5") {
    PadicContext c5(5);
    QuadInvariant inv{3, square_class(Rat(1), c5), -1};
    QuadSpace v = form_from_invariant(inv, c5);
    CHECK(quad_invariant(v) == inv);
}
