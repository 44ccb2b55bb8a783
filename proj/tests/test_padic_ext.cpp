#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfiso/padic_ext.hpp"

using namespace qfiso;

namespace {

PolyQ P(std::initializer_list<long> coeffs) {
    std::vector<Rat> c;
    for (long v : coeffs) c.push_back(Rat(v));
    return PolyQ(std::move(c));
}

LocalField base_field(unsigned long p, int prec = 24) {
    return LocalField(P({-1, 1}), PadicContext(p, prec));
}

}  // namespace

TEST_CASE("resultant basics") {
    // Res(x^2-3x+1, x) = product of roots = 1
    CHECK(resultant(P({1, -3, 1}), P({0, 1})) == 1);
    // Res(x - c, f) = f(c); transposing flips by (-1)^{deg f}
    PolyQ f = P({2, 0, 5, 1});
    CHECK(resultant(P({-3, 1}), f) == f(Rat(3)));
    CHECK(resultant(f, P({-3, 1})) == -f(Rat(3)));
    // shared factor
    CHECK(resultant(P({-1, 0, 1}), P({-1, 1})) == 0);
    // multiplicativity in the second argument
    PolyQ g = P({1, 2, 1, 1}), h = P({3, 1});
    CHECK(resultant(f, g * h) == resultant(f, g) * resultant(f, h));
    // swap symmetry up to (-1)^{deg f deg g}
    CHECK(resultant(g, h) == -resultant(h, g));
}

TEST_CASE("unramified quadratic field") {
    PadicContext c13(13, 24);
    LocalField K(P({1, -3, 1}), c13);  // inert at 13
    CHECK(K.e() == 1);
    CHECK(K.f_res() == 2);
    CHECK(fp::degree(K.residue_model()) == 2);
    CHECK(K.uniformizer() == PolyQ::constant(Rat(13)));
    CHECK(K.val(K.embed(Rat(13))) == 1);
    CHECK(K.val(K.gen()) == 0);
    CHECK(K.norm(K.gen()) == 1);
    CHECK(K.trace(K.gen()) == 3);
    // x and its inverse have matching valuation data
    ExtElem xinv = K.inv(K.gen());
    CHECK(K.is_zero(K.sub(K.mul(K.gen(), xinv), K.embed(Rat(1)))));
    CHECK(K.val(xinv) == 0);
}

TEST_CASE("etale trace examples") {
    PolyQ q = P({1, -3, 1});
    CHECK(etale_trace(q, P({1})) == 2);
    CHECK(etale_trace(q, P({0, 1})) == 3);
    CHECK(etale_trace(q, P({0, 0, 1})) == 7);
    // linearity
    PolyQ a = P({2, 5}), b = P({-1, 3});
    CHECK(etale_trace(q, a + b) == etale_trace(q, a) + etale_trace(q, b));
    CHECK(etale_trace(q, Rat(7) * a) == Rat(7) * etale_trace(q, a));
}

TEST_CASE("eisenstein and translated ramified quadratics") {
    PadicContext c5(5, 24);
    LocalField E(P({-5, 0, 1}), c5);  // x^2 - 5
    CHECK(E.e() == 2);
    CHECK(E.f_res() == 1);
    CHECK(E.val(E.gen()) == 1);
    CHECK(E.val(E.embed(Rat(5))) == 2);
    CHECK(E.val(E.uniformizer()) == 1);

    LocalField F(P({1, -3, 1}), c5);  // roots cluster at -1 mod 5, ramified
    CHECK(F.e() == 2);
    CHECK(F.f_res() == 1);
    CHECK(F.val(F.embed(Rat(5))) == 2);
    CHECK(F.val(F.add(F.gen(), F.embed(Rat(1)))) == 1);
    CHECK(F.val(F.uniformizer()) == 1);
}

TEST_CASE("unramified quartic over Q_3") {
    PadicContext c3(3, 20);
    LocalField K(P({2, 0, 0, 2, 1}), c3);  // x^4 + 2x^3 + 2, irreducible mod 3
    CHECK(K.e() == 1);
    CHECK(K.f_res() == 4);
    CHECK(K.e() * K.f_res() == K.degree());
    CHECK(K.val(K.gen()) == 0);
    CHECK(K.val(K.embed(Rat(3))) == 1);
}

TEST_CASE("reducible or wild moduli are rejected") {
    PadicContext c5(5, 20);
    CHECK_THROWS_AS(LocalField(P({-1, 0, 1}), c5), UncertifiedField);   // splits
    CHECK_THROWS_AS(LocalField(P({4, -5, 1}), c5), UncertifiedField);   // (x-1)(x-4)
}

TEST_CASE("norm_test spec cases over Q_5 and Q_11") {
    LocalField q5 = base_field(5);
    CHECK(norm_test(q5.embed(Rat(4)), q5.embed(Rat(5)), q5));
    CHECK_FALSE(norm_test(q5.embed(Rat(2)), q5.embed(Rat(5)), q5));
    LocalField q11 = base_field(11);
    CHECK(norm_test(q11.embed(Rat(5)), q11.embed(Rat(9)), q11));
    CHECK_THROWS_AS(norm_test(q5.embed(Rat(0)), q5.embed(Rat(5)), q5), ZeroInput);
}

TEST_CASE("base-field hilbert matches the closed form") {
    for (unsigned long p : {3ul, 5ul, 7ul}) {
        LocalField F = base_field(p);
        PadicContext ctx(p, 24);
        for (long a : {1, 2, 3, -1, 5, 10, -6})
            for (long b : {1, 2, -3, 7, 15, -10}) {
                INFO("p=", p, " a=", a, " b=", b);
                CHECK(F.hilbert(F.embed(Rat(a)), F.embed(Rat(b))) ==
                      hilbert_symbol(Rat(a), Rat(b), ctx));
            }
    }
}

TEST_CASE("two-adic base-field hilbert via conic search") {
    LocalField F = base_field(2, 16);
    PadicContext c2(2, 16);
    for (long a : {1, -1, 2, 5, -10})
        for (long b : {1, 3, -2, 7}) {
            INFO("a=", a, " b=", b);
            CHECK(F.hilbert(F.embed(Rat(a)), F.embed(Rat(b))) ==
                  hilbert_symbol(Rat(a), Rat(b), c2));
        }
}

TEST_CASE("squares in extensions") {
    PadicContext c13(13, 24);
    LocalField K(P({1, -3, 1}), c13);
    ExtElem x = K.gen();
    CHECK(K.is_square(K.mul(x, x)));
    CHECK_FALSE(K.is_square(K.mul(K.embed(Rat(13)), x)));
    // the norm form is surjective onto units up to squares: u or u*nonres
    PadicContext c5(5, 24);
    LocalField E(P({-5, 0, 1}), c5);
    CHECK(K.is_square(K.embed(Rat(-1))) == true);  // -1 = x^2 has order.. check via chi
    CHECK(E.is_square(E.embed(Rat(5))));           // 5 = x^2
    CHECK_FALSE(E.is_square(E.gen()));             // odd valuation

    PadicContext c2(2, 14);
    LocalField T(P({-2, 0, 1}), c2);  // Q_2(sqrt 2)
    CHECK(T.e() == 2);
    CHECK(T.is_square(T.embed(Rat(2))));
    CHECK(T.is_square(T.embed(Rat(17))));
    CHECK_FALSE(T.is_square(T.embed(Rat(5))));
    CHECK_FALSE(T.is_square(T.gen()));
}

TEST_CASE("norm group has index at most two") {
    // over the unramified quadratic F/Q_5, with delta a uniformizer twist
    PadicContext c5(5, 20);
    LocalField F(P({2, 1, 1}), c5);  // x^2 + x + 2, irreducible mod 5
    CHECK(F.f_res() == 2);
    ExtElem delta = F.mul(F.embed(Rat(5)), F.gen());  // odd valuation: nonsquare
    CHECK_FALSE(F.is_square(delta));
    std::vector<ExtElem> sample = {
        F.embed(Rat(1)), F.embed(Rat(2)), F.embed(Rat(5)),  F.gen(),
        F.add(F.gen(), F.embed(Rat(3))), F.embed(Rat(-1)),  F.mul(F.gen(), F.embed(Rat(10))),
    };
    bool seen_nonnorm = false;
    for (const ExtElem& d1 : sample)
        for (const ExtElem& d2 : sample) {
            bool n1 = norm_test(d1, delta, F);
            bool n2 = norm_test(d2, delta, F);
            bool n12 = norm_test(F.mul(d1, d2), delta, F);
            CHECK(n12 == (n1 == n2));
            seen_nonnorm = seen_nonnorm || !n1 || !n2;
        }
    CHECK(seen_nonnorm);  // index exactly two: some non-norm exists
}

TEST_CASE("norm_test agrees with conic_solve at odd residue characteristic") {
    PadicContext c3(3, 20);
    LocalField F(P({-1, 1, 1}), c3);  // x^2 + x - 1, irreducible mod 3
    std::vector<ExtElem> ds = {F.embed(Rat(2)), F.gen(), F.embed(Rat(3)),
                               F.add(F.gen(), F.embed(Rat(1)))};
    std::vector<ExtElem> deltas = {F.embed(Rat(3)), F.mul(F.embed(Rat(3)), F.gen()),
                                   F.gen()};
    for (const ExtElem& d : ds)
        for (const ExtElem& delta : deltas) {
            bool nt = norm_test(d, delta, F);
            auto wit = conic_solve(F.embed(Rat(1)), F.sub(PolyQ(), delta),
                                   F.sub(PolyQ(), d), F);
            CHECK(nt == wit.has_value());
            if (wit) {
                // verify x^2 - delta y^2 - d z^2 = 0 to working depth
                ExtElem r = F.sub(F.mul(wit->x, wit->x),
                                  F.add(F.mul(delta, F.mul(wit->y, wit->y)),
                                        F.mul(d, F.mul(wit->z, wit->z))));
                CHECK(F.is_zero(r));
                bool nonzero = !F.is_zero(wit->x) || !F.is_zero(wit->y) || !F.is_zero(wit->z);
                CHECK(nonzero);
            }
        }
}

TEST_CASE("conic_solve spec cases") {
    LocalField q5 = base_field(5);
    auto w1 = conic_solve(q5.embed(Rat(1)), q5.embed(Rat(-1)), q5.embed(Rat(-1)), q5);
    REQUIRE(w1.has_value());
    ExtElem r = q5.add(q5.mul(w1->x, w1->x),
                       q5.sub(PolyQ(), q5.add(q5.mul(w1->y, w1->y), q5.mul(w1->z, w1->z))));
    CHECK(q5.is_zero(r));
    CHECK_FALSE(conic_solve(q5.embed(Rat(1)), q5.embed(Rat(-2)), q5.embed(Rat(-5)), q5)
                    .has_value());
    LocalField q7 = base_field(7);
    CHECK(conic_solve(q7.embed(Rat(1)), q7.embed(Rat(-1)), q7.embed(Rat(-7)), q7)
              .has_value());
}

TEST_CASE("involutive algebra on a self-reciprocal field") {
    PadicContext c13(13, 24);
    PolyQ q = P({1, -3, 1});
    InvolutiveAlgebra E = InvolutiveAlgebra::field(q, c13);
    CHECK_FALSE(E.split());
    CHECK(E.dim() == 2);
    // iota is an involution sending x to x^{-1}
    ExtElem x = PolyQ::x();
    ExtElem ix = E.apply_iota(x);
    CHECK(E.reduce(E.mul(ix, x)) == PolyQ::constant(Rat(1)));
    CHECK(E.apply_iota(ix) == x);
    // trace is iota-invariant
    for (const ExtElem& a : {P({1, 2}), P({-3, 5}), P({0, 1})})
        CHECK(E.trace(E.apply_iota(a)) == E.trace(a));
    // fixed-field data: q(x) = x g(x + 1/x) with g = y - 3, delta = y^2 - 4 mod g
    CHECK(E.fixed_g() == P({-3, 1}));
    CHECK(E.fixed_delta() == PolyQ::constant(Rat(5)));
}

TEST_CASE("involutive algebra on a quartic, descent data feeds a field") {
    PadicContext c5(5, 24);
    // q(x) = x^4 - 3x^3 + x^2 - 3x + 1: self-reciprocal, g = y^2 - 3y - 1
    PolyQ q = P({1, -3, 1, -3, 1});
    InvolutiveAlgebra E = InvolutiveAlgebra::field(q, c5);
    CHECK(E.fixed_g() == P({-1, -3, 1}));
    ExtElem x = PolyQ::x();
    ExtElem z = E.reduce(x + E.apply_iota(x));  // x + 1/x, a fixed element
    CHECK(E.apply_iota(z) == z);
    // z satisfies g
    ExtElem gz = E.reduce(E.mul(z, z) - Rat(3) * z - PolyQ::constant(Rat(1)));
    CHECK(gz.is_zero());
    // delta is (z^2 - 4) expressed in the fixed field
    LocalField F(E.fixed_g(), c5);  // y^2 - 3y - 1 irreducible over Q_5
    CHECK(F.degree() == 2);
}

TEST_CASE("split involutive algebra") {
    PadicContext c11(11, 24);
    // over Q_11, x^2 - 3x + 1 splits; build the split algebra from a factor
    auto fac = factor_padic(P({1, -3, 1}), c11);
    REQUIRE(fac.factors.size() == 2);
    REQUIRE(fac.factors[0].tag == FactorTag::Paired);
    InvolutiveAlgebra E = InvolutiveAlgebra::split_pair(fac.factors[0].poly, c11);
    CHECK(E.split());
    CHECK(E.dim() == 2);
    ExtElem x = PolyQ::x();
    CHECK(E.reduce(E.mul(E.apply_iota(x), x)) == PolyQ::constant(Rat(1)));
    // trace additivity over the two components: components of a are scalars
    for (const ExtElem& a : {P({1, 2}), P({4, -7})}) {
        ExtElem c0 = E.component(a, 0), c1 = E.component(a, 1);
        REQUIRE(c0.degree() <= 0);
        REQUIRE(c1.degree() <= 0);
        Rat diff = E.trace(a) - c0.coeff(0) - c1.coeff(0);
        if (diff != 0) CHECK(valuation(diff, 11) >= 10);
        CHECK(E.trace(E.apply_iota(a)) == E.trace(a));
    }
}

TEST_CASE("involutive algebra input validation") {
    PadicContext c5(5, 24);
    CHECK_THROWS_AS(InvolutiveAlgebra::field(P({2, 1, 1}), c5), std::invalid_argument);
    CHECK_THROWS_AS(InvolutiveAlgebra::field(P({-1, 3, 1}), c5), std::invalid_argument);
    CHECK_THROWS_AS(InvolutiveAlgebra::split_pair(P({1, -3, 1}), c5), std::invalid_argument);
}
