#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qfiso/padic.hpp"

using namespace qfiso;

TEST_CASE("valuations and unit parts") {
    PadicContext c5(5);
    CHECK(valuation(Rat(50), 5) == 2);
    CHECK(valuation(Rat(3, 5), 5) == -1);
    CHECK(valuation(Rat(1), 7) == 0);
    auto [v, u] = split_unit(Rat(50), 5);
    CHECK(v == 2);
    CHECK(u == 2);
    CHECK_THROWS_AS(valuation(Rat(0), 5), ZeroInput);
}

TEST_CASE("padic_profile spec cases") {
    PadicContext c5(5), c7(7);
    auto pr = padic_profile(Rat(50), c5);
    CHECK(pr.valuation == 2);
    CHECK(pr.unit_part == 2);
    CHECK(pr.cls.rep == 2);  // 2 = least non-residue mod 5

    pr = padic_profile(Rat(1), c7);
    CHECK(pr.valuation == 0);
    CHECK(pr.unit_part == 1);
    CHECK(pr.cls.rep == 1);

    pr = padic_profile(Rat(3, 5), c5);
    CHECK(pr.valuation == -1);
    CHECK(pr.unit_part == 3);
    CHECK(pr.cls.rep == 10);  // 3 a non-residue mod 5, odd valuation: u*p = 10
}

TEST_CASE("square classes partition correctly") {
    for (unsigned long p : {3ul, 5ul, 7ul, 11ul, 13ul}) {
        PadicContext ctx(p);
        for (long a = -30; a <= 30; ++a) {
            if (a == 0) continue;
            for (long c = 1; c <= 7; ++c) {
                CHECK(square_class(Rat(a), ctx) == square_class(Rat(a * c * c), ctx));
            }
        }
    }
    PadicContext c2(2);
    // mod-8 classification of 2-adic units
    CHECK(square_class(Rat(17), c2).rep == 1);
    CHECK(square_class(Rat(3), c2).rep == -5);
    CHECK(square_class(Rat(5), c2).rep == 5);
    CHECK(square_class(Rat(7), c2).rep == -1);
    CHECK(square_class(Rat(6), c2).rep == 2 * -5);
    CHECK(is_square(Rat(9, 49), c2));
}

TEST_CASE("hilbert symbol spec cases") {
    PadicContext c5(5), c2(2);
    CHECK(hilbert_symbol(Rat(2), Rat(5), c5) == -1);
    CHECK(hilbert_symbol(Rat(1), Rat(7), c5) == 1);
    CHECK(hilbert_symbol(Rat(1), Rat(-3), c2) == 1);
    CHECK(hilbert_symbol(Rat(-1), Rat(-1), c2) == -1);
}

TEST_CASE("hilbert symbol algebraic laws") {
    for (unsigned long p : {2ul, 3ul, 5ul, 7ul}) {
        PadicContext ctx(p);
        std::vector<Rat> sample;
        for (long a : {-10, -7, -5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6, 7, 10, 14, 15})
            sample.push_back(Rat(a));
        sample.push_back(Rat(1, 2));
        sample.push_back(Rat(-3, 5));
        for (const Rat& a : sample)
            for (const Rat& b : sample) {
                int h = hilbert_symbol(a, b, ctx);
                CHECK(h == hilbert_symbol(b, a, ctx));
                // square-class invariance
                CHECK(h == hilbert_symbol(a * 9, b, ctx));
                CHECK(h == hilbert_symbol(a, b * Rat(25, 49), ctx));
                // bimultiplicativity
                for (const Rat& a2 : {Rat(-1), Rat(2), Rat(15)})
                    CHECK(hilbert_symbol(a * a2, b, ctx) ==
                          h * hilbert_symbol(a2, b, ctx));
            }
        for (const Rat& a : sample) {
            CHECK(hilbert_symbol(a, -a, ctx) == 1);
            if (a != 1) CHECK(hilbert_symbol(a, 1 - a, ctx) == 1);
        }
    }
}

TEST_CASE("padic_sqrt produces actual square roots") {
    for (unsigned long p : {2ul, 3ul, 5ul, 7ul, 11ul}) {
        PadicContext ctx(p, 30);
        for (long a : {1, 4, 9, 49, 100}) {
            auto r = padic_sqrt(Rat(a), ctx);
            REQUIRE(r.has_value());
            // r^2 = a to the working precision
            Rat d = *r * *r - Rat(a);
            if (d != 0) CHECK(valuation(d, p) >= 25);
        }
        // a unit square with nontrivial digits
        Rat w = Rat(1) + Rat(static_cast<unsigned long>(p * p * p));
        if (is_padic_square_exact(w, ctx)) {
            auto r = padic_sqrt(w, ctx);
            REQUIRE(r.has_value());
            Rat d = *r * *r - w;
            if (d != 0) CHECK(valuation(d, p) >= 25);
        }
    }
}

TEST_CASE("conic oracle matches the closed-form symbol on a grid") {
    for (unsigned long p : {2ul, 3ul, 5ul, 7ul, 11ul}) {
        PadicContext ctx(p, 30);
        for (long a = -12; a <= 12; ++a) {
            if (a == 0) continue;
            for (long b = a; b <= 12; ++b) {
                if (b == 0) continue;
                auto w = conic_oracle(Rat(a), Rat(b), ctx);
                int h = hilbert_symbol(Rat(a), Rat(b), ctx);
                CHECK(w.has_value() == (h == 1));
                if (w) {
                    Rat lhs = w->z * w->z;
                    Rat rhs = Rat(a) * w->x * w->x + Rat(b) * w->y * w->y;
                    Rat d = lhs - rhs;
                    bool nontrivial = w->x != 0 || w->y != 0 || w->z != 0;
                    CHECK(nontrivial);
                    if (d != 0) CHECK(valuation(d, p) >= 20);
                }
            }
        }
    }
}

TEST_CASE("conic oracle handles rational inputs") {
    PadicContext c3(3, 30);
    auto w = conic_oracle(Rat(9), Rat(-1), c3);
    REQUIRE(w.has_value());
    auto none = conic_oracle(Rat(1, 3), Rat(1, 3), c3);
    CHECK(none.has_value() == (hilbert_symbol(Rat(1, 3), Rat(1, 3), c3) == 1));
    CHECK_THROWS_AS(conic_oracle(Rat(0), Rat(1), c3), ZeroInput);
}

TEST_CASE("context validation") {
    CHECK_THROWS_AS(PadicContext(4), std::invalid_argument);
    CHECK_THROWS_AS(PadicContext(1), std::invalid_argument);
    CHECK_THROWS_AS(PadicContext(5, 0), std::invalid_argument);
    PadicContext ok(9973);
    CHECK(ok.p == 9973);
}
