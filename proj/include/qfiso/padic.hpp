#pragma once

#include <optional>
#include <stdexcept>
#include <tuple>

#include "qfiso/rat.hpp"

namespace qfiso {

struct ZeroInput : std::invalid_argument {
    ZeroInput() : std::invalid_argument("zero input where a nonzero value is required") {}
};

inline bool is_prime_trial(unsigned long p) {
    if (p < 2) return false;
    for (unsigned long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

// Base field descriptor: the prime p and the working precision (number of
// p-adic digits carried for lifted data).
struct PadicContext {
    unsigned long p;
    int precision;

    PadicContext(unsigned long p_, int precision_ = 40) : p(p_), precision(precision_) {
        if (!is_prime_trial(p)) throw std::invalid_argument("p is not prime");
        if (precision < 1) throw std::invalid_argument("precision must be >= 1");
    }

    Int modulus(int digits = -1) const {
        Int m;
        mpz_ui_pow_ui(m.get_mpz_t(), p, digits < 0 ? precision : digits);
        return m;
    }
};

inline long valuation_int(const Int& n, unsigned long p) {
    if (n == 0) throw ZeroInput{};
    Int m = n;
    long v = 0;
    while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
        mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
        ++v;
    }
    return v;
}

inline long valuation(const Rat& a, unsigned long p) {
    if (a == 0) throw ZeroInput{};
    return valuation_int(a.get_num(), p) - valuation_int(a.get_den(), p);
}

// a = p^v * unit with the unit a p-adic unit.
inline std::pair<long, Rat> split_unit(const Rat& a, unsigned long p) {
    long v = valuation(a, p);
    Rat pw;
    Int pv;
    mpz_ui_pow_ui(pv.get_mpz_t(), p, static_cast<unsigned long>(v >= 0 ? v : -v));
    Rat unit = v >= 0 ? Rat(a / Rat(pv)) : Rat(a * Rat(pv));
    return {v, unit};
}

// Legendre symbol of a p-adic unit modulo an odd prime.
inline int legendre_unit(const Rat& u, unsigned long p) {
    Int pm(static_cast<unsigned long>(p));
    Int num = u.get_num() % pm, den = u.get_den() % pm;
    if (num < 0) num += pm;
    Int deninv;
    if (mpz_invert(deninv.get_mpz_t(), den.get_mpz_t(), pm.get_mpz_t()) == 0)
        throw std::logic_error("legendre_unit: non-unit input");
    Int r = (num * deninv) % pm;
    int ls = mpz_legendre(r.get_mpz_t(), pm.get_mpz_t());
    if (ls == 0) throw std::logic_error("legendre_unit: non-unit input");
    return ls;
}

// Residue of a 2-adic unit modulo 8, in {1,3,5,7}.
inline int unit_mod8(const Rat& u) {
    Int num = u.get_num() % 8, den = u.get_den() % 8;
    if (num < 0) num += 8;
    if (den < 0) den += 8;
    long n = num.get_si(), d = den.get_si();
    static const int inv8[8] = {0, 1, 0, 3, 0, 5, 0, 7};
    if (d % 2 == 0 || n % 2 == 0) throw std::logic_error("unit_mod8: non-unit input");
    return static_cast<int>((n * inv8[d]) % 8);
}

// Canonical square-class representative in Q_p^x / (Q_p^x)^2.
// Odd p: {1, u, p, u p} with u the least positive non-residue mod p.
// p = 2: {1, -1, 2, -2, 5, -5, 10, -10}.
struct SquareClass {
    Rat rep;

    bool operator==(const SquareClass& o) const { return rep == o.rep; }
    bool operator!=(const SquareClass& o) const { return rep != o.rep; }
};

inline unsigned long least_nonresidue(unsigned long p) {
    Int pm(p);
    for (unsigned long u = 2; u < p; ++u) {
        Int um(u);
        if (mpz_legendre(um.get_mpz_t(), pm.get_mpz_t()) == -1) return u;
    }
    throw std::logic_error("no quadratic non-residue found");
}

inline SquareClass square_class(const Rat& a, const PadicContext& ctx) {
    if (a == 0) throw ZeroInput{};
    auto [v, u] = split_unit(a, ctx.p);
    bool odd_val = ((v % 2) + 2) % 2 == 1;
    if (ctx.p != 2) {
        bool nonres = legendre_unit(u, ctx.p) == -1;
        Rat rep = nonres ? Rat(static_cast<unsigned long>(least_nonresidue(ctx.p))) : Rat(1);
        if (odd_val) rep *= Rat(static_cast<unsigned long>(ctx.p));
        return {rep};
    }
    int m8 = unit_mod8(u);
    Rat rep = m8 == 1 ? Rat(1) : m8 == 3 ? Rat(-5) : m8 == 5 ? Rat(5) : Rat(-1);
    if (odd_val) rep *= 2;
    return {rep};
}

inline bool is_square(const Rat& a, const PadicContext& ctx) {
    return square_class(a, ctx).rep == 1;
}

// padic_profile: a = p^valuation * unit_part, plus the square class of a.
struct PadicProfile {
    long valuation;
    Rat unit_part;
    SquareClass cls;
};

inline PadicProfile padic_profile(const Rat& a, const PadicContext& ctx) {
    if (a == 0) throw ZeroInput{};
    auto [v, u] = split_unit(a, ctx.p);
    return {v, u, square_class(a, ctx)};
}

// Hilbert symbol (a,b)_p: +1 iff z^2 = a x^2 + b y^2 has a nontrivial
// solution over Q_p. Closed form: tame formula for odd p, the eps/omega
// formula for p = 2.
inline int hilbert_symbol(const Rat& a, const Rat& b, const PadicContext& ctx) {
    if (a == 0 || b == 0) throw ZeroInput{};
    auto [alpha, u] = split_unit(a, ctx.p);
    auto [beta, w] = split_unit(b, ctx.p);
    if (ctx.p != 2) {
        int sign = 1;
        if ((alpha % 2 != 0) && (beta % 2 != 0) && ((ctx.p - 1) / 2) % 2 == 1) sign = -sign;
        if (beta % 2 != 0 && legendre_unit(u, ctx.p) == -1) sign = -sign;
        if (alpha % 2 != 0 && legendre_unit(w, ctx.p) == -1) sign = -sign;
        return sign;
    }
    auto eps = [](int m8) { return ((m8 - 1) / 2) % 2; };        // (u-1)/2 mod 2
    auto omega = [](int m8) { return (m8 * m8 - 1) / 8 % 2; };   // (u^2-1)/8 mod 2
    int um = unit_mod8(u), wm = unit_mod8(w);
    long e = eps(um) * eps(wm) + alpha * omega(wm) + beta * omega(um);
    return (e % 2 + 2) % 2 == 0 ? 1 : -1;
}

// ---------------------------------------------------------------------------
// Brute-force conic oracle over Q_p (test-side cross-check for the closed
// form, and witness production for conic_solve). Decides isotropy of
// z^2 = a x^2 + b y^2 by scanning x, y over a bounded residue box and
// testing whether a x^2 + b y^2 is an exact square in Z_p.
// ---------------------------------------------------------------------------

// Exact square test in Q_p for a rational value.
inline bool is_padic_square_exact(const Rat& w, const PadicContext& ctx) {
    if (w == 0) return true;
    auto [v, u] = split_unit(w, ctx.p);
    if (((v % 2) + 2) % 2 == 1) return false;
    if (ctx.p != 2) return legendre_unit(u, ctx.p) == 1;
    return unit_mod8(u) == 1;
}

struct ConicWitness {
    Rat x, y, z;  // z^2 = a x^2 + b y^2, (x,y,z) != 0
};

// Hensel lift of sqrt(w) for a rational square w, to `digits` p-adic digits.
// Returns the integer-lift square root of the unit part times p^{v/2}.
std::optional<Rat> padic_sqrt(const Rat& w, const PadicContext& ctx);

// Search for a nontrivial solution of z^2 = a x^2 + b y^2 over Q_p.
// Returns a witness iff the conic is isotropic (hilbert symbol +1).
std::optional<ConicWitness> conic_oracle(const Rat& a, const Rat& b, const PadicContext& ctx);

}  // namespace qfiso
