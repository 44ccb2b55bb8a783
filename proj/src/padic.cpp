#include "qfiso/padic.hpp"

#include <cstdint>
#include <cstdlib>
#include <vector>

namespace qfiso {

namespace {

// Integer square root of `u` modulo p^digits, for a unit square u.
Int unit_sqrt_mod(const Int& u, const PadicContext& ctx, int digits) {
    Int mod = ctx.modulus(digits);
    if (ctx.p != 2) {
        Int pm(ctx.p);
        Int r = 0;
        for (unsigned long c = 1; c < ctx.p; ++c) {
            if ((Int(c) * c - u) % pm == 0) {
                r = c;
                break;
            }
        }
        if (r == 0) throw std::logic_error("unit_sqrt_mod: not a residue");
        // Newton iteration doubles precision: r <- r - (r^2-u)/(2r).
        int have = 1;
        while (have < digits) {
            have = std::min(2 * have, digits);
            Int m = ctx.modulus(have);
            Int inv;
            Int two_r = (2 * r) % m;
            if (!mpz_invert(inv.get_mpz_t(), two_r.get_mpz_t(), m.get_mpz_t()))
                throw std::logic_error("unit_sqrt_mod: lift failed");
            r = (r - (r * r - u) % m * inv) % m;
            if (r < 0) r += m;
        }
        return r % mod;
    }
    // p = 2, u = 1 mod 8: fix one bit at a time.
    Int r = 1;
    for (int k = 3; k < digits; ++k) {
        Int m = ctx.modulus(k + 1);
        if ((r * r - u) % m != 0) {
            Int bump;
            mpz_ui_pow_ui(bump.get_mpz_t(), 2, k - 1);
            r += bump;
        }
    }
    return r % mod;
}

}  // namespace

std::optional<Rat> padic_sqrt(const Rat& w, const PadicContext& ctx) {
    if (w == 0) return Rat(0);
    if (!is_padic_square_exact(w, ctx)) return std::nullopt;
    auto [v, u] = split_unit(w, ctx.p);
    Int mod = ctx.modulus();
    Int num = u.get_num() % mod, den = u.get_den() % mod;
    if (num < 0) num += mod;
    if (den < 0) den += mod;
    Int deninv;
    mpz_invert(deninv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t());
    Int ulift = (num * deninv) % mod;
    Int r = unit_sqrt_mod(ulift, ctx, ctx.precision);
    Int pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), ctx.p, static_cast<unsigned long>((v >= 0 ? v : -v) / 2));
    return Rat(r) * (v >= 0 ? Rat(pw) : Rat(1) / Rat(pw));
}

namespace {

struct ScanHit {
    Rat x, y, z;  // A x^2 + B y^2 = D z^2
};

// Residue-box search for A x^2 + B y^2 = D z^2 with A, B integers of
// p-valuation <= 1 and D in {1, p}. The value A x^2 + B y^2 is computed
// exactly and tested for squareness (after dividing by D), which encodes
// the Hensel lifting criterion for the z-coordinate.
std::optional<ScanHit> box_scan(const Int& A, const Int& B, const Int& D,
                                const PadicContext& ctx) {
    const int h = ctx.p == 2 ? 10 : 3;
    Int box;
    mpz_ui_pow_ui(box.get_mpz_t(), ctx.p, h);

    auto accept = [&](const Rat& x, const Rat& y) -> std::optional<ScanHit> {
        Rat w = Rat(A) * x * x + Rat(B) * y * y;
        if (w == 0) return ScanHit{x, y, Rat(0)};
        Rat wd = w / Rat(D);
        auto z = padic_sqrt(wd, ctx);
        if (!z) return std::nullopt;
        return ScanHit{x, y, *z};
    };

    // z = 0 branch: hit only asymptotically by the scan, so test directly.
    if (is_padic_square_exact(Rat(-Rat(B) / Rat(A)), ctx))
        return ScanHit{*padic_sqrt(Rat(-Rat(B) / Rat(A)), ctx), Rat(1), Rat(0)};

    long boxl = box.get_si();
    if (A.fits_slong_p() && B.fits_slong_p()) {
        long al = A.get_si(), bl = B.get_si();
        long double bound =
            ((long double)std::llabs(al) + (long double)std::llabs(bl)) * boxl * boxl;
        if (bound < 4.0e18L) {
            std::vector<int8_t> qr(ctx.p, 0);
            for (unsigned long r = 0; r < ctx.p; ++r) qr[(r * r) % ctx.p] = 1;
            long p = static_cast<long>(ctx.p);
            long dv = D == 1 ? 0 : 1;
            for (long x = 0; x < boxl; ++x) {
                long ax2 = al * x * x;
                for (long y = (x == 0 ? 1 : 0); y < boxl; ++y) {
                    long w = ax2 + bl * y * y;
                    if (w == 0) return accept(Rat(x), Rat(y));
                    long ww = w, v = -dv;
                    while (ww % p == 0) { ww /= p; ++v; }
                    if (v % 2 != 0) continue;
                    if (p == 2) {
                        if ((ww & 7) != 1) continue;
                    } else {
                        long u = ww % p;
                        if (u < 0) u += p;
                        if (!qr[u]) continue;
                    }
                    return accept(Rat(x), Rat(y));
                }
            }
            return std::nullopt;
        }
    }

    for (Int x = 0; x < box; ++x)
        for (Int y = (x == 0 ? 1 : 0); y < box; ++y)
            if (auto hit = accept(Rat(x), Rat(y))) return hit;
    return std::nullopt;
}

// a = a0 * s^2 with a0 an integer of p-valuation <= 1.
void strip_square_part(const Rat& a, unsigned long p, Int& a0, Rat& s) {
    s = Rat(1) / Rat(a.get_den());
    Int n = a.get_num() * a.get_den();
    Int p2 = Int(static_cast<unsigned long>(p)) * static_cast<unsigned long>(p);
    while (mpz_divisible_p(n.get_mpz_t(), p2.get_mpz_t())) {
        mpz_divexact(n.get_mpz_t(), n.get_mpz_t(), p2.get_mpz_t());
        s *= Rat(static_cast<unsigned long>(p));
    }
    a0 = n;
}

}  // namespace

std::optional<ConicWitness> conic_oracle(const Rat& a, const Rat& b, const PadicContext& ctx) {
    if (a == 0 || b == 0) throw ZeroInput{};

    Int a0, b0;
    Rat sa, sb;
    strip_square_part(a, ctx.p, a0, sa);
    strip_square_part(b, ctx.p, b0, sb);

    long va = valuation_int(a0, ctx.p), vb = valuation_int(b0, ctx.p);
    Int pm(static_cast<unsigned long>(ctx.p));

    std::optional<ScanHit> hit;
    Rat zscale(1);
    if (va == 1 && vb == 1) {
        // a0 x^2 + b0 y^2 = z^2 with z = p t: a0' x^2 + b0' y^2 = p t^2.
        Int a1, b1;
        mpz_divexact(a1.get_mpz_t(), a0.get_mpz_t(), pm.get_mpz_t());
        mpz_divexact(b1.get_mpz_t(), b0.get_mpz_t(), pm.get_mpz_t());
        hit = box_scan(a1, b1, pm, ctx);
        zscale = Rat(pm);
    } else {
        hit = box_scan(a0, b0, Int(1), ctx);
    }
    if (!hit) return std::nullopt;
    // Undo the square scalings: z^2 = a (x/sa)^2 + b (y/sb)^2.
    return ConicWitness{hit->x / sa, hit->y / sb, hit->z * zscale};
}

}  // namespace qfiso
