#include "qfiso/factor.hpp"

#include <algorithm>
#include <map>

namespace qfiso {

namespace detail {

namespace {

constexpr int kExactKnown = 1 << 20;
constexpr int kMinWorkingDigits = 8;

long val_or_inf(const Rat& a, unsigned long p) {
    return a == 0 ? (1L << 30) : valuation(a, p);
}

}  // namespace

std::vector<std::pair<Rat, int>> newton_root_valuations(const PolyQ& f, unsigned long p,
                                                        long cap) {
    int n = f.degree();
    if (n < 1) return {};
    if (f.coeff(0) == 0) throw std::invalid_argument("newton polygon: zero constant term");
    std::vector<std::pair<long, long>> pts;  // (index, valuation)
    for (int j = 0; j <= n; ++j) {
        long v = val_or_inf(f.coeff(j), p);
        if (v < (1L << 30)) pts.push_back({j, v});
    }
    // Lower convex hull with strictly increasing segment slopes.
    std::vector<std::pair<long, long>> hull;
    for (auto& pt : pts) {
        while (hull.size() >= 2) {
            auto& a = hull[hull.size() - 2];
            auto& b = hull.back();
            // pop b if slope(a,b) >= slope(b,pt)
            if ((b.second - a.second) * (pt.first - b.first) >=
                (pt.second - b.second) * (b.first - a.first))
                hull.pop_back();
            else
                break;
        }
        hull.push_back(pt);
    }
    for (auto& v : hull)
        if (v.second > cap / 2 && v.second < (1L << 29))
            throw PrecisionExhausted("newton polygon vertex beyond trusted precision");
    std::vector<std::pair<Rat, int>> out;
    for (size_t i = 0; i + 1 < hull.size(); ++i) {
        long dj = hull[i + 1].first - hull[i].first;
        long dv = hull[i].second - hull[i + 1].second;
        Rat s(dv, dj);
        s.canonicalize();
        out.push_back({s, static_cast<int>(dj)});
    }
    // slopes increase along the hull, so root valuations come out decreasing
    return out;
}

fp::Poly lift_to_fp(const PolyQ& f, const Int& m) {
    fp::Poly r;
    r.reserve(f.coeffs().size());
    for (const Rat& c : f.coeffs()) {
        Int num = c.get_num() % m, den = c.get_den() % m;
        if (num < 0) num += m;
        if (den < 0) den += m;
        Int dinv;
        if (!mpz_invert(dinv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t()))
            throw std::domain_error("lift_to_fp: coefficient not p-integral");
        r.push_back((num * dinv) % m);
    }
    return fp::reduce(std::move(r), m);
}

PolyQ from_fp_symmetric(const fp::Poly& f, const Int& m) {
    std::vector<Rat> c;
    c.reserve(f.size());
    Int half = m / 2;
    for (const Int& a : f) c.push_back(a > half ? Rat(a - m) : Rat(a));
    return PolyQ(std::move(c));
}

namespace {

// Quadratic Hensel step chain: f = g h mod p with gcd(g, h) = 1 mod p,
// lifted to f = g h mod p^digits.
std::pair<fp::Poly, fp::Poly> hensel_pair(const fp::Poly& f, fp::Poly g, fp::Poly h,
                                          unsigned long p, int digits) {
    Int m(p);
    auto [d, s, t] = fp::xgcd(g, h, m);
    if (fp::degree(d) != 0)
        throw std::logic_error("hensel_pair: factors not coprime mod p");
    Int target;
    mpz_ui_pow_ui(target.get_mpz_t(), p, static_cast<unsigned long>(digits));
    while (m < target) {
        Int m2 = m * m;
        if (m2 > target) m2 = target;
        fp::Poly fm = lift_to_fp(from_fp_symmetric(f, target), m2);
        fp::Poly e = fp::sub(fm, fp::mul(g, h, m2), m2);
        auto [q, r] = fp::divmod(fp::mul(s, e, m2), h, m2);
        g = fp::add(g, fp::add(fp::mul(t, e, m2), fp::mul(q, g, m2), m2), m2);
        h = fp::add(h, r, m2);
        fp::Poly b = fp::sub(fp::add(fp::mul(s, g, m2), fp::mul(t, h, m2), m2),
                             fp::constant(1, m2), m2);
        auto [c, dd] = fp::divmod(fp::mul(s, b, m2), h, m2);
        s = fp::sub(s, dd, m2);
        t = fp::sub(t, fp::add(fp::mul(t, b, m2), fp::mul(c, g, m2), m2), m2);
        m = m2;
    }
    return {g, h};
}

std::vector<fp::Poly> hensel_lift_impl(const fp::Poly& f, const std::vector<fp::Poly>& base,
                                       unsigned long p, int digits) {
    Int target;
    mpz_ui_pow_ui(target.get_mpz_t(), p, static_cast<unsigned long>(digits));
    if (base.size() == 1) return {fp::monic(fp::reduce(f, target), target)};
    size_t half = base.size() / 2;
    Int pm(p);
    fp::Poly g0 = fp::constant(1, pm), h0 = fp::constant(1, pm);
    for (size_t i = 0; i < half; ++i) g0 = fp::mul(g0, base[i], pm);
    for (size_t i = half; i < base.size(); ++i) h0 = fp::mul(h0, base[i], pm);
    auto [g, h] = hensel_pair(f, g0, h0, p, digits);
    std::vector<fp::Poly> lo(base.begin(), base.begin() + half);
    std::vector<fp::Poly> hi(base.begin() + half, base.end());
    auto a = hensel_lift_impl(g, lo, p, digits);
    auto b = hensel_lift_impl(h, hi, p, digits);
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

struct Work {
    PolyQ g;
    int known;
};

Rat pow_p(unsigned long p, long e) {
    Int pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), p, static_cast<unsigned long>(e >= 0 ? e : -e));
    return e >= 0 ? Rat(pw) : Rat(1) / Rat(pw);
}

// T(y) = G(p^c y) / p^{c n}: root valuations drop by c, T stays monic.
PolyQ subst_scale(const PolyQ& g, long c, unsigned long p) {
    int n = g.degree();
    std::vector<Rat> t(n + 1);
    for (int j = 0; j <= n; ++j) t[j] = g.coeff(j) * pow_p(p, c * (j - n));
    return PolyQ(std::move(t));
}

// inverse of subst_scale on a factor: q(x) = p^{c d} h(x / p^c)
PolyQ unsubst_scale(const PolyQ& h, long c, unsigned long p) {
    int d = h.degree();
    std::vector<Rat> q(d + 1);
    for (int j = 0; j <= d; ++j) q[j] = h.coeff(j) * pow_p(p, c * (d - j));
    return PolyQ(std::move(q));
}

PolyQ translate(const PolyQ& g, const Rat& c) {
    // g(x + c) by Horner
    PolyQ res;
    for (int i = g.degree(); i >= 0; --i)
        res = res * PolyQ({c, Rat(1)}) + PolyQ::constant(g.coeff(i));
    return res;
}

// Residual polynomial over F_p of a single-slope-a/b polynomial (all root
// valuations a/b > 0, gcd(a, b) = 1, b | n): R_k = a_{kb} / p^{a(n/b - k)}.
fp::Poly residual_poly(const PolyQ& g, long a, long b, unsigned long p) {
    int n = g.degree();
    int nb = n / static_cast<int>(b);
    Int pm(p);
    fp::Poly r(nb + 1, Int(0));
    for (int k = 0; k <= nb; ++k) {
        Rat c = g.coeff(k * static_cast<int>(b));
        if (c == 0) continue;
        long line = a * (nb - k);
        if (valuation(c, p) > line) continue;
        Rat u = c * pow_p(p, -line);
        Int num = u.get_num() % pm, den = u.get_den() % pm;
        if (num < 0) num += pm;
        if (den < 0) den += pm;
        Int dinv;
        mpz_invert(dinv.get_mpz_t(), den.get_mpz_t(), pm.get_mpz_t());
        r[k] = (num * dinv) % pm;
    }
    return fp::reduce(std::move(r), pm);
}

std::vector<Work> rec_factor(const PolyQ& G, int known, const PadicContext& ctx,
                             int digits, int depth);

// G monic, p-integral, some root of valuation 0. Split along the mod-p
// factorization grouped by distinct irreducible reductions.
std::vector<Work> rec_integral(const PolyQ& G, int known, const PadicContext& ctx,
                               int digits, int depth) {
    unsigned long p = ctx.p;
    Int pm(p);
    int local = std::min(known, digits);
    if (local < kMinWorkingDigits)
        throw PrecisionExhausted("working precision exhausted during splitting");
    fp::Poly gbar = lift_to_fp(G, pm);
    auto modp = fp::factor(gbar, p);

    std::vector<Work> out;
    std::vector<fp::Poly> groups;
    for (auto& [q, e] : modp) {
        fp::Poly pw = fp::constant(1, pm);
        for (int i = 0; i < e; ++i) pw = fp::mul(pw, q, pm);
        groups.push_back(pw);
    }

    Int target;
    mpz_ui_pow_ui(target.get_mpz_t(), p, static_cast<unsigned long>(local));
    auto lifted = hensel_lift_impl(lift_to_fp(G, target), groups, p, local);

    for (size_t i = 0; i < lifted.size(); ++i) {
        PolyQ Gi = from_fp_symmetric(lifted[i], target);
        const fp::Poly& qbar = modp[i].first;
        int e = modp[i].second;
        if (e == 1) {
            out.push_back({Gi, local});
            continue;
        }
        if (fp::degree(qbar) == 1) {
            // All roots of Gi reduce to the single residue root c.
            Int c0 = (pm - qbar[0]) % pm;
            Rat c = c0 > pm / 2 ? Rat(c0 - pm) : Rat(c0);
            std::vector<Work> sub;
            if (c == 0) {
                sub = rec_factor(Gi, local, ctx, digits, depth + 1);
            } else {
                PolyQ H = translate(Gi, c);
                sub = rec_factor(H, local, ctx, digits, depth + 1);
                for (auto& w : sub) w.g = translate(w.g, -c);
            }
            for (auto& w : sub) out.push_back(std::move(w));
            continue;
        }
        throw NotPRegular(
            "factor congruent to a power of a nonlinear irreducible mod p; "
            "supply a certificate or choose a different prime");
    }
    return out;
}

std::vector<Work> rec_factor(const PolyQ& G, int known, const PadicContext& ctx,
                             int digits, int depth) {
    if (depth > 64) throw PrecisionExhausted("splitting recursion too deep");
    int n = G.degree();
    if (n <= 0) return {};
    if (n == 1) return {{G, known}};
    unsigned long p = ctx.p;
    auto rv = newton_root_valuations(G, p, known);
    Rat smin = rv.back().first;

    if (smin == 0) {
        return rec_integral(G, known, ctx, digits, depth);
    }
    if (is_integer(smin)) {
        long c = smin.get_num().get_si();
        PolyQ T = subst_scale(G, c, p);
        int knownT = c > 0 ? known - static_cast<int>(c) * n : known;
        if (knownT < kMinWorkingDigits)
            throw PrecisionExhausted("scaling substitution exhausted precision");
        auto sub = rec_factor(T, knownT, ctx, digits, depth + 1);
        std::vector<Work> out;
        for (auto& w : sub) {
            int kq = c < 0 ? w.known - static_cast<int>(-c) * w.g.degree() : w.known;
            if (kq < kMinWorkingDigits)
                throw PrecisionExhausted("scaling substitution exhausted precision");
            out.push_back({unsubst_scale(w.g, c, p), kq});
        }
        return out;
    }
    if (rv.size() == 1) {
        long a = smin.get_num().get_si(), b = smin.get_den().get_si();
        long babs = b;
        long aabs = a >= 0 ? a : -a;
        if (babs == n) return {{G, known}};  // single slope with denominator = degree
        if (a < 0) {
            // flip to positive slopes via the star involution
            PolyQ Gs = star(G).monic();
            int ks = known - 2 * static_cast<int>(aabs * n / babs + 1);
            if (ks < kMinWorkingDigits) throw PrecisionExhausted("star flip exhausted precision");
            auto sub = rec_factor(Gs, ks, ctx, digits, depth + 1);
            std::vector<Work> out;
            for (auto& w : sub) out.push_back({star(w.g).monic(), w.known - 4});
            return out;
        }
        fp::Poly R = residual_poly(G, a, b, p);
        if (fp::degree(R) == n / static_cast<int>(b) && fp::is_irreducible(R, p))
            return {{G, known}};
        throw NotPRegular(
            "fractional-slope factor with reducible residual polynomial; "
            "supply a certificate or choose a different prime");
    }
    // multiple slopes, none zero, smallest fractional: try the reciprocal
    Rat smax = rv.front().first;
    if (is_integer(smax)) {
        PolyQ Gs = star(G).monic();
        long v0 = valuation(G.coeff(0), p);
        int ks = known - 2 * static_cast<int>(v0 >= 0 ? v0 : -v0) - 2;
        if (ks < kMinWorkingDigits) throw PrecisionExhausted("star flip exhausted precision");
        auto sub = rec_factor(Gs, ks, ctx, digits, depth + 1);
        std::vector<Work> out;
        for (auto& w : sub) out.push_back({star(w.g).monic(), w.known - 4});
        return out;
    }
    throw NotPRegular(
        "Newton polygon mixes fractional slopes; supply a certificate or "
        "choose a different prime");
}

bool certify_impl(const PolyQ& q, const PadicContext& ctx, int known, int depth) {
    if (depth > 64) return false;
    int n = q.degree();
    if (n <= 0) return false;
    if (n == 1) return true;
    unsigned long p = ctx.p;
    std::vector<std::pair<Rat, int>> rv;
    try {
        rv = newton_root_valuations(q, p, known);
    } catch (const std::exception&) {
        return false;
    }
    if (rv.size() > 1) return false;  // two slopes: visibly reducible
    Rat s = rv[0].first;
    if (s == 0) {
        Int pm(p);
        fp::Poly qbar;
        try {
            qbar = lift_to_fp(q, pm);
        } catch (const std::exception&) {
            return false;
        }
        auto modp = fp::factor(qbar, p);
        if (modp.size() != 1) return false;
        auto& [g, e] = modp[0];
        if (e == 1) return true;
        if (fp::degree(g) != 1) return false;
        Int c0 = (pm - g[0]) % pm;
        Rat c = c0 > pm / 2 ? Rat(c0 - pm) : Rat(c0);
        return certify_impl(translate(q, c), ctx, known, depth + 1);
    }
    if (is_integer(s)) {
        long c = s.get_num().get_si();
        int knownT = c > 0 ? known - static_cast<int>(c) * n : known;
        if (knownT < kMinWorkingDigits) return false;
        return certify_impl(subst_scale(q, c, p), ctx, knownT, depth + 1);
    }
    long a = s.get_num().get_si(), b = s.get_den().get_si();
    if (b == n) return true;
    if (a < 0) return certify_impl(star(q).monic(), ctx, known - 4, depth + 1);
    fp::Poly R = residual_poly(q, a, b, p);
    return fp::degree(R) == n / static_cast<int>(b) && fp::is_irreducible(R, p);
}

std::optional<FieldShape> shape_impl(const PolyQ& q, const PadicContext& ctx, int known,
                                     int depth, const Rat& center, long shift) {
    if (depth > 64) return std::nullopt;
    int n = q.degree();
    unsigned long p = ctx.p;
    Int pm(p);
    if (n < 1) return std::nullopt;
    if (n == 1) return FieldShape{1, 1, fp::x(), center, shift, 1};
    std::vector<std::pair<Rat, int>> rv;
    try {
        rv = newton_root_valuations(q, p, known);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (rv.size() != 1) return std::nullopt;
    Rat s = rv[0].first;
    if (s < 0) return std::nullopt;
    if (s == 0) {
        fp::Poly qbar;
        try {
            qbar = lift_to_fp(q, pm);
        } catch (const std::exception&) {
            return std::nullopt;
        }
        auto modp = fp::factor(qbar, p);
        if (modp.size() != 1) return std::nullopt;
        auto& [g, e0] = modp[0];
        if (e0 == 1) return FieldShape{1, n, g, center, shift, 1};
        if (fp::degree(g) != 1) return std::nullopt;
        Int c0 = (pm - g[0]) % pm;
        Rat c = c0 > pm / 2 ? Rat(c0 - pm) : Rat(c0);
        if (c == 0) return std::nullopt;  // slope would still be 0
        Rat step = c * pow_p(p, shift);
        return shape_impl(translate(q, c), ctx, known, depth + 1, center + step, shift);
    }
    if (is_integer(s)) {
        long c = s.get_num().get_si();
        int knownT = c > 0 ? known - static_cast<int>(c) * n : known;
        if (knownT < kMinWorkingDigits) return std::nullopt;
        return shape_impl(subst_scale(q, c, p), ctx, knownT, depth + 1, center, shift + c);
    }
    long a = s.get_num().get_si(), b = s.get_den().get_si();
    fp::Poly R = residual_poly(q, a, b, p);
    if (fp::degree(R) != n / static_cast<int>(b) || !fp::is_irreducible(R, p))
        return std::nullopt;
    return FieldShape{static_cast<int>(b), n / static_cast<int>(b), fp::monic(R, pm),
                      center, shift, a};
}

}  // namespace

std::optional<FieldShape> field_shape(const PolyQ& m, const PadicContext& ctx, int known) {
    return shape_impl(m, ctx, known, 0, Rat(0), 0);
}

std::vector<fp::Poly> hensel_lift(const fp::Poly& f, const std::vector<fp::Poly>& base,
                                  unsigned long p, int digits) {
    return hensel_lift_impl(f, base, p, digits);
}

bool certify_irreducible(const PolyQ& q, const PadicContext& ctx, int known) {
    return certify_impl(q, ctx, known, 0);
}

bool congruent_padic(const PolyQ& a, const PolyQ& b, unsigned long p, long threshold) {
    PolyQ d = a - b;
    for (const Rat& c : d.coeffs())
        if (c != 0 && valuation(c, p) < threshold) return false;
    return true;
}

}  // namespace detail

namespace {

using detail::congruent_padic;

void assign_types(std::vector<PadicFactor>& factors, const PadicContext& ctx) {
    const PolyQ xp1({Rat(1), Rat(1)});
    const PolyQ xm1({Rat(-1), Rat(1)});
    std::vector<bool> done(factors.size(), false);
    for (size_t i = 0; i < factors.size(); ++i) {
        if (done[i]) continue;
        PadicFactor& fi = factors[i];
        if (fi.poly == xp1) {
            fi.tag = FactorTag::PlusOne;
            done[i] = true;
            continue;
        }
        if (fi.poly == xm1) {
            fi.tag = FactorTag::MinusOne;
            done[i] = true;
            continue;
        }
        PolyQ st = star(fi.poly);
        long thr_self = std::min<long>(fi.known, 1 << 20) / 2;
        if (congruent_padic(st, fi.poly, ctx.p, thr_self)) {
            fi.tag = FactorTag::SelfReciprocal;
            done[i] = true;
            continue;
        }
        bool found = false;
        for (size_t j = 0; j < factors.size(); ++j) {
            if (j == i || done[j]) continue;
            if (factors[j].poly.degree() != fi.poly.degree()) continue;
            long thr = std::min<long>(std::min(fi.known, factors[j].known), 1 << 20) / 2;
            if (congruent_padic(st, factors[j].poly, ctx.p, thr)) {
                if (factors[j].multiplicity != fi.multiplicity)
                    throw UnpairedFactor(
                        "star partners found with mismatched multiplicities");
                fi.tag = FactorTag::Paired;
                fi.partner = static_cast<int>(j);
                factors[j].tag = FactorTag::Paired;
                factors[j].partner = static_cast<int>(i);
                done[i] = done[j] = true;
                found = true;
                break;
            }
        }
        if (!found)
            throw UnpairedFactor("factor is neither self-reciprocal nor star-paired");
    }
}

PadicFactorization run_pipeline(const PolyQ& f, const PadicContext& ctx, int digits) {
    std::vector<PadicFactor> out;
    auto parts = squarefree_decomposition(f);
    for (auto& [part, mult] : parts) {
        PolyQ s = part;
        if (s(Rat(1)) == 0) {
            s = s / PolyQ({Rat(-1), Rat(1)});
            out.push_back({PolyQ({Rat(-1), Rat(1)}), mult, FactorTag::MinusOne, -1, detail::kExactKnown});
        }
        if (s(Rat(-1)) == 0) {
            s = s / PolyQ({Rat(1), Rat(1)});
            out.push_back({PolyQ({Rat(1), Rat(1)}), mult, FactorTag::PlusOne, -1, detail::kExactKnown});
        }
        if (s.degree() < 1) continue;
        if (s.coeff(0) == 0) throw ZeroConstantTerm{};
        for (auto& w : detail::rec_factor(s, detail::kExactKnown, ctx, digits, 0))
            out.push_back({w.g, mult, FactorTag::SelfReciprocal, -1, w.known});
    }
    assign_types(out, ctx);
    return {std::move(out), digits};
}

PadicFactorization run_certified(const PolyQ& f, const PadicContext& ctx,
                                 const std::vector<PolyQ>& cert) {
    if (cert.empty()) throw BadCertificate("empty certificate");
    PolyQ prod = PolyQ::constant(Rat(1));
    for (const PolyQ& q : cert) {
        if (!q.is_monic()) throw BadCertificate("certificate factor not monic");
        prod = prod * q;
    }
    if (!congruent_padic(prod, f, ctx.p, ctx.precision))
        throw BadCertificate("certificate product does not match input mod p^N");
    // group repeats into multiplicities
    std::vector<PadicFactor> out;
    for (const PolyQ& q : cert) {
        bool seen = false;
        for (auto& g : out)
            if (g.poly == q) {
                ++g.multiplicity;
                seen = true;
                break;
            }
        if (seen) continue;
        if (q.degree() > 1 && !detail::certify_irreducible(q, ctx, ctx.precision))
            throw BadCertificate("certificate factor not certified irreducible: " +
                                 q.to_string());
        out.push_back({q, 1, FactorTag::SelfReciprocal, -1, ctx.precision});
    }
    assign_types(out, ctx);
    return {std::move(out), ctx.precision};
}

}  // namespace

PadicFactorization factor_padic(const PolyQ& f, const PadicContext& ctx,
                                const std::vector<PolyQ>* certificate) {
    if (!f.is_monic()) throw std::invalid_argument("factor_padic: input must be monic");
    if (f.coeff(0) == 0) throw ZeroConstantTerm{};
    if (certificate) return run_certified(f, ctx, *certificate);
    std::string last;
    for (int scale = 1; scale <= 8; scale *= 2) {
        try {
            return run_pipeline(f, ctx, ctx.precision * scale);
        } catch (const PrecisionExhausted& e) {
            last = e.what();
        }
    }
    throw PrecisionExhausted("factor_padic: " + last);
}

}  // namespace qfiso
