#include "qfiso/padic_ext.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace qfiso {

namespace {

Rat pow_p_rat(unsigned long p, long e) {
    Int pw;
    mpz_ui_pow_ui(pw.get_mpz_t(), p, static_cast<unsigned long>(e >= 0 ? e : -e));
    return e >= 0 ? Rat(pw) : Rat(1) / Rat(pw);
}

// p-exponent of the denominator of a canonical rational
long den_exp(const Rat& c, unsigned long p) {
    if (c == 0) return 0;
    Int den = c.get_den();
    long k = 0;
    while (mpz_divisible_ui_p(den.get_mpz_t(), p)) {
        mpz_divexact_ui(den.get_mpz_t(), den.get_mpz_t(), p);
        ++k;
    }
    return k;
}

long den_exp(const PolyQ& f, unsigned long p) {
    long k = 0;
    for (const Rat& c : f.coeffs()) k = std::max(k, den_exp(c, p));
    return k;
}

Rat trace_on(const PolyQ& q, const PolyQ& a) {
    PolyQ b = a % q;
    Rat tr(0);
    for (int j = 0; j < q.degree(); ++j) {
        tr += b.coeff(j);
        b = b.shift(1) % q;
    }
    return tr;
}

long xgcd_long(long a, long b, long& x, long& y) {
    if (b == 0) {
        x = 1;
        y = 0;
        return a;
    }
    long x1, y1;
    long g = xgcd_long(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

}  // namespace

LocalField::LocalField(PolyQ m, PadicContext ctx) : m_(std::move(m)), ctx_(ctx), work_(0) {
    if (!m_.is_monic() || m_.degree() < 1)
        throw std::invalid_argument("LocalField: defining polynomial must be monic nonconstant");
    auto shape = detail::field_shape(m_, ctx_, 1 << 20);
    if (!shape)
        throw UncertifiedField(
            "defining polynomial not certified irreducible by the Newton-polygon and "
            "residual criteria: " +
            m_.to_string());
    e_ = shape->e;
    f_ = shape->f;
    residue_model_ = shape->residue_model;
    if (e_ * f_ != m_.degree()) throw UncertifiedField("ramification data inconsistent");
    work_ = ctx_.precision * e_ + 16;

    const unsigned long p = ctx_.p;
    PolyQ xi = shape->shift == 0 && shape->center == 0
                   ? PolyQ::x()
                   : pow_p_rat(p, -shape->shift) * PolyQ::linear_root(shape->center);
    if (e_ == 1) {
        pi_ = embed(Rat(static_cast<unsigned long>(p)));
    } else {
        long al, be;
        if (xgcd_long(shape->xi_num, e_, al, be) != 1)
            throw UncertifiedField("uniformizer exponents not coprime");
        pi_ = mul(pow(reduce(xi), Int(al)), embed(pow_p_rat(p, be)));
        if (val(pi_) != 1) throw UncertifiedField("uniformizer has wrong valuation");
    }
    ExtElem theta = f_ == 1 ? embed(Rat(1))
                            : (e_ == 1 ? reduce(xi)
                                       : mul(pow(reduce(xi), Int(e_)),
                                             embed(pow_p_rat(p, -shape->xi_num))));
    basis_.reserve(m_.degree());
    ExtElem pij = embed(Rat(1));
    for (int j = 0; j < e_; ++j) {
        ExtElem ti = pij;
        for (int i = 0; i < f_; ++i) {
            basis_.push_back(ti);
            if (i + 1 < f_) ti = mul(ti, theta);
        }
        if (j + 1 < e_) pij = mul(pij, pi_);
    }
}

ExtElem LocalField::gen() const { return reduce(PolyQ::x()); }

Rat LocalField::canon_coeff(const Rat& c, int digits) const {
    if (c == 0) return c;
    const unsigned long p = ctx_.p;
    Int den = c.get_den();
    long k = 0;
    while (mpz_divisible_ui_p(den.get_mpz_t(), p)) {
        mpz_divexact_ui(den.get_mpz_t(), den.get_mpz_t(), p);
        ++k;
    }
    Int modl;
    mpz_ui_pow_ui(modl.get_mpz_t(), p, static_cast<unsigned long>(digits + k));
    Int dinv;
    if (!mpz_invert(dinv.get_mpz_t(), den.get_mpz_t(), modl.get_mpz_t()))
        throw std::logic_error("canon_coeff: denominator not invertible");
    Int num = (c.get_num() % modl) * dinv % modl;
    if (num < 0) num += modl;
    if (num > modl / 2) num -= modl;  // symmetric representative
    Int pk;
    mpz_ui_pow_ui(pk.get_mpz_t(), p, static_cast<unsigned long>(k));
    Rat r(num, pk);
    r.canonicalize();
    return r;
}

ExtElem LocalField::reduce(const PolyQ& a) const {
    PolyQ r = a % m_;
    std::vector<Rat> c = r.coeffs();
    for (Rat& x : c) x = canon_coeff(x, work_);
    return PolyQ(std::move(c));
}

ExtElem LocalField::inv(const ExtElem& a) const {
    PolyQ ar = a % m_;
    if (ar.is_zero()) throw ZeroInput{};
    auto [g, u, v] = xgcd(ar, m_);
    if (g.degree() != 0)
        throw PrecisionExhausted("inverse failed: element shares a factor with the modulus");
    return reduce(u);
}

ExtElem LocalField::pow(const ExtElem& a, const Int& k) const {
    if (k < 0) return pow(inv(a), -k);
    ExtElem r = embed(Rat(1));
    ExtElem b = reduce(a);
    Int e = k;
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) r = mul(r, b);
        e >>= 1;
        if (e > 0) b = mul(b, b);
    }
    return r;
}

bool LocalField::is_zero(const ExtElem& a) const {
    PolyQ r = a % m_;
    if (r.is_zero()) return true;
    Rat res = resultant(m_, r);
    if (res == 0) return true;
    return valuation(res, ctx_.p) >= static_cast<long>(m_.degree()) * ctx_.precision;
}

long LocalField::val(const ExtElem& a) const {
    PolyQ r = a % m_;
    if (r.is_zero()) throw ZeroInput{};
    Rat res = resultant(m_, r);
    if (res == 0) throw ZeroInput{};
    long w = valuation(res, ctx_.p);
    if (w >= static_cast<long>(m_.degree()) * ctx_.precision) throw ZeroInput{};
    if (w % f_ != 0)
        throw PrecisionExhausted("valuation outside the value group (precision loss)");
    return w / f_;
}

Rat LocalField::norm(const ExtElem& a) const { return resultant(m_, a % m_); }

Rat LocalField::trace(const ExtElem& a) const { return trace_on(m_, a); }

int LocalField::chi(const ExtElem& u) const {
    if (ctx_.p == 2)
        throw std::logic_error("chi: quadratic character needs odd residue characteristic");
    Int q;
    mpz_ui_pow_ui(q.get_mpz_t(), ctx_.p, static_cast<unsigned long>(f_));
    ExtElem t = pow(u, (q - 1) / 2);
    auto near = [this](const ExtElem& d) {
        if (is_zero(d)) return true;
        return val(d) > 0;
    };
    if (near(sub(t, embed(Rat(1))))) return 1;
    if (near(add(t, embed(Rat(1))))) return -1;
    throw PrecisionExhausted("quadratic character did not converge to +-1");
}

bool LocalField::is_square(const ExtElem& a) const {
    if (is_zero(a)) throw ZeroInput{};
    long v = val(a);
    if (((v % 2) + 2) % 2 == 1) return false;
    ExtElem u = mul(a, pow(pi_, Int(-v)));
    if (ctx_.p != 2) return chi(u) == 1;
    // 2-adic: u is a square iff it is one to valuation 2e+1 (then Hensel lifts)
    const long need = 2 * e_ + 1;
    long db = 0;
    for (const ExtElem& b : basis_) db = std::max(db, den_exp(b, 2));
    long digits = (need + e_ - 1) / e_ + db + 2;
    int n = degree();
    if (digits * n > 24)
        throw PrecisionExhausted("two-adic square test search space too large");
    unsigned long long total = 1ull << (digits * n);
    for (unsigned long long idx = 0; idx < total; ++idx) {
        ExtElem s = embed(Rat(0));
        unsigned long long t = idx;
        for (int k = 0; k < n; ++k) {
            unsigned long long c = t & ((1ull << digits) - 1);
            t >>= digits;
            if (c) s = add(s, Rat(static_cast<unsigned long>(c)) * basis_[k]);
        }
        ExtElem d = sub(mul(s, s), u);
        if (is_zero(d) || val(d) >= need) return true;
    }
    return false;
}

int LocalField::hilbert(const ExtElem& a, const ExtElem& b) const {
    if (is_zero(a) || is_zero(b)) throw ZeroInput{};
    if (ctx_.p != 2) {
        long va = val(a), vb = val(b);
        ExtElem g = mul(pow(a, Int(vb)), pow(inv(b), Int(va)));
        if (((va * vb) % 2 + 2) % 2 == 1) g = mul(g, embed(Rat(-1)));
        return chi(g);
    }
    return conic_solve(a, b, embed(Rat(-1)), *this).has_value() ? 1 : -1;
}

Rat etale_trace(const PolyQ& q, const ExtElem& a) { return trace_on(q, a); }

bool norm_test(const ExtElem& d, const ExtElem& delta, const LocalField& F) {
    if (F.is_zero(d) || F.is_zero(delta)) throw ZeroInput{};
    if (F.is_square(delta)) return true;
    return F.hilbert(d, delta) == 1;
}

namespace {

struct ConicSearch {
    const LocalField& F;
    long level;   // coefficient congruence level for keys
    long digits;  // enumeration depth per integral-basis coordinate

    std::string key(const ExtElem& w) const {
        std::string out;
        for (int i = 0; i < F.degree(); ++i) {
            Rat c = w.coeff(i);
            unsigned long p = F.p();
            if (c == 0) {
                out += "0:0;";
                continue;
            }
            long v = valuation(c, p);
            if (v >= level) {
                out += "0:0;";
                continue;
            }
            Int den = c.get_den();
            long k = 0;
            while (mpz_divisible_ui_p(den.get_mpz_t(), p)) {
                mpz_divexact_ui(den.get_mpz_t(), den.get_mpz_t(), p);
                ++k;
            }
            Int modl;
            mpz_ui_pow_ui(modl.get_mpz_t(), p, static_cast<unsigned long>(level + k));
            Int dinv;
            mpz_invert(dinv.get_mpz_t(), den.get_mpz_t(), modl.get_mpz_t());
            Int num = (c.get_num() % modl) * dinv % modl;
            if (num < 0) num += modl;
            // canonical (den exponent, residue) pair at the key level
            out += std::to_string(k) + ":" + num.get_str() + ";";
        }
        return out;
    }

    ExtElem decode(unsigned long long idx) const {
        ExtElem s = PolyQ();
        unsigned long long t = idx;
        unsigned long long base = 1;
        for (long i = 0; i < digits; ++i) base *= F.p();
        for (int k = 0; k < F.degree(); ++k) {
            unsigned long long c = t % base;
            t /= base;
            if (c) s = s + Rat(static_cast<unsigned long>(c)) * F.integral_basis()[k];
        }
        return F.reduce(s);
    }
};

std::optional<ExtElem> newton_sqrt(const LocalField& F, const ExtElem& gamma,
                                   const ExtElem& rhs, ExtElem t, long target) {
    // refine gamma t^2 = rhs
    for (int it = 0; it < 64; ++it) {
        ExtElem r = F.sub(F.mul(gamma, F.mul(t, t)), rhs);
        if (F.is_zero(r) || F.val(r) >= target) return t;
        ExtElem dr = F.mul(F.embed(Rat(2)), F.mul(gamma, t));
        if (F.is_zero(dr)) return std::nullopt;
        long before = F.val(r);
        t = F.sub(t, F.div(r, dr));
        ExtElem r2 = F.sub(F.mul(gamma, F.mul(t, t)), rhs);
        if (!F.is_zero(r2) && F.val(r2) <= before) return std::nullopt;  // not converging
    }
    return std::nullopt;
}

}  // namespace

std::optional<ExtConicWitness> conic_solve(const ExtElem& a, const ExtElem& b,
                                           const ExtElem& c, const LocalField& F) {
    if (F.is_zero(a) || F.is_zero(b) || F.is_zero(c)) throw ZeroInput{};
    const unsigned long p = F.p();
    const int e = F.e();
    const int n = F.degree();

    // normalize coefficients by square factors; remember the witness scaling
    ExtElem coef[3] = {F.reduce(a), F.reduce(b), F.reduce(c)};
    long half[3];
    for (int i = 0; i < 3; ++i) {
        long v = F.val(coef[i]);
        half[i] = (v >= 0 ? v / 2 : -((-v + 1) / 2));
        coef[i] = F.mul(coef[i], F.pow(F.uniformizer(), Int(-2 * half[i])));
    }

    // Hensel bound: residual valuation past 2 v(2) + v(4abc) + 3 with a
    // partial derivative below half of it guarantees a lift.
    long vsum = F.val(coef[0]) + F.val(coef[1]) + F.val(coef[2]);
    long m_bound = (p == 2 ? 4L * e : 0L) + vsum + 3;
    long level = (m_bound + e - 1) / e;
    long db = 0;
    for (const ExtElem& bi : F.integral_basis()) db = std::max(db, den_exp(bi, p));
    long dc = 0;
    for (int i = 0; i < 3; ++i) dc = std::max(dc, den_exp(coef[i], p));
    long digits = level + 2 * db + dc;
    double bits = static_cast<double>(digits) * n * std::log2(static_cast<double>(p));
    if (bits > 21.5)
        throw PrecisionExhausted("conic residue search space too large over this field");
    unsigned long long per = 1;
    for (long i = 0; i < digits * n; ++i) per *= p;

    ConicSearch cs{F, level, digits};
    const long hensel_cap = (m_bound - 1) / 2;
    const long target = static_cast<long>(e) * F.context().precision;

    // maps from key(coef[l] * t^2) to t-index, built lazily per coefficient
    std::unordered_map<int, std::unordered_map<std::string, unsigned long long>> maps;
    auto get_map = [&](int l) -> const std::unordered_map<std::string, unsigned long long>& {
        auto it = maps.find(l);
        if (it != maps.end()) return it->second;
        auto& mp = maps[l];
        mp.reserve(static_cast<size_t>(per));
        for (unsigned long long idx = 0; idx < per; ++idx) {
            ExtElem t = cs.decode(idx);
            mp.emplace(cs.key(F.mul(coef[l], F.mul(t, t))), idx);
        }
        return mp;
    };

    for (int k = 0; k < 3; ++k) {
        int j = (k + 1) % 3, l = (k + 2) % 3;
        const auto& mp = get_map(l);
        for (unsigned long long idx = 0; idx < per; ++idx) {
            ExtElem s = cs.decode(idx);
            ExtElem w = F.add(coef[k], F.mul(coef[j], F.mul(s, s)));
            auto hit = mp.find(cs.key(F.sub(PolyQ(), w)));
            if (hit == mp.end()) continue;
            ExtElem t = cs.decode(hit->second);
            ExtElem coord[3];
            coord[k] = F.embed(Rat(1));
            coord[j] = s;
            coord[l] = t;
            ExtElem res = PolyQ();
            for (int i = 0; i < 3; ++i) res = F.add(res, F.mul(coef[i], F.mul(coord[i], coord[i])));
            if (!F.is_zero(res) && F.val(res) < m_bound) continue;  // hash collision
            if (!F.is_zero(res)) {
                // pick the most nonsingular coordinate and refine it
                int pick = -1;
                long best = 0;
                for (int i = 0; i < 3; ++i) {
                    if (F.is_zero(coord[i])) continue;
                    long d = F.val(coef[i]) + F.val(coord[i]) + (p == 2 ? e : 0);
                    if (pick < 0 || d < best) {
                        pick = i;
                        best = d;
                    }
                }
                if (pick < 0 || best > hensel_cap) continue;
                ExtElem rhs = PolyQ();
                for (int i = 0; i < 3; ++i)
                    if (i != pick) rhs = F.sub(rhs, F.mul(coef[i], F.mul(coord[i], coord[i])));
                auto refined = newton_sqrt(F, coef[pick], rhs, coord[pick], target);
                if (!refined) continue;
                coord[pick] = *refined;
            }
            // undo the square normalization: coef_orig[i] = coef[i] * pi^{2 half[i]}
            for (int i = 0; i < 3; ++i)
                coord[i] = F.mul(coord[i], F.pow(F.uniformizer(), Int(-half[i])));
            return ExtConicWitness{coord[0], coord[1], coord[2]};
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------

InvolutiveAlgebra InvolutiveAlgebra::field(const PolyQ& q, const PadicContext& ctx,
                                           int known) {
    int n = q.degree();
    if (n < 2 || n % 2 != 0 || !q.is_monic())
        throw std::invalid_argument("involutive field: monic even degree >= 2 required");
    long thr = std::min<long>(known, 1 << 20) / 2;
    if (!detail::congruent_padic(star(q), q, ctx.p, thr))
        throw std::invalid_argument("involutive field: polynomial is not self-reciprocal");
    Rat c0 = q.coeff(0);
    if (c0 != 1) {
        // the constant term of an approximate self-reciprocal factor is a
        // p-adic +-1; only the +1 branch describes paired root inverses
        if (c0 == 0 || c0 == -1)
            throw std::invalid_argument("involutive field: constant term is not 1");
        if (valuation(c0 - 1, ctx.p) <= valuation(c0 + 1, ctx.p))
            throw std::invalid_argument("involutive field: constant term is not 1");
    }
    std::vector<Rat> cs(n + 1);
    cs[0] = cs[n] = Rat(1);
    for (int i = 1; i < n; ++i) cs[i] = (q.coeff(i) + q.coeff(n - i)) / 2;
    InvolutiveAlgebra E;
    E.q_total_ = PolyQ(std::move(cs));
    E.split_ = false;
    E.ctx_ = ctx;
    auto td = trace_descent(E.q_total_);
    E.g_ = td.g;
    E.delta_ = td.delta_spec;
    E.finish();
    return E;
}

InvolutiveAlgebra InvolutiveAlgebra::split_pair(const PolyQ& part, const PadicContext& ctx,
                                                int known) {
    if (part.degree() < 1 || !part.is_monic() || part.coeff(0) == 0)
        throw std::invalid_argument("involutive split: monic part with nonzero constant required");
    PolyQ partner = star(part);
    long thr = std::min<long>(known, 1 << 20) / 2;
    if (detail::congruent_padic(part, partner, ctx.p, thr))
        throw std::invalid_argument("involutive split: part is self-reciprocal, not split");
    InvolutiveAlgebra E;
    E.q_total_ = part * partner;
    E.split_ = true;
    E.ctx_ = ctx;
    E.part_ = part;
    E.partner_ = partner;
    E.finish();
    return E;
}

void InvolutiveAlgebra::finish() {
    int n = q_total_.degree();
    auto [g, u, v] = xgcd(PolyQ::x(), q_total_);
    if (g.degree() != 0) throw std::invalid_argument("involutive algebra: x not invertible");
    inv_x_ = u % q_total_;
    iota_ = MatQ(n, n);
    PolyQ b = PolyQ::constant(Rat(1));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) iota_.at(i, j) = b.coeff(i);
        if (j + 1 < n) b = (b * inv_x_) % q_total_;
    }
    if (iota_ * iota_ != MatQ::identity(n))
        throw std::logic_error("involutive algebra: involution does not square to identity");
}

ExtElem InvolutiveAlgebra::apply_iota(const ExtElem& a) const {
    int n = q_total_.degree();
    PolyQ r = a % q_total_;
    std::vector<Rat> in(n, Rat(0));
    for (int i = 0; i <= r.degree(); ++i) in[i] = r.coeff(i);
    std::vector<Rat> out = iota_.apply(in);
    return PolyQ(std::move(out));
}

Rat InvolutiveAlgebra::trace(const ExtElem& a) const { return trace_on(q_total_, a); }

ExtElem InvolutiveAlgebra::component(const ExtElem& a, int which) const {
    if (!split_) throw std::logic_error("component: algebra is not split");
    return a % (which == 0 ? part_ : partner_);
}

}  // namespace qfiso
