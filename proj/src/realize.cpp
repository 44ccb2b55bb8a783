#include "qfiso/realize.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "qfiso/hermitian.hpp"
#include "qfiso/padic_ext.hpp"

namespace qfiso {

namespace {

MatQ companion(const PolyQ& f) {
    int n = f.degree();
    MatQ a(n, n);
    for (int i = 0; i + 1 < n; ++i) a.at(i + 1, i) = 1;
    for (int i = 0; i < n; ++i) a.at(i, n - 1) = -f.coeff(i);
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

MatQ repeat_block(const MatQ& a, int copies) {
    MatQ r = a;
    for (int i = 1; i < copies; ++i) r = blockdiag(r, a);
    return r;
}

// columns are residues mod a degree-n modulus
MatQ poly_columns(const std::vector<PolyQ>& cols, int n) {
    MatQ b(n, static_cast<int>(cols.size()));
    for (int k = 0; k < static_cast<int>(cols.size()); ++k)
        for (int i = 0; i <= cols[k].degree(); ++i) b.at(i, k) = cols[k].coeff(i);
    return b;
}

PolyQ powmod(PolyQ a, int e, const PolyQ& m) {
    PolyQ r = PolyQ::constant(Rat(1));
    a = a % m;
    for (; e > 0; e >>= 1) {
        if (e & 1) r = (r * a) % m;
        a = (a * a) % m;
    }
    return r;
}

PolyQ inv_x_mod(const PolyQ& m) {
    auto [g, u, v] = xgcd(PolyQ::x(), m);
    if (g.degree() != 0)
        throw std::invalid_argument("x is not invertible modulo the block modulus");
    return u % m;
}

PolyQ eval_mod(const PolyQ& f, const PolyQ& at, const PolyQ& m) {
    PolyQ r;
    for (int i = f.degree(); i >= 0; --i)
        r = (r * at + PolyQ::constant(f.coeff(i))) % m;
    return r;
}

MatQ must_invert(const MatQ& m, const char* what) {
    auto inv = inverse(m);
    if (!inv) throw std::logic_error(std::string("singular matrix: ") + what);
    return *inv;
}

void check_min_poly(const MatQ& iso, const PolyQ& q, int level) {
    if (!eval_poly(q.pow(level), iso).is_zero())
        throw std::logic_error("realized block misses its minimal polynomial");
    if (level > 1 && eval_poly(q.pow(level - 1), iso).is_zero())
        throw std::logic_error("realized block has a smaller minimal polynomial than requested");
}

// Values <x^i s^j v, v> for one module generator of a self-reciprocal block.
// Base values at j = level-1, i < d come from the trace of x^i h; higher i
// reduce through x^i + x^-i = alpha(y) s + beta(y) with y = x + 1/x.
struct SymTable {
    int d, level;
    PolyQ S;                // s(x) as a polynomial in y
    std::vector<PolyQ> P;   // x^i + x^-i as polynomials in y
    std::vector<Rat> tr;    // Tr(x^i h), 0 <= i < d
    std::vector<std::vector<std::optional<Rat>>> memo;

    SymTable(const PolyQ& q, int lvl, const PolyQ& h_x) : level(lvl) {
        d = q.degree() / 2;
        S = trace_descent(q).g;
        P.resize(2 * d);
        P[0] = PolyQ::constant(Rat(2));
        if (2 * d > 1) P[1] = PolyQ::x();
        for (int i = 2; i < 2 * d; ++i) P[i] = PolyQ::x() * P[i - 1] - P[i - 2];
        tr.resize(d);
        for (int i = 0; i < d; ++i)
            tr[i] = etale_trace(q, (PolyQ::x().pow(i) * h_x) % q);
        memo.assign(2 * d, std::vector<std::optional<Rat>>(level));
    }

    Rat val(int i, int j) {
        if (i < 0) i = -i;
        if (j >= level) return Rat(0);
        if (i < d) return j == level - 1 ? tr[i] : Rat(0);
        auto& slot = memo[i][j];
        if (slot) return *slot;
        auto [alpha, beta] = P[i].divmod(S);
        Rat r = (ybracket(alpha, j + 1) + ybracket(beta, j)) / Rat(2);
        slot = r;
        return r;
    }

    // <g(y) s^j v, v> expanded through y^m = sum_t binom(m,t) x^{m-2t}
    Rat ybracket(const PolyQ& g, int j) {
        Rat r(0);
        for (int m = 0; m <= g.degree(); ++m) {
            if (g.coeff(m) == 0) continue;
            for (int t = 0; t <= m; ++t) {
                Int b;
                mpz_bin_uiui(b.get_mpz_t(), m, t);
                r += g.coeff(m) * Rat(b) * val(m - 2 * t, j);
            }
        }
        return r;
    }
};

void require_self_reciprocal(const PolyQ& q) {
    if (q.is_zero() || !q.is_monic() || q.degree() < 2 || q.degree() % 2 != 0 ||
        star(q) != q)
        throw std::invalid_argument("expected a monic self-reciprocal polynomial of even degree");
}

// R + dual(R), R = (k[x]/(q^level))^rank, with the pairing in which the dual
// copy acts through the inverse transpose.
IsometryPair dual_doubling(const PolyQ& q, int level, int rank, const PadicContext& ctx) {
    MatQ c = repeat_block(companion(q.pow(level)), rank);
    MatQ iso = blockdiag(c, must_invert(c.transpose(), "dual action"));
    int n = c.rows();
    MatQ gram(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) gram.at(i, n + i) = gram.at(n + i, i) = 1;
    return IsometryPair(QuadSpace(gram, ctx), iso);
}

Rat nonsquare_unit(const PadicContext& ctx) {
    return ctx.p == 2 ? Rat(5) : Rat(static_cast<long>(least_nonresidue(ctx.p)));
}

bool inv_is_hyperbolic_plane(const QuadInvariant& q, const PadicContext& ctx) {
    return q.dim == 2 && q.det_class == square_class(Rat(-1), ctx);
}

QuadInvariant inv_scale(const QuadInvariant& q, int s, const PadicContext& ctx) {
    if (s == 1) return q;
    int n = q.dim;
    Rat d = (n % 2) ? Rat(-q.det_class.rep) : q.det_class.rep;
    int h = q.hasse;
    if ((n * (n - 1) / 2) % 2) h *= hilbert_symbol(Rat(-1), Rat(-1), ctx);
    if ((n - 1) % 2) h *= hilbert_symbol(Rat(-1), q.det_class.rep, ctx);
    return {n, square_class(d, ctx), n == 1 ? 1 : h};
}

QuadInvariant inv_sub(const QuadInvariant& total, const QuadInvariant& part,
                      const PadicContext& ctx) {
    int n = total.dim - part.dim;
    if (n < 1) throw std::logic_error("invariant subtraction with nonpositive dimension");
    Rat d = total.det_class.rep * part.det_class.rep;
    int h = total.hasse * part.hasse * hilbert_symbol(d, part.det_class.rep, ctx);
    return {n, square_class(d, ctx), n == 1 ? 1 : h};
}

QuadInvariant flip_hasse(const QuadInvariant& q) { return {q.dim, q.det_class, -q.hasse}; }

// ---------------------------------------------------------------------------
// counterexample machinery
// ---------------------------------------------------------------------------

struct PlanLevel {
    int level = 1;
    int rank = 0;
    std::optional<QuadInvariant> quad;
    bool has_herm = false;
    bool herm_norm = true;
};

struct PlanFactor {
    PolyQ exact;  // for pairs: the star-fixed product of both halves
    FactorTag tag = FactorTag::SelfReciprocal;
    std::vector<PlanLevel> levels;
    std::optional<PolyQ> nonnorm;  // cached non-norm of the fixed field
};

std::optional<Rat> rat_reconstruct(const Rat& c, unsigned long p, int digits) {
    if (c == 0) return Rat(0);
    if (digits < 2) return std::nullopt;
    long v = valuation(c, p);
    if (v < 0) {
        // shift p out of the denominator, reconstruct the unit part
        Int scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), p, static_cast<unsigned long>(-v));
        auto unit = rat_reconstruct(c * Rat(scale), p, digits);
        if (!unit) return std::nullopt;
        return *unit / Rat(scale);
    }
    Int M;
    mpz_ui_pow_ui(M.get_mpz_t(), p, static_cast<unsigned long>(digits));
    Int deninv;
    if (mpz_invert(deninv.get_mpz_t(), c.get_den().get_mpz_t(), M.get_mpz_t()) == 0)
        return std::nullopt;
    Int r = (c.get_num() % M) * deninv % M;
    if (r < 0) r += M;
    if (r == 0) return Rat(0);
    Int bound, half = M / 2;
    mpz_sqrt(bound.get_mpz_t(), half.get_mpz_t());
    Int a0 = M, a1 = r, x0 = 0, x1 = 1;
    while (a1 > bound) {
        Int q = a0 / a1;
        Int a2 = a0 - q * a1;
        a0 = a1;
        a1 = a2;
        Int x2 = x0 - q * x1;
        x0 = x1;
        x1 = x2;
    }
    if (x1 == 0) return std::nullopt;
    Int num = a1, den = x1;
    if (den < 0) {
        den = -den;
        num = -num;
    }
    if (den > bound) return std::nullopt;
    Rat out(num, den);
    out.canonicalize();
    if (mpz_divisible_ui_p(out.get_den().get_mpz_t(), p)) return std::nullopt;
    Rat diff = out - c;
    if (diff != 0 && valuation(diff, p) < digits) return std::nullopt;
    return out;
}

std::optional<PolyQ> poly_reconstruct(const PolyQ& lift, unsigned long p, int digits) {
    std::vector<Rat> cs(static_cast<size_t>(lift.degree()) + 1);
    for (int i = 0; i <= lift.degree(); ++i) {
        auto c = rat_reconstruct(lift.coeff(i), p, digits);
        if (!c) return std::nullopt;
        cs[static_cast<size_t>(i)] = *c;
    }
    return PolyQ(std::move(cs));
}

// Exact polynomials for the invariant's factor records: x+-1 as stated,
// self-reciprocal factors by rational reconstruction of their lifts, pairs
// by reconstruction of the star-fixed product of the two half lifts. Fails
// (nullopt) unless the reconstructed product reproduces f exactly.
std::optional<std::vector<PolyQ>> reconstruct_records(const PolyQ& f,
                                                      const MilnorInvariant& inv,
                                                      const PadicFactorization& fac,
                                                      unsigned long p) {
    std::vector<PolyQ> out;
    PolyQ prod = PolyQ::constant(Rat(1));
    long thr = std::max(2, fac.precision / 2);
    for (const auto& rec : inv.factors) {
        PolyQ exact;
        if (rec.tag == FactorTag::PlusOne || rec.tag == FactorTag::MinusOne) {
            exact = rec.factor;
        } else {
            const PadicFactor* match = nullptr;
            for (const auto& cand : fac.factors) {
                if (cand.tag != rec.tag || cand.poly.degree() != rec.factor.degree())
                    continue;
                long t = std::min<long>(thr, std::max(2, std::min(cand.known, fac.precision) / 2));
                if (detail::congruent_padic(cand.poly, rec.factor, p, t)) {
                    match = &cand;
                    break;
                }
            }
            if (!match) return std::nullopt;
            int digits = std::min(match->known, fac.precision);
            PolyQ lift = match->poly;
            if (rec.tag == FactorTag::Paired)
                lift = match->poly * fac.factors[static_cast<size_t>(match->partner)].poly;
            auto rebuilt = poly_reconstruct(lift, p, digits);
            if (!rebuilt) return std::nullopt;
            exact = *rebuilt;
            if (exact.coeff(0) == 0 || star(exact) != exact) return std::nullopt;
        }
        out.push_back(exact);
        prod = prod * exact.pow(rec.multiplicity);
    }
    if (prod != f) return std::nullopt;
    return out;
}

const PolyQ& factor_nonnorm(PlanFactor& pf, const PadicContext& ctx) {
    if (pf.nonnorm) return *pf.nonnorm;
    InvolutiveAlgebra e = InvolutiveAlgebra::field(pf.exact, ctx);
    PolyQ y_x = (PolyQ::x() + inv_x_mod(pf.exact)) % pf.exact;
    const PolyQ& g = e.fixed_g();
    std::vector<PolyQ> cands;
    for (const Rat& r : square_class_reps(ctx)) cands.push_back(PolyQ::constant(r));
    for (long j : {0L, 1L, -1L, 2L, -2L, 3L, -3L})
        for (const Rat& r : square_class_reps(ctx))
            cands.push_back(Rat(r) * (PolyQ::x() + PolyQ::constant(Rat(j))));
    for (long j : {0L, 1L, -1L})
        for (const Rat& r : square_class_reps(ctx))
            cands.push_back(Rat(r) * (PolyQ::x() * PolyQ::x() + PolyQ::constant(Rat(j))));
    for (const PolyQ& cand : cands) {
        if ((cand % g).is_zero()) continue;
        PolyQ cand_x = eval_mod(cand, y_x, pf.exact);
        HermSpace probe(e, {e.reduce(cand_x)}, 1);
        if (!herm_invariant(probe).det_is_norm) {
            pf.nonnorm = cand;
            return *pf.nonnorm;
        }
    }
    throw SearchExhausted("no non-norm element found in the fixed field");
}

struct OddRef {
    size_t fi = 0, li = 0;
    QuadInvariant inv{1, SquareClass{Rat(1)}, 1};
    int scale = 1;  // (-1)^((level-1)/2)
};

void assert_twist(bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("counterexample twist check failed: ") + what);
}

// Replace the residuals of the two chosen odd unipotent blocks by a
// non-isomorphic pair whose scaled orthogonal sum is unchanged.
RecipeCase twist_two_odd(std::vector<PlanFactor>& plan, const OddRef& A, const OddRef& B,
                         const PadicContext& ctx, CounterexampleRecipe& recipe) {
    const QuadInvariant a = A.inv, b = B.inv;
    QuadInvariant T = orthogonal_sum(inv_scale(a, A.scale, ctx), inv_scale(b, B.scale, ctx), ctx);
    QuadInvariant a2 = a, b2 = b;
    RecipeCase kind;
    bool hypA = inv_is_hyperbolic_plane(a, ctx), hypB = inv_is_hyperbolic_plane(b, ctx);

    if (a.dim == 1 && b.dim == 1) {
        kind = RecipeCase::M0BothOneDim;
        Rat delta = Rat(A.scale) * a.det_class.rep * Rat(B.scale) * b.det_class.rep;
        std::optional<Rat> gamma;
        for (const Rat& r : square_class_reps(ctx)) {
            if (r == 1) continue;
            if (hilbert_symbol(r, -delta, ctx) == 1) {
                gamma = r;
                break;
            }
        }
        assert_twist(gamma.has_value(), "no gamma in the norm group");
        a2 = {1, square_class(*gamma * a.det_class.rep, ctx), 1};
        b2 = {1, square_class(*gamma * b.det_class.rep, ctx), 1};
        recipe.gamma = *gamma;
        recipe.delta = square_class(delta, ctx).rep;
    } else if (a.dim == 1 || b.dim == 1) {
        kind = RecipeCase::M0MixedOneTwo;
        const OddRef& O = a.dim == 1 ? A : B;
        const OddRef& W = a.dim == 1 ? B : A;
        int s = O.scale * W.scale;
        QuadInvariant scaled_w = inv_scale(W.inv, s, ctx);
        std::optional<Rat> xi;
        for (const Rat& r : square_class_reps(ctx)) {
            if (square_class(r, ctx) == O.inv.det_class) continue;
            if (represents(scaled_w, r, ctx)) {
                xi = r;
                break;
            }
        }
        assert_twist(xi.has_value(), "no represented xi outside the line class");
        QuadInvariant o2{1, square_class(*xi, ctx), 1};
        QuadInvariant w2 = inv_scale(inv_sub(T, inv_scale(o2, O.scale, ctx), ctx), W.scale, ctx);
        recipe.xi = *xi;
        recipe.eta = square_class(scaled_w.det_class.rep * *xi, ctx).rep;
        recipe.alpha = O.inv.det_class.rep;
        if (a.dim == 1) {
            a2 = o2;
            b2 = w2;
        } else {
            a2 = w2;
            b2 = o2;
        }
    } else if (!hypA && !hypB) {
        kind = RecipeCase::M0BothBig;
        a2 = flip_hasse(a);
        b2 = flip_hasse(b);
    } else if (hypA && hypB) {
        kind = RecipeCase::M0BothHyperbolic;
        QuadInvariant z = diag_invariant({Rat(1), -nonsquare_unit(ctx)}, ctx);
        a2 = inv_scale(z, A.scale, ctx);
        b2 = inv_scale(z, B.scale, ctx);
    } else {
        kind = RecipeCase::M0HyperbolicVsNot;
        bool a_is_hyp = hypA;
        const QuadInvariant& w = a_is_hyp ? b : a;
        if (w.dim == 2) {
            // swap: the hyperbolic slot takes the other residual, suitably
            // scaled, and the other slot becomes a hyperbolic plane
            QuadInvariant h2 = inv_scale(w, A.scale * B.scale, ctx);
            QuadInvariant w2 = diag_invariant({Rat(1), Rat(-1)}, ctx);
            a2 = a_is_hyp ? h2 : w2;
            b2 = a_is_hyp ? w2 : h2;
        } else {
            QuadInvariant z = diag_invariant({Rat(1), -nonsquare_unit(ctx)}, ctx);
            int sh = a_is_hyp ? A.scale : B.scale;
            int sw = a_is_hyp ? B.scale : A.scale;
            QuadInvariant h2 = inv_scale(z, sh, ctx);
            QuadInvariant w2 = inv_scale(inv_sub(T, z, ctx), sw, ctx);
            a2 = a_is_hyp ? h2 : w2;
            b2 = a_is_hyp ? w2 : h2;
        }
    }

    assert_twist(a2 != a && b2 != b, "twisted residuals must differ");
    assert_twist(invariant_admissible(a2, ctx) && invariant_admissible(b2, ctx),
                 "twisted residuals must be admissible");
    assert_twist(orthogonal_sum(inv_scale(a2, A.scale, ctx), inv_scale(b2, B.scale, ctx), ctx) == T,
                 "scaled sum must be preserved");
    plan[A.fi].levels[A.li].quad = a2;
    plan[B.fi].levels[B.li].quad = b2;
    return kind;
}

IsometryPair realize_plan(std::vector<PlanFactor>& plan, const PadicContext& ctx) {
    std::optional<IsometryPair> out;
    for (auto& pf : plan) {
        for (const auto& lv : pf.levels) {
            std::optional<IsometryPair> blk;
            switch (pf.tag) {
                case FactorTag::PlusOne:
                case FactorTag::MinusOne: {
                    int sign = pf.tag == FactorTag::MinusOne ? 1 : -1;
                    if (lv.level % 2 == 1) {
                        blk = realize_unipotent_block(sign, lv.level,
                                                      diagonal_from_invariant(*lv.quad, ctx), ctx);
                    } else {
                        if (lv.rank % 2 != 0)
                            throw std::logic_error("even unipotent level with odd rank");
                        blk = realize_hyperbolic_block(pf.exact, lv.level, lv.rank / 2, ctx);
                    }
                    break;
                }
                case FactorTag::SelfReciprocal: {
                    std::vector<PolyQ> diag(static_cast<size_t>(lv.rank),
                                            PolyQ::constant(Rat(1)));
                    if (!lv.herm_norm) diag[0] = factor_nonnorm(pf, ctx);
                    blk = realize_symmetric_block(pf.exact, lv.level, diag, ctx);
                    break;
                }
                case FactorTag::Paired:
                    blk = realize_hyperbolic_block(pf.exact, lv.level, lv.rank, ctx);
                    break;
            }
            out = out ? pair_sum(*out, *blk) : *blk;
        }
    }
    if (!out) throw std::logic_error("empty realization plan");
    return *out;
}

}  // namespace

IsometryPair realize_unipotent_block(int sign, int level, const std::vector<Rat>& diag,
                                     const PadicContext& ctx) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    if (level < 1 || level % 2 == 0) throw EvenLevel{};
    if (diag.empty()) throw std::invalid_argument("empty residual diagonal");
    for (const Rat& b : diag)
        if (b == 0) throw ZeroEntry{};

    PolyQ q = PolyQ::linear_root(Rat(sign));
    PolyQ qpl = q.pow(level);
    PolyQ delta = (PolyQ::x() - inv_x_mod(qpl)) % qpl;
    std::vector<PolyQ> cols;
    for (int i = 0; i < level; ++i) cols.push_back(powmod(delta, i, qpl));
    MatQ b = poly_columns(cols, level);
    MatQ sigma1 = must_invert(b, "delta-power basis") * companion(qpl) * b;

    MatQ iso = repeat_block(sigma1, static_cast<int>(diag.size()));
    MatQ gram(0, 0);
    for (const Rat& entry : diag) {
        MatQ g(level, level);
        for (int i = 0; i < level; ++i)
            for (int j = 0; j < level; ++j)
                if (i + j == level - 1) g.at(i, j) = (j % 2) ? -entry : entry;
        gram = gram.rows() == 0 ? g : blockdiag(gram, g);
    }
    check_min_poly(iso, q, level);
    return IsometryPair(QuadSpace(gram, ctx), iso);
}

IsometryPair realize_symmetric_block(const PolyQ& q, int level,
                                     const std::vector<PolyQ>& herm_diag,
                                     const PadicContext& ctx) {
    require_self_reciprocal(q);
    if (level < 1) throw std::invalid_argument("level must be positive");
    if (herm_diag.empty()) throw std::invalid_argument("empty hermitian diagonal");
    {
        PadicFactorization fac = factor_padic(q, ctx);
        if (fac.factors.size() != 1 || fac.factors[0].multiplicity != 1 ||
            fac.factors[0].tag != FactorTag::SelfReciprocal)
            throw NotIrreducibleOverQp("the factor splits over Q_p");
    }
    int d = q.degree() / 2;
    PolyQ g_fixed = trace_descent(q).g;
    for (const PolyQ& h : herm_diag)
        if ((h % g_fixed).is_zero()) throw ZeroEntry{};

    PolyQ qpl = q.pow(level);
    int n1 = 2 * d * level;
    PolyQ invx_l = inv_x_mod(qpl);
    PolyQ s_mod = (q * powmod(invx_l, d, qpl)) % qpl;
    std::vector<PolyQ> cols;
    for (int j = 0; j < level; ++j) {
        PolyQ sj = powmod(s_mod, j, qpl);
        for (int i = 0; i < 2 * d; ++i) cols.push_back((PolyQ::x().pow(i) * sj) % qpl);
    }
    MatQ b = poly_columns(cols, n1);
    MatQ sigma1 = must_invert(b, "x^i s^j basis") * companion(qpl) * b;

    PolyQ y_x = (PolyQ::x() + inv_x_mod(q)) % q;
    MatQ gram(0, 0);
    for (const PolyQ& h : herm_diag) {
        SymTable tab(q, level, eval_mod(h, y_x, q));
        MatQ g(n1, n1);
        for (int col = 0; col < n1; ++col)
            for (int row = 0; row < n1; ++row) {
                int i = row % (2 * d), j = row / (2 * d);
                int i2 = col % (2 * d), j2 = col / (2 * d);
                g.at(row, col) = tab.val(i - i2, j + j2);
            }
        gram = gram.rows() == 0 ? g : blockdiag(gram, g);
    }
    MatQ iso = repeat_block(sigma1, static_cast<int>(herm_diag.size()));
    check_min_poly(iso, q, level);
    return IsometryPair(QuadSpace(gram, ctx), iso);
}

IsometryPair realize_symmetric_block(const PolyQ& q, int level,
                                     const std::vector<Rat>& herm_diag,
                                     const PadicContext& ctx) {
    std::vector<PolyQ> lifted;
    for (const Rat& h : herm_diag) {
        if (h == 0) throw ZeroEntry{};
        lifted.push_back(PolyQ::constant(h));
    }
    return realize_symmetric_block(q, level, lifted, ctx);
}

IsometryPair realize_hyperbolic_block(const PolyQ& factor, int level, int rank,
                                      const PadicContext& ctx) {
    if (level < 1 || rank < 1) throw std::invalid_argument("level and rank must be positive");
    if (factor.is_zero() || !factor.is_monic() || factor.degree() < 1)
        throw std::invalid_argument("factor must be monic of positive degree");
    if (factor.coeff(0) == 0) throw ZeroConstantTerm{};

    bool pm1 = factor == PolyQ::linear_root(Rat(1)) || factor == PolyQ::linear_root(Rat(-1));
    if (pm1) {
        if (level % 2 != 0) throw OddLevelForPM1{};
        IsometryPair out = dual_doubling(factor, level, rank, ctx);
        check_min_poly(out.iso, factor, level);
        return out;
    }
    if (star(factor) != factor) {
        IsometryPair out = dual_doubling(factor, level, rank, ctx);
        check_min_poly(out.iso, factor * star(factor), level);
        return out;
    }

    // star-fixed product of a reciprocal pair: the quotient algebra already
    // carries both halves, pair them through an involution-symmetrized
    // coefficient functional
    if (factor(Rat(1)) == 0 || factor(Rat(-1)) == 0 || factor.coeff(0) != 1)
        throw std::invalid_argument("star-fixed pair product must avoid the roots +-1");
    if (gcd(factor, factor.derivative()).degree() != 0)
        throw std::invalid_argument("pair product must be squarefree");
    {
        PadicFactorization fac = factor_padic(factor, ctx);
        for (const auto& f : fac.factors)
            if (f.tag != FactorTag::Paired)
                throw std::invalid_argument(
                    "star-fixed factor is not a product of a reciprocal pair");
    }

    PolyQ g = factor.pow(level);
    int n = g.degree();
    PolyQ invx = inv_x_mod(g);
    std::vector<PolyQ> xpow(static_cast<size_t>(n)), ixpow(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        xpow[static_cast<size_t>(i)] = powmod(PolyQ::x(), i, g);
        ixpow[static_cast<size_t>(i)] = powmod(invx, i, g);
    }
    auto iota = [&](const PolyQ& a) {
        PolyQ r;
        for (int m = 0; m <= a.degree(); ++m)
            r = r + a.coeff(m) * ixpow[static_cast<size_t>(m)];
        return r % g;
    };
    MatQ gram1(n, n);
    bool found = false;
    for (int j = 0; j <= 2 * n && !found; ++j) {
        PolyQ xj = powmod(PolyQ::x(), j, g);
        auto tau = [&](const PolyQ& c) -> Rat {
            return Rat(((xj * c) % g).coeff(n - 1)) + Rat(((xj * iota(c)) % g).coeff(n - 1));
        };
        MatQ cand(n, n);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                cand.at(i, k) = tau((ixpow[static_cast<size_t>(i)] *
                                     xpow[static_cast<size_t>(k)]) % g);
        if (!(cand - cand.transpose()).is_zero())
            throw std::logic_error("pair block pairing is not symmetric");
        if (det(cand) != 0) {
            gram1 = cand;
            found = true;
        }
    }
    if (!found) throw SearchExhausted("no nondegenerate invariant pairing on the pair block");

    MatQ gram = repeat_block(gram1, rank);
    MatQ iso = repeat_block(companion(g), rank);
    check_min_poly(iso, factor, level);
    return IsometryPair(QuadSpace(gram, ctx), iso);
}

IsometryPair realize_block(const BlockSpec& spec, const PadicContext& ctx) {
    switch (spec.tag) {
        case FactorTag::PlusOne:
        case FactorTag::MinusOne: {
            int sign = spec.tag == FactorTag::MinusOne ? 1 : -1;
            if (spec.factor != PolyQ::linear_root(Rat(sign)))
                throw std::invalid_argument("factor polynomial disagrees with the +-1 tag");
            if (spec.level % 2 == 1) {
                if (static_cast<int>(spec.residual.size()) != spec.rank)
                    throw std::invalid_argument("residual diagonal length must equal the rank");
                return realize_unipotent_block(sign, spec.level, spec.residual, ctx);
            }
            if (!spec.residual.empty())
                throw std::invalid_argument("even unipotent levels take no residual data");
            if (spec.rank % 2 != 0)
                throw std::invalid_argument("even unipotent levels require an even rank");
            return realize_hyperbolic_block(spec.factor, spec.level, spec.rank / 2, ctx);
        }
        case FactorTag::SelfReciprocal:
            if (static_cast<int>(spec.residual.size()) != spec.rank)
                throw std::invalid_argument("residual diagonal length must equal the rank");
            return realize_symmetric_block(spec.factor, spec.level, spec.residual, ctx);
        case FactorTag::Paired:
            if (!spec.residual.empty())
                throw std::invalid_argument("pair blocks take no residual data");
            return realize_hyperbolic_block(spec.factor, spec.level, spec.rank, ctx);
    }
    throw std::invalid_argument("unknown block tag");
}

IsometryPair assemble(const std::vector<BlockSpec>& specs, const PadicContext& ctx) {
    if (specs.empty()) throw EmptySpec{};
    std::optional<IsometryPair> out;
    for (const auto& spec : specs) {
        IsometryPair blk = realize_block(spec, ctx);
        out = out ? pair_sum(*out, blk) : blk;
    }
    return *out;
}

IsometryPair pair_sum(const IsometryPair& a, const IsometryPair& b) {
    if (a.ctx.p != b.ctx.p) throw PrimeMismatch{};
    return IsometryPair(QuadSpace(blockdiag(a.space.gram, b.space.gram), a.ctx),
                        blockdiag(a.iso, b.iso));
}

const char* recipe_name(RecipeCase c) {
    switch (c) {
        case RecipeCase::EvenHermTwist: return "even-herm-twist";
        case RecipeCase::TwoOddHermTwist: return "two-odd-herm-twist";
        case RecipeCase::M0BothBig: return "m0-two-dims>=2";
        case RecipeCase::M0HyperbolicVsNot: return "hyperbolic-vs-not";
        case RecipeCase::M0BothHyperbolic: return "both-hyperbolic";
        case RecipeCase::M0BothOneDim: return "both-one-dim";
        case RecipeCase::M0MixedOneTwo: return "mixed-1-2";
        case RecipeCase::ResidualHermTwist: return "m0-m1-residual-big";
    }
    return "unknown";
}

std::optional<CounterexampleWitness> counterexample(const IsometryPair& pair,
                                                    const std::vector<PolyQ>* certificate) {
    MilnorAnalysis an = analyze(pair, certificate);
    Verdict verdict = decide_single_class(an.invariant, pair.ctx);
    if (verdict.single_class) return std::nullopt;

    PolyQ f = an.invariant.char_poly;
    auto exacts = reconstruct_records(f, an.invariant, an.fac, pair.ctx.p);
    for (int esc : {2, 4, 8}) {
        if (exacts) break;
        try {
            PadicFactorization refac =
                factor_padic(f, PadicContext(pair.ctx.p, an.working_precision * esc),
                             certificate);
            exacts = reconstruct_records(f, an.invariant, refac, pair.ctx.p);
        } catch (const PrecisionExhausted&) {
        }
    }
    if (!exacts)
        throw FactorizationFailed(
            "cannot reconstruct exact factor polynomials; supply a certificate");

    std::vector<PlanFactor> plan;
    for (size_t i = 0; i < an.invariant.factors.size(); ++i) {
        const FactorRecord& rec = an.invariant.factors[i];
        PlanFactor pf;
        pf.exact = (*exacts)[i];
        pf.tag = rec.tag;
        for (const auto& lv : rec.levels) {
            PlanLevel pl;
            pl.level = lv.level;
            pl.rank = lv.rank;
            pl.quad = lv.quad;
            if (lv.herm && lv.herm->kind == HermCase::Field) {
                pl.has_herm = true;
                pl.herm_norm = lv.herm->det_is_norm;
            }
            pf.levels.push_back(pl);
        }
        plan.push_back(std::move(pf));
    }

    std::vector<OddRef> odds;
    std::vector<size_t> selfrecs;
    for (size_t fi = 0; fi < plan.size(); ++fi) {
        if (plan[fi].tag == FactorTag::SelfReciprocal) selfrecs.push_back(fi);
        if (plan[fi].tag != FactorTag::PlusOne && plan[fi].tag != FactorTag::MinusOne) continue;
        for (size_t li = 0; li < plan[fi].levels.size(); ++li) {
            const PlanLevel& lv = plan[fi].levels[li];
            if (lv.level % 2 == 1)
                odds.push_back({fi, li, *lv.quad, ((lv.level - 1) / 2) % 2 ? -1 : 1});
        }
    }
    auto flip_herm = [&](size_t fi, size_t li) {
        plan[fi].levels[li].herm_norm = !plan[fi].levels[li].herm_norm;
    };
    auto odd_levels_of = [&](size_t fi) {
        std::vector<size_t> out;
        for (size_t li = 0; li < plan[fi].levels.size(); ++li)
            if (plan[fi].levels[li].level % 2 == 1) out.push_back(li);
        return out;
    };
    auto even_level_of = [&](size_t fi) -> std::optional<size_t> {
        for (size_t li = 0; li < plan[fi].levels.size(); ++li)
            if (plan[fi].levels[li].level % 2 == 0) return li;
        return std::nullopt;
    };

    CounterexampleRecipe recipe{RecipeCase::EvenHermTwist, {}, {}, {}, {}, {}, {}};
    switch (verdict.failing) {
        case FailTag::M0TooBig:
            recipe.kind = twist_two_odd(plan, odds[0], odds[1], pair.ctx, recipe);
            break;
        case FailTag::ResidualTooBig: {
            recipe.kind = RecipeCase::ResidualHermTwist;
            const OddRef& a = odds[0];
            QuadInvariant flipped = flip_hasse(a.inv);
            assert_twist(invariant_admissible(flipped, pair.ctx),
                         "flipped residual must be admissible");
            plan[a.fi].levels[a.li].quad = flipped;
            size_t fi = selfrecs[0];
            flip_herm(fi, odd_levels_of(fi)[0]);
            recipe.herm_twist = factor_nonnorm(plan[fi], pair.ctx);
            break;
        }
        case FailTag::EvenLevelSelfReciprocal: {
            recipe.kind = RecipeCase::EvenHermTwist;
            size_t fi = selfrecs[0];
            for (size_t s : selfrecs)
                if (even_level_of(s)) {
                    fi = s;
                    break;
                }
            flip_herm(fi, *even_level_of(fi));
            recipe.herm_twist = factor_nonnorm(plan[fi], pair.ctx);
            break;
        }
        case FailTag::MultipleOddLevels: {
            recipe.kind = RecipeCase::TwoOddHermTwist;
            size_t fi = selfrecs[0];
            for (size_t s : selfrecs)
                if (odd_levels_of(s).size() >= 2) {
                    fi = s;
                    break;
                }
            auto lis = odd_levels_of(fi);
            flip_herm(fi, lis[0]);
            flip_herm(fi, lis[1]);
            recipe.herm_twist = factor_nonnorm(plan[fi], pair.ctx);
            break;
        }
        case FailTag::Mixed: {
            std::optional<size_t> with_even, with_two_odd;
            for (size_t s : selfrecs) {
                if (!with_even && even_level_of(s)) with_even = s;
                if (!with_two_odd && odd_levels_of(s).size() >= 2) with_two_odd = s;
            }
            if (with_even) {
                recipe.kind = RecipeCase::EvenHermTwist;
                flip_herm(*with_even, *even_level_of(*with_even));
                recipe.herm_twist = factor_nonnorm(plan[*with_even], pair.ctx);
            } else if (with_two_odd) {
                recipe.kind = RecipeCase::TwoOddHermTwist;
                auto lis = odd_levels_of(*with_two_odd);
                flip_herm(*with_two_odd, lis[0]);
                flip_herm(*with_two_odd, lis[1]);
                recipe.herm_twist = factor_nonnorm(plan[*with_two_odd], pair.ctx);
            } else {
                // several concentrated self-reciprocal factors: one
                // compensating determinant flip in each of the first two
                recipe.kind = RecipeCase::TwoOddHermTwist;
                flip_herm(selfrecs[0], odd_levels_of(selfrecs[0])[0]);
                flip_herm(selfrecs[1], odd_levels_of(selfrecs[1])[0]);
                recipe.herm_twist = factor_nonnorm(plan[selfrecs[0]], pair.ctx);
            }
            break;
        }
        default:
            throw std::logic_error("counterexample: unexpected failure tag");
    }

    IsometryPair witness = realize_plan(plan, pair.ctx);
    if (!gl_conjugate(pair, witness) || !is_isometric(pair.space, witness.space) ||
        o_conjugate(pair, witness))
        throw std::logic_error("counterexample: witness contract violated");
    return CounterexampleWitness{std::move(witness), std::move(recipe)};
}

}  // namespace qfiso
