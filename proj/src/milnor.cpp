#include "qfiso/milnor.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <numeric>

namespace qfiso {

namespace {

constexpr long kInfVal = LONG_MAX / 4;

long vval(const Rat& a, unsigned long p) {
    return a == 0 ? kInfVal : valuation(a, p);
}

bool mat_small(const MatQ& m, unsigned long p, long thr) {
    for (const Rat& v : m.data())
        if (vval(v, p) < thr) return false;
    return true;
}

// Gaussian elimination with minimal-valuation pivoting; entries of valuation
// >= thr count as zero. Returns the pivot columns in selection order, so the
// rank is the number of pivots. This is the p-adically stable rank of data
// carrying O(p^known) noise, as long as thr separates signal from noise.
std::vector<int> padic_pivots(MatQ m, unsigned long p, long thr) {
    const int r = m.rows(), c = m.cols();
    std::vector<bool> used_row(r, false), used_col(c, false);
    std::vector<int> pivots;
    while (true) {
        long best = kInfVal;
        int bi = -1, bj = -1;
        for (int i = 0; i < r; ++i) {
            if (used_row[i]) continue;
            for (int j = 0; j < c; ++j) {
                if (used_col[j]) continue;
                long v = vval(m.at(i, j), p);
                if (v < best) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0 || best >= thr) return pivots;
        pivots.push_back(bj);
        used_row[bi] = used_col[bj] = true;
        const Rat piv = m.at(bi, bj);
        for (int i = 0; i < r; ++i) {
            if (used_row[i] || m.at(i, bj) == 0) continue;
            Rat f = m.at(i, bj) / piv;
            for (int j = 0; j < c; ++j)
                if (!used_col[j]) m.at(i, j) -= f * m.at(bi, j);
            m.at(i, bj) = 0;
        }
    }
}

int padic_rank(const MatQ& m, unsigned long p, long thr) {
    return static_cast<int>(padic_pivots(m, p, thr).size());
}

std::vector<Rat> getcol(const MatQ& m, int j) {
    std::vector<Rat> v(m.rows());
    for (int i = 0; i < m.rows(); ++i) v[i] = m.at(i, j);
    return v;
}

long col_val(const MatQ& m, int j, unsigned long p) {
    long v = kInfVal;
    for (int i = 0; i < m.rows(); ++i) v = std::min(v, vval(m.at(i, j), p));
    return v;
}

MatQ hcat(const MatQ& a, const MatQ& b) {
    if (a.cols() == 0) return b;
    if (b.cols() == 0) return a;
    MatQ r(a.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) r.at(i, j) = a.at(i, j);
        for (int j = 0; j < b.cols(); ++j) r.at(i, a.cols() + j) = b.at(i, j);
    }
    return r;
}

MatQ cols_from(const MatQ& m, const std::vector<int>& idx) {
    MatQ r(m.rows(), static_cast<int>(idx.size()));
    for (int j = 0; j < r.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) r.at(i, j) = m.at(i, idx[j]);
    return r;
}

MatQ kernel_mat(const std::vector<std::vector<Rat>>& k, int rows) {
    MatQ r(rows, static_cast<int>(k.size()));
    for (int j = 0; j < r.cols(); ++j)
        for (int i = 0; i < rows; ++i) r.at(i, j) = k[j][i];
    return r;
}

MatQ matpow(MatQ a, int e) {
    MatQ r = MatQ::identity(a.rows());
    for (; e > 0; e >>= 1) {
        if (e & 1) r = r * a;
        if (e > 1) a = a * a;
    }
    return r;
}

// columns S^a Q^b e for a < deg, b < lvl: the cyclic submodule generated by e
MatQ module_span(const MatQ& s, const MatQ& q, const std::vector<Rat>& e, int deg, int lvl) {
    const int n = s.rows();
    MatQ out(n, deg * lvl);
    std::vector<Rat> base = e;
    int col = 0;
    for (int b = 0; b < lvl; ++b) {
        std::vector<Rat> cur = base;
        for (int a = 0; a < deg; ++a) {
            for (int i = 0; i < n; ++i) out.at(i, col) = cur[i];
            ++col;
            if (a + 1 < deg) cur = s.apply(cur);
        }
        if (b + 1 < lvl) base = q.apply(base);
    }
    return out;
}

long fac_threshold(const PadicFactorization& fac) {
    long known = fac.precision;
    for (const auto& f : fac.factors) known = std::min<long>(known, f.known);
    return std::max<long>(2, known / 2);
}

bool poly_less(const PolyQ& a, const PolyQ& b) {
    if (a.degree() != b.degree()) return a.degree() < b.degree();
    for (int i = 0; i <= a.degree(); ++i) {
        if (a.coeff(i) != b.coeff(i)) return a.coeff(i) < b.coeff(i);
    }
    return false;
}

PadicFactorization canonical_order(const PadicFactorization& fac) {
    const int k = static_cast<int>(fac.factors.size());
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) {
        return poly_less(fac.factors[x].poly, fac.factors[y].poly);
    });
    std::vector<int> pos(k);
    for (int i = 0; i < k; ++i) pos[idx[i]] = i;
    PadicFactorization out;
    out.precision = fac.precision;
    for (int i = 0; i < k; ++i) {
        PadicFactor f = fac.factors[idx[i]];
        if (f.partner >= 0) f.partner = pos[f.partner];
        out.factors.push_back(std::move(f));
    }
    return out;
}

struct Work {
    const MatQ& gram;
    const MatQ& iso;
    MatQ iso_inv;
    unsigned long p;
    long thr;
    PadicContext wctx;

    Work(const IsometryPair& pair, const PadicFactorization& fac)
        : gram(pair.space.gram),
          iso(pair.iso),
          p(pair.ctx.p),
          thr(fac_threshold(fac)),
          wctx(pair.ctx.p, fac.precision) {
        auto inv = inverse(pair.iso);
        if (!inv) throw std::invalid_argument("isometry is singular");
        iso_inv = std::move(*inv);
    }
};

std::vector<PrimaryComponent> decompose(const IsometryPair& pair, const PadicFactorization& fac,
                                        const Work& wk) {
    const int n = pair.dim();
    const int k = static_cast<int>(fac.factors.size());
    const PolyQ f = char_poly(pair.iso);

    std::vector<PolyQ> gpow(k);
    for (int i = 0; i < k; ++i)
        gpow[i] = fac.factors[i].poly.pow(fac.factors[i].multiplicity);

    std::vector<MatQ> proj(k);
    MatQ sum(n, n);
    for (int i = 0; i < k; ++i) {
        PolyQ h = PolyQ::constant(Rat(1));
        for (int j = 0; j < k; ++j)
            if (j != i) h = h * gpow[j];
        auto [g, u, v] = xgcd(gpow[i], h);
        if (g.degree() != 0)
            throw ProjectorInconsistency("factor lifts share a common divisor over Q");
        proj[i] = eval_poly((v * h) % f, pair.iso);
        sum = sum + proj[i];
    }
    if (!mat_small(sum - MatQ::identity(n), wk.p, wk.thr))
        throw ProjectorInconsistency("projectors do not sum to the identity at working precision");
    for (int i = 0; i < k; ++i)
        if (!mat_small(proj[i] * proj[i] - proj[i], wk.p, wk.thr))
            throw ProjectorInconsistency("projector is not idempotent at working precision");

    std::vector<PrimaryComponent> out;
    for (int i = 0; i < k; ++i) {
        const int d = fac.factors[i].multiplicity * fac.factors[i].poly.degree();
        auto piv = padic_pivots(proj[i], wk.p, wk.thr);
        if (static_cast<int>(piv.size()) != d)
            throw ProjectorInconsistency("projector rank does not match the factor dimension");
        std::sort(piv.begin(), piv.end());
        MatQ basis = cols_from(proj[i], piv);
        if (!mat_small(eval_poly(gpow[i], pair.iso) * basis, wk.p, wk.thr))
            throw ProjectorInconsistency("factor power does not annihilate its component");
        out.push_back({i, std::move(basis)});
    }
    return out;
}

// keep only the exact G-orthogonal complement of u inside w; the pairing of
// u against w must have full row rank, else precision was lost
void shrink(const MatQ& gram, const MatQ& u, MatQ& w) {
    if (w.cols() == 0) return;
    MatQ m = u.transpose() * gram * w;
    auto k = kernel(m);
    if (static_cast<int>(k.size()) != w.cols() - u.cols())
        throw RankMismatch("orthogonal complement has unexpected dimension");
    w = w * kernel_mat(k, w.cols());
}

MatQ col_range(const MatQ& m, int from, int to) {
    std::vector<int> idx;
    for (int j = from; j < to; ++j) idx.push_back(j);
    return cols_from(m, idx);
}

struct EmittedBlock {
    MatQ basis;
    MatQ ginv;  // inverse of basis^T gram basis
};

// exact G-orthogonal projection away from every block emitted so far; the
// correction is noise-sized but makes cross-block gram entries exactly zero
MatQ reorthogonalize(const MatQ& gram, const std::vector<EmittedBlock>& prev, MatQ u) {
    for (const auto& b : prev)
        u = u - b.basis * (b.ginv * (b.basis.transpose() * (gram * u)));
    return u;
}

struct Peel {
    MatQ basis;
    MatQ gens_p;
    MatQ gens_q;
};

// level ranks from the kernel filtration of q(iso)^j: kdim[j] is the kernel
// dimension at exponent j, and a free summand of level l contributes
// min(j, l) * deg to it
std::vector<int> filtration_ranks(const std::vector<int>& kdim, int deg, int dim) {
    const int smax = static_cast<int>(kdim.size()) - 1;
    auto kd = [&](int j) { return kdim[std::min(j, smax)]; };
    std::vector<int> ranks(smax + 1, 0);
    int total = 0;
    for (int l = 1; l <= smax; ++l) {
        int num = 2 * kd(l) - kd(l - 1) - kd(l + 1);
        if (num < 0 || num % deg != 0)
            throw RankMismatch("kernel filtration is inconsistent with the factor degree");
        ranks[l] = num / deg;
        total += l * deg * ranks[l];
    }
    if (total != dim) throw RankMismatch("filtration ranks do not fill the component");
    return ranks;
}

std::vector<LevelBlock> split_one(const Work& wk, const PadicFactorization& fac, int idx,
                                  MatQ wp, MatQ wq, MatQ* complement,
                                  std::vector<EmittedBlock>& emitted) {
    const PadicFactor& fa = fac.factors[idx];
    const bool paired = fa.tag == FactorTag::Paired;
    const int deg = fa.poly.degree();
    const int mult = fa.multiplicity;
    const MatQ qs = eval_poly(fa.poly, wk.iso);
    const MatQ qs_partner =
        paired ? eval_poly(fac.factors[fa.partner].poly, wk.iso) : MatQ();

    std::vector<int> expected;
    if (mult > 1) {
        std::vector<int> kdim = {0};
        MatQ a = wp;
        for (int j = 1;; ++j) {
            if (j > mult + 1) throw RankMismatch("kernel filtration does not terminate");
            a = qs * a;
            int rk = padic_rank(a, wk.p, wk.thr);
            kdim.push_back(wp.cols() - rk);
            if (rk == 0) break;
        }
        expected = filtration_ranks(kdim, deg, wp.cols());
    } else if (!mat_small(qs * wp, wk.p, wk.thr)) {
        throw RankMismatch("squarefree factor does not annihilate its component");
    }

    std::map<int, Peel> by_level;
    while (wp.cols() > 0) {
        int s = 1;
        if (mult > 1) {
            MatQ a = qs * wp;
            while (padic_rank(a, wk.p, wk.thr) > 0) {
                a = qs * a;
                if (++s > mult) throw RankMismatch("level exceeds the factor multiplicity");
            }
        }
        const MatQ qtop = matpow(qs, s - 1);
        const MatQ img = qtop * wp;

        std::vector<int> order(wp.cols());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
            return col_val(img, x, wk.p) < col_val(img, y, wk.p);
        });

        bool done = false;
        for (int je : order) {
            if (col_val(img, je, wk.p) >= wk.thr) break;
            std::vector<Rat> e = getcol(wp, je);
            MatQ me = reorthogonalize(wk.gram, emitted, module_span(wk.iso, qs, e, deg, s));
            if (padic_rank(me, wk.p, wk.thr) != s * deg) continue;

            Peel peel;
            if (!paired) {
                MatQ ge = me.transpose() * wk.gram * me;
                if (padic_rank(ge, wk.p, wk.thr) == s * deg) {
                    peel.basis = me;
                    peel.gens_p = cols_from(wp, {je});
                } else {
                    // isotropic generator: adjoin a dual one pairing with
                    // q(iso)^{s-1} e to make the summand non-degenerate
                    MatQ row = (qtop * cols_from(wp, {je})).transpose() * wk.gram * wp;
                    std::vector<int> forder(wp.cols());
                    std::iota(forder.begin(), forder.end(), 0);
                    std::stable_sort(forder.begin(), forder.end(), [&](int x, int y) {
                        return vval(row.at(0, x), wk.p) < vval(row.at(0, y), wk.p);
                    });
                    for (int jf : forder) {
                        if (jf == je || vval(row.at(0, jf), wk.p) >= wk.thr) continue;
                        MatQ mf = reorthogonalize(wk.gram, emitted,
                                                  module_span(wk.iso, qs, getcol(wp, jf), deg, s));
                        MatQ u = hcat(me, mf);
                        if (padic_rank(u, wk.p, wk.thr) != 2 * s * deg) continue;
                        if (padic_rank(u.transpose() * wk.gram * u, wk.p, wk.thr) != 2 * s * deg)
                            continue;
                        peel.basis = u;
                        peel.gens_p = hcat(cols_from(wp, {je}), cols_from(wp, {jf}));
                        break;
                    }
                    if (peel.basis.cols() == 0) continue;
                }
            } else {
                // star pair: the summand is spanned jointly with a dual
                // generator from the partner component
                MatQ row = (qtop * cols_from(wp, {je})).transpose() * wk.gram * wq;
                std::vector<int> forder(wq.cols());
                std::iota(forder.begin(), forder.end(), 0);
                std::stable_sort(forder.begin(), forder.end(), [&](int x, int y) {
                    return vval(row.at(0, x), wk.p) < vval(row.at(0, y), wk.p);
                });
                for (int jf : forder) {
                    if (vval(row.at(0, jf), wk.p) >= wk.thr) continue;
                    MatQ mf = reorthogonalize(
                        wk.gram, emitted, module_span(wk.iso, qs_partner, getcol(wq, jf), deg, s));
                    MatQ u = hcat(me, mf);
                    if (padic_rank(u, wk.p, wk.thr) != 2 * s * deg) continue;
                    if (padic_rank(u.transpose() * wk.gram * u, wk.p, wk.thr) != 2 * s * deg)
                        continue;
                    peel.basis = u;
                    peel.gens_p = cols_from(wp, {je});
                    peel.gens_q = cols_from(wq, {jf});
                    break;
                }
                if (peel.basis.cols() == 0) continue;
            }

            auto ginv = inverse(peel.basis.transpose() * wk.gram * peel.basis);
            if (!ginv) throw RankMismatch("emitted block has a singular gram matrix");
            emitted.push_back({peel.basis, std::move(*ginv)});

            if (!paired) {
                shrink(wk.gram, peel.basis, wp);
            } else {
                // each half pairs non-degenerately only with the other one
                shrink(wk.gram, col_range(peel.basis, s * deg, 2 * s * deg), wp);
                shrink(wk.gram, col_range(peel.basis, 0, s * deg), wq);
            }
            if (complement) shrink(wk.gram, peel.basis, *complement);

            Peel& acc = by_level[s];
            acc.basis = hcat(acc.basis, peel.basis);
            acc.gens_p = hcat(acc.gens_p, peel.gens_p);
            acc.gens_q = hcat(acc.gens_q, peel.gens_q);
            done = true;
            break;
        }
        if (!done) throw RankMismatch("no non-degenerate free summand found at top level");
    }
    if (paired && wq.cols() != 0)
        throw RankMismatch("partner component not exhausted by the joint splitting");

    std::vector<LevelBlock> out;
    for (auto& [level, acc] : by_level) {
        const int unit = level * deg * (paired ? 2 : 1);
        if (acc.basis.cols() % unit != 0)
            throw RankMismatch("block dimension is not a multiple of the level unit");
        LevelBlock b;
        b.factor_index = idx;
        b.level = level;
        b.rank = acc.basis.cols() / unit;
        b.basis = std::move(acc.basis);
        b.generators = hcat(acc.gens_p, acc.gens_q);
        if (!expected.empty() && expected[level] != b.rank)
            throw RankMismatch("peeled rank disagrees with the kernel filtration");
        out.push_back(std::move(b));
    }
    return out;
}

void attach_residual(const Work& wk, const PadicFactorization& fac, LevelBlock& block) {
    const PadicFactor& fa = fac.factors[block.factor_index];
    const int l = block.level;

    if (fa.tag == FactorTag::PlusOne || fa.tag == FactorTag::MinusOne) {
        const MatQ delta = wk.iso - wk.iso_inv;
        const MatQ t = matpow(delta, l - 1);
        if (l % 2 == 0) {
            // residual pairing is symplectic; only the rank is an invariant
            MatQ m = block.basis.transpose() * wk.gram * (t * block.basis);
            if (m + m.transpose() != MatQ(m.rows(), m.cols()))
                throw DegenerateResidual("even-level pairing is not alternating");
            return;
        }
        MatQ gens = block.generators;
        MatQ bm = (t * gens).transpose() * wk.gram * gens;
        if (det(bm) == 0 || padic_rank(bm, wk.p, wk.thr) != bm.rows())
            throw DegenerateResidual("residual form of an odd level block is degenerate");
        block.residual_quad = QuadSpace(bm, wk.wctx);
        return;
    }
    if (fa.tag == FactorTag::Paired) return;

    // self-reciprocal: the residual is hermitian over E = Q_p[x]/(q)
    auto algebra = InvolutiveAlgebra::field(fa.poly, wk.wctx, fa.known);
    const PolyQ& q = algebra.q_total();
    const int two_d = q.degree();
    MatQ theta = matpow(wk.iso_inv, two_d / 2) * eval_poly(q, wk.iso);
    MatQ t = matpow(theta, l - 1);

    const int r = block.generators.cols();
    MatQ basis(wk.iso.rows(), 0);
    for (int j = 0; j < r; ++j)
        basis = hcat(basis, module_span(wk.iso, MatQ::identity(wk.iso.rows()),
                                        getcol(block.generators, j), two_d, 1));
    MatQ bm = (t * basis).transpose() * wk.gram * basis;
    if (det(bm) == 0 || padic_rank(bm, wk.p, wk.thr) != bm.rows())
        throw DegenerateResidual("residual form of a self-reciprocal block is degenerate");

    MatQ xact(bm.rows(), bm.cols());
    for (int j = 0; j < r; ++j) {
        const int off = j * two_d;
        for (int i = 0; i + 1 < two_d; ++i) xact.at(off + i + 1, off + i) = 1;
        for (int i = 0; i < two_d; ++i) xact.at(off + i, off + two_d - 1) = -q.coeff(i);
    }
    block.residual_herm = herm_from_bilinear(QuadSpace(bm, wk.wctx), xact, algebra);
}

MilnorInvariant build_invariant(const PadicFactorization& fac, const std::vector<LevelBlock>& blocks,
                                PolyQ f) {
    MilnorInvariant inv;
    inv.char_poly = std::move(f);
    const int k = static_cast<int>(fac.factors.size());
    for (int i = 0; i < k; ++i) {
        const PadicFactor& fa = fac.factors[i];
        if (fa.tag == FactorTag::Paired && fa.partner < i) continue;
        FactorRecord rec;
        rec.factor = fa.poly;
        rec.tag = fa.tag;
        rec.multiplicity = fa.multiplicity;
        for (const LevelBlock& b : blocks) {
            if (b.factor_index != i || b.rank == 0) continue;
            LevelRecord lr;
            lr.level = b.level;
            lr.rank = b.rank;
            if (b.residual_quad) lr.quad = quad_invariant(*b.residual_quad);
            if (b.residual_herm) lr.herm = herm_invariant(*b.residual_herm);
            rec.levels.push_back(std::move(lr));
        }
        std::sort(rec.levels.begin(), rec.levels.end(),
                  [](const LevelRecord& a, const LevelRecord& b) { return a.level < b.level; });

        if (fa.tag == FactorTag::PlusOne) inv.m_plus = fa.multiplicity;
        if (fa.tag == FactorTag::MinusOne) inv.m_minus = fa.multiplicity;
        if (fa.tag == FactorTag::PlusOne || fa.tag == FactorTag::MinusOne)
            for (const auto& lr : rec.levels)
                if (lr.level % 2 == 1) ++inv.m_0;
        if (fa.tag == FactorTag::SelfReciprocal) ++inv.m_1;
        if (fa.tag == FactorTag::Paired) ++inv.m_2;
        inv.factors.push_back(std::move(rec));
    }
    return inv;
}

MilnorAnalysis analyze_at(const IsometryPair& pair, const PadicContext& wctx,
                          const std::vector<PolyQ>* certificate) {
    const PolyQ f = char_poly(pair.iso);
    PadicFactorization fac = canonical_order(factor_padic(f, wctx, certificate));
    Work wk(pair, fac);

    MilnorAnalysis out;
    out.fac = fac;
    out.working_precision = fac.precision;
    out.components = decompose(pair, fac, wk);

    MatQ comp = MatQ::identity(pair.dim());
    auto project = [&](const MatQ& b) {
        if (b.cols() == 0) return b;
        if (comp.cols() < b.cols())
            throw RankMismatch("component exceeds the remaining complement");
        auto inv = inverse(comp.transpose() * wk.gram * comp);
        if (!inv) throw RankMismatch("complement gram is singular");
        return comp * (*inv * (comp.transpose() * (wk.gram * b)));
    };

    const int k = static_cast<int>(fac.factors.size());
    std::vector<EmittedBlock> emitted;
    for (int i = 0; i < k; ++i) {
        const PadicFactor& fa = fac.factors[i];
        if (fa.tag == FactorTag::Paired && fa.partner < i) continue;
        MatQ wp = project(out.components[i].basis);
        MatQ wq = fa.tag == FactorTag::Paired ? project(out.components[fa.partner].basis) : MatQ();
        auto blocks = split_one(wk, fac, i, std::move(wp), std::move(wq), &comp, emitted);
        for (auto& b : blocks) {
            attach_residual(wk, fac, b);
            out.blocks.push_back(std::move(b));
        }
    }
    if (comp.cols() != 0) throw RankMismatch("blocks do not exhaust the space");

    out.invariant = build_invariant(fac, out.blocks, f);
    return out;
}

template <typename Fn>
auto with_escalation(const PadicContext& base, Fn&& fn) {
    for (int step : {1, 2, 4, 8}) {
        PadicContext wctx(base.p, base.precision * step);
        try {
            return fn(wctx);
        } catch (const ProjectorInconsistency&) {
            if (step == 8) throw;
        } catch (const RankMismatch&) {
            if (step == 8) throw;
        } catch (const DegenerateResidual&) {
            if (step == 8) throw;
        } catch (const PrecisionExhausted& e) {
            if (step == 8) throw FactorizationFailed(e.what());
        }
    }
    throw FactorizationFailed("unreachable");
}

}  // namespace

bool check_isometry(const QuadSpace& space, const MatQ& iso) {
    if (iso.rows() != iso.cols() || iso.rows() != space.dim()) throw SizeMismatch{};
    return iso.transpose() * space.gram * iso == space.gram;
}

IsometryPair::IsometryPair(QuadSpace s, MatQ m)
    : space(std::move(s)), iso(std::move(m)), ctx(space.ctx) {
    if (det(space.gram) == 0) throw DegenerateForm{};
    if (!check_isometry(space, iso))
        throw std::invalid_argument("iso is not an isometry of the form");
}

std::vector<PrimaryComponent> primary_decomposition(const IsometryPair& pair,
                                                    const PadicFactorization& fac) {
    Work wk(pair, fac);
    return decompose(pair, fac, wk);
}

std::vector<LevelBlock> block_splitting(const IsometryPair& pair, const PadicFactorization& fac,
                                        const std::vector<PrimaryComponent>& components,
                                        int factor_index) {
    Work wk(pair, fac);
    const PadicFactor& fa = fac.factors[factor_index];
    int idx = factor_index;
    if (fa.tag == FactorTag::Paired) idx = std::min(factor_index, fa.partner);
    MatQ wq = fa.tag == FactorTag::Paired
                  ? components[fac.factors[idx].partner].basis
                  : MatQ();
    std::vector<EmittedBlock> emitted;
    return split_one(wk, fac, idx, components[idx].basis, std::move(wq), nullptr, emitted);
}

void residual_form(const IsometryPair& pair, const PadicFactorization& fac, LevelBlock& block) {
    Work wk(pair, fac);
    attach_residual(wk, fac, block);
}

MilnorAnalysis analyze(const IsometryPair& pair, const std::vector<PolyQ>* certificate) {
    return with_escalation(pair.ctx,
                           [&](const PadicContext& wctx) { return analyze_at(pair, wctx, certificate); });
}

MilnorInvariant milnor_invariant(const IsometryPair& pair, const std::vector<PolyQ>* certificate) {
    return analyze(pair, certificate).invariant;
}

bool same_gl_class(const MilnorInvariant& a, const MilnorInvariant& b) {
    if (a.char_poly != b.char_poly || a.factors.size() != b.factors.size()) return false;
    for (size_t i = 0; i < a.factors.size(); ++i) {
        const FactorRecord& x = a.factors[i];
        const FactorRecord& y = b.factors[i];
        if (x.factor != y.factor || x.tag != y.tag || x.multiplicity != y.multiplicity)
            return false;
        if (x.levels.size() != y.levels.size()) return false;
        for (size_t j = 0; j < x.levels.size(); ++j)
            if (x.levels[j].level != y.levels[j].level || x.levels[j].rank != y.levels[j].rank)
                return false;
    }
    return true;
}

bool same_o_class(const MilnorInvariant& a, const MilnorInvariant& b) {
    if (!same_gl_class(a, b)) return false;
    for (size_t i = 0; i < a.factors.size(); ++i)
        for (size_t j = 0; j < a.factors[i].levels.size(); ++j) {
            const LevelRecord& x = a.factors[i].levels[j];
            const LevelRecord& y = b.factors[i].levels[j];
            if (x.quad.has_value() != y.quad.has_value()) return false;
            if (x.quad && !(*x.quad == *y.quad)) return false;
            if (x.herm.has_value() != y.herm.has_value()) return false;
            if (x.herm && *x.herm != *y.herm) return false;
        }
    return true;
}

bool gl_conjugate(const IsometryPair& a, const IsometryPair& b) {
    if (a.ctx.p != b.ctx.p) throw PrimeMismatch{};
    if (a.dim() != b.dim()) return false;
    if (char_poly(a.iso) != char_poly(b.iso)) return false;
    PadicContext base(a.ctx.p, std::max(a.ctx.precision, b.ctx.precision));
    return with_escalation(base, [&](const PadicContext& wctx) {
        return same_gl_class(analyze_at(a, wctx, nullptr).invariant,
                             analyze_at(b, wctx, nullptr).invariant);
    });
}

bool o_conjugate(const IsometryPair& a, const IsometryPair& b) {
    if (a.ctx.p != b.ctx.p) throw PrimeMismatch{};
    if (!is_isometric(a.space, b.space)) throw AmbientNotIsometric{};
    if (char_poly(a.iso) != char_poly(b.iso)) return false;
    PadicContext base(a.ctx.p, std::max(a.ctx.precision, b.ctx.precision));
    return with_escalation(base, [&](const PadicContext& wctx) {
        return same_o_class(analyze_at(a, wctx, nullptr).invariant,
                            analyze_at(b, wctx, nullptr).invariant);
    });
}

}  // namespace qfiso
