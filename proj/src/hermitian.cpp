#include "qfiso/hermitian.hpp"

#include <algorithm>

#include "qfiso/factor.hpp"

namespace qfiso {

namespace {

long close_threshold(const PadicContext& ctx) {
    return std::max(2, ctx.precision / 4);
}

// Equal exactly, or coefficientwise congruent at the tolerance used for
// truncated algebra moduli.
bool ext_close(const InvolutiveAlgebra& e, const ExtElem& a, const ExtElem& b) {
    if (a == b) return true;
    return detail::congruent_padic(a, b, e.context().p, close_threshold(e.context()));
}

bool rat_small(const Rat& v, unsigned long p, long thr) {
    return v == 0 || valuation(v, p) >= thr;
}

// inverse mod an irreducible modulus
PolyQ inv_mod(const PolyQ& a, const PolyQ& mod) {
    auto [g, u, v] = xgcd(a % mod, mod);
    if (g.degree() != 0) throw std::logic_error("inv_mod: modulus is not irreducible");
    return ((Rat(1) / g.coeff(0)) * u) % mod;
}

// determinant of an n x n matrix with entries in k[x]/(mod), mod irreducible
PolyQ mat_det_mod(std::vector<PolyQ> m, int n, const PolyQ& mod) {
    for (auto& a : m) a = a % mod;
    PolyQ d = PolyQ::constant(Rat(1));
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int r = c; r < n; ++r)
            if (!m[static_cast<size_t>(r) * n + c].is_zero()) {
                piv = r;
                break;
            }
        if (piv < 0) return PolyQ();
        if (piv != c) {
            for (int j = 0; j < n; ++j)
                std::swap(m[static_cast<size_t>(piv) * n + j], m[static_cast<size_t>(c) * n + j]);
            d = -d;
        }
        const PolyQ& pv = m[static_cast<size_t>(c) * n + c];
        d = (d * pv) % mod;
        PolyQ pinv = inv_mod(pv, mod);
        for (int r = c + 1; r < n; ++r) {
            PolyQ f = (m[static_cast<size_t>(r) * n + c] * pinv) % mod;
            if (f.is_zero()) continue;
            for (int j = c; j < n; ++j)
                m[static_cast<size_t>(r) * n + j] =
                    (m[static_cast<size_t>(r) * n + j] - f * m[static_cast<size_t>(c) * n + j]) % mod;
        }
    }
    return d;
}

// h(u, v) = sum_{s,t} u_s gram(s,t) iota(v_t)
ExtElem hform(const HermSpace& m, const std::vector<ExtElem>& u, const std::vector<ExtElem>& v) {
    const auto& e = m.algebra;
    PolyQ acc;
    for (int t = 0; t < m.rank; ++t) {
        if (v[t].is_zero()) continue;
        PolyQ row;
        for (int s = 0; s < m.rank; ++s) {
            if (u[s].is_zero()) continue;
            row = row + u[s] * m.at(s, t);
        }
        acc = acc + (row % e.q_total()) * e.apply_iota(v[t]);
    }
    return acc % e.q_total();
}

std::vector<ExtElem> scale_vec(const InvolutiveAlgebra& e, const ExtElem& c,
                               const std::vector<ExtElem>& v) {
    std::vector<ExtElem> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) r[i] = e.mul(c, v[i]);
    return r;
}

std::vector<ExtElem> add_scaled(const InvolutiveAlgebra& e, const std::vector<ExtElem>& v,
                                const ExtElem& c, const std::vector<ExtElem>& w) {
    std::vector<ExtElem> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) r[i] = (v[i] + c * w[i]) % e.q_total();
    return r;
}

// split case: the element congruent to a mod part and b mod partner
ExtElem crt(const InvolutiveAlgebra& e, const PolyQ& a, const PolyQ& b) {
    auto [g, u, v] = xgcd(e.part(), e.partner());
    if (g.degree() != 0) throw std::logic_error("crt: split parts are not coprime");
    Rat s = Rat(1) / g.coeff(0);
    PolyQ id_part = (s * (v * e.partner())) % e.q_total();    // 1 mod part, 0 mod partner
    PolyQ id_partner = (s * (u * e.part())) % e.q_total();
    return (a * id_part + b * id_partner) % e.q_total();
}

}  // namespace

HermSpace::HermSpace(InvolutiveAlgebra alg, std::vector<ExtElem> entries, int n)
    : algebra(std::move(alg)), gram(std::move(entries)), rank(n) {
    if (n < 0 || gram.size() != static_cast<size_t>(n) * n)
        throw std::invalid_argument("HermSpace: gram size mismatch");
    for (auto& a : gram) a = a % algebra.q_total();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            if (!ext_close(algebra, at(j, i), algebra.apply_iota(at(i, j))))
                throw std::invalid_argument("HermSpace: gram is not iota-hermitian");
}

bool ext_invertible(const InvolutiveAlgebra& e, const ExtElem& a) {
    ExtElem r = e.reduce(a);
    if (!e.split()) return !r.is_zero();
    return !e.component(r, 0).is_zero() && !e.component(r, 1).is_zero();
}

std::optional<ExtElem> ext_inverse(const InvolutiveAlgebra& e, const ExtElem& a) {
    if (!ext_invertible(e, a)) return std::nullopt;
    auto [g, u, v] = xgcd(e.reduce(a), e.q_total());
    if (g.degree() != 0) {
        if (!e.split()) throw std::logic_error("ext_inverse: field modulus is not irreducible");
        return std::nullopt;
    }
    return ((Rat(1) / g.coeff(0)) * u) % e.q_total();
}

bool herm_nondegenerate(const HermSpace& m) {
    if (m.rank == 0) return true;
    const auto& e = m.algebra;
    if (!e.split()) return !mat_det_mod(m.gram, m.rank, e.q_total()).is_zero();
    for (int which = 0; which < 2; ++which) {
        const PolyQ& mod = which == 0 ? e.part() : e.partner();
        std::vector<PolyQ> comp(m.gram.size());
        for (size_t i = 0; i < m.gram.size(); ++i) comp[i] = m.gram[i] % mod;
        if (mat_det_mod(std::move(comp), m.rank, mod).is_zero()) return false;
    }
    return true;
}

HermDiagonal herm_orthogonalize(const HermSpace& m) {
    if (!herm_nondegenerate(m)) throw DegenerateInput{};
    const auto& e = m.algebra;
    const int n = m.rank;
    const long cand = std::min<long>(static_cast<long>(e.context().p) + 3, 50);

    // columns of the running basis, coordinates in the original basis
    std::vector<std::vector<ExtElem>> b(n, std::vector<ExtElem>(n, PolyQ()));
    for (int i = 0; i < n; ++i) b[i][i] = PolyQ::constant(Rat(1));

    std::vector<ExtElem> diag(n);
    for (int i = 0; i < n; ++i) {
        if (!ext_invertible(e, hform(m, b[i], b[i]))) {
            int j0 = -1;
            for (int j = i + 1; j < n; ++j)
                if (!hform(m, b[i], b[j]).is_zero()) {
                    j0 = j;
                    break;
                }
            if (j0 < 0) throw DegenerateInput{};
            std::swap(b[i + 1], b[j0]);
            bool found = false;
            if (e.split()) {
                for (long l1 = 0; l1 < cand && !found; ++l1)
                    for (long l2 = 0; l2 < cand && !found; ++l2) {
                        ExtElem lam = crt(e, PolyQ::constant(Rat(l1)), PolyQ::constant(Rat(l2)));
                        auto w = add_scaled(e, b[i + 1], lam, b[i]);
                        if (ext_invertible(e, hform(m, w, w))) {
                            std::swap(b[i], b[i + 1]);
                            b[i] = w;
                            found = true;
                        }
                    }
            } else {
                std::vector<ExtElem> lams;
                for (long l = 1; l <= cand; ++l) lams.push_back(PolyQ::constant(Rat(l)));
                if (auto iv = ext_inverse(e, hform(m, b[i], b[i + 1]))) {
                    lams.push_back(*iv);
                    lams.push_back(e.apply_iota(*iv));
                }
                for (const auto& lam : lams) {
                    auto w = add_scaled(e, b[i], lam, b[i + 1]);
                    if (ext_invertible(e, hform(m, w, w))) {
                        b[i] = w;
                        found = true;
                        break;
                    }
                }
            }
            if (!found) throw SearchExhausted("no invertible-norm combination found");
        }
        ExtElem alpha = hform(m, b[i], b[i]);
        ExtElem ainv = *ext_inverse(e, alpha);
        for (int j = i + 1; j < n; ++j) {
            // mu makes h(b_i, b_j - mu b_i) vanish
            ExtElem mu = e.mul(hform(m, b[j], b[i]), ainv);
            b[j] = add_scaled(e, b[j], -mu, b[i]);
        }
        if (e.split()) {
            PolyQ ap = alpha % e.part();
            ExtElem mu = crt(e, inv_mod(ap, e.part()), PolyQ::constant(Rat(1)));
            b[i] = scale_vec(e, mu, b[i]);
            ExtElem one = hform(m, b[i], b[i]);
            if (!ext_close(e, one, PolyQ::constant(Rat(1))))
                throw std::logic_error("split normalization did not reach 1");
            diag[i] = PolyQ::constant(Rat(1));
        } else {
            ExtElem d = hform(m, b[i], b[i]);
            diag[i] = (Rat(1, 2) * (d + e.apply_iota(d))) % e.q_total();
        }
    }

    std::vector<ExtElem> basis(static_cast<size_t>(n) * n);
    for (int s = 0; s < n; ++s)
        for (int i = 0; i < n; ++i) basis[static_cast<size_t>(s) * n + i] = b[i][s];
    return {std::move(basis), std::move(diag)};
}

PolyQ to_fixed_field(const InvolutiveAlgebra& e, const ExtElem& a) {
    if (e.split()) throw std::invalid_argument("to_fixed_field: split algebra has no fixed model");
    const int dim = e.dim(), d = dim / 2;
    ExtElem s = (Rat(1, 2) * (e.reduce(a) + e.apply_iota(e.reduce(a)))) % e.q_total();

    // fixed-subspace basis x^i + x^{-i}
    MatQ mat(dim, d);
    PolyQ xi = PolyQ::constant(Rat(1));
    for (int i = 0; i < d; ++i) {
        PolyQ bi = (xi + e.apply_iota(xi)) % e.q_total();
        for (int r = 0; r < dim; ++r) mat.at(r, i) = bi.coeff(r);
        xi = (xi * PolyQ::x()) % e.q_total();
    }
    std::vector<Rat> rhs(dim, Rat(0));
    for (int r = 0; r < dim; ++r) rhs[r] = s.coeff(r);
    auto c = solve(mat, rhs);
    if (!c) throw std::logic_error("to_fixed_field: element is not iota-fixed");

    // x^i + x^{-i} = W_i(y) with W_0 = 2, W_1 = y, W_{i+1} = y W_i - W_{i-1}
    const PolyQ& g = e.fixed_g();
    PolyQ w_prev = PolyQ::constant(Rat(2)), w_cur = PolyQ::x() % g;
    PolyQ out;
    for (int i = 0; i < d; ++i) {
        PolyQ wi = i == 0 ? w_prev : (i == 1 ? w_cur : PolyQ());
        if (i >= 2) {
            wi = ((PolyQ::x() * w_cur) % g) - w_prev;
            w_prev = w_cur;
            w_cur = wi;
        }
        out = out + (*c)[i] * wi;
    }
    return out % g;
}

HermSpace herm_from_bilinear(const QuadSpace& w, const MatQ& x_action,
                             const InvolutiveAlgebra& e) {
    const int nw = w.dim(), dimE = e.dim();
    if (x_action.rows() != nw || x_action.cols() != nw)
        throw std::invalid_argument("herm_from_bilinear: shape mismatch");
    if (nw == 0 || nw % dimE != 0)
        throw MinPolyMismatch("space dimension is not a multiple of the algebra dimension");
    const unsigned long p = e.context().p;
    const long thr = close_threshold(e.context());
    MatQ dev = x_action.transpose() * w.gram * x_action - w.gram;
    for (const Rat& v : dev.data())
        if (!rat_small(v, p, thr))
            throw std::invalid_argument("herm_from_bilinear: x_action is not an isometry");
    MatQ ann = eval_poly(e.q_total(), x_action);
    for (const Rat& v : ann.data())
        if (!rat_small(v, p, thr))
            throw MinPolyMismatch("x_action is not annihilated by the algebra modulus");

    std::vector<MatQ> pw(dimE);
    pw[0] = MatQ::identity(nw);
    for (int i = 1; i < dimE; ++i) pw[i] = pw[i - 1] * x_action;

    // greedy E-basis: orbits must stay jointly independent
    const int r = nw / dimE;
    std::vector<std::vector<Rat>> sel;
    std::vector<std::vector<Rat>> pool;
    for (int i = 0; i < nw; ++i) {
        std::vector<Rat> u(nw, Rat(0));
        u[i] = 1;
        pool.push_back(std::move(u));
    }
    for (int i = 0; i < nw; ++i)
        for (int j = i + 1; j < nw; ++j) {
            std::vector<Rat> u(nw, Rat(0));
            u[i] = 1;
            u[j] = 1;
            pool.push_back(std::move(u));
        }
    std::vector<std::vector<Rat>> cols;  // orbit columns of the selected vectors
    for (const auto& u : pool) {
        if (static_cast<int>(sel.size()) == r) break;
        std::vector<std::vector<Rat>> trial = cols;
        for (int i = 0; i < dimE; ++i) trial.push_back(pw[i].apply(u));
        MatQ mt(nw, static_cast<int>(trial.size()));
        for (int c = 0; c < mt.cols(); ++c)
            for (int rr = 0; rr < nw; ++rr) mt.at(rr, c) = trial[c][rr];
        if (rank(mt) == static_cast<int>(trial.size())) {
            sel.push_back(u);
            cols = std::move(trial);
        }
    }
    if (static_cast<int>(sel.size()) != r)
        throw MinPolyMismatch("space is not free over the algebra");

    // trace pairing over the power basis
    MatQ t(dimE, dimE);
    std::vector<PolyQ> xp(2 * dimE - 1);
    xp[0] = PolyQ::constant(Rat(1));
    for (int k = 1; k < 2 * dimE - 1; ++k) xp[k] = (xp[k - 1] * PolyQ::x()) % e.q_total();
    for (int i = 0; i < dimE; ++i)
        for (int j = 0; j < dimE; ++j) t.at(i, j) = etale_trace(e.q_total(), xp[i + j]);
    if (det(t) == 0) throw SingularTracePairing{};

    std::vector<ExtElem> gram(static_cast<size_t>(r) * r);
    for (int a = 0; a < r; ++a)
        for (int bi = 0; bi < r; ++bi) {
            std::vector<Rat> gv = w.gram.apply(sel[bi]);
            std::vector<Rat> rhs(dimE, Rat(0));
            for (int i = 0; i < dimE; ++i) {
                std::vector<Rat> xu = pw[i].apply(sel[a]);
                Rat acc(0);
                for (int s = 0; s < nw; ++s) acc += xu[s] * gv[s];
                rhs[i] = acc;
            }
            auto sol = solve(t, rhs);
            if (!sol) throw SingularTracePairing{};
            gram[static_cast<size_t>(a) * r + bi] = PolyQ(*sol);
        }
    return HermSpace(e, std::move(gram), r);
}

HermInvariant herm_invariant(const HermSpace& m) {
    if (!herm_nondegenerate(m)) throw DegenerateInput{};
    if (m.algebra.split()) return {HermCase::Split, m.rank, true};

    auto hd = herm_orthogonalize(m);
    const PolyQ& g = m.algebra.fixed_g();
    PolyQ detf = PolyQ::constant(Rat(1));
    for (const auto& d : hd.diag) detf = (detf * to_fixed_field(m.algebra, d)) % g;
    LocalField f(g, m.algebra.context());
    return {HermCase::Field, m.rank, norm_test(detf, m.algebra.fixed_delta(), f)};
}

}  // namespace qfiso
