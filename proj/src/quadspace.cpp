#include "qfiso/quadspace.hpp"

namespace qfiso {

namespace {

Rat pair_value(const MatQ& g, const std::vector<Rat>& u, const std::vector<Rat>& v) {
    Rat s(0);
    int n = g.rows();
    for (int i = 0; i < n; ++i) {
        if (u[i] == 0) continue;
        for (int j = 0; j < n; ++j) s += u[i] * g.at(i, j) * v[j];
    }
    return s;
}

}  // namespace

std::pair<std::vector<Rat>, MatQ> diagonalize(const QuadSpace& v) {
    int n = v.dim();
    const MatQ& g = v.gram;
    if (det(g) == 0) throw DegenerateForm{};
    // basis vectors as columns
    std::vector<std::vector<Rat>> b(n, std::vector<Rat>(n, Rat(0)));
    for (int i = 0; i < n; ++i) b[i][i] = 1;

    std::vector<Rat> diag(n);
    for (int k = 0; k < n; ++k) {
        // prefer a nonzero diagonal value of minimal valuation
        int pick = -1;
        long best = 0;
        for (int i = k; i < n; ++i) {
            Rat q = pair_value(g, b[i], b[i]);
            if (q == 0) continue;
            long val = valuation(q, v.ctx.p);
            if (pick < 0 || val < best) {
                pick = i;
                best = val;
            }
        }
        if (pick < 0) {
            // all remaining diagonal values vanish: some cross pair is nonzero
            bool fixed = false;
            for (int i = k; i < n && !fixed; ++i)
                for (int j = i + 1; j < n && !fixed; ++j)
                    if (pair_value(g, b[i], b[j]) != 0) {
                        for (int t = 0; t < n; ++t) b[i][t] += b[j][t];
                        pick = i;
                        fixed = true;
                    }
            if (!fixed) throw DegenerateForm{};
        }
        std::swap(b[k], b[pick]);
        Rat qk = pair_value(g, b[k], b[k]);
        diag[k] = qk;
        for (int j = k + 1; j < n; ++j) {
            Rat c = pair_value(g, b[k], b[j]) / qk;
            if (c == 0) continue;
            for (int t = 0; t < n; ++t) b[j][t] -= c * b[k][t];
        }
    }
    MatQ transform(n, n);
    for (int col = 0; col < n; ++col)
        for (int row = 0; row < n; ++row) transform.at(row, col) = b[col][row];
    return {std::move(diag), std::move(transform)};
}

QuadInvariant diag_invariant(const std::vector<Rat>& d, const PadicContext& ctx) {
    int n = static_cast<int>(d.size());
    Rat detv(1);
    int hasse = 1;
    for (int i = 0; i < n; ++i) {
        if (d[i] == 0) throw DegenerateForm{};
        detv *= d[i];
        for (int j = i + 1; j < n; ++j) hasse *= hilbert_symbol(d[i], d[j], ctx);
    }
    return {n, square_class(detv, ctx), hasse};
}

QuadInvariant quad_invariant(const QuadSpace& v) {
    auto [d, t] = diagonalize(v);
    return diag_invariant(d, v.ctx);
}

bool invariants_isometric(const QuadInvariant& a, const QuadInvariant& b) {
    return a == b;
}

bool is_isometric(const QuadSpace& a, const QuadSpace& b) {
    if (a.ctx.p != b.ctx.p) throw PrimeMismatch{};
    return quad_invariant(a) == quad_invariant(b);
}

bool is_isotropic(const QuadInvariant& inv, const PadicContext& ctx) {
    const Rat d = inv.det_class.rep;
    switch (inv.dim) {
        case 1:
            return false;
        case 2:
            return square_class(-d, ctx).rep == 1;
        case 3:
            return inv.hasse == hilbert_symbol(Rat(-1), -d, ctx);
        case 4:
            return square_class(d, ctx).rep != 1 ||
                   inv.hasse == hilbert_symbol(Rat(-1), Rat(-1), ctx);
        default:
            return inv.dim >= 5;
    }
}

QuadInvariant orthogonal_sum(const QuadInvariant& a, const QuadInvariant& b,
                             const PadicContext& ctx) {
    Rat d = a.det_class.rep * b.det_class.rep;
    int h = a.hasse * b.hasse * hilbert_symbol(a.det_class.rep, b.det_class.rep, ctx);
    return {a.dim + b.dim, square_class(d, ctx), h};
}

int witt_index(QuadInvariant inv, const PadicContext& ctx) {
    int w = 0;
    while (inv.dim >= 2 && is_isotropic(inv, ctx)) {
        // split off one hyperbolic plane: det flips by -1, the Hasse symbol
        // of the complement is hasse * (-1, -det)
        Rat oldd = inv.det_class.rep;
        inv.hasse *= hilbert_symbol(Rat(-1), -oldd, ctx);
        inv.det_class = square_class(-oldd, ctx);
        inv.dim -= 2;
        ++w;
        if (inv.dim == 0) break;
    }
    return w;
}

int witt_index(const QuadSpace& v) { return witt_index(quad_invariant(v), v.ctx); }

bool is_hyperbolic_plane(const QuadSpace& v) {
    if (v.dim() != 2) return false;
    QuadInvariant inv = quad_invariant(v);
    return square_class(-inv.det_class.rep, v.ctx).rep == 1;
}

bool represents(const QuadInvariant& inv, const Rat& a, const PadicContext& ctx) {
    if (a == 0) throw ZeroInput{};
    QuadInvariant one{1, square_class(-a, ctx), 1};
    return is_isotropic(orthogonal_sum(inv, one, ctx), ctx);
}

bool represents(const QuadSpace& v, const Rat& a) {
    return represents(quad_invariant(v), a, v.ctx);
}

std::vector<Rat> square_class_reps(const PadicContext& ctx) {
    if (ctx.p == 2)
        return {Rat(1), Rat(-1), Rat(2), Rat(-2), Rat(5), Rat(-5), Rat(10), Rat(-10)};
    Rat u(static_cast<unsigned long>(least_nonresidue(ctx.p)));
    Rat p(static_cast<unsigned long>(ctx.p));
    return {Rat(1), u, p, u * p};
}

bool invariant_admissible(const QuadInvariant& inv, const PadicContext& ctx) {
    if (inv.dim < 1) return false;
    if (inv.hasse != 1 && inv.hasse != -1) return false;
    if (inv.dim == 1) return inv.hasse == 1;
    if (inv.dim == 2) {
        // <a, b> with det ~ -1 means b ~ -a, and (a, -a) = +1 always
        if (square_class(-inv.det_class.rep, ctx).rep == 1 && inv.hasse == -1) return false;
    }
    return true;
}

std::vector<Rat> diagonal_from_invariant(const QuadInvariant& inv, const PadicContext& ctx) {
    if (!invariant_admissible(inv, ctx))
        throw InadmissibleInvariant("no quadratic space has the requested invariants");
    if (inv.dim == 1) return {square_class(inv.det_class.rep, ctx).rep};
    if (inv.dim == 2) {
        for (const Rat& a : square_class_reps(ctx)) {
            Rat b = square_class(inv.det_class.rep / a, ctx).rep;
            if (hilbert_symbol(a, b, ctx) == inv.hasse) return {a, b};
        }
        throw InadmissibleInvariant("binary search failed (unexpected)");
    }
    for (const Rat& a : square_class_reps(ctx)) {
        Rat drem = square_class(inv.det_class.rep / a, ctx).rep;
        QuadInvariant rem{inv.dim - 1, square_class(drem, ctx),
                          inv.hasse * hilbert_symbol(a, drem, ctx)};
        if (!invariant_admissible(rem, ctx)) continue;
        std::vector<Rat> tail;
        try {
            tail = diagonal_from_invariant(rem, ctx);
        } catch (const InadmissibleInvariant&) {
            continue;
        }
        tail.insert(tail.begin(), a);
        return tail;
    }
    throw InadmissibleInvariant("no diagonal realization found (unexpected)");
}

QuadSpace form_from_invariant(const QuadInvariant& inv, const PadicContext& ctx) {
    std::vector<Rat> d = diagonal_from_invariant(inv, ctx);
    MatQ g(inv.dim, inv.dim);
    for (int i = 0; i < inv.dim; ++i) g.at(i, i) = d[i];
    return QuadSpace(std::move(g), ctx);
}

}  // namespace qfiso
