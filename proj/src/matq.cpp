#include "qfiso/matq.hpp"

namespace qfiso {

namespace {

// Row echelon reduction in place; returns (rank, pivot columns, det sign and
// product for square matrices).
struct Echelon {
    int rank = 0;
    std::vector<int> pivot_cols;
    Rat det_product = 1;  // product of pivots times sign; 0 if rank-deficient
};

Echelon echelonize(MatQ& m) {
    Echelon e;
    int r = 0;
    int sign = 1;
    for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
        int piv = -1;
        for (int i = r; i < m.rows(); ++i)
            if (m.at(i, c) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        if (piv != r) {
            for (int j = 0; j < m.cols(); ++j) std::swap(m.at(piv, j), m.at(r, j));
            sign = -sign;
        }
        Rat p = m.at(r, c);
        for (int i = r + 1; i < m.rows(); ++i) {
            if (m.at(i, c) == 0) continue;
            Rat f = m.at(i, c) / p;
            for (int j = c; j < m.cols(); ++j) m.at(i, j) -= f * m.at(r, j);
        }
        e.pivot_cols.push_back(c);
        ++r;
    }
    e.rank = r;
    if (m.rows() == m.cols()) {
        if (r < m.rows()) {
            e.det_product = 0;
        } else {
            e.det_product = Rat(sign);
            for (int i = 0; i < m.rows(); ++i) e.det_product *= m.at(i, i);
        }
    }
    return e;
}

}  // namespace

Rat det(MatQ m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("det: not square");
    return echelonize(m).det_product;
}

int rank(MatQ m) { return echelonize(m).rank; }

std::optional<MatQ> inverse(const MatQ& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("inverse: not square");
    int n = m.rows();
    MatQ aug(n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) aug.at(i, j) = m.at(i, j);
        aug.at(i, n + i) = 1;
    }
    // Gauss-Jordan
    for (int c = 0; c < n; ++c) {
        int piv = -1;
        for (int i = c; i < n; ++i)
            if (aug.at(i, c) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) return std::nullopt;
        if (piv != c)
            for (int j = 0; j < 2 * n; ++j) std::swap(aug.at(piv, j), aug.at(c, j));
        Rat p = aug.at(c, c);
        for (int j = 0; j < 2 * n; ++j) aug.at(c, j) /= p;
        for (int i = 0; i < n; ++i) {
            if (i == c || aug.at(i, c) == 0) continue;
            Rat f = aug.at(i, c);
            for (int j = 0; j < 2 * n; ++j) aug.at(i, j) -= f * aug.at(c, j);
        }
    }
    MatQ r(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r.at(i, j) = aug.at(i, n + j);
    return r;
}

std::optional<std::vector<Rat>> solve(const MatQ& a, const std::vector<Rat>& b) {
    if (static_cast<int>(b.size()) != a.rows()) throw std::invalid_argument("solve: shape");
    MatQ aug(a.rows(), a.cols() + 1);
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) aug.at(i, j) = a.at(i, j);
        aug.at(i, a.cols()) = b[i];
    }
    Echelon e = echelonize(aug);
    // inconsistent iff a pivot lands in the last column
    for (int c : e.pivot_cols)
        if (c == a.cols()) return std::nullopt;
    std::vector<Rat> x(a.cols(), Rat(0));
    for (int r = e.rank - 1; r >= 0; --r) {
        int pc = e.pivot_cols[r];
        Rat s = aug.at(r, a.cols());
        for (int j = pc + 1; j < a.cols(); ++j) s -= aug.at(r, j) * x[j];
        x[pc] = s / aug.at(r, pc);
    }
    return x;
}

std::vector<std::vector<Rat>> kernel(const MatQ& a) {
    MatQ m = a;
    Echelon e = echelonize(m);
    std::vector<bool> is_pivot(a.cols(), false);
    for (int c : e.pivot_cols) is_pivot[c] = true;
    std::vector<std::vector<Rat>> basis;
    for (int free = 0; free < a.cols(); ++free) {
        if (is_pivot[free]) continue;
        std::vector<Rat> v(a.cols(), Rat(0));
        v[free] = 1;
        for (int r = e.rank - 1; r >= 0; --r) {
            int pc = e.pivot_cols[r];
            Rat s(0);
            for (int j = pc + 1; j < a.cols(); ++j) s -= m.at(r, j) * v[j];
            v[pc] = s / m.at(r, pc);
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

PolyQ char_poly(const MatQ& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("char_poly: not square");
    int n = a.rows();
    if (n == 0) return PolyQ::constant(Rat(1));
    // evaluate det(t I - A) at t = 0..n, interpolate (Lagrange)
    std::vector<Rat> xs(n + 1), ys(n + 1);
    for (int k = 0; k <= n; ++k) {
        xs[k] = Rat(k);
        MatQ m = a;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m.at(i, j) = (i == j ? Rat(k) : Rat(0)) - a.at(i, j);
        ys[k] = det(std::move(m));
    }
    PolyQ acc;
    for (int k = 0; k <= n; ++k) {
        PolyQ term = PolyQ::constant(Rat(1));
        Rat denom(1);
        for (int j = 0; j <= n; ++j) {
            if (j == k) continue;
            term = term * PolyQ({-xs[j], Rat(1)});
            denom *= xs[k] - xs[j];
        }
        acc = acc + (ys[k] / denom) * term;
    }
    return acc;
}

MatQ eval_poly(const PolyQ& f, const MatQ& a) {
    int n = a.rows();
    MatQ r(n, n);
    for (int i = f.degree(); i >= 0; --i) {
        r = r * a;
        for (int d = 0; d < n; ++d) r.at(d, d) += f.coeff(i);
    }
    return r;
}

Rat trace(const MatQ& a) {
    Rat t(0);
    for (int i = 0; i < a.rows() && i < a.cols(); ++i) t += a.at(i, i);
    return t;
}

}  // namespace qfiso
