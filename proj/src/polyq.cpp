#include "qfiso/polyq.hpp"

#include <sstream>

namespace qfiso {

std::string PolyQ::to_string() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
        Rat a = coeff(i);
        if (a == 0) continue;
        if (!first) os << (a > 0 ? " + " : " - ");
        else if (a < 0) os << "-";
        Rat m = abs(a);
        if (i == 0 || m != 1) os << rat_to_string(m) << (i > 0 ? "*" : "");
        if (i > 0) os << "x";
        if (i > 1) os << "^" << i;
        first = false;
    }
    return os.str();
}

std::tuple<PolyQ, PolyQ, PolyQ> xgcd(const PolyQ& a, const PolyQ& b) {
    PolyQ r0 = a, r1 = b;
    PolyQ s0 = PolyQ::constant(Rat(1)), s1;
    PolyQ t0, t1 = PolyQ::constant(Rat(1));
    while (!r1.is_zero()) {
        auto [q, r2] = r0.divmod(r1);
        r0 = r1; r1 = r2;
        PolyQ s2 = s0 - q * s1, t2 = t0 - q * t1;
        s0 = s1; s1 = s2;
        t0 = t1; t1 = t2;
    }
    if (r0.is_zero()) return {r0, s0, t0};
    Rat inv = Rat(1) / r0.leading();
    return {inv * r0, inv * s0, inv * t0};
}

Rat resultant(const PolyQ& f, const PolyQ& g) {
    if (f.is_zero() || g.is_zero()) return Rat(0);
    auto rpow = [](const Rat& base, int e) {
        Rat r(1);
        for (int i = 0; i < e; ++i) r *= base;
        return r;
    };
    PolyQ a = f, b = g;
    Rat res(1);
    if (a.degree() < b.degree()) {
        if ((a.degree() & 1) && (b.degree() & 1)) res = -res;
        std::swap(a, b);
    }
    while (b.degree() > 0) {
        PolyQ r = a % b;
        if (r.is_zero()) return Rat(0);
        int da = a.degree(), db = b.degree(), dr = r.degree();
        if ((da & 1) && (db & 1)) res = -res;
        res *= rpow(b.leading(), da - dr);
        a = b;
        b = r;
    }
    return res * rpow(b.leading(), a.degree());
}

std::vector<std::pair<PolyQ, int>> squarefree_decomposition(const PolyQ& f) {
    std::vector<std::pair<PolyQ, int>> out;
    if (f.degree() < 1) return out;
    PolyQ g = f.monic();
    PolyQ a = gcd(g, g.derivative());
    PolyQ b = g / a;                          // product of distinct roots
    PolyQ c = g.derivative() / a;
    PolyQ d = c - b.derivative();
    int mult = 1;
    while (b.degree() > 0) {
        PolyQ part = gcd(b, d);
        if (part.degree() > 0) out.emplace_back(part, mult);
        b = b / part;
        c = d / part;
        d = c - b.derivative();
        ++mult;
    }
    return out;
}

TraceDescent trace_descent(const PolyQ& q) {
    int n = q.degree();
    if (n < 2 || n % 2 != 0)
        throw std::invalid_argument("trace_descent: degree must be even and >= 2");
    if (star(q) != q || q.coeff(0) != 1)
        throw std::invalid_argument("trace_descent: polynomial is not self-reciprocal monic");
    int d = n / 2;
    // q(x)/x^d = q_d + sum_{i=1..d} q_{d+i} (x^i + x^{-i}); substitute the
    // Chebyshev-like basis w_i(y) with w_0 = 2, w_1 = y, w_{i+1} = y w_i - w_{i-1}.
    PolyQ y = PolyQ::x();
    PolyQ w_prev = PolyQ::constant(Rat(2)), w_cur = y;
    PolyQ g = PolyQ::constant(q.coeff(d));
    for (int i = 1; i <= d; ++i) {
        g = g + q.coeff(d + i) * w_cur;
        PolyQ w_next = y * w_cur - w_prev;
        w_prev = w_cur;
        w_cur = w_next;
    }
    PolyQ delta = (y * y - PolyQ::constant(Rat(4))) % g;
    return {g, delta};
}

}  // namespace qfiso
