#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfiso/rat.hpp"

namespace qfiso {

// Dense univariate polynomial over Q, coefficients lowest degree first.
class PolyQ {
public:
    PolyQ() = default;
    explicit PolyQ(std::vector<Rat> coeffs) : c_(std::move(coeffs)) { trim(); }
    static PolyQ constant(const Rat& a) { return PolyQ({a}); }
    static PolyQ x() { return PolyQ({Rat(0), Rat(1)}); }

    // x - a
    static PolyQ linear_root(const Rat& a) { return PolyQ({-a, Rat(1)}); }

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const std::vector<Rat>& coeffs() const { return c_; }
    Rat coeff(int i) const {
        return (i >= 0 && i < static_cast<int>(c_.size())) ? c_[i] : Rat(0);
    }
    Rat leading() const { return is_zero() ? Rat(0) : c_.back(); }
    bool is_monic() const { return !is_zero() && c_.back() == 1; }

    Rat operator()(const Rat& x) const {
        Rat r(0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) r = r * x + *it;
        return r;
    }

    PolyQ operator-() const {
        std::vector<Rat> r(c_);
        for (auto& a : r) a = -a;
        return PolyQ(std::move(r));
    }

    friend PolyQ operator+(const PolyQ& a, const PolyQ& b) {
        std::vector<Rat> r(std::max(a.c_.size(), b.c_.size()), Rat(0));
        for (size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
        return PolyQ(std::move(r));
    }
    friend PolyQ operator-(const PolyQ& a, const PolyQ& b) { return a + (-b); }
    friend PolyQ operator*(const PolyQ& a, const PolyQ& b) {
        if (a.is_zero() || b.is_zero()) return PolyQ();
        std::vector<Rat> r(a.c_.size() + b.c_.size() - 1, Rat(0));
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
        return PolyQ(std::move(r));
    }
    friend PolyQ operator*(const Rat& s, const PolyQ& a) {
        std::vector<Rat> r(a.c_);
        for (auto& x : r) x *= s;
        return PolyQ(std::move(r));
    }

    bool operator==(const PolyQ& o) const { return c_ == o.c_; }
    bool operator!=(const PolyQ& o) const { return c_ != o.c_; }

    // Euclidean division: *this = q * d + r with deg r < deg d.
    std::pair<PolyQ, PolyQ> divmod(const PolyQ& d) const {
        if (d.is_zero()) throw std::domain_error("polynomial division by zero");
        std::vector<Rat> rem(c_);
        std::vector<Rat> quo;
        int dd = d.degree();
        Rat lead = d.leading();
        while (static_cast<int>(rem.size()) - 1 >= dd && !rem.empty()) {
            Rat q = rem.back() / lead;
            int shift = static_cast<int>(rem.size()) - 1 - dd;
            if (static_cast<int>(quo.size()) < shift + 1) quo.resize(shift + 1, Rat(0));
            quo[shift] = q;
            for (int i = 0; i <= dd; ++i) rem[shift + i] -= q * d.c_[i];
            while (!rem.empty() && rem.back() == 0) rem.pop_back();
        }
        return {PolyQ(std::move(quo)), PolyQ(std::move(rem))};
    }
    PolyQ operator/(const PolyQ& d) const {
        auto [q, r] = divmod(d);
        if (!r.is_zero()) throw std::domain_error("inexact polynomial division");
        return q;
    }
    PolyQ operator%(const PolyQ& d) const { return divmod(d).second; }

    PolyQ monic() const {
        if (is_zero()) return *this;
        return (Rat(1) / leading()) * (*this);
    }

    PolyQ derivative() const {
        if (c_.size() <= 1) return PolyQ();
        std::vector<Rat> r(c_.size() - 1);
        for (size_t i = 1; i < c_.size(); ++i) r[i - 1] = Rat(static_cast<long>(i)) * c_[i];
        return PolyQ(std::move(r));
    }

    PolyQ pow(int e) const {
        PolyQ r = constant(Rat(1)), b = *this;
        for (; e > 0; e >>= 1) {
            if (e & 1) r = r * b;
            b = b * b;
        }
        return r;
    }

    // x^k * f, k >= 0
    PolyQ shift(int k) const {
        if (is_zero()) return *this;
        std::vector<Rat> r(c_.size() + k, Rat(0));
        for (size_t i = 0; i < c_.size(); ++i) r[i + k] = c_[i];
        return PolyQ(std::move(r));
    }

    std::string to_string() const;

private:
    void trim() {
        while (!c_.empty() && c_.back() == 0) c_.pop_back();
    }
    std::vector<Rat> c_;
};

inline PolyQ gcd(const PolyQ& a, const PolyQ& b) {
    PolyQ x = a, y = b;
    while (!y.is_zero()) {
        PolyQ r = x % y;
        x = y;
        y = r;
    }
    return x.monic();
}

// Extended gcd: returns (g, u, v) with u a + v b = g, g monic.
std::tuple<PolyQ, PolyQ, PolyQ> xgcd(const PolyQ& a, const PolyQ& b);

struct ZeroConstantTerm : std::invalid_argument {
    ZeroConstantTerm() : std::invalid_argument("polynomial has zero constant term") {}
};

// f*(x) = f(0)^{-1} x^n f(1/x)
inline PolyQ star(const PolyQ& f) {
    if (f.is_zero() || f.coeff(0) == 0) throw ZeroConstantTerm{};
    std::vector<Rat> r(f.coeffs().rbegin(), f.coeffs().rend());
    Rat inv = Rat(1) / f.coeff(0);
    for (auto& a : r) a *= inv;
    return PolyQ(std::move(r));
}

// Res(f, g) over Q by the Euclidean remainder chain.
Rat resultant(const PolyQ& f, const PolyQ& g);

// Yun squarefree decomposition: f = prod part^mult (parts monic, pairwise
// coprime, squarefree). Multiplicities strictly increasing.
std::vector<std::pair<PolyQ, int>> squarefree_decomposition(const PolyQ& f);

// For a self-reciprocal q of even degree 2d with q(0)=1: the monic degree-d
// g with q(x) = x^d g(x + 1/x), and delta = (y^2 - 4) mod g. The fixed field
// of x -> 1/x on k[x]/(q) is k[y]/(g), and k[x]/(q) = F(sqrt(delta)).
struct TraceDescent {
    PolyQ g;
    PolyQ delta_spec;
};
TraceDescent trace_descent(const PolyQ& q);

}  // namespace qfiso
