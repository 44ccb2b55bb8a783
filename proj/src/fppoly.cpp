#include "qfiso/fppoly.hpp"

#include "qfiso/padic.hpp"

#include <algorithm>
#include <stdexcept>

namespace qfiso {
namespace fp {

namespace {

Int inv_mod(const Int& a, const Int& m) {
    Int r;
    if (!mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()))
        throw std::domain_error("non-invertible leading coefficient");
    return r;
}

void trim(Poly& f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
}

}  // namespace

Poly reduce(Poly f, const Int& m) {
    for (auto& c : f) {
        c %= m;
        if (c < 0) c += m;
    }
    trim(f);
    return f;
}

Poly add(const Poly& a, const Poly& b, const Int& m) {
    Poly r(std::max(a.size(), b.size()), Int(0));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return reduce(std::move(r), m);
}

Poly sub(const Poly& a, const Poly& b, const Int& m) {
    Poly r(std::max(a.size(), b.size()), Int(0));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return reduce(std::move(r), m);
}

Poly mul(const Poly& a, const Poly& b, const Int& m) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, Int(0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return reduce(std::move(r), m);
}

Poly scale(const Poly& a, const Int& c, const Int& m) {
    Poly r = a;
    for (auto& x : r) x *= c;
    return reduce(std::move(r), m);
}

std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b, const Int& m) {
    if (b.empty()) throw std::domain_error("division by zero polynomial");
    Int linv = inv_mod(b.back(), m);
    Poly rem = reduce(a, m);
    Poly quo;
    int db = degree(b);
    while (degree(rem) >= db) {
        Int q = (rem.back() * linv) % m;
        int shift = degree(rem) - db;
        if (static_cast<int>(quo.size()) < shift + 1) quo.resize(shift + 1, Int(0));
        quo[shift] = q;
        for (int i = 0; i <= db; ++i) {
            rem[shift + i] = (rem[shift + i] - q * b[i]) % m;
            if (rem[shift + i] < 0) rem[shift + i] += m;
        }
        trim(rem);
    }
    return {reduce(std::move(quo), m), rem};
}

Poly mod(const Poly& a, const Poly& b, const Int& m) { return divmod(a, b, m).second; }

Poly monic(const Poly& f, const Int& m) {
    if (f.empty()) return f;
    return scale(f, inv_mod(f.back(), m), m);
}

Poly gcd(Poly a, Poly b, const Int& m) {
    while (!b.empty()) {
        Poly r = mod(a, b, m);
        a = std::move(b);
        b = std::move(r);
    }
    return monic(a, m);
}

std::tuple<Poly, Poly, Poly> xgcd(const Poly& a, const Poly& b, const Int& m) {
    Poly r0 = a, r1 = b;
    Poly s0 = constant(1, m), s1;
    Poly t0, t1 = constant(1, m);
    while (!r1.empty()) {
        auto [q, r2] = divmod(r0, r1, m);
        r0 = r1; r1 = r2;
        Poly s2 = sub(s0, mul(q, s1, m), m);
        Poly t2 = sub(t0, mul(q, t1, m), m);
        s0 = s1; s1 = s2;
        t0 = t1; t1 = t2;
    }
    if (r0.empty()) return {r0, s0, t0};
    Int linv = inv_mod(r0.back(), m);
    return {scale(r0, linv, m), scale(s0, linv, m), scale(t0, linv, m)};
}

Poly powmod(const Poly& base, const Int& e, const Poly& f, const Int& m) {
    Poly r = constant(1, m);
    Poly b = mod(base, f, m);
    size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (size_t i = bits; i-- > 0;) {
        r = mod(mul(r, r, m), f, m);
        if (mpz_tstbit(e.get_mpz_t(), i)) r = mod(mul(r, b, m), f, m);
    }
    return r;
}

Poly derivative(const Poly& f, const Int& m) {
    if (f.size() <= 1) return {};
    Poly r(f.size() - 1);
    for (size_t i = 1; i < f.size(); ++i) r[i - 1] = f[i] * static_cast<unsigned long>(i);
    return reduce(std::move(r), m);
}

namespace {

// p-th root of a polynomial in F_p[x^p] (Frobenius fixes F_p pointwise).
Poly pth_root(const Poly& f, unsigned long p) {
    Poly r;
    for (size_t i = 0; i < f.size(); i += p) r.push_back(f[i]);
    trim(r);
    return r;
}

// Equal-degree splitting of a monic squarefree product of degree-d
// irreducibles. Deterministic trial elements keep runs reproducible.
void edf(const Poly& g, int d, unsigned long p, std::vector<Poly>& out) {
    Int m(p);
    if (degree(g) == d) {
        out.push_back(g);
        return;
    }
    Int pd;
    mpz_ui_pow_ui(pd.get_mpz_t(), p, static_cast<unsigned long>(d));

    unsigned long long lcg = 0x243F6A8885A308D3ull;
    for (int attempt = 0;; ++attempt) {
        Poly a;
        if (attempt == 0) {
            a = x();
        } else {
            a.resize(static_cast<size_t>(degree(g)), Int(0));
            for (auto& c : a) {
                lcg = lcg * 6364136223846793005ull + 1442695040888963407ull;
                c = Int(static_cast<unsigned long>(lcg >> 16)) % m;
            }
            trim(a);
            if (a.empty()) continue;
        }
        Poly t;
        if (p == 2) {
            // Trace map sum_{i<d} a^{2^i}.
            Poly cur = mod(a, g, m);
            t = cur;
            for (int i = 1; i < d; ++i) {
                cur = mod(mul(cur, cur, m), g, m);
                t = add(t, cur, m);
            }
        } else {
            Int e = (pd - 1) / 2;
            t = sub(powmod(a, e, g, m), constant(1, m), m);
        }
        Poly h = gcd(t, g, m);
        if (degree(h) > 0 && degree(h) < degree(g)) {
            edf(h, d, p, out);
            edf(divmod(g, h, m).first, d, p, out);
            return;
        }
    }
}

// Distinct-degree then equal-degree factorization of a monic squarefree f.
std::vector<Poly> factor_squarefree(Poly f, unsigned long p) {
    Int m(p);
    std::vector<Poly> out;
    Poly h = x();
    Int pe(p);
    for (int d = 1; 2 * d <= degree(f); ++d) {
        h = powmod(h, pe, f, m);
        Poly g = gcd(sub(h, x(), m), f, m);
        if (degree(g) > 0) {
            edf(g, d, p, out);
            f = divmod(f, g, m).first;
            h = mod(h, f, m);
        }
    }
    if (degree(f) > 0) out.push_back(f);
    return out;
}

}  // namespace

std::vector<std::pair<Poly, int>> factor(const Poly& f_in, unsigned long p) {
    Int m(p);
    Poly f = monic(reduce(f_in, m), m);
    if (f.empty()) throw std::domain_error("factor: zero polynomial");
    std::vector<Poly> irreducibles;
    Poly g = f;
    while (degree(g) > 0) {
        Poly gp = derivative(g, m);
        if (gp.empty()) {
            g = pth_root(g, p);
            continue;
        }
        Poly w = divmod(g, gcd(g, gp, m), m).first;
        for (auto& q : factor_squarefree(w, p)) {
            irreducibles.push_back(q);
            while (true) {
                auto [quo, rem] = divmod(g, q, m);
                if (!rem.empty()) break;
                g = quo;
            }
        }
    }
    std::sort(irreducibles.begin(), irreducibles.end(),
              [](const Poly& a, const Poly& b) {
                  if (a.size() != b.size()) return a.size() < b.size();
                  for (size_t i = a.size(); i-- > 0;)
                      if (a[i] != b[i]) return a[i] < b[i];
                  return false;
              });
    std::vector<std::pair<Poly, int>> out;
    for (auto& q : irreducibles) {
        int mult = 0;
        Poly rest = f;
        while (true) {
            auto [quo, rem] = divmod(rest, q, m);
            if (!rem.empty()) break;
            rest = quo;
            ++mult;
        }
        out.emplace_back(q, mult);
    }
    return out;
}

bool is_irreducible(const Poly& f_in, unsigned long p) {
    Int m(p);
    Poly f = monic(reduce(f_in, m), m);
    int n = degree(f);
    if (n <= 0) return false;
    if (n == 1) return true;
    Int pe(p);
    // x^{p^n} must equal x mod f, and x^{p^{n/r}} - x coprime to f for each
    // prime r | n.
    Poly h = x();
    std::vector<int> checkpoints;
    for (int r = 2; r <= n; ++r)
        if (n % r == 0 && is_prime_trial(static_cast<unsigned long>(r)))
            checkpoints.push_back(n / r);
    std::sort(checkpoints.begin(), checkpoints.end());
    size_t ci = 0;
    for (int i = 1; i <= n; ++i) {
        h = powmod(h, pe, f, m);
        if (ci < checkpoints.size() && i == checkpoints[ci]) {
            ++ci;
            if (degree(gcd(sub(h, x(), m), f, m)) > 0) return false;
        }
    }
    return sub(h, x(), m).empty();
}

}  // namespace fp
}  // namespace qfiso
