#pragma once

#include <vector>

#include "qfiso/rat.hpp"

namespace qfiso {

// Polynomials over F_p (or Z/p^N when a composite modulus is passed),
// represented as integer coefficient vectors, lowest degree first, reduced
// into [0, m). Leading coefficient nonzero.
namespace fp {

using Poly = std::vector<Int>;

Poly reduce(Poly f, const Int& m);
inline bool is_zero(const Poly& f) { return f.empty(); }
inline int degree(const Poly& f) { return static_cast<int>(f.size()) - 1; }

Poly add(const Poly& a, const Poly& b, const Int& m);
Poly sub(const Poly& a, const Poly& b, const Int& m);
Poly mul(const Poly& a, const Poly& b, const Int& m);
Poly scale(const Poly& a, const Int& c, const Int& m);

// Division by a polynomial whose leading coefficient is invertible mod m.
std::pair<Poly, Poly> divmod(const Poly& a, const Poly& b, const Int& m);
Poly mod(const Poly& a, const Poly& b, const Int& m);

Poly monic(const Poly& f, const Int& m);
Poly gcd(Poly a, Poly b, const Int& m);  // prime modulus only
std::tuple<Poly, Poly, Poly> xgcd(const Poly& a, const Poly& b, const Int& m);

Poly powmod(const Poly& base, const Int& e, const Poly& f, const Int& m);
Poly derivative(const Poly& f, const Int& m);

inline Poly x() { return {Int(0), Int(1)}; }
inline Poly constant(const Int& c, const Int& m) { return reduce({c}, m); }

// Irreducible factorization over F_p of an arbitrary nonzero polynomial:
// (factor, multiplicity) pairs, factors monic and sorted deterministically.
std::vector<std::pair<Poly, int>> factor(const Poly& f, unsigned long p);

bool is_irreducible(const Poly& f, unsigned long p);

}  // namespace fp
}  // namespace qfiso
