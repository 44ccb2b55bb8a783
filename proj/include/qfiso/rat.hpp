#pragma once

#include <gmpxx.h>

#include <stdexcept>
#include <string>

namespace qfiso {

// Exact rational scalar. gmp keeps gcd(num, den) = 1 and den > 0 canonical.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat_from_string(const std::string& s) {
    Rat q;
    if (q.set_str(s, 10) != 0)
        throw std::invalid_argument("bad rational literal: " + s);
    q.canonicalize();
    return q;
}

inline std::string rat_to_string(const Rat& q) {
    return q.get_str();
}

inline bool is_integer(const Rat& q) { return q.get_den() == 1; }

}  // namespace qfiso
