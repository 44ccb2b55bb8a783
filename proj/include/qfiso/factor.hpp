#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "qfiso/fppoly.hpp"
#include "qfiso/padic.hpp"
#include "qfiso/polyq.hpp"

namespace qfiso {

enum class FactorTag { PlusOne, MinusOne, SelfReciprocal, Paired };

struct PadicFactor {
    PolyQ poly;        // exact lift of the factor at the stated precision
    int multiplicity;
    FactorTag tag;
    int partner = -1;  // index of the star partner when tag == Paired
    int known = 0;     // p-adic digits to which the lift is accurate
};

struct PadicFactorization {
    std::vector<PadicFactor> factors;
    int precision;
};

struct NotPRegular : std::runtime_error {
    explicit NotPRegular(const std::string& what) : std::runtime_error(what) {}
};
struct BadCertificate : std::runtime_error {
    explicit BadCertificate(const std::string& what) : std::runtime_error(what) {}
};
struct PrecisionExhausted : std::runtime_error {
    explicit PrecisionExhausted(const std::string& what) : std::runtime_error(what) {}
};
struct UnpairedFactor : std::runtime_error {
    explicit UnpairedFactor(const std::string& what) : std::runtime_error(what) {}
};

// Factorization of a monic f with f(0) != 0 into irreducibles over Q_p.
// Squarefree decomposition runs exactly over Q; each part is factored mod p
// and Hensel lifted. Non-p-regular parts are handled by Newton-polygon
// splitting where the slopes permit, otherwise a certificate must supply the
// claimed factors (verified, never trusted).
PadicFactorization factor_padic(const PolyQ& f, const PadicContext& ctx,
                                const std::vector<PolyQ>* certificate = nullptr);

namespace detail {

// Root valuations of f over Q_p from the Newton polygon: (valuation, count)
// pairs with valuations strictly decreasing. `cap` bounds trustworthy
// coefficient valuations for approximate inputs.
std::vector<std::pair<Rat, int>> newton_root_valuations(const PolyQ& f, unsigned long p,
                                                        long cap);

// f p-integral monic, reduced mod m = p^digits.
fp::Poly lift_to_fp(const PolyQ& f, const Int& m);
PolyQ from_fp_symmetric(const fp::Poly& f, const Int& m);

// Lift a pairwise-coprime monic factorization of f mod p to mod p^digits.
std::vector<fp::Poly> hensel_lift(const fp::Poly& f, const std::vector<fp::Poly>& base,
                                  unsigned long p, int digits);

// True iff q (monic, accurate to `known` digits) is certified irreducible
// over Q_p by the residual-factorization or Newton-polygon criteria.
bool certify_irreducible(const PolyQ& q, const PadicContext& ctx, int known);

// Ramification data of K = Q_p[x]/(m) read off the same analysis that
// certifies irreducibility: besides e and f it records the affine shift
// xi = (x - center) / p^shift whose normalized valuation is xi_num (with
// v(p) = e), plus an irreducible degree-f residue model mod p. Only integral
// m with nonnegative root valuations are supported; empty when the analysis
// cannot conclude.
struct FieldShape {
    int e = 1;
    int f = 1;
    fp::Poly residue_model;
    Rat center = Rat(0);
    long shift = 0;
    long xi_num = 1;
};
std::optional<FieldShape> field_shape(const PolyQ& m, const PadicContext& ctx, int known);

bool congruent_padic(const PolyQ& a, const PolyQ& b, unsigned long p, long threshold);

}  // namespace detail

}  // namespace qfiso
