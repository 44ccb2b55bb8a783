#pragma once

#include <optional>
#include <vector>

#include "qfiso/factor.hpp"
#include "qfiso/matq.hpp"
#include "qfiso/padic.hpp"
#include "qfiso/polyq.hpp"

namespace qfiso {

struct UncertifiedField : std::runtime_error {
    explicit UncertifiedField(const std::string& what) : std::runtime_error(what) {}
};

// Elements of a finite extension are residues mod the defining polynomial,
// degree < deg m, coefficients exact rationals at working precision.
using ExtElem = PolyQ;

// K = Q_p[x]/(m) for monic m irreducible over Q_p. Construction certifies
// irreducibility and reads off ramification index e, residue degree f, a
// residue field model and a uniformizer. Valuations are normalized so
// val(uniformizer) = 1, hence val(p) = e. Working precision is
// ctx.precision * e digits (absolute precision preserved under ramification).
class LocalField {
public:
    LocalField(PolyQ m, PadicContext ctx);

    const PolyQ& modulus() const { return m_; }
    int degree() const { return m_.degree(); }
    int e() const { return e_; }
    int f_res() const { return f_; }
    unsigned long p() const { return ctx_.p; }
    const PadicContext& context() const { return ctx_; }
    int precision() const { return work_; }  // digits of p kept in coefficients
    const fp::Poly& residue_model() const { return residue_model_; }
    const ExtElem& uniformizer() const { return pi_; }

    // Z_p-basis of the ring of integers: theta^i * pi^j, theta a residue
    // generator of valuation 0.
    const std::vector<ExtElem>& integral_basis() const { return basis_; }

    ExtElem embed(const Rat& a) const { return PolyQ::constant(a); }
    ExtElem gen() const;  // x mod m
    ExtElem reduce(const PolyQ& a) const;
    ExtElem add(const ExtElem& a, const ExtElem& b) const { return reduce(a + b); }
    ExtElem sub(const ExtElem& a, const ExtElem& b) const { return reduce(a - b); }
    ExtElem mul(const ExtElem& a, const ExtElem& b) const { return reduce(a * b); }
    ExtElem inv(const ExtElem& a) const;
    ExtElem div(const ExtElem& a, const ExtElem& b) const { return mul(a, inv(b)); }
    ExtElem pow(const ExtElem& a, const Int& k) const;

    bool is_zero(const ExtElem& a) const;
    // normalized valuation; throws ZeroInput on (numerically) zero input
    long val(const ExtElem& a) const;

    Rat norm(const ExtElem& a) const;   // N_{K/Q_p}(a), exact on the lift
    Rat trace(const ExtElem& a) const;  // Tr_{K/Q_p}(a)

    // quadratic residue character of a unit via u^{(q-1)/2}; odd p only
    int chi(const ExtElem& u) const;
    bool is_square(const ExtElem& a) const;
    // Hilbert symbol (a, b)_K: tame closed form for odd p, conic search at p=2
    int hilbert(const ExtElem& a, const ExtElem& b) const;

private:
    Rat canon_coeff(const Rat& c, int digits) const;

    PolyQ m_;
    PadicContext ctx_;
    int e_ = 1, f_ = 1;
    int work_;  // coefficient digits kept after reductions
    fp::Poly residue_model_;
    ExtElem pi_;
    std::vector<ExtElem> basis_;
};

// Trace of the multiplication-by-a operator on Q[x]/(q); for an etale
// algebra over Q_p this is the reduced trace.
Rat etale_trace(const PolyQ& q, const ExtElem& a);
inline Rat etale_trace(const LocalField& F, const ExtElem& a) { return F.trace(a); }

// true iff d is a norm from F(sqrt(delta)); equivalently (d, delta)_F = +1
bool norm_test(const ExtElem& d, const ExtElem& delta, const LocalField& F);

struct ExtConicWitness {
    ExtElem x, y, z;
};

// Primitive solution of a x^2 + b y^2 + c z^2 = 0 over the integers of F,
// found by residue search at the quadratic-form Hensel bound and refined by
// Newton iteration. Absence of a witness is a definitive "anisotropic" for
// search spaces within budget; oversized searches throw PrecisionExhausted.
std::optional<ExtConicWitness> conic_solve(const ExtElem& a, const ExtElem& b,
                                           const ExtElem& c, const LocalField& F);

// E = Q_p[x]/(q_total) with the involution induced by x -> x^{-1}. Either a
// field on a self-reciprocal irreducible q, or split E = K x K on a product
// of distinct star-paired irreducibles.
class InvolutiveAlgebra {
public:
    // q self-reciprocal (to `known` digits), even degree; symmetrized exactly
    static InvolutiveAlgebra field(const PolyQ& q, const PadicContext& ctx,
                                   int known = 1 << 20);
    // q_total = part * star(part) with the two parts distinct mod p^{known/2}
    static InvolutiveAlgebra split_pair(const PolyQ& part, const PadicContext& ctx,
                                        int known = 1 << 20);

    const PolyQ& q_total() const { return q_total_; }
    bool split() const { return split_; }
    int dim() const { return q_total_.degree(); }
    const PadicContext& context() const { return ctx_; }
    const PolyQ& part() const { return part_; }
    const PolyQ& partner() const { return partner_; }
    const PolyQ& fixed_g() const { return g_; }           // field case
    const PolyQ& fixed_delta() const { return delta_; }   // field case
    const MatQ& iota_matrix() const { return iota_; }

    ExtElem apply_iota(const ExtElem& a) const;  // a(x) -> a(x^{-1})
    ExtElem reduce(const PolyQ& a) const { return a % q_total_; }
    ExtElem mul(const ExtElem& a, const ExtElem& b) const { return (a * b) % q_total_; }
    Rat trace(const ExtElem& a) const;
    // split case: image of a in Q_p[x]/(part) (which = 0) or /(partner)
    ExtElem component(const ExtElem& a, int which) const;

private:
    InvolutiveAlgebra() = default;
    void finish();

    PolyQ q_total_;
    bool split_ = false;
    PadicContext ctx_{3};
    PolyQ part_, partner_, g_, delta_;
    PolyQ inv_x_;
    MatQ iota_{0, 0};
};

}  // namespace qfiso
