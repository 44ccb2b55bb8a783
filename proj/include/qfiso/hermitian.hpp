#pragma once

#include <optional>
#include <vector>

#include "qfiso/padic_ext.hpp"
#include "qfiso/quadspace.hpp"

namespace qfiso {

struct DegenerateInput : std::runtime_error {
    DegenerateInput() : std::runtime_error("hermitian space is degenerate") {}
};
struct SearchExhausted : std::runtime_error {
    explicit SearchExhausted(const std::string& what) : std::runtime_error(what) {}
};
struct MinPolyMismatch : std::runtime_error {
    explicit MinPolyMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct SingularTracePairing : std::runtime_error {
    SingularTracePairing() : std::runtime_error("trace pairing matrix is singular") {}
};

// Free module of finite rank over E with an iota-hermitian form, stored by
// its gram matrix (row-major, entries reduced mod q_total). The hermitian
// symmetry gram(j,i) = iota(gram(i,j)) is validated exactly, or p-adically
// when the algebra modulus is itself a truncation.
struct HermSpace {
    InvolutiveAlgebra algebra;
    std::vector<ExtElem> gram;
    int rank;

    HermSpace(InvolutiveAlgebra alg, std::vector<ExtElem> entries, int n);
    const ExtElem& at(int i, int j) const { return gram[static_cast<size_t>(i) * rank + j]; }
};

enum class HermCase { Field, Split };

struct HermInvariant {
    HermCase kind;
    int rank;
    bool det_is_norm = true;  // field case only

    bool operator==(const HermInvariant& o) const {
        if (kind != o.kind || rank != o.rank) return false;
        return kind == HermCase::Split || det_is_norm == o.det_is_norm;
    }
    bool operator!=(const HermInvariant& o) const { return !(*this == o); }
};

// Inverse in E when it exists (field case: any nonzero element; split case:
// both components nonzero), nullopt for zero divisors.
std::optional<ExtElem> ext_inverse(const InvolutiveAlgebra& e, const ExtElem& a);
bool ext_invertible(const InvolutiveAlgebra& e, const ExtElem& a);

// det(gram) invertible in E; in the split model both component determinants
// are nonzero.
bool herm_nondegenerate(const HermSpace& m);

// Orthogonal basis over E. basis is n x n row-major with basis[s][i] the
// coefficient of old e_s in new v_i; diag the resulting diagonal entries.
// Split case: diag is all ones. Field case: entries are iota-fixed.
struct HermDiagonal {
    std::vector<ExtElem> basis;
    std::vector<ExtElem> diag;
};
HermDiagonal herm_orthogonalize(const HermSpace& m);

// Coordinates of an iota-fixed element in the fixed field k[y]/(g) of a field
// algebra, y corresponding to x + 1/x.
PolyQ to_fixed_field(const InvolutiveAlgebra& e, const ExtElem& a);

// The unique hermitian lift h with <lambda u, v> = Tr_{E/k}(h(u,v) lambda):
// W becomes an E-module through x_action, an isometry of W annihilated by
// the modulus of E, and h is solved pairwise on an E-basis from the trace
// pairing over the power basis of E.
HermSpace herm_from_bilinear(const QuadSpace& w, const MatQ& x_action,
                             const InvolutiveAlgebra& e);

// Split case: rank only. Field case: rank plus the norm class of the
// diagonalized determinant, taken in the fixed field F against the
// discriminant delta of E/F.
HermInvariant herm_invariant(const HermSpace& m);

}  // namespace qfiso
