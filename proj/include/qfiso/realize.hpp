#pragma once

#include <optional>
#include <vector>

#include "qfiso/decision.hpp"
#include "qfiso/milnor.hpp"

namespace qfiso {

struct EvenLevel : std::invalid_argument {
    EvenLevel() : std::invalid_argument("unipotent residual blocks require an odd level") {}
};
struct ZeroEntry : std::invalid_argument {
    ZeroEntry() : std::invalid_argument("residual diagonal entries must be nonzero") {}
};
struct NotIrreducibleOverQp : std::invalid_argument {
    explicit NotIrreducibleOverQp(const std::string& w) : std::invalid_argument(w) {}
};
struct OddLevelForPM1 : std::invalid_argument {
    OddLevelForPM1() : std::invalid_argument("hyperbolic x+-1 blocks require an even level") {}
};
struct EmptySpec : std::invalid_argument {
    EmptySpec() : std::invalid_argument("assemble requires at least one block") {}
};

// Prescription for one orthogonal summand of a pair (gram, isometry).
//   x-1 / x+1, odd level:   residual holds the diagonal of the level form,
//                           one entry per module generator.
//   x-1 / x+1, even level:  rank must be even, residual stays empty.
//   self-reciprocal factor: residual holds scalar hermitian diagonal entries.
//   reciprocal pair:        factor is one half p (star(p) != p) or the
//                           star-fixed product p p*; rank counts generators
//                           of each half; residual stays empty.
struct BlockSpec {
    PolyQ factor;
    FactorTag tag = FactorTag::MinusOne;
    int level = 1;
    int rank = 1;
    std::vector<Rat> residual;
};

// Minimal polynomial (x - sign)^level on the basis (x - 1/x)^i v_s, with the
// level-residual form carrying the prescribed diagonal. sign is +1 or -1.
IsometryPair realize_unipotent_block(int sign, int level, const std::vector<Rat>& diag,
                                     const PadicContext& ctx);

// Minimal polynomial q^level for a self-reciprocal q irreducible over Q_p,
// on the basis x^i s(x)^j v_s with s(x) = x^{-deg(q)/2} q(x). The hermitian
// residual at the top level is diag(herm_diag); entries live in the fixed
// field k[y]/(g) of x -> 1/x (polynomials in y = x + 1/x), the scalar
// overload embeds rational entries as constants.
IsometryPair realize_symmetric_block(const PolyQ& q, int level,
                                     const std::vector<PolyQ>& herm_diag,
                                     const PadicContext& ctx);
IsometryPair realize_symmetric_block(const PolyQ& q, int level,
                                     const std::vector<Rat>& herm_diag,
                                     const PadicContext& ctx);

// Residual-free blocks. For factor = x+-1 the level must be even and the
// result is R + dual(R) with R = (k[x]/(factor^level))^rank, hyperbolic of
// Witt index dim/2. For a pair half (star(factor) != factor) the same dual
// doubling applies. For a star-fixed product of a reciprocal pair the module
// k[x]/(factor^level) itself carries both halves; an invariant symmetric
// pairing is found by scanning the functionals coeff_{n-1}(x^j . ) composed
// with the involution symmetrizer.
IsometryPair realize_hyperbolic_block(const PolyQ& factor, int level, int rank,
                                      const PadicContext& ctx);

IsometryPair realize_block(const BlockSpec& spec, const PadicContext& ctx);

// Orthogonal sum of independently realized blocks.
IsometryPair assemble(const std::vector<BlockSpec>& specs, const PadicContext& ctx);

IsometryPair pair_sum(const IsometryPair& a, const IsometryPair& b);

enum class RecipeCase {
    EvenHermTwist,      // hermitian determinant flip at an even level
    TwoOddHermTwist,    // compensating hermitian flips at two odd blocks
    M0BothBig,          // two odd unipotent residuals, both dim >= 2, neither hyperbolic
    M0HyperbolicVsNot,  // one hyperbolic-plane residual against a non-hyperbolic one
    M0BothHyperbolic,   // both residuals hyperbolic planes
    M0BothOneDim,       // both residuals lines: gamma twist
    M0MixedOneTwo,      // a line against a bigger residual: xi/eta/alpha exchange
    ResidualHermTwist,  // m_0 = m_1 = 1 with an oversized unipotent residual
};
const char* recipe_name(RecipeCase c);

struct CounterexampleRecipe {
    RecipeCase kind;
    std::optional<Rat> gamma, delta, xi, eta, alpha;
    std::optional<PolyQ> herm_twist;  // non-norm element of the fixed field, in y
};

struct CounterexampleWitness {
    IsometryPair witness;
    CounterexampleRecipe recipe;
};

// When the isometry class of `pair` is not single, produce a pair on an
// isometric ambient space that is GL-conjugate but not O-conjugate to the
// input, together with the constants that were used. Returns nothing exactly
// when decide_single_class accepts the invariant. Every emission is checked
// against the three-part contract (GL-conjugate, ambient isometric, Milnor
// invariants different) before it is returned.
std::optional<CounterexampleWitness> counterexample(const IsometryPair& pair,
                                                    const std::vector<PolyQ>* certificate = nullptr);

}  // namespace qfiso
