#pragma once

#include <optional>
#include <vector>

#include "qfiso/factor.hpp"
#include "qfiso/hermitian.hpp"
#include "qfiso/matq.hpp"
#include "qfiso/quadspace.hpp"

namespace qfiso {

struct SizeMismatch : std::runtime_error {
    SizeMismatch() : std::runtime_error("matrix sizes do not match") {}
};
struct FactorizationFailed : std::runtime_error {
    explicit FactorizationFailed(const std::string& what) : std::runtime_error(what) {}
};
struct ProjectorInconsistency : std::runtime_error {
    explicit ProjectorInconsistency(const std::string& what) : std::runtime_error(what) {}
};
struct RankMismatch : std::runtime_error {
    explicit RankMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateResidual : std::runtime_error {
    explicit DegenerateResidual(const std::string& what) : std::runtime_error(what) {}
};
struct AmbientNotIsometric : std::runtime_error {
    AmbientNotIsometric() : std::runtime_error("ambient spaces are not isometric") {}
};

// exact test of iso^T gram iso == gram; throws SizeMismatch on shape errors
bool check_isometry(const QuadSpace& space, const MatQ& iso);

// A quadratic space together with an isometry, both exact over Q. The
// constructor enforces the isometry identity and non-degeneracy.
struct IsometryPair {
    QuadSpace space;
    MatQ iso;
    PadicContext ctx;

    IsometryPair(QuadSpace s, MatQ m);
    int dim() const { return space.dim(); }
};

// Generalized eigencomponent for one factor of the characteristic
// polynomial: an approximate basis (exact rational columns accurate to the
// working precision) of { v : q(iso)^mult v = 0 }.
struct PrimaryComponent {
    int factor_index;
    MatQ basis;
};

std::vector<PrimaryComponent> primary_decomposition(const IsometryPair& pair,
                                                    const PadicFactorization& fac);

// One level of the filtration of a primary component: a free module of rank
// `rank` over k[x]/(q^level). Paired factors are split jointly with their
// star partner; the block then carries both halves and factor_index names
// the earlier factor of the pair. `generators` holds one module generator
// per free summand (for Paired blocks the p-part generators first, then the
// matching p*-part ones).
struct LevelBlock {
    int factor_index = -1;
    int level = 1;
    int rank = 0;
    MatQ basis;
    MatQ generators;
    std::optional<QuadSpace> residual_quad;   // x-1 / x+1 factors at odd level
    std::optional<HermSpace> residual_herm;   // self-reciprocal factors
};

std::vector<LevelBlock> block_splitting(const IsometryPair& pair, const PadicFactorization& fac,
                                        const std::vector<PrimaryComponent>& components,
                                        int factor_index);

// Fill in the residual invariant data of a block (the form b^(l) on
// V^(l)/qV^(l) for +-1 factors at odd level, its hermitian lift for
// self-reciprocal factors, nothing beyond the rank otherwise).
void residual_form(const IsometryPair& pair, const PadicFactorization& fac, LevelBlock& block);

struct LevelRecord {
    int level = 1;
    int rank = 0;
    std::optional<QuadInvariant> quad;
    std::optional<HermInvariant> herm;
};

struct FactorRecord {
    PolyQ factor;  // for Paired records, the lexicographically smaller half
    FactorTag tag = FactorTag::SelfReciprocal;
    int multiplicity = 0;
    std::vector<LevelRecord> levels;  // ascending level, only nonzero ranks
};

struct MilnorInvariant {
    PolyQ char_poly;
    std::vector<FactorRecord> factors;  // canonical order: degree, then coefficients
    int m_plus = 0;   // multiplicity of x+1
    int m_minus = 0;  // multiplicity of x-1
    int m_0 = 0;      // odd levels present across the x+1 and x-1 components
    int m_1 = 0;      // self-reciprocal factors
    int m_2 = 0;      // star pairs
};

struct MilnorAnalysis {
    PadicFactorization fac;  // canonically ordered
    std::vector<PrimaryComponent> components;
    std::vector<LevelBlock> blocks;
    MilnorInvariant invariant;
    int working_precision = 0;
};

// Full decomposition at the pair's precision, escalating (x2, x4, x8) on
// rank or projector inconsistencies. An optional factorization certificate
// is passed through to factor_padic.
MilnorAnalysis analyze(const IsometryPair& pair, const std::vector<PolyQ>* certificate = nullptr);
MilnorInvariant milnor_invariant(const IsometryPair& pair,
                                 const std::vector<PolyQ>* certificate = nullptr);

// Structural comparison of invariants produced at a common working
// precision (factor lifts are then bitwise comparable).
bool same_gl_class(const MilnorInvariant& a, const MilnorInvariant& b);
bool same_o_class(const MilnorInvariant& a, const MilnorInvariant& b);

// Conjugacy in GL(n, Q_p): equal characteristic polynomials and equal level
// ranks for every factor.
bool gl_conjugate(const IsometryPair& a, const IsometryPair& b);

// Conjugacy within the orthogonal group of the common ambient space: the
// full Milnor invariants agree. Throws AmbientNotIsometric when the two
// spaces are not isometric.
bool o_conjugate(const IsometryPair& a, const IsometryPair& b);

}  // namespace qfiso
