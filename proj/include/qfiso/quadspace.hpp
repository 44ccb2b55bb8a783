#pragma once

#include "qfiso/matq.hpp"
#include "qfiso/padic.hpp"

namespace qfiso {

struct DegenerateForm : std::runtime_error {
    DegenerateForm() : std::runtime_error("quadratic form is degenerate") {}
};
struct PrimeMismatch : std::runtime_error {
    PrimeMismatch() : std::runtime_error("spaces live over different primes") {}
};
struct InadmissibleInvariant : std::runtime_error {
    explicit InadmissibleInvariant(const std::string& w) : std::runtime_error(w) {}
};

struct QuadSpace {
    MatQ gram;  // symmetric, nondegenerate
    PadicContext ctx;

    QuadSpace(MatQ g, PadicContext c) : gram(std::move(g)), ctx(c) {
        if (gram.rows() != gram.cols())
            throw std::invalid_argument("gram matrix must be square");
        if (gram != gram.transpose())
            throw std::invalid_argument("gram matrix must be symmetric");
    }
    int dim() const { return gram.rows(); }
};

struct QuadInvariant {
    int dim;
    SquareClass det_class;
    int hasse;  // +1 or -1; fixed as +1 in dimension 1

    bool operator==(const QuadInvariant& o) const {
        return dim == o.dim && det_class == o.det_class && hasse == o.hasse;
    }
    bool operator!=(const QuadInvariant& o) const { return !(*this == o); }
};

// transform^T gram transform = diag(entries)
std::pair<std::vector<Rat>, MatQ> diagonalize(const QuadSpace& v);

QuadInvariant quad_invariant(const QuadSpace& v);

// invariant of the diagonal form <d_1, ..., d_n>
QuadInvariant diag_invariant(const std::vector<Rat>& d, const PadicContext& ctx);

bool is_isometric(const QuadSpace& a, const QuadSpace& b);
bool invariants_isometric(const QuadInvariant& a, const QuadInvariant& b);

// isotropy of the (nondegenerate) class described by inv
bool is_isotropic(const QuadInvariant& inv, const PadicContext& ctx);

int witt_index(const QuadSpace& v);
int witt_index(QuadInvariant inv, const PadicContext& ctx);
bool is_hyperbolic_plane(const QuadSpace& v);

bool represents(const QuadSpace& v, const Rat& a);
bool represents(const QuadInvariant& inv, const Rat& a, const PadicContext& ctx);

// invariant of the orthogonal sum
QuadInvariant orthogonal_sum(const QuadInvariant& a, const QuadInvariant& b,
                             const PadicContext& ctx);

// all square-class representatives for the prime of ctx
std::vector<Rat> square_class_reps(const PadicContext& ctx);

bool invariant_admissible(const QuadInvariant& inv, const PadicContext& ctx);

// a diagonal space realizing inv; throws InadmissibleInvariant
QuadSpace form_from_invariant(const QuadInvariant& inv, const PadicContext& ctx);
std::vector<Rat> diagonal_from_invariant(const QuadInvariant& inv, const PadicContext& ctx);

}  // namespace qfiso
