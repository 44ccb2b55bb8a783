#pragma once

#include <optional>
#include <vector>

#include "qfiso/polyq.hpp"
#include "qfiso/rat.hpp"

namespace qfiso {

// Dense matrix over Q, row-major.
class MatQ {
public:
    MatQ() : rows_(0), cols_(0) {}
    MatQ(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, Rat(0)) {}
    MatQ(int rows, int cols, std::vector<Rat> data) : rows_(rows), cols_(cols), a_(std::move(data)) {
        if (a_.size() != static_cast<size_t>(rows) * cols)
            throw std::invalid_argument("MatQ: data size mismatch");
    }

    static MatQ identity(int n) {
        MatQ m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Rat& at(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const Rat& at(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const std::vector<Rat>& data() const { return a_; }

    bool operator==(const MatQ& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }
    bool operator!=(const MatQ& o) const { return !(*this == o); }

    MatQ transpose() const {
        MatQ r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
        return r;
    }

    friend MatQ operator*(const MatQ& x, const MatQ& y) {
        if (x.cols_ != y.rows_) throw std::invalid_argument("MatQ: shape mismatch");
        MatQ r(x.rows_, y.cols_);
        for (int i = 0; i < x.rows_; ++i)
            for (int k = 0; k < x.cols_; ++k) {
                const Rat& v = x.at(i, k);
                if (v == 0) continue;
                for (int j = 0; j < y.cols_; ++j) r.at(i, j) += v * y.at(k, j);
            }
        return r;
    }
    friend MatQ operator+(const MatQ& x, const MatQ& y) {
        if (x.rows_ != y.rows_ || x.cols_ != y.cols_)
            throw std::invalid_argument("MatQ: shape mismatch");
        MatQ r = x;
        for (size_t i = 0; i < r.a_.size(); ++i) r.a_[i] += y.a_[i];
        return r;
    }
    friend MatQ operator-(const MatQ& x, const MatQ& y) {
        if (x.rows_ != y.rows_ || x.cols_ != y.cols_)
            throw std::invalid_argument("MatQ: shape mismatch");
        MatQ r = x;
        for (size_t i = 0; i < r.a_.size(); ++i) r.a_[i] -= y.a_[i];
        return r;
    }
    friend MatQ operator*(const Rat& s, const MatQ& x) {
        MatQ r = x;
        for (auto& v : r.a_) v *= s;
        return r;
    }

    std::vector<Rat> apply(const std::vector<Rat>& v) const {
        if (static_cast<int>(v.size()) != cols_) throw std::invalid_argument("MatQ: shape mismatch");
        std::vector<Rat> r(rows_, Rat(0));
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r[i] += at(i, j) * v[j];
        return r;
    }

    bool is_zero() const {
        for (const auto& v : a_)
            if (v != 0) return false;
        return true;
    }

private:
    int rows_, cols_;
    std::vector<Rat> a_;
};

Rat det(MatQ m);
int rank(MatQ m);
std::optional<MatQ> inverse(const MatQ& m);

// Solve A x = b; nullopt if inconsistent. For underdetermined systems one
// particular solution is returned.
std::optional<std::vector<Rat>> solve(const MatQ& a, const std::vector<Rat>& b);

// Basis of the right null space { v : A v = 0 }.
std::vector<std::vector<Rat>> kernel(const MatQ& a);

// det(x I - A), monic of degree n, by evaluation at n+1 points.
PolyQ char_poly(const MatQ& a);

// f(A)
MatQ eval_poly(const PolyQ& f, const MatQ& a);

Rat trace(const MatQ& a);

}  // namespace qfiso
