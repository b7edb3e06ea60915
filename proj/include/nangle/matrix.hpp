#pragma once

// Dense matrices over a finite local ring R with m = (p), m^2 = 0, plus the
// two workhorses everything else is built on:
//
//   * Smith normal form with pivots in {1, p, 0} and invertible U, V such
//     that U*M*V is diagonal (R is a chain ring, so this always exists);
//   * exact solution spaces of linear systems M*x = b, with deterministic
//     complete enumeration.
//
// Matrices over the residue field k = R/(p) get their own small type since
// monodromy and invertibility tests live there.

#include "nangle/ring.hpp"
#include "nangle/util.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace nangle {

class Matrix {
public:
    Matrix(RingSpec spec, int rows, int cols)
        : spec_(spec), rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols, 0)
    {
        if (rows < 0 || cols < 0)
            throw std::invalid_argument("Matrix: negative dimension");
    }

    static Matrix zero(RingSpec spec, int rows, int cols) { return Matrix(spec, rows, cols); }

    static Matrix identity(RingSpec spec, int r)
    {
        Matrix m(spec, r, r);
        for (int i = 0; i < r; ++i)
            m.at(i, i) = 1;
        return m;
    }

    static Matrix scalar(RingSpec spec, int r, int value)
    {
        Matrix m(spec, r, r);
        for (int i = 0; i < r; ++i)
            m.at(i, i) = value % spec.size();
        return m;
    }

    static Matrix from_rows(RingSpec spec, const std::vector<std::vector<int>>& rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const RingSpec& spec() const { return spec_; }

    int& at(int r, int c) { return e_[static_cast<size_t>(r) * cols_ + c]; }
    int at(int r, int c) const { return e_[static_cast<size_t>(r) * cols_ + c]; }
    const std::vector<int>& entries() const { return e_; }

    bool operator==(const Matrix&) const = default;

    bool is_zero() const;
    bool is_identity() const;

    Matrix operator*(const Matrix& rhs) const;
    Matrix operator+(const Matrix& rhs) const;
    Matrix negated() const;
    Matrix scaled(int c) const; // entrywise c * entry

    Matrix transposed() const;
    Matrix submatrix(const std::vector<int>& row_idx, const std::vector<int>& col_idx) const;

    // Lexicographic order on (rows, cols, entries); used for canonical forms
    // and deterministic witness merging.
    static int compare(const Matrix& a, const Matrix& b);

private:
    RingSpec spec_;
    int rows_, cols_;
    std::vector<int> e_;
};

// Assemble a matrix from a rectangular grid of blocks.  Within each grid row
// all blocks must agree on row count; within each grid column on column
// count.  Zero-dimension blocks are legal.
Matrix block(const std::vector<std::vector<Matrix>>& parts);

// ---------------------------------------------------------------------------
// Residue-field matrices (k = F_p)

class ResidueMatrix {
public:
    ResidueMatrix(int p, int rows, int cols)
        : p_(p), rows_(rows), cols_(cols), e_(static_cast<size_t>(rows) * cols, 0)
    {
    }

    static ResidueMatrix identity(int p, int r)
    {
        ResidueMatrix m(p, r, r);
        for (int i = 0; i < r; ++i)
            m.at(i, i) = 1;
        return m;
    }

    int p() const { return p_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    int& at(int r, int c) { return e_[static_cast<size_t>(r) * cols_ + c]; }
    int at(int r, int c) const { return e_[static_cast<size_t>(r) * cols_ + c]; }

    bool operator==(const ResidueMatrix&) const = default;

    ResidueMatrix operator*(const ResidueMatrix& rhs) const;
    bool is_identity() const;
    bool invertible() const; // Gaussian elimination mod p
    ResidueMatrix inverse() const;

    Matrix lift(RingSpec spec) const;

private:
    int p_, rows_, cols_;
    std::vector<int> e_;
};

ResidueMatrix residue_matrix(const Matrix& m);

// ---------------------------------------------------------------------------
// Smith normal form

struct SmithForm {
    Matrix U;              // invertible, rows x rows
    Matrix V;              // invertible, cols x cols
    std::vector<int> diag; // length min(rows, cols), entries in {1, p, 0}, sorted
    int ones = 0;
    int ps = 0;
    int zeros = 0;

    // |im M| and |ker M| as subsets of R^rows / R^cols.
    std::uint64_t image_size(const RingSpec& spec) const;
    std::uint64_t kernel_size(const RingSpec& spec, int cols) const;
};

SmithForm smith_normal_form(const Matrix& m);

bool is_invertible(const Matrix& m);
Matrix inverse(const Matrix& m);

// ---------------------------------------------------------------------------
// Linear systems M*x = b

struct SolutionSpace {
    struct Generator {
        std::vector<int> vec;
        bool residue_coeff; // true: coefficients range over [0, p); false: all of R
    };

    RingSpec spec;
    bool solvable = false;
    std::vector<int> particular;       // empty when !solvable
    std::vector<Generator> generators; // kernel directions with their coefficient ranges

    std::uint64_t count() const; // number of distinct solutions (saturating)
};

SolutionSpace solve(const Matrix& m, const std::vector<int>& b);

// Deterministic lazy enumeration of a solution space in coefficient-
// lexicographic order (first generator most significant).  next() returns
// nullopt once exhausted.  Owns its copy of the space, so enumerating a
// temporary is fine.
class SolutionEnumerator {
public:
    explicit SolutionEnumerator(SolutionSpace s);

    std::optional<std::vector<int>> next();
    void reset();

private:
    SolutionSpace s_;
    std::vector<int> coeffs_;
    bool done_;
    bool first_;
};

// Runs fn on every solution; returns false if the enumeration would exceed
// `budget` solutions (after yielding the first `budget` of them).  fn may
// return false to stop early (the return value is then true).
bool for_each_solution(const SolutionSpace& s, std::uint64_t budget,
                       const std::function<bool(const std::vector<int>&)>& fn);

// ---------------------------------------------------------------------------
// Multi-matrix linear systems
//
// Builds one big system over R from equations of the form
//     sum_k  L_k * X_{u_k} * R_k  =  C
// in several unknown matrices X_u.  Used for contracting homotopies,
// fill-ins, octahedra and grid completions.

class MatrixSystem {
public:
    explicit MatrixSystem(RingSpec spec) : spec_(spec) {}

    int add_unknown(int rows, int cols);
    int add_equation(int rows, int cols); // rhs defaults to zero
    void set_rhs(int eq, const Matrix& c);

    // Adds sign * L * X_u * R to equation eq.
    void add_term(int eq, int unknown, const Matrix& left, const Matrix& right, int sign = 1);
    // Convenience: sign * L * X_u (right identity) and sign * X_u * R.
    void add_left_term(int eq, int unknown, const Matrix& left, int sign = 1);
    void add_right_term(int eq, int unknown, const Matrix& right, int sign = 1);

    SolutionSpace solve() const;
    Matrix extract(const std::vector<int>& solution, int unknown) const;

private:
    struct Unknown {
        int rows, cols, offset;
    };
    struct Term {
        int eq, unknown;
        Matrix left, right;
        int sign;
    };
    struct Equation {
        int rows, cols, offset;
        std::vector<int> rhs;
    };

    RingSpec spec_;
    std::vector<Unknown> unknowns_;
    std::vector<Term> terms_;
    std::vector<Equation> eqs_;
    int var_count_ = 0;
    int eq_count_ = 0;
};

} // namespace nangle
