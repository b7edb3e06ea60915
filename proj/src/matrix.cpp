#include "nangle/matrix.hpp"

#include <algorithm>

namespace nangle {

namespace {

void check_same_spec(const Matrix& a, const Matrix& b, const char* op)
{
    if (!(a.spec() == b.spec()))
        throw std::invalid_argument(std::string(op) + ": mismatched ring specs");
}

} // namespace

Matrix Matrix::from_rows(RingSpec spec, const std::vector<std::vector<int>>& rows)
{
    const int r = static_cast<int>(rows.size());
    const int c = r == 0 ? 0 : static_cast<int>(rows[0].size());
    Matrix m(spec, r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[i].size()) != c)
            throw std::invalid_argument("Matrix::from_rows: ragged rows");
        for (int j = 0; j < c; ++j) {
            int v = rows[i][j] % spec.size();
            if (v < 0)
                v += spec.size();
            m.at(i, j) = v;
        }
    }
    return m;
}

bool Matrix::is_zero() const
{
    return std::all_of(e_.begin(), e_.end(), [](int v) { return v == 0; });
}

bool Matrix::is_identity() const
{
    if (rows_ != cols_)
        return false;
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            if (at(i, j) != (i == j ? 1 : 0))
                return false;
    return true;
}

Matrix Matrix::operator*(const Matrix& rhs) const
{
    check_same_spec(*this, rhs, "Matrix::operator*");
    if (cols_ != rhs.rows_)
        throw std::invalid_argument("Matrix::operator*: shape mismatch");
    Matrix out(spec_, rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const int a = at(i, k);
            if (a == 0)
                continue;
            for (int j = 0; j < rhs.cols_; ++j) {
                const int b = rhs.at(k, j);
                if (b == 0)
                    continue;
                out.at(i, j) = spec_.add(out.at(i, j), spec_.mul(a, b));
            }
        }
    return out;
}

Matrix Matrix::operator+(const Matrix& rhs) const
{
    check_same_spec(*this, rhs, "Matrix::operator+");
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("Matrix::operator+: shape mismatch");
    Matrix out(spec_, rows_, cols_);
    for (size_t i = 0; i < e_.size(); ++i)
        out.e_[i] = spec_.add(e_[i], rhs.e_[i]);
    return out;
}

Matrix Matrix::negated() const
{
    Matrix out(spec_, rows_, cols_);
    for (size_t i = 0; i < e_.size(); ++i)
        out.e_[i] = spec_.neg(e_[i]);
    return out;
}

Matrix Matrix::scaled(int c) const
{
    Matrix out(spec_, rows_, cols_);
    for (size_t i = 0; i < e_.size(); ++i)
        out.e_[i] = spec_.mul(c, e_[i]);
    return out;
}

Matrix Matrix::transposed() const
{
    Matrix out(spec_, cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            out.at(j, i) = at(i, j);
    return out;
}

Matrix Matrix::submatrix(const std::vector<int>& row_idx, const std::vector<int>& col_idx) const
{
    Matrix out(spec_, static_cast<int>(row_idx.size()), static_cast<int>(col_idx.size()));
    for (size_t i = 0; i < row_idx.size(); ++i)
        for (size_t j = 0; j < col_idx.size(); ++j)
            out.at(static_cast<int>(i), static_cast<int>(j)) = at(row_idx[i], col_idx[j]);
    return out;
}

int Matrix::compare(const Matrix& a, const Matrix& b)
{
    if (a.rows_ != b.rows_)
        return a.rows_ < b.rows_ ? -1 : 1;
    if (a.cols_ != b.cols_)
        return a.cols_ < b.cols_ ? -1 : 1;
    if (a.e_ != b.e_)
        return a.e_ < b.e_ ? -1 : 1;
    return 0;
}

Matrix block(const std::vector<std::vector<Matrix>>& parts)
{
    if (parts.empty() || parts[0].empty())
        throw std::invalid_argument("block: empty grid");
    const RingSpec spec = parts[0][0].spec();
    const size_t grid_cols = parts[0].size();

    std::vector<int> row_heights(parts.size());
    std::vector<int> col_widths(grid_cols, -1);
    for (size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].size() != grid_cols)
            throw std::invalid_argument("block: ragged grid");
        row_heights[i] = parts[i][0].rows();
        for (size_t j = 0; j < grid_cols; ++j) {
            const Matrix& b = parts[i][j];
            if (!(b.spec() == spec))
                throw std::invalid_argument("block: mismatched ring specs");
            if (b.rows() != row_heights[i])
                throw std::invalid_argument("block: inconsistent row heights");
            if (col_widths[j] == -1)
                col_widths[j] = b.cols();
            else if (b.cols() != col_widths[j])
                throw std::invalid_argument("block: inconsistent column widths");
        }
    }

    int total_rows = 0, total_cols = 0;
    for (int h : row_heights)
        total_rows += h;
    for (int w : col_widths)
        total_cols += w;

    Matrix out(spec, total_rows, total_cols);
    int roff = 0;
    for (size_t i = 0; i < parts.size(); ++i) {
        int coff = 0;
        for (size_t j = 0; j < grid_cols; ++j) {
            const Matrix& b = parts[i][j];
            for (int r = 0; r < b.rows(); ++r)
                for (int c = 0; c < b.cols(); ++c)
                    out.at(roff + r, coff + c) = b.at(r, c);
            coff += col_widths[j];
        }
        roff += row_heights[i];
    }
    return out;
}

// ---------------------------------------------------------------------------
// ResidueMatrix

ResidueMatrix ResidueMatrix::operator*(const ResidueMatrix& rhs) const
{
    if (p_ != rhs.p_ || cols_ != rhs.rows_)
        throw std::invalid_argument("ResidueMatrix::operator*: shape/field mismatch");
    ResidueMatrix out(p_, rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            const int a = at(i, k);
            if (a == 0)
                continue;
            for (int j = 0; j < rhs.cols_; ++j)
                out.at(i, j) = (out.at(i, j) + a * rhs.at(k, j)) % p_;
        }
    return out;
}

bool ResidueMatrix::is_identity() const
{
    if (rows_ != cols_)
        return false;
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            if (at(i, j) != (i == j ? 1 : 0))
                return false;
    return true;
}

namespace {

// Gauss-Jordan mod p; returns the inverse if it exists.
std::optional<ResidueMatrix> try_invert_mod_p(const ResidueMatrix& m)
{
    if (m.rows() != m.cols())
        return std::nullopt;
    const int n = m.rows();
    const int p = m.p();
    ResidueMatrix a = m;
    ResidueMatrix inv = ResidueMatrix::identity(p, n);

    auto inv_mod_p = [p](int x) {
        for (int y = 1; y < p; ++y)
            if ((x * y) % p == 1)
                return y;
        return 0;
    };

    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (a.at(r, col) != 0) {
                pivot = r;
                break;
            }
        if (pivot == -1)
            return std::nullopt;
        if (pivot != col)
            for (int c = 0; c < n; ++c) {
                std::swap(a.at(pivot, c), a.at(col, c));
                std::swap(inv.at(pivot, c), inv.at(col, c));
            }
        const int scale = inv_mod_p(a.at(col, col));
        for (int c = 0; c < n; ++c) {
            a.at(col, c) = (a.at(col, c) * scale) % p;
            inv.at(col, c) = (inv.at(col, c) * scale) % p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || a.at(r, col) == 0)
                continue;
            const int f = a.at(r, col);
            for (int c = 0; c < n; ++c) {
                a.at(r, c) = ((a.at(r, c) - f * a.at(col, c)) % p + p * p) % p;
                inv.at(r, c) = ((inv.at(r, c) - f * inv.at(col, c)) % p + p * p) % p;
            }
        }
    }
    return inv;
}

} // namespace

bool ResidueMatrix::invertible() const { return try_invert_mod_p(*this).has_value(); }

ResidueMatrix ResidueMatrix::inverse() const
{
    auto inv = try_invert_mod_p(*this);
    if (!inv)
        throw std::invalid_argument("ResidueMatrix::inverse: singular matrix");
    return *inv;
}

Matrix ResidueMatrix::lift(RingSpec spec) const
{
    if (spec.p != p_)
        throw std::invalid_argument("ResidueMatrix::lift: residue characteristic mismatch");
    Matrix out(spec, rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            out.at(i, j) = spec.lift(at(i, j));
    return out;
}

ResidueMatrix residue_matrix(const Matrix& m)
{
    ResidueMatrix out(m.spec().p, m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            out.at(i, j) = m.spec().residue(m.at(i, j));
    return out;
}

// ---------------------------------------------------------------------------
// Smith normal form
//
// Phase 1 pivots on unit entries (scan row-major over the remaining
// submatrix).  Once no unit remains every entry lies in (p); phase 2 pivots
// on nonzero entries p*w, normalizing to p.  Because m^2 = 0, clearing a
// column after a p-pivot annihilates exactly, so the result is diagonal with
// entries 1, then p, then 0.

namespace {

struct SnfWork {
    Matrix d, u, v;
    RingSpec spec;

    SnfWork(const Matrix& m)
        : d(m), u(Matrix::identity(m.spec(), m.rows())), v(Matrix::identity(m.spec(), m.cols())),
          spec(m.spec())
    {
    }

    void swap_rows(int a, int b)
    {
        if (a == b)
            return;
        for (int c = 0; c < d.cols(); ++c)
            std::swap(d.at(a, c), d.at(b, c));
        for (int c = 0; c < u.cols(); ++c)
            std::swap(u.at(a, c), u.at(b, c));
    }

    void swap_cols(int a, int b)
    {
        if (a == b)
            return;
        for (int r = 0; r < d.rows(); ++r)
            std::swap(d.at(r, a), d.at(r, b));
        for (int r = 0; r < v.rows(); ++r)
            std::swap(v.at(r, a), v.at(r, b));
    }

    void scale_row(int r, int c)
    {
        for (int j = 0; j < d.cols(); ++j)
            d.at(r, j) = spec.mul(c, d.at(r, j));
        for (int j = 0; j < u.cols(); ++j)
            u.at(r, j) = spec.mul(c, u.at(r, j));
    }

    // row[dst] += f * row[src]
    void add_row(int dst, int src, int f)
    {
        for (int j = 0; j < d.cols(); ++j)
            d.at(dst, j) = spec.add(d.at(dst, j), spec.mul(f, d.at(src, j)));
        for (int j = 0; j < u.cols(); ++j)
            u.at(dst, j) = spec.add(u.at(dst, j), spec.mul(f, u.at(src, j)));
    }

    // col[dst] += f * col[src]
    void add_col(int dst, int src, int f)
    {
        for (int r = 0; r < d.rows(); ++r)
            d.at(r, dst) = spec.add(d.at(r, dst), spec.mul(f, d.at(r, src)));
        for (int r = 0; r < v.rows(); ++r)
            v.at(r, dst) = spec.add(v.at(r, dst), spec.mul(f, v.at(r, src)));
    }
};

} // namespace

SmithForm smith_normal_form(const Matrix& m)
{
    SnfWork w(m);
    const RingSpec spec = m.spec();
    const int nmin = std::min(m.rows(), m.cols());
    int k = 0;

    // Phase 1: unit pivots.
    while (k < nmin) {
        int pr = -1, pc = -1;
        for (int r = k; r < m.rows() && pr == -1; ++r)
            for (int c = k; c < m.cols(); ++c)
                if (spec.is_unit(w.d.at(r, c))) {
                    pr = r;
                    pc = c;
                    break;
                }
        if (pr == -1)
            break;
        w.swap_rows(k, pr);
        w.swap_cols(k, pc);
        w.scale_row(k, spec.invert(w.d.at(k, k)));
        for (int r = k + 1; r < m.rows(); ++r)
            if (w.d.at(r, k) != 0)
                w.add_row(r, k, spec.neg(w.d.at(r, k)));
        for (int c = k + 1; c < m.cols(); ++c)
            if (w.d.at(k, c) != 0)
                w.add_col(c, k, spec.neg(w.d.at(k, c)));
        ++k;
    }
    const int ones = k;

    // Phase 2: all remaining entries lie in (p).
    while (k < nmin) {
        int pr = -1, pc = -1;
        for (int r = k; r < m.rows() && pr == -1; ++r)
            for (int c = k; c < m.cols(); ++c)
                if (w.d.at(r, c) != 0) {
                    pr = r;
                    pc = c;
                    break;
                }
        if (pr == -1)
            break;
        w.swap_rows(k, pr);
        w.swap_cols(k, pc);
        // entry is p*t with t a unit mod p; scale row by lift(t)^{-1}
        const int t = spec.divide_by_p(w.d.at(k, k));
        w.scale_row(k, spec.invert(spec.lift(t)));
        for (int r = k + 1; r < m.rows(); ++r)
            if (w.d.at(r, k) != 0)
                w.add_row(r, k, spec.neg(spec.lift(spec.divide_by_p(w.d.at(r, k)))));
        for (int c = k + 1; c < m.cols(); ++c)
            if (w.d.at(k, c) != 0)
                w.add_col(c, k, spec.neg(spec.lift(spec.divide_by_p(w.d.at(k, c)))));
        ++k;
    }

    SmithForm out{w.u, w.v, {}, ones, k - ones, nmin - k};
    out.diag.resize(nmin, 0);
    for (int i = 0; i < ones; ++i)
        out.diag[i] = 1;
    for (int i = ones; i < k; ++i)
        out.diag[i] = spec.uniformizer();
    return out;
}

std::uint64_t SmithForm::image_size(const RingSpec& spec) const
{
    std::uint64_t n = 1;
    for (int i = 0; i < ones; ++i)
        n = sat_mul(n, static_cast<std::uint64_t>(spec.size()));
    for (int i = 0; i < ps; ++i)
        n = sat_mul(n, static_cast<std::uint64_t>(spec.p));
    return n;
}

std::uint64_t SmithForm::kernel_size(const RingSpec& spec, int cols) const
{
    std::uint64_t n = 1;
    for (int i = 0; i < ps; ++i)
        n = sat_mul(n, static_cast<std::uint64_t>(spec.p));
    const int free_full = cols - ones - ps;
    for (int i = 0; i < free_full; ++i)
        n = sat_mul(n, static_cast<std::uint64_t>(spec.size()));
    return n;
}

bool is_invertible(const Matrix& m)
{
    if (m.rows() != m.cols())
        return false;
    const SmithForm s = smith_normal_form(m);
    return s.ones == m.rows();
}

Matrix inverse(const Matrix& m)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument("inverse: matrix not square");
    const SmithForm s = smith_normal_form(m);
    if (s.ones != m.rows())
        throw std::invalid_argument("inverse: matrix not invertible");
    return s.V * s.U; // U*M*V = I  =>  M^{-1} = V*U
}

// ---------------------------------------------------------------------------
// solve / enumeration

SolutionSpace solve(const Matrix& m, const std::vector<int>& b)
{
    const RingSpec spec = m.spec();
    if (static_cast<int>(b.size()) != m.rows())
        throw std::invalid_argument("solve: rhs length mismatch");

    const SmithForm s = smith_normal_form(m);
    const int nmin = static_cast<int>(s.diag.size());

    // c = U * b
    std::vector<int> c(m.rows(), 0);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.rows(); ++j)
            c[i] = spec.add(c[i], spec.mul(s.U.at(i, j), b[j]));

    SolutionSpace out{spec, true, {}, {}};

    std::vector<int> y0(m.cols(), 0);
    std::vector<std::pair<int, bool>> free_coords; // (y index, residue_coeff)

    for (int i = 0; i < nmin; ++i) {
        const int d = s.diag[i];
        if (d == 1) {
            y0[i] = c[i];
        } else if (d == 0) {
            if (c[i] != 0)
                return {spec, false, {}, {}};
            free_coords.emplace_back(i, false);
        } else { // d == p
            if (!spec.in_max_ideal(c[i]))
                return {spec, false, {}, {}};
            y0[i] = spec.lift(spec.divide_by_p(c[i]));
            free_coords.emplace_back(i, true);
        }
    }
    for (int i = nmin; i < m.rows(); ++i)
        if (c[i] != 0)
            return {spec, false, {}, {}};
    for (int j = nmin; j < m.cols(); ++j)
        free_coords.emplace_back(j, false);

    // x = V * y
    auto v_times = [&](const std::vector<int>& y) {
        std::vector<int> x(m.cols(), 0);
        for (int i = 0; i < m.cols(); ++i)
            for (int j = 0; j < m.cols(); ++j)
                x[i] = spec.add(x[i], spec.mul(s.V.at(i, j), y[j]));
        return x;
    };

    out.particular = v_times(y0);
    for (auto [idx, residue_only] : free_coords) {
        std::vector<int> e(m.cols(), 0);
        e[idx] = residue_only ? spec.uniformizer() : 1;
        out.generators.push_back({v_times(e), residue_only});
    }
    return out;
}

std::uint64_t SolutionSpace::count() const
{
    if (!solvable)
        return 0;
    std::uint64_t n = 1;
    for (const auto& g : generators)
        n = sat_mul(n, static_cast<std::uint64_t>(g.residue_coeff ? spec.p : spec.size()));
    return n;
}

SolutionEnumerator::SolutionEnumerator(SolutionSpace s) : s_(std::move(s))
{
    reset();
}

void SolutionEnumerator::reset()
{
    coeffs_.assign(s_.generators.size(), 0);
    done_ = !s_.solvable;
    first_ = true;
}

std::optional<std::vector<int>> SolutionEnumerator::next()
{
    if (done_)
        return std::nullopt;
    if (!first_) {
        // odometer increment, last generator fastest
        int i = static_cast<int>(coeffs_.size()) - 1;
        for (; i >= 0; --i) {
            const int limit = s_.generators[i].residue_coeff ? s_.spec.p : s_.spec.size();
            if (++coeffs_[i] < limit)
                break;
            coeffs_[i] = 0;
        }
        if (i < 0) {
            done_ = true;
            return std::nullopt;
        }
    }
    first_ = false;

    std::vector<int> x = s_.particular;
    for (size_t g = 0; g < coeffs_.size(); ++g) {
        if (coeffs_[g] == 0)
            continue;
        const auto& gen = s_.generators[g];
        for (size_t i = 0; i < x.size(); ++i)
            x[i] = s_.spec.add(x[i], s_.spec.mul(coeffs_[g], gen.vec[i]));
    }
    return x;
}

bool for_each_solution(const SolutionSpace& s, std::uint64_t budget,
                       const std::function<bool(const std::vector<int>&)>& fn)
{
    SolutionEnumerator it(s);
    std::uint64_t seen = 0;
    while (auto x = it.next()) {
        if (seen++ == budget)
            return false;
        if (!fn(*x))
            return true;
    }
    return true;
}

// ---------------------------------------------------------------------------
// MatrixSystem

int MatrixSystem::add_unknown(int rows, int cols)
{
    unknowns_.push_back({rows, cols, var_count_});
    var_count_ += rows * cols;
    return static_cast<int>(unknowns_.size()) - 1;
}

int MatrixSystem::add_equation(int rows, int cols)
{
    eqs_.push_back({rows, cols, eq_count_, std::vector<int>(static_cast<size_t>(rows) * cols, 0)});
    eq_count_ += rows * cols;
    return static_cast<int>(eqs_.size()) - 1;
}

void MatrixSystem::set_rhs(int eq, const Matrix& c)
{
    auto& e = eqs_[eq];
    if (c.rows() != e.rows || c.cols() != e.cols)
        throw std::invalid_argument("MatrixSystem::set_rhs: shape mismatch");
    for (int i = 0; i < e.rows; ++i)
        for (int j = 0; j < e.cols; ++j)
            e.rhs[static_cast<size_t>(i) * e.cols + j] = c.at(i, j);
}

void MatrixSystem::add_term(int eq, int unknown, const Matrix& left, const Matrix& right, int sign)
{
    const auto& u = unknowns_[unknown];
    const auto& e = eqs_[eq];
    if (left.cols() != u.rows || right.rows() != u.cols)
        throw std::invalid_argument("MatrixSystem::add_term: inner shape mismatch");
    if (left.rows() != e.rows || right.cols() != e.cols)
        throw std::invalid_argument("MatrixSystem::add_term: outer shape mismatch");
    terms_.push_back({eq, unknown, left, right, sign});
}

void MatrixSystem::add_left_term(int eq, int unknown, const Matrix& left, int sign)
{
    add_term(eq, unknown, left, Matrix::identity(spec_, unknowns_[unknown].cols), sign);
}

void MatrixSystem::add_right_term(int eq, int unknown, const Matrix& right, int sign)
{
    add_term(eq, unknown, Matrix::identity(spec_, unknowns_[unknown].rows), right, sign);
}

SolutionSpace MatrixSystem::solve() const
{
    Matrix big(spec_, eq_count_, var_count_);
    std::vector<int> rhs(eq_count_, 0);
    for (const auto& e : eqs_)
        for (size_t i = 0; i < e.rhs.size(); ++i)
            rhs[e.offset + i] = e.rhs[i];

    // coefficient of X[u][v] in (L*X*R)[i][j] is L[i][u]*R[v][j]
    for (const auto& t : terms_) {
        const auto& u = unknowns_[t.unknown];
        const auto& e = eqs_[t.eq];
        for (int i = 0; i < e.rows; ++i)
            for (int j = 0; j < e.cols; ++j) {
                const int row = e.offset + i * e.cols + j;
                for (int a = 0; a < u.rows; ++a) {
                    const int l = t.left.at(i, a);
                    if (l == 0)
                        continue;
                    for (int b = 0; b < u.cols; ++b) {
                        const int r = t.right.at(b, j);
                        if (r == 0)
                            continue;
                        int coeff = spec_.mul(l, r);
                        if (t.sign < 0)
                            coeff = spec_.neg(coeff);
                        const int col = u.offset + a * u.cols + b;
                        big.at(row, col) = spec_.add(big.at(row, col), coeff);
                    }
                }
            }
    }
    return nangle::solve(big, rhs);
}

Matrix MatrixSystem::extract(const std::vector<int>& solution, int unknown) const
{
    const auto& u = unknowns_[unknown];
    Matrix out(spec_, u.rows, u.cols);
    for (int i = 0; i < u.rows; ++i)
        for (int j = 0; j < u.cols; ++j)
            out.at(i, j) = solution[u.offset + i * u.cols + j];
    return out;
}

} // namespace nangle
