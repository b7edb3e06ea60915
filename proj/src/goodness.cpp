#include "nangle/goodness.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <mutex>
#include <thread>

namespace nangle {

bool is_good(const SequenceMorphism& phi)
{
    if (!is_morphism(phi))
        throw std::invalid_argument("is_good: input is not a morphism");
    if (!is_n_angle(phi.source) || !is_n_angle(phi.target))
        throw std::invalid_argument("is_good: source and target must be n-angles");
    return is_n_angle(mapping_cone(phi));
}

// ---------------------------------------------------------------------------
// Fill-ins

namespace {

struct FillInSystem {
    MatrixSystem sys;
    std::vector<int> unknown; // unknown[i] for components 2..n-1
    SolutionSpace space;
    int n;

    FillInSystem(const NSigmaSequence& a, const NSigmaSequence& b, const Matrix& phi1,
                 const Matrix& phi2)
        : sys(a.spec), n(a.n), a_(a), b_(b), phi1_(phi1), phi2_(phi2)
    {
        if (phi1.rows() != b.ranks[0] || phi1.cols() != a.ranks[0] || phi2.rows() != b.ranks[1] ||
            phi2.cols() != a.ranks[1])
            throw std::invalid_argument("fill-in: given component shapes do not match the rows");
        if (!(phi2 * a.maps[0] == b.maps[0] * phi1))
            throw std::invalid_argument("fill-in: the given square does not commute");

        unknown.assign(n, -1);
        for (int i = 2; i < n; ++i)
            unknown[i] = sys.add_unknown(b.ranks[i], a.ranks[i]);

        for (int i = 1; i < n; ++i) {
            const int eq = sys.add_equation(b.rank_at(i + 1), a.ranks[i]);
            // comp[i+1] * alpha_i = beta_i * comp[i]
            if (i + 1 <= n - 1)
                sys.add_right_term(eq, unknown[i + 1], a.maps[i]);
            if (i >= 2)
                sys.add_left_term(eq, unknown[i], b.maps[i], -1);
            // moving the known terms right: comp_{n+1} is identified with phi_1
            Matrix rhs = Matrix::zero(a.spec, b.rank_at(i + 1), a.ranks[i]);
            if (i == 1)
                rhs = rhs + b.maps[1] * phi2;
            if (i == n - 1)
                rhs = rhs + (phi1 * a.maps[n - 1]).negated();
            sys.set_rhs(eq, rhs);
        }
        space = sys.solve();
    }

    SequenceMorphism morphism_from(const std::vector<int>& solution) const
    {
        std::vector<Matrix> comp;
        comp.push_back(phi1_);
        comp.push_back(phi2_);
        for (int i = 2; i < n; ++i)
            comp.push_back(sys.extract(solution, unknown[i]));
        SequenceMorphism out(a_, b_, std::move(comp));
        if (!is_morphism(out))
            throw std::logic_error("fill-in: solver produced a non-morphism");
        return out;
    }

private:
    NSigmaSequence a_, b_;
    Matrix phi1_, phi2_;
};

void check_fill_in_preconditions(const NSigmaSequence& a, const NSigmaSequence& b)
{
    if (a.n != b.n || !(a.spec == b.spec))
        throw std::invalid_argument("fill-in: incompatible sequences");
    if (!is_n_angle(a) || !is_n_angle(b))
        throw std::invalid_argument("fill-in: both rows must be n-angles");
}

} // namespace

std::vector<SequenceMorphism> enumerate_fill_ins(const NSigmaSequence& a, const NSigmaSequence& b,
                                                 const Matrix& phi1, const Matrix& phi2,
                                                 std::uint64_t budget)
{
    check_fill_in_preconditions(a, b);
    FillInSystem fs(a, b, phi1, phi2);
    if (fs.space.count() > budget)
        throw BudgetExceeded("enumerate_fill_ins: " + std::to_string(fs.space.count()) +
                             " completions exceed budget");
    std::vector<SequenceMorphism> out;
    SolutionEnumerator it(fs.space);
    while (auto x = it.next())
        out.push_back(fs.morphism_from(*x));
    return out;
}

std::optional<SequenceMorphism> find_good_fill_in(const NSigmaSequence& a, const NSigmaSequence& b,
                                                  const Matrix& phi1, const Matrix& phi2,
                                                  std::uint64_t budget)
{
    check_fill_in_preconditions(a, b);
    FillInSystem fs(a, b, phi1, phi2);
    SolutionEnumerator it(fs.space);
    std::uint64_t used = 0;
    while (auto x = it.next()) {
        if (used++ == budget)
            return std::nullopt;
        SequenceMorphism m = fs.morphism_from(*x);
        if (is_n_angle(mapping_cone(m)))
            return m;
    }
    if (!fs.space.solvable)
        return std::nullopt; // cannot happen between n-angles; kept for safety
    throw std::logic_error("find_good_fill_in: exhausted all completions without a good one");
}

// ---------------------------------------------------------------------------
// Octahedra

namespace {

// lambda_j : A_j -> C_{j-1} for 4 <= j <= n; zero matrices off that range.
Matrix lambda_at(const OctahedronWitness& w, int j)
{
    if (j >= 4 && j <= w.a.n)
        return w.lambda[j - 4];
    const int a_pos = (j - 1) % w.a.n;        // 0-based position of A_j
    const int c_pos = (j - 2 + w.a.n) % w.a.n; // 0-based position of C_{j-1}
    return Matrix::zero(w.a.spec, w.c.ranks[c_pos], w.a.ranks[a_pos]);
}

} // namespace

OctahedronWitness::OctahedronWitness(NSigmaSequence a_, NSigmaSequence b_, NSigmaSequence c_,
                                     std::vector<Matrix> phi_, std::vector<Matrix> psi_,
                                     std::vector<Matrix> lambda_)
    : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), phi(std::move(phi_)),
      psi(std::move(psi_)), lambda(std::move(lambda_))
{
    const int n = a.n;
    if (n < 4)
        throw std::invalid_argument("OctahedronWitness: needs n >= 4");
    if (b.n != n || c.n != n || !(b.spec == a.spec) || !(c.spec == a.spec))
        throw std::invalid_argument("OctahedronWitness: incompatible rows");
    if (b.ranks[0] != a.ranks[0] || c.ranks[0] != a.ranks[1] || c.ranks[1] != b.ranks[1])
        throw std::invalid_argument("OctahedronWitness: corner objects do not glue");
    if (!(b.maps[0] == c.maps[0] * a.maps[0]))
        throw std::invalid_argument("OctahedronWitness: middle base is not the composite");
    if (static_cast<int>(phi.size()) != n || static_cast<int>(psi.size()) != n ||
        static_cast<int>(lambda.size()) != n - 3)
        throw std::invalid_argument("OctahedronWitness: wrong family sizes");
    if (!(phi[0] == Matrix::identity(a.spec, a.ranks[0])) || !(phi[1] == c.maps[0]))
        throw std::invalid_argument("OctahedronWitness: phi must start with (id, g)");
    if (!(psi[0] == a.maps[0]) || !(psi[1] == Matrix::identity(a.spec, b.ranks[1])))
        throw std::invalid_argument("OctahedronWitness: psi must start with (f, id)");
    for (int i = 0; i < n; ++i) {
        if (phi[i].rows() != b.ranks[i] || phi[i].cols() != a.ranks[i])
            throw std::invalid_argument("OctahedronWitness: phi component shape mismatch");
        if (psi[i].rows() != c.ranks[i] || psi[i].cols() != b.ranks[i])
            throw std::invalid_argument("OctahedronWitness: psi component shape mismatch");
    }
    for (int j = 4; j <= n; ++j)
        if (lambda[j - 4].rows() != c.ranks[j - 2] || lambda[j - 4].cols() != a.ranks[j - 1])
            throw std::invalid_argument("OctahedronWitness: lambda shape mismatch");
}

bool octahedron_relations_hold(const OctahedronWitness& w)
{
    const int n = w.a.n;
    if (!is_morphism(SequenceMorphism(w.a, w.b, w.phi)))
        return false;
    if (!is_morphism(SequenceMorphism(w.b, w.c, w.psi)))
        return false;
    // lambda_{i+3} * alpha_{i+2} = (-1)^i psi_{i+2} * phi_{i+2} + gamma_{i+1} * lambda_{i+2}
    for (int i = 1; i <= n - 2; ++i) {
        const Matrix lhs = lambda_at(w, i + 3) * w.a.maps[i + 1];
        Matrix cross = w.psi[i + 1] * w.phi[i + 1];
        if (i % 2 != 0)
            cross = cross.negated();
        const Matrix rhs = cross + w.c.maps[i] * lambda_at(w, i + 2);
        if (!(lhs == rhs))
            return false;
    }
    return true;
}

NSigmaSequence associated_n_angle(const OctahedronWitness& w)
{
    if (!octahedron_relations_hold(w))
        throw std::invalid_argument("associated_n_angle: witness relations fail");
    const int n = w.a.n;
    const RingSpec spec = w.a.spec;

    // position i (1-based) carries A_{i+2} (i <= n-2), B_{i+1} (2 <= i <= n-1), C_i (i >= 3)
    auto has_a = [n](int i) { return i >= 1 && i <= n - 2; };
    auto has_b = [n](int i) { return i >= 2 && i <= n - 1; };
    auto has_c = [n](int i) { return i >= 3 && i <= n; };
    auto rank_a = [&](int i) { return w.a.ranks[i + 1]; };  // A_{i+2}, 0-based i+1
    auto rank_b = [&](int i) { return w.b.ranks[i]; };      // B_{i+1}
    auto rank_c = [&](int i) { return w.c.ranks[i - 1]; };  // C_i

    std::vector<int> ranks(n, 0);
    for (int i = 1; i <= n; ++i)
        ranks[i - 1] = (has_a(i) ? rank_a(i) : 0) + (has_b(i) ? rank_b(i) : 0) +
                       (has_c(i) ? rank_c(i) : 0);

    std::vector<Matrix> maps;
    for (int i = 1; i <= n; ++i) {
        if (i == n) {
            maps.push_back(w.a.maps[1] * w.c.maps[n - 1]); // (Sigma alpha_2) gamma_n : C_n -> A_3
            continue;
        }
        // grid rows: target components of X_{i+1}; grid cols: source components of X_i
        std::vector<std::vector<Matrix>> grid;
        auto zero = [&](int r, int c) { return Matrix::zero(spec, r, c); };
        const int it = i + 1;
        if (has_a(it)) {
            std::vector<Matrix> row;
            if (has_a(i))
                row.push_back(i == 1 ? w.a.maps[i + 1] : w.a.maps[i + 1].negated());
            if (has_b(i))
                row.push_back(zero(rank_a(it), rank_b(i)));
            if (has_c(i))
                row.push_back(zero(rank_a(it), rank_c(i)));
            grid.push_back(std::move(row));
        }
        if (has_b(it)) {
            std::vector<Matrix> row;
            if (has_a(i)) {
                Matrix blk = w.phi[i + 1]; // phi_{i+2}
                if (i != 1 && i % 2 != 0)
                    blk = blk.negated(); // (-1)^i, except the positive first map
                row.push_back(blk);
            }
            if (has_b(i))
                row.push_back(i == 1 ? w.b.maps[i] : w.b.maps[i].negated());
            if (has_c(i))
                row.push_back(zero(rank_b(it), rank_c(i)));
            grid.push_back(std::move(row));
        }
        if (has_c(it)) {
            std::vector<Matrix> row;
            if (has_a(i))
                row.push_back(lambda_at(w, i + 2));
            if (has_b(i))
                row.push_back(w.psi[i]);
            if (has_c(i))
                row.push_back(w.c.maps[i - 1]);
            grid.push_back(std::move(row));
        }
        maps.push_back(block(grid));
    }

    NSigmaSequence out(spec, n, std::move(ranks), std::move(maps));
    if (!is_candidate(out))
        throw std::logic_error("associated_n_angle: assembled sequence is not a candidate");
    return out;
}

bool verify_octahedron(const OctahedronWitness& w)
{
    if (!octahedron_relations_hold(w))
        return false;
    if (!is_n_angle(w.a) || !is_n_angle(w.b) || !is_n_angle(w.c))
        return false;
    return is_n_angle(associated_n_angle(w));
}

namespace {

// Linear system for the diagonal family given the two vertical families.
SolutionSpace solve_lambda_system(const NSigmaSequence& a, const NSigmaSequence& c,
                                  const std::vector<Matrix>& phi, const std::vector<Matrix>& psi,
                                  MatrixSystem& sys, std::vector<int>& ids)
{
    const int n = a.n;
    ids.assign(n + 2, -1);
    for (int j = 4; j <= n; ++j)
        ids[j] = sys.add_unknown(c.ranks[j - 2], a.ranks[j - 1]);
    for (int i = 1; i <= n - 2; ++i) {
        const int eq = sys.add_equation(c.ranks[i + 1], a.ranks[i + 1]);
        if (i + 3 <= n)
            sys.add_right_term(eq, ids[i + 3], a.maps[i + 1]);
        if (i + 2 >= 4)
            sys.add_left_term(eq, ids[i + 2], c.maps[i], -1);
        Matrix rhs = psi[i + 1] * phi[i + 1];
        if (i % 2 != 0)
            rhs = rhs.negated();
        sys.set_rhs(eq, rhs);
    }
    return sys.solve();
}

} // namespace

std::optional<OctahedronWitness> search_octahedron(const NSigmaSequence& a, const Matrix& g,
                                                   std::uint64_t budget)
{
    if (!is_n_angle(a))
        throw std::invalid_argument("search_octahedron: first row must be an n-angle");
    if (g.cols() != a.ranks[1])
        throw std::invalid_argument("search_octahedron: g must start at the second object");
    const int n = a.n;
    const Matrix f = a.maps[0];
    const NSigmaSequence b = angle_on_base(g * f, n);
    const NSigmaSequence c = angle_on_base(g, n);

    FillInSystem phi_sys(a, b, Matrix::identity(a.spec, a.ranks[0]), g);
    FillInSystem psi_sys(b, c, f, Matrix::identity(a.spec, b.ranks[1]));

    std::uint64_t used = 0;
    SolutionEnumerator phi_it(phi_sys.space);
    while (auto px = phi_it.next()) {
        const SequenceMorphism phim = phi_sys.morphism_from(*px);
        SolutionEnumerator psi_it(psi_sys.space);
        while (auto sx = psi_it.next()) {
            const SequenceMorphism psim = psi_sys.morphism_from(*sx);
            MatrixSystem lsys(a.spec);
            std::vector<int> ids;
            const SolutionSpace lspace =
                solve_lambda_system(a, c, phim.components, psim.components, lsys, ids);
            SolutionEnumerator lam_it(lspace);
            while (auto lx = lam_it.next()) {
                if (used++ >= budget)
                    return std::nullopt;
                std::vector<Matrix> lams;
                for (int j = 4; j <= n; ++j)
                    lams.push_back(lsys.extract(*lx, ids[j]));
                OctahedronWitness w(a, b, c, phim.components, psim.components, lams);
                if (!octahedron_relations_hold(w))
                    throw std::logic_error("search_octahedron: solved witness fails relations");
                if (is_n_angle(associated_n_angle(w)))
                    return w;
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Verdier goodness

bool verify_verdier(const SequenceMorphism& phi, const VerdierWitness& w)
{
    if (!is_morphism(phi) || !is_n_angle(phi.source) || !is_n_angle(phi.target))
        throw std::invalid_argument("verify_verdier: need a morphism of n-angles");

    // gluing of the rows to the morphism data
    if (!(w.t_row.maps[0] == phi.components[1]) || !(w.r_row.maps[0] == phi.components[0]))
        return false;
    if (!(w.s_row.maps[0] == phi.components[1] * phi.source.maps[0]))
        return false;

    const OctahedronWitness o1(phi.source, w.s_row, w.t_row, w.mu1, w.mu2, w.lambda_t);
    const OctahedronWitness o2(w.r_row, w.s_row, phi.target, w.nu1, w.nu2, w.gamma_r);
    if (!octahedron_relations_hold(o1) || !octahedron_relations_hold(o2))
        return false;
    if (!is_n_angle(w.s_row) || !is_n_angle(w.t_row) || !is_n_angle(w.r_row))
        return false;
    for (int i = 0; i < phi.source.n; ++i)
        if (!(phi.components[i] == w.nu2[i] * w.mu1[i]))
            return false;
    return true;
}

namespace {

// Staged fill-in search for one candidate row triple; `used` accumulates
// into the caller's budget.
std::optional<VerdierWitness> search_verdier_over_rows(const SequenceMorphism& phi,
                                                       const NSigmaSequence& s,
                                                       const NSigmaSequence& t,
                                                       const NSigmaSequence& r,
                                                       std::uint64_t budget, std::uint64_t& used,
                                                       bool& budget_out)
{
    const NSigmaSequence& a = phi.source;
    const NSigmaSequence& bt = phi.target;
    const int n = a.n;
    const RingSpec spec = a.spec;
    const Matrix alpha1 = a.maps[0];
    const Matrix beta1 = bt.maps[0];
    const Matrix phi1 = phi.components[0];
    const Matrix phi2 = phi.components[1];

    FillInSystem mu1_sys(a, s, Matrix::identity(spec, a.ranks[0]), phi2);
    FillInSystem mu2_sys(s, t, alpha1, Matrix::identity(spec, s.ranks[1]));
    FillInSystem nu1_sys(r, s, Matrix::identity(spec, r.ranks[0]), beta1);

    SolutionEnumerator mu1_it(mu1_sys.space);
    while (auto m1x = mu1_it.next()) {
        const SequenceMorphism mu1 = mu1_sys.morphism_from(*m1x);

        // nu2 : S -> B with components (phi_1, id, ...), subject to the
        // morphism squares plus the factorizations nu2_i * mu1_i = phi_i
        MatrixSystem nu2sys(spec);
        std::vector<int> nu2id(n, -1);
        for (int i = 2; i < n; ++i)
            nu2id[i] = nu2sys.add_unknown(bt.ranks[i], s.ranks[i]);
        for (int i = 1; i < n; ++i) {
            const int eq = nu2sys.add_equation(bt.rank_at(i + 1), s.ranks[i]);
            if (i + 1 <= n - 1)
                nu2sys.add_right_term(eq, nu2id[i + 1], s.maps[i]);
            if (i >= 2)
                nu2sys.add_left_term(eq, nu2id[i], bt.maps[i], -1);
            Matrix rhs = Matrix::zero(spec, bt.rank_at(i + 1), s.ranks[i]);
            if (i == 1)
                rhs = rhs + bt.maps[1]; // nu2_2 * sigma_1 = beta_1 * id
            if (i == n - 1)
                rhs = rhs + (phi1 * s.maps[n - 1]).negated();
            nu2sys.set_rhs(eq, rhs);
        }
        for (int i = 2; i < n; ++i) {
            const int eq = nu2sys.add_equation(bt.ranks[i], a.ranks[i]);
            nu2sys.add_right_term(eq, nu2id[i], mu1.components[i]);
            nu2sys.set_rhs(eq, phi.components[i]);
        }
        const SolutionSpace nu2space = nu2sys.solve();

        SolutionEnumerator nu2_it(nu2space);
        while (auto n2x = nu2_it.next()) {
            std::vector<Matrix> nu2;
            nu2.push_back(phi1);
            nu2.push_back(Matrix::identity(spec, s.ranks[1]));
            for (int i = 2; i < n; ++i)
                nu2.push_back(nu2sys.extract(*n2x, nu2id[i]));

            SolutionEnumerator mu2_it(mu2_sys.space);
            while (auto m2x = mu2_it.next()) {
                const SequenceMorphism mu2 = mu2_sys.morphism_from(*m2x);
                MatrixSystem ltsys(spec);
                std::vector<int> ltids;
                const SolutionSpace ltspace =
                    solve_lambda_system(a, t, mu1.components, mu2.components, ltsys, ltids);
                SolutionEnumerator lt_it(ltspace);
                while (auto ltx = lt_it.next()) {
                    std::vector<Matrix> lambda_t;
                    for (int j = 4; j <= n; ++j)
                        lambda_t.push_back(ltsys.extract(*ltx, ltids[j]));

                    SolutionEnumerator nu1_it(nu1_sys.space);
                    while (auto n1x = nu1_it.next()) {
                        const SequenceMorphism nu1 = nu1_sys.morphism_from(*n1x);
                        MatrixSystem grsys(spec);
                        std::vector<int> grids;
                        const SolutionSpace grspace =
                            solve_lambda_system(r, bt, nu1.components, nu2, grsys, grids);
                        SolutionEnumerator gr_it(grspace);
                        while (auto grx = gr_it.next()) {
                            if (used++ >= budget) {
                                budget_out = true;
                                return std::nullopt;
                            }
                            std::vector<Matrix> gamma_r;
                            for (int j = 4; j <= n; ++j)
                                gamma_r.push_back(grsys.extract(*grx, grids[j]));
                            VerdierWitness w{s,  t,       r,   mu1.components, mu2.components,
                                             lambda_t, nu1.components, nu2, gamma_r};
                            if (verify_verdier(phi, w))
                                return w;
                        }
                    }
                }
            }
        }
    }
    return std::nullopt;
}

} // namespace

// ---------------------------------------------------------------------------
// Middling diagrams

MiddlingDiagram::MiddlingDiagram(RingSpec spec_, int n_, std::vector<std::vector<int>> ranks_,
                                 std::vector<std::vector<Matrix>> hmaps_,
                                 std::vector<std::vector<Matrix>> vmaps_)
    : spec(spec_), n(n_), ranks(std::move(ranks_)), hmaps(std::move(hmaps_)),
      vmaps(std::move(vmaps_))
{
    if (static_cast<int>(ranks.size()) != n || static_cast<int>(hmaps.size()) != n ||
        static_cast<int>(vmaps.size()) != n)
        throw std::invalid_argument("MiddlingDiagram: need n x n grid data");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(ranks[i].size()) != n || static_cast<int>(hmaps[i].size()) != n ||
            static_cast<int>(vmaps[i].size()) != n)
            throw std::invalid_argument("MiddlingDiagram: ragged grid");
        for (int j = 0; j < n; ++j) {
            const Matrix& h = hmaps[i][j];
            const Matrix& v = vmaps[i][j];
            if (h.rows() != ranks[i][(j + 1) % n] || h.cols() != ranks[i][j])
                throw std::invalid_argument("MiddlingDiagram: horizontal map shape mismatch");
            if (v.rows() != ranks[(i + 1) % n][j] || v.cols() != ranks[i][j])
                throw std::invalid_argument("MiddlingDiagram: vertical map shape mismatch");
        }
    }
}

NSigmaSequence MiddlingDiagram::row(int i) const { return {spec, n, ranks[i], hmaps[i]}; }

NSigmaSequence MiddlingDiagram::column(int j) const
{
    std::vector<int> r(n);
    std::vector<Matrix> m;
    for (int i = 0; i < n; ++i) {
        r[i] = ranks[i][j];
        m.push_back(vmaps[i][j]);
    }
    return {spec, n, std::move(r), std::move(m)};
}

MiddlingDiagram MiddlingDiagram::transposed() const
{
    std::vector<std::vector<int>> r(n, std::vector<int>(n));
    std::vector<std::vector<Matrix>> h, v;
    for (int i = 0; i < n; ++i) {
        std::vector<Matrix> hrow, vrow;
        for (int j = 0; j < n; ++j) {
            r[i][j] = ranks[j][i];
            hrow.push_back(vmaps[j][i]);
            vrow.push_back(hmaps[j][i]);
        }
        h.push_back(std::move(hrow));
        v.push_back(std::move(vrow));
    }
    return {spec, n, std::move(r), std::move(h), std::move(v)};
}

bool verify_middling(const MiddlingDiagram& d)
{
    for (int i = 0; i < d.n; ++i)
        if (!is_n_angle(d.row(i)))
            return false;
    for (int j = 0; j < d.n; ++j)
        if (!is_n_angle(d.column(j)))
            return false;
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j) {
            const Matrix lhs = d.vmaps[i][(j + 1) % d.n] * d.hmaps[i][j];
            Matrix rhs = d.hmaps[(i + 1) % d.n][j] * d.vmaps[i][j];
            if (i == d.n - 1 && j == d.n - 1 && d.n % 2 != 0)
                rhs = rhs.negated();
            if (!(lhs == rhs))
                return false;
        }
    return true;
}

std::string to_string(SearchVerdict v)
{
    switch (v) {
    case SearchVerdict::Found:
        return "FOUND";
    case SearchVerdict::NoneExhaustive:
        return "NONE_EXHAUSTIVE";
    case SearchVerdict::NoneWithinBudget:
        return "NONE_WITHIN_BUDGET";
    }
    return "?";
}

// --------------------------------------------------------------------------
// Column enumeration for the grid search

namespace {

// Is there an isomorphism x -> y that is the identity on the first two
// positions?  Solutions of the commutation system are scanned modulo p,
// which decides entrywise invertibility of the interior components.
bool interior_isomorphic(const NSigmaSequence& x, const NSigmaSequence& y)
{
    const int n = x.n;
    const RingSpec spec = x.spec;
    if (x.ranks != y.ranks)
        return false;
    if (!(x.maps[0] == y.maps[0]))
        return false;
    if (x == y)
        return true;

    MatrixSystem sys(spec);
    std::vector<int> uid(n, -1);
    for (int i = 2; i < n; ++i)
        uid[i] = sys.add_unknown(x.ranks[i], x.ranks[i]);
    for (int i = 1; i < n; ++i) {
        const int eq = sys.add_equation(x.rank_at(i + 1), x.ranks[i]);
        if (i + 1 <= n - 1)
            sys.add_right_term(eq, uid[i + 1], x.maps[i]);
        if (i >= 2)
            sys.add_left_term(eq, uid[i], y.maps[i], -1);
        // u_{n+1} and u_1, u_2 are identities; known terms move right
        Matrix rhs = Matrix::zero(spec, x.rank_at(i + 1), x.ranks[i]);
        if (i == 1)
            rhs = rhs + y.maps[1];
        if (i == n - 1)
            rhs = rhs + x.maps[n - 1].negated();
        sys.set_rhs(eq, rhs);
    }
    const SolutionSpace space = sys.solve();
    if (!space.solvable)
        return false;

    // scan the image of the solution set modulo p
    const int p = spec.p;
    std::vector<const SolutionSpace::Generator*> full;
    for (const auto& g : space.generators)
        if (!g.residue_coeff)
            full.push_back(&g);
    std::uint64_t combos = 1;
    for (size_t i = 0; i < full.size(); ++i) {
        combos = sat_mul(combos, static_cast<std::uint64_t>(p));
        if (combos > 2'000'000ULL)
            return false; // give up deduplication; keeping both reps stays sound
    }

    const size_t dim = space.particular.size();
    std::vector<int> coeff(full.size(), 0);
    std::vector<int> res(dim);
    for (;;) {
        for (size_t k = 0; k < dim; ++k) {
            int v = spec.residue(space.particular[k]);
            for (size_t g = 0; g < full.size(); ++g)
                v = (v + coeff[g] * spec.residue(full[g]->vec[k])) % p;
            res[k] = v;
        }
        bool all_inv = true;
        size_t off = 0;
        for (int i = 2; i < n && all_inv; ++i) {
            const int r = x.ranks[i];
            ResidueMatrix u(p, r, r);
            for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b)
                    u.at(a, b) = res[off + static_cast<size_t>(a) * r + b];
            off += static_cast<size_t>(r) * r;
            if (!u.invertible())
                all_inv = false;
        }
        if (all_inv)
            return true;
        int g = static_cast<int>(full.size()) - 1;
        for (; g >= 0; --g) {
            if (++coeff[g] < p)
                break;
            coeff[g] = 0;
        }
        if (g < 0)
            break;
    }
    return false;
}

struct ColumnEnumeration {
    std::vector<NSigmaSequence> reps;
    std::uint64_t constructions = 0;
};

// All n-angles with the given base and interior ranks <= rank_bound, up to
// isomorphism fixing the first two positions.
ColumnEnumeration enumerate_columns(const Matrix& base, int n, int rank_bound,
                                    std::uint64_t& budget)
{
    const RingSpec spec = base.spec();
    const int r1 = base.cols(), r2 = base.rows();
    ColumnEnumeration out;

    const auto& gl1 = all_gl(spec, r1);
    const auto& gl2 = all_gl(spec, r2);

    std::vector<int> interior(n - 2, 0);
    for (;;) {
        std::vector<int> ranks;
        ranks.push_back(r1);
        ranks.push_back(r2);
        for (int v : interior)
            ranks.push_back(v);

        for (const BlockForm& form : enumerate_block_forms(spec, n, ranks)) {
            for (const auto& [u1, u1inv] : gl1) {
                for (const auto& [u2, u2inv] : gl2) {
                    if (budget == 0)
                        throw BudgetExceeded("column enumeration budget exhausted");
                    --budget;
                    ++out.constructions;
                    if (!(u2 * form.seq.maps[0] * u1inv == base))
                        continue;
                    std::vector<Matrix> maps = form.seq.maps;
                    maps[0] = base;
                    maps[1] = maps[1] * u2inv;
                    maps[n - 1] = u1 * maps[n - 1];
                    NSigmaSequence cand(spec, n, ranks, std::move(maps));
                    bool dup = false;
                    for (const NSigmaSequence& rep : out.reps)
                        if (interior_isomorphic(cand, rep)) {
                            dup = true;
                            break;
                        }
                    if (!dup)
                        out.reps.push_back(std::move(cand));
                }
            }
        }

        int i = n - 3;
        for (; i >= 0; --i) {
            if (++interior[i] <= rank_bound)
                break;
            interior[i] = 0;
        }
        if (i < 0)
            break;
    }
    return out;
}

// Per-strip commutation system: unknowns are the row maps hmaps[i][j] for
// i = 2..n-1 between the fixed columns col_j and col_{j+1}.  Row-candidacy
// constraints against already-chosen neighbouring strips are linear in the
// unknowns and folded straight into the system, which keeps the search
// branching on genuinely free data only.
struct StripSystem {
    MatrixSystem sys;
    std::vector<int> ids; // ids[i] for i in 2..n-1
    SolutionSpace space;

    // prev: row maps of strip j-1 (composite prev then this must vanish);
    // first: row maps of strip 0 when j == n-1 (wrap composite).
    StripSystem(const SequenceMorphism& phi, const std::vector<const NSigmaSequence*>& cols, int j,
                const std::vector<Matrix>* prev = nullptr,
                const std::vector<Matrix>* first = nullptr)
        : sys(phi.source.spec), ids(phi.source.n, -1)
    {
        const int n = phi.source.n;
        const RingSpec spec = phi.source.spec;
        const NSigmaSequence& cj = *cols[j];
        const NSigmaSequence& cj1 = *cols[(j + 1) % n];

        for (int i = 2; i < n; ++i)
            ids[i] = sys.add_unknown(cj1.ranks[i], cj.ranks[i]);

        // square between rows 1 and 2
        {
            const int eq = sys.add_equation(cj1.ranks[2], cj.ranks[1]);
            sys.add_right_term(eq, ids[2], cj.maps[1]);
            sys.set_rhs(eq, cj1.maps[1] * phi.target.maps[j]);
        }
        // interior squares
        for (int i = 2; i <= n - 2; ++i) {
            const int eq = sys.add_equation(cj1.ranks[i + 1], cj.ranks[i]);
            sys.add_right_term(eq, ids[i + 1], cj.maps[i]);
            sys.add_left_term(eq, ids[i], cj1.maps[i], -1);
            sys.set_rhs(eq, Matrix::zero(spec, cj1.ranks[i + 1], cj.ranks[i]));
        }
        // wrap square back to the first row; the corner anticommutes for odd n
        {
            const int eq = sys.add_equation(cj1.rank_at(0), cj.ranks[n - 1]);
            sys.add_left_term(eq, ids[n - 1], cj1.maps[n - 1]);
            Matrix rhs = phi.source.maps[j] * cj.maps[n - 1];
            if (n % 2 != 0 && j == n - 1)
                rhs = rhs.negated();
            sys.set_rhs(eq, rhs);
        }
        // row candidacy against fixed neighbours
        if (prev)
            for (int i = 2; i < n; ++i) {
                const Matrix& p = (*prev)[i - 2]; // cols[j-1].ranks[i] -> cj.ranks[i]
                const int eq = sys.add_equation(cj1.ranks[i], p.cols());
                sys.add_right_term(eq, ids[i], p);
                sys.set_rhs(eq, Matrix::zero(spec, cj1.ranks[i], p.cols()));
            }
        if (first)
            for (int i = 2; i < n; ++i) {
                const Matrix& f = (*first)[i - 2]; // cj1.ranks[i] -> cols[1].ranks[i]
                const int eq = sys.add_equation(f.rows(), cj.ranks[i]);
                sys.add_left_term(eq, ids[i], f);
                sys.set_rhs(eq, Matrix::zero(spec, f.rows(), cj.ranks[i]));
            }
        space = sys.solve();
    }

    std::vector<Matrix> extract(const std::vector<int>& sol, int n) const
    {
        std::vector<Matrix> out;
        for (int i = 2; i < n; ++i)
            out.push_back(sys.extract(sol, ids[i]));
        return out;
    }
};

struct ComboOutcome {
    bool found = false;
    bool budget_out = false;
    std::uint64_t nodes = 0;
    std::optional<MiddlingDiagram> diagram;
};

// chosen[j] holds the solved row maps (rows 2..n-1) of strip j
MiddlingDiagram assemble_diagram(const SequenceMorphism& phi,
                                 const std::vector<const NSigmaSequence*>& cols,
                                 const std::vector<std::vector<Matrix>>& chosen)
{
    const int n = phi.source.n;
    const RingSpec spec = phi.source.spec;
    std::vector<std::vector<int>> ranks(n, std::vector<int>(n));
    std::vector<std::vector<Matrix>> hmaps(n), vmaps(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            ranks[i][j] = cols[j]->ranks[i];
    for (int j = 0; j < n; ++j) {
        hmaps[0].push_back(phi.source.maps[j]);
        hmaps[1].push_back(phi.target.maps[j]);
    }
    for (int i = 2; i < n; ++i)
        for (int j = 0; j < n; ++j)
            hmaps[i].push_back(chosen[j][i - 2]);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            vmaps[i].push_back(cols[j]->maps[i]);
    return {spec, n, std::move(ranks), std::move(hmaps), std::move(vmaps)};
}

// Depth-first search over strip solutions.  Candidacy between neighbouring
// strips is part of each level's linear system, so every enumerated node
// already satisfies all commutation and candidacy constraints; leaves only
// need the full row-membership checks.
ComboOutcome run_combo(const SequenceMorphism& phi, const std::vector<const NSigmaSequence*>& cols,
                       std::uint64_t slice)
{
    const int n = phi.source.n;
    ComboOutcome out;

    // quick unsolvability screen on the unconstrained strips
    for (int j = 0; j < n; ++j)
        if (!StripSystem(phi, cols, j).space.solvable)
            return out;

    std::vector<std::vector<Matrix>> chosen(n); // chosen[j] = row maps (i = 2..n-1) of strip j
    std::uint64_t nodes = 0;
    bool budget_out = false;

    std::function<bool(int)> dfs = [&](int j) -> bool {
        if (j == n) {
            for (int i = 2; i < n; ++i) {
                std::vector<int> rranks(n);
                std::vector<Matrix> rmaps;
                for (int jj = 0; jj < n; ++jj) {
                    rranks[jj] = cols[jj]->ranks[i];
                    rmaps.push_back(chosen[jj][i - 2]);
                }
                if (!is_n_angle(NSigmaSequence(phi.source.spec, n, rranks, rmaps)))
                    return false;
            }
            return true;
        }
        const StripSystem strip(phi, cols, j, j > 0 ? &chosen[j - 1] : nullptr,
                                j == n - 1 ? &chosen[0] : nullptr);
        SolutionEnumerator it(strip.space);
        while (auto sol = it.next()) {
            if (nodes++ >= slice) {
                budget_out = true;
                return false;
            }
            chosen[j] = strip.extract(*sol, n);
            if (dfs(j + 1))
                return true;
            if (budget_out)
                return false;
        }
        return false;
    };

    const bool found = dfs(0);
    out.nodes = nodes;
    out.budget_out = budget_out;
    if (found) {
        out.found = true;
        MiddlingDiagram d = assemble_diagram(phi, cols, chosen);
        if (!verify_middling(d))
            throw std::logic_error("search_middling_extension: assembled grid fails verification");
        out.diagram = std::move(d);
    }
    return out;
}

} // namespace

VerdierSearchResult search_verdier(const SequenceMorphism& phi, std::uint64_t budget)
{
    if (!is_morphism(phi) || !is_n_angle(phi.source) || !is_n_angle(phi.target))
        throw std::invalid_argument("search_verdier: need a morphism of n-angles");
    const NSigmaSequence& a = phi.source;
    const NSigmaSequence& bt = phi.target;
    const int n = a.n;
    const Matrix phi1 = phi.components[0];
    const Matrix phi2 = phi.components[1];

    // candidate rows on the three bases, up to isomorphism fixing the first
    // two positions; interior ranks bounded at cone scale
    int rank_bound = 0;
    for (int i = 0; i < n; ++i)
        rank_bound = std::max(rank_bound, a.ranks[i] + bt.ranks[i]);

    VerdierSearchResult res;
    std::uint64_t enum_budget = budget;
    std::vector<NSigmaSequence> s_rows, t_rows, r_rows;
    try {
        s_rows = enumerate_columns(phi2 * a.maps[0], n, rank_bound, enum_budget).reps;
        t_rows = enumerate_columns(phi2, n, rank_bound, enum_budget).reps;
        r_rows = enumerate_columns(phi1, n, rank_bound, enum_budget).reps;
    } catch (const BudgetExceeded&) {
        res.nodes = budget;
        return res; // not exhausted: row enumeration ran out of budget
    }

    std::uint64_t used = budget - enum_budget;
    bool budget_out = false;
    for (const NSigmaSequence& s : s_rows)
        for (const NSigmaSequence& t : t_rows)
            for (const NSigmaSequence& r : r_rows) {
                auto w = search_verdier_over_rows(phi, s, t, r, budget, used, budget_out);
                if (w) {
                    res.witness = std::move(w);
                    res.nodes = used;
                    return res;
                }
                if (budget_out) {
                    res.nodes = used;
                    return res;
                }
            }
    res.exhausted = true;
    res.nodes = used;
    return res;
}

MiddlingSearchResult search_middling_extension(const SequenceMorphism& phi, int rank_bound,
                                               std::uint64_t budget, int jobs)
{
    if (!is_morphism(phi))
        throw std::invalid_argument("search_middling_extension: input is not a morphism");
    if (!is_n_angle(phi.source) || !is_n_angle(phi.target))
        throw std::invalid_argument("search_middling_extension: rows must be n-angles");
    if (rank_bound < 0 || budget == 0)
        throw std::invalid_argument("search_middling_extension: bad bounds");

    const int n = phi.source.n;
    MiddlingSearchResult res;

    std::vector<ColumnEnumeration> columns;
    std::uint64_t remaining = budget;
    try {
        for (int j = 0; j < n; ++j) {
            columns.push_back(enumerate_columns(phi.components[j], n, rank_bound, remaining));
            res.column_candidates += columns.back().reps.size();
        }
    } catch (const BudgetExceeded&) {
        res.verdict = SearchVerdict::NoneWithinBudget;
        return res;
    }

    std::uint64_t combos = 1;
    for (const auto& ce : columns)
        combos = sat_mul(combos, static_cast<std::uint64_t>(ce.reps.size()));
    res.combos_total = combos;
    if (combos == 0) {
        // no admissible column at some position: nothing to extend within the bound
        res.verdict = SearchVerdict::NoneExhaustive;
        return res;
    }

    const std::uint64_t slice = remaining / combos;
    const std::uint64_t extra = remaining % combos;

    std::vector<ComboOutcome> outcomes(combos);
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> best_found{combos};
    std::exception_ptr worker_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::uint64_t idx = next.fetch_add(1);
            if (idx >= combos)
                return;
            if (idx > best_found.load())
                continue; // a witness at a smaller index already decides the merge
            // decode mixed-radix column choice
            std::vector<const NSigmaSequence*> cols(n);
            std::uint64_t rest = idx;
            for (int j = n - 1; j >= 0; --j) {
                const std::uint64_t size = columns[j].reps.size();
                cols[j] = &columns[j].reps[rest % size];
                rest /= size;
            }
            const std::uint64_t myslice = slice + (idx < extra ? 1 : 0);
            ComboOutcome oc;
            try {
                oc = myslice == 0 ? ComboOutcome{false, true, 0, std::nullopt}
                                  : run_combo(phi, cols, myslice);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!worker_error)
                    worker_error = std::current_exception();
                return;
            }
            if (oc.found) {
                std::uint64_t cur = best_found.load();
                while (idx < cur && !best_found.compare_exchange_weak(cur, idx))
                    ;
            }
            outcomes[idx] = std::move(oc);
        }
    };

    const int workers = std::max(1, jobs);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    if (worker_error)
        std::rethrow_exception(worker_error);

    // deterministic merge: least combo index with a witness wins; node and
    // combo counts only include combos up to that index
    const std::uint64_t found_at = best_found.load();
    if (found_at < combos) {
        res.verdict = SearchVerdict::Found;
        res.diagram = outcomes[found_at].diagram;
        for (std::uint64_t i = 0; i <= found_at; ++i) {
            res.nodes += outcomes[i].nodes;
            ++res.combos_processed;
        }
        return res;
    }
    bool any_budget_out = false;
    for (std::uint64_t i = 0; i < combos; ++i) {
        res.nodes += outcomes[i].nodes;
        ++res.combos_processed;
        any_budget_out = any_budget_out || outcomes[i].budget_out;
    }
    res.verdict = any_budget_out ? SearchVerdict::NoneWithinBudget : SearchVerdict::NoneExhaustive;
    return res;
}

// ---------------------------------------------------------------------------
// Counterexample driver

SequenceMorphism counterexample_morphism(int n, RingSpec spec)
{
    if (n < 4)
        throw std::invalid_argument("counterexample_morphism: needs n >= 4");
    if (!validate_parity(n, spec))
        throw std::invalid_argument("counterexample_morphism: parity rule fails for this ring");
    const NSigmaSequence f = f_p_sequence(spec, n, 1);
    std::vector<Matrix> comp(n, Matrix::zero(spec, 1, 1));
    comp[n - 1] = Matrix::from_rows(spec, {{spec.uniformizer()}});
    return {f, f, std::move(comp)};
}

namespace {

std::string describe_decomposition(const Decomposition& d, const Matrix& base)
{
    std::string s = "base ";
    s += base.at(0, 0) == 0 ? "0" : "p";
    s += ": trivial slots {";
    bool first = true;
    for (const auto& [slot, mult] : d.trivial_summands) {
        if (!first)
            s += ", ";
        first = false;
        s += std::to_string(slot) + ":" + std::to_string(mult);
    }
    s += "}, fp_rank " + std::to_string(d.fp_rank);
    return s;
}

} // namespace

CounterexampleReport run_counterexample(int n, RingSpec spec, int rank_bound, std::uint64_t budget,
                                        int jobs)
{
    CounterexampleReport rep;
    rep.n = n;
    rep.spec = spec;
    rep.rank_bound = rank_bound;

    const SequenceMorphism phi = counterexample_morphism(n, spec);
    rep.morphism_ok = is_morphism(phi);
    rep.weak_isomorphism = is_weak_isomorphism(phi);
    rep.good = is_good(phi);
    rep.search = search_middling_extension(phi, rank_bound, budget, jobs);

    // Normal-form trace over the distinguished maximal-interior-rank column
    // tuple: report each column's decomposition and the entry shapes the
    // commutation systems force on the third row.
    std::uint64_t trace_budget = 1'000'000;
    std::vector<NSigmaSequence> picked;
    for (int j = 0; j < n; ++j) {
        auto ce = enumerate_columns(phi.components[j], n, rank_bound, trace_budget);
        if (ce.reps.empty())
            return rep;
        const NSigmaSequence* best = &ce.reps.front();
        for (const auto& r : ce.reps)
            if (r.total_rank() > best->total_rank())
                best = &r;
        picked.push_back(*best);
        rep.column_decompositions.push_back(
            describe_decomposition(strip_units(*best), phi.components[j]));
    }

    std::vector<const NSigmaSequence*> cols;
    for (const auto& c : picked)
        cols.push_back(&c);
    for (int j = 0; j < n; ++j) {
        StripSystem strip(phi, cols, j);
        ForcedShape shape;
        shape.row_index = 2;
        shape.strip = j;
        shape.rows = cols[(j + 1) % n]->ranks[2];
        shape.cols = cols[j]->ranks[2];
        if (!strip.space.solvable) {
            shape.cells.assign(static_cast<size_t>(shape.rows) * shape.cols, "!");
        } else {
            // the unknown X_2 occupies the first rows*cols coordinates
            const int m = shape.rows * shape.cols;
            for (int k = 0; k < m; ++k) {
                bool forced = true;
                for (const auto& g : strip.space.generators)
                    if (g.vec[k] != 0) {
                        forced = false;
                        break;
                    }
                shape.cells.push_back(forced ? std::to_string(strip.space.particular[k]) : "*");
            }
        }
        rep.third_row_shapes.push_back(std::move(shape));
    }
    const ComboOutcome oc = run_combo(phi, cols, 1'000'000);
    rep.trace_row_completable = oc.found;
    return rep;
}

} // namespace nangle
