#include "nangle/angulation.hpp"

#include <algorithm>
#include <map>

namespace nangle {

bool homotopy_valid(const NSigmaSequence& a, const ContractingHomotopy& h)
{
    if (static_cast<int>(h.theta.size()) != a.n)
        return false;
    for (int i = 0; i < a.n; ++i) {
        const int prev = a.mod(i - 1);
        const Matrix lhs = h.theta[i] * a.maps[i] + a.maps[prev] * h.theta[prev];
        if (!(lhs == Matrix::identity(a.spec, a.ranks[i])))
            return false;
    }
    return true;
}

std::optional<ContractingHomotopy> decide_contractible_homotopy(const NSigmaSequence& a)
{
    MatrixSystem sys(a.spec);
    std::vector<int> theta(a.n);
    for (int i = 0; i < a.n; ++i)
        theta[i] = sys.add_unknown(a.ranks[i], a.rank_at(i + 1));
    for (int i = 0; i < a.n; ++i) {
        const int prev = a.mod(i - 1);
        const int eq = sys.add_equation(a.ranks[i], a.ranks[i]);
        sys.set_rhs(eq, Matrix::identity(a.spec, a.ranks[i]));
        sys.add_right_term(eq, theta[i], a.maps[i]);
        sys.add_left_term(eq, theta[prev], a.maps[prev]);
    }
    const SolutionSpace s = sys.solve();
    if (!s.solvable)
        return std::nullopt;

    ContractingHomotopy h;
    for (int i = 0; i < a.n; ++i)
        h.theta.push_back(sys.extract(s.particular, theta[i]));
    if (!homotopy_valid(a, h))
        throw std::logic_error("decide_contractible_homotopy: solver returned invalid homotopy");
    return h;
}

// ---------------------------------------------------------------------------
// Decomposition

NSigmaSequence Decomposition::block_form() const
{
    NSigmaSequence acc = zero_sequence(spec, n);
    for (const auto& [slot, mult] : trivial_summands)
        acc = direct_sum(acc, trivial_gamma(spec, n, mult, slot));
    if (residual)
        acc = direct_sum(acc, *residual);
    else
        acc = direct_sum(acc, f_p_sequence(spec, n, fp_rank));
    return acc;
}

NSigmaSequence Decomposition::reassemble() const { return conjugate(block_form(), witness); }

namespace {

struct StripRecord {
    int slot;      // 1-based
    int src_coord; // retired coordinate at position slot-1 (0-based position)
    int tgt_coord; // retired coordinate at position slot (0-based position)
};

} // namespace

Decomposition strip_units(const NSigmaSequence& a)
{
    if (!is_candidate(a))
        throw std::invalid_argument("strip_units: input is not a candidate");

    const RingSpec spec = a.spec;
    const int n = a.n;
    NSigmaSequence cur = a;

    std::vector<std::vector<bool>> active(n);
    for (int q = 0; q < n; ++q)
        active[q].assign(a.ranks[q], true);

    // acc: cumulative basis change with conjugate(a, acc) == cur
    std::vector<Matrix> acc;
    for (int q = 0; q < n; ++q)
        acc.push_back(Matrix::identity(spec, a.ranks[q]));

    std::vector<StripRecord> strips;

    for (;;) {
        int mi = -1, pr = -1, pc = -1;
        for (int i = 0; i < n && mi == -1; ++i) {
            const int tgt = (i + 1) % n;
            for (int r = 0; r < cur.maps[i].rows() && mi == -1; ++r) {
                if (!active[tgt][r])
                    continue;
                for (int c = 0; c < cur.maps[i].cols(); ++c) {
                    if (!active[i][c])
                        continue;
                    if (spec.is_unit(cur.maps[i].at(r, c))) {
                        mi = i;
                        pr = r;
                        pc = c;
                        break;
                    }
                }
            }
        }
        if (mi == -1)
            break;

        const int tgt = (mi + 1) % n;
        Matrix work = cur.maps[mi];
        Matrix p_rows = Matrix::identity(spec, cur.ranks[tgt]); // row ops, basis change at tgt
        Matrix q_cols = Matrix::identity(spec, cur.ranks[mi]);  // col ops

        // scale row pr so the pivot becomes 1
        const int inv = spec.invert(work.at(pr, pc));
        for (int j = 0; j < work.cols(); ++j)
            work.at(pr, j) = spec.mul(inv, work.at(pr, j));
        for (int j = 0; j < p_rows.cols(); ++j)
            p_rows.at(pr, j) = spec.mul(inv, p_rows.at(pr, j));

        // clear column pc
        for (int r = 0; r < work.rows(); ++r) {
            if (r == pr || work.at(r, pc) == 0)
                continue;
            const int f = spec.neg(work.at(r, pc));
            for (int j = 0; j < work.cols(); ++j)
                work.at(r, j) = spec.add(work.at(r, j), spec.mul(f, work.at(pr, j)));
            for (int j = 0; j < p_rows.cols(); ++j)
                p_rows.at(r, j) = spec.add(p_rows.at(r, j), spec.mul(f, p_rows.at(pr, j)));
        }

        // clear row pr (column ops; column pc is now e_pr so nothing re-fills)
        for (int c = 0; c < work.cols(); ++c) {
            if (c == pc || work.at(pr, c) == 0)
                continue;
            const int f = spec.neg(work.at(pr, c));
            for (int r = 0; r < work.rows(); ++r)
                work.at(r, c) = spec.add(work.at(r, c), spec.mul(f, work.at(r, pc)));
            for (int r = 0; r < q_cols.rows(); ++r)
                q_cols.at(r, c) = spec.add(q_cols.at(r, c), spec.mul(f, q_cols.at(r, pc)));
        }

        // conjugation: T_{tgt} = p_rows, T_{mi} = q_cols^{-1}; identity elsewhere
        const Matrix q_inv = inverse(q_cols);
        const Matrix p_inv = inverse(p_rows);
        const int prev = (mi - 1 + n) % n;

        cur.maps[mi] = work;
        cur.maps[prev] = q_inv * cur.maps[prev];
        cur.maps[tgt] = cur.maps[tgt] * p_inv;
        acc[tgt] = p_rows * acc[tgt];
        acc[mi] = q_inv * acc[mi];

        active[mi][pc] = false;
        active[tgt][pr] = false;
        strips.push_back({mi + 1, pc, pr});
    }

    // Extract the reduced core on the active coordinates.
    std::vector<std::vector<int>> act_idx(n);
    for (int q = 0; q < n; ++q)
        for (int c = 0; c < a.ranks[q]; ++c)
            if (active[q][c])
                act_idx[q].push_back(c);

    std::vector<int> core_ranks(n);
    for (int q = 0; q < n; ++q)
        core_ranks[q] = static_cast<int>(act_idx[q].size());
    std::vector<Matrix> core_maps;
    for (int i = 0; i < n; ++i)
        core_maps.push_back(cur.maps[i].submatrix(act_idx[(i + 1) % n], act_idx[i]));
    NSigmaSequence core(spec, n, core_ranks, core_maps);

    // Classify the core: isomorphic to F(p)^f exactly when all ranks agree
    // and the monodromy is the identity.
    bool is_fp = true;
    std::string reason;
    const int f = core_ranks[0];
    for (int q = 1; q < n; ++q)
        if (core_ranks[q] != f) {
            is_fp = false;
            reason = "core ranks are not all equal";
        }

    std::vector<Matrix> v_tuple; // conjugate(F(p)^f, v_tuple) == core
    if (is_fp) {
        std::vector<ResidueMatrix> bbar;
        for (int i = 0; i < n; ++i) {
            ResidueMatrix b(spec.p, f, f);
            for (int r = 0; r < f; ++r)
                for (int c = 0; c < f; ++c)
                    b.at(r, c) = spec.divide_by_p(core.maps[i].at(r, c));
            if (!b.invertible()) {
                is_fp = false;
                reason = "residue block " + std::to_string(i + 1) + " is singular";
                break;
            }
            bbar.push_back(b);
        }
        if (is_fp) {
            ResidueMatrix mono = ResidueMatrix::identity(spec.p, f);
            for (int i = 0; i < n; ++i)
                mono = bbar[i] * mono;
            if (!mono.is_identity()) {
                is_fp = false;
                reason = "monodromy differs from the identity";
            } else {
                ResidueMatrix v = ResidueMatrix::identity(spec.p, f);
                for (int i = 0; i < n; ++i) {
                    v_tuple.push_back(v.lift(spec));
                    v = bbar[i] * v;
                }
            }
        }
    }

    Decomposition out{spec, n, {}, 0, {}, std::nullopt, ""};

    std::map<int, std::vector<const StripRecord*>> by_slot;
    for (const auto& s : strips)
        by_slot[s.slot].push_back(&s);
    for (const auto& [slot, list] : by_slot)
        out.trivial_summands.emplace_back(slot, static_cast<int>(list.size()));

    if (is_fp) {
        out.fp_rank = f;
    } else {
        out.residual = core;
        out.residual_reason = reason;
    }

    // Witness: input == conjugate(block_form, acc^{-1} * Pi * diag(I, V)).
    // Pi maps the canonical layout (slot groups ascending, then core) onto
    // the original coordinates, acting as the identity on nothing else.
    std::vector<Matrix> witness;
    for (int q = 0; q < n; ++q) {
        std::vector<int> canon_to_orig;
        for (const auto& [slot, list] : by_slot) {
            const int pos_first = slot - 1;      // 0-based first position of the slot
            const int pos_second = slot % n;     // 0-based second position
            for (const StripRecord* s : list) {
                if (q == pos_first)
                    canon_to_orig.push_back(s->src_coord);
                if (q == pos_second)
                    canon_to_orig.push_back(s->tgt_coord);
            }
        }
        for (int c : act_idx[q])
            canon_to_orig.push_back(c);

        Matrix pi(spec, a.ranks[q], a.ranks[q]);
        for (int canon = 0; canon < static_cast<int>(canon_to_orig.size()); ++canon)
            pi.at(canon_to_orig[canon], canon) = 1;

        Matrix w = inverse(acc[q]) * pi;
        if (is_fp && f > 0) {
            // fold the core identification F(p)^f -> core into the witness
            const int triv = a.ranks[q] - f;
            Matrix iv(spec, a.ranks[q], a.ranks[q]);
            for (int t = 0; t < triv; ++t)
                iv.at(t, t) = 1;
            for (int r = 0; r < f; ++r)
                for (int c = 0; c < f; ++c)
                    iv.at(triv + r, triv + c) = v_tuple[q].at(r, c);
            w = w * iv;
        }
        witness.push_back(std::move(w));
    }
    out.witness = std::move(witness);
    return out;
}

std::optional<ResidueMatrix> monodromy(const NSigmaSequence& reduced)
{
    for (const Matrix& m : reduced.maps)
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                if (!reduced.spec.in_max_ideal(m.at(r, c)))
                    throw std::invalid_argument("monodromy: map entry outside (p)");

    const int f = reduced.ranks[0];
    for (int q = 1; q < reduced.n; ++q)
        if (reduced.ranks[q] != f)
            return std::nullopt;

    ResidueMatrix mono = ResidueMatrix::identity(reduced.spec.p, f);
    for (int i = 0; i < reduced.n; ++i) {
        ResidueMatrix b(reduced.spec.p, f, f);
        for (int r = 0; r < f; ++r)
            for (int c = 0; c < f; ++c)
                b.at(r, c) = reduced.spec.divide_by_p(reduced.maps[i].at(r, c));
        mono = b * mono;
    }
    return mono;
}

std::optional<Decomposition> n_angle_certificate(const NSigmaSequence& a)
{
    if (!is_candidate(a))
        return std::nullopt;
    Decomposition d = strip_units(a);
    if (d.residual)
        return std::nullopt;
    return d;
}

bool is_n_angle(const NSigmaSequence& a) { return n_angle_certificate(a).has_value(); }

// ---------------------------------------------------------------------------
// Block forms, GL enumeration, oracle

std::vector<BlockForm> enumerate_block_forms(RingSpec spec, int n, const std::vector<int>& ranks)
{
    std::vector<BlockForm> out;
    int min_rank = ranks.empty() ? 0 : *std::min_element(ranks.begin(), ranks.end());

    for (int f = 0; f <= min_rank; ++f) {
        // mm[s-1] = multiplicity of slot s; position q holds f + mm[q] + mm[q+1]
        // (slot q+1's first object and slot q's second, 1-based slots).
        std::vector<int> d(n);
        for (int q = 0; q < n; ++q)
            d[q] = ranks[q] - f;
        for (int t = 0; t <= d[1 % n]; ++t) {
            std::vector<int> mm(n, 0);
            mm[0] = t; // slot 1
            bool ok = true;
            for (int q = 1; q < n; ++q) {
                // constraint at position q: mm[slot q] + mm[slot q+1] = d[q]
                mm[q] = d[q] - mm[q - 1];
                if (mm[q] < 0) {
                    ok = false;
                    break;
                }
            }
            // wrap constraint at position 0: mm[slot n] + mm[slot 1] = d[0]
            if (ok && mm[n - 1] + mm[0] != d[0])
                ok = false;
            if (!ok)
                continue;

            NSigmaSequence seq = zero_sequence(spec, n);
            for (int s = 1; s <= n; ++s)
                if (mm[s - 1] > 0)
                    seq = direct_sum(seq, trivial_gamma(spec, n, mm[s - 1], s));
            seq = direct_sum(seq, f_p_sequence(spec, n, f));
            if (seq.ranks != ranks)
                throw std::logic_error("enumerate_block_forms: rank bookkeeping error");
            out.push_back({mm, f, std::move(seq)});
        }
    }
    return out;
}

std::uint64_t gl_size(const RingSpec& spec, int r)
{
    // |GL_r(R)| = |GL_r(k)| * p^(r^2); |GL_r(k)| = prod (p^r - p^i)
    std::uint64_t n = 1;
    std::uint64_t pr = 1;
    for (int i = 0; i < r; ++i)
        pr = sat_mul(pr, static_cast<std::uint64_t>(spec.p));
    std::uint64_t pi = 1;
    for (int i = 0; i < r; ++i) {
        n = sat_mul(n, pr - pi);
        pi = sat_mul(pi, static_cast<std::uint64_t>(spec.p));
    }
    for (int i = 0; i < r * r; ++i)
        n = sat_mul(n, static_cast<std::uint64_t>(spec.p));
    return n;
}

const std::vector<std::pair<Matrix, Matrix>>& all_gl(const RingSpec& spec, int r)
{
    static std::map<std::tuple<int, int, int>, std::vector<std::pair<Matrix, Matrix>>> cache;
    const auto key = std::make_tuple(static_cast<int>(spec.kind), spec.p, r);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;

    std::uint64_t carrier = 1;
    for (int i = 0; i < r * r; ++i)
        carrier = sat_mul(carrier, static_cast<std::uint64_t>(spec.size()));
    if (carrier > 20'000'000ULL)
        throw BudgetExceeded("all_gl: carrier too large to scan (" + spec.name() + ", r=" +
                             std::to_string(r) + ")");

    std::vector<std::pair<Matrix, Matrix>> out;
    Matrix m(spec, r, r);
    std::vector<int> idx(static_cast<size_t>(r) * r, 0);
    for (std::uint64_t count = 0;; ++count) {
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j)
                m.at(i, j) = idx[static_cast<size_t>(i) * r + j];
        if (residue_matrix(m).invertible())
            out.emplace_back(m, inverse(m));
        // odometer
        int i = static_cast<int>(idx.size()) - 1;
        for (; i >= 0; --i) {
            if (++idx[i] < spec.size())
                break;
            idx[i] = 0;
        }
        if (i < 0)
            break;
    }
    return cache.emplace(key, std::move(out)).first->second;
}

bool oracle_is_n_angle(const NSigmaSequence& a, std::uint64_t budget)
{
    if (!is_candidate(a))
        return false; // every member is a candidate, so nothing to scan

    std::uint64_t tuples = 1;
    for (int q = 0; q < a.n; ++q)
        tuples = sat_mul(tuples, gl_size(a.spec, a.ranks[q]));
    const auto forms = enumerate_block_forms(a.spec, a.n, a.ranks);
    if (sat_mul(tuples, forms.size()) > budget)
        throw BudgetExceeded("oracle_is_n_angle: conjugation space exceeds budget");

    std::vector<const std::vector<std::pair<Matrix, Matrix>>*> gl(a.n);
    for (int q = 0; q < a.n; ++q)
        gl[q] = &all_gl(a.spec, a.ranks[q]);

    for (const BlockForm& form : forms) {
        std::vector<size_t> pick(a.n, 0);
        for (;;) {
            bool match = true;
            for (int i = 0; i < a.n && match; ++i) {
                const Matrix& u_next = (*gl[(i + 1) % a.n])[pick[(i + 1) % a.n]].first;
                const Matrix& u_inv = (*gl[i])[pick[i]].second;
                if (!(u_next * form.seq.maps[i] * u_inv == a.maps[i]))
                    match = false;
            }
            if (match)
                return true;
            int i = a.n - 1;
            for (; i >= 0; --i) {
                if (++pick[i] < gl[i]->size())
                    break;
                pick[i] = 0;
            }
            if (i < 0)
                break;
        }
    }
    return false;
}

// ---------------------------------------------------------------------------

NSigmaSequence angle_on_base(const Matrix& base, int n)
{
    const RingSpec spec = base.spec();
    const SmithForm s = smith_normal_form(base);
    const int r1 = base.cols(), r2 = base.rows();
    const int a = s.ones, c = s.ps;

    NSigmaSequence form = zero_sequence(spec, n);
    form = direct_sum(form, trivial_gamma(spec, n, a, 1));
    form = direct_sum(form, f_p_sequence(spec, n, c));
    form = direct_sum(form, trivial_gamma(spec, n, r1 - a - c, n));
    form = direct_sum(form, trivial_gamma(spec, n, r2 - a - c, 2));

    std::vector<Matrix> t;
    for (int q = 0; q < n; ++q)
        t.push_back(Matrix::identity(spec, form.ranks[q]));
    t[0] = s.V;
    t[1] = inverse(s.U);
    NSigmaSequence out = conjugate(form, t);
    if (!(out.maps[0] == base))
        throw std::logic_error("angle_on_base: base reconstruction failed");
    return out;
}

SummandLemmaReport verify_summand_lemma(const NSigmaSequence& a)
{
    if (a.ranks[0] != 1 || a.rank_at(1) != 1)
        throw std::invalid_argument("verify_summand_lemma: base must be a 1x1 map");
    const int b = a.maps[0].at(0, 0);
    const bool base_p = (b == a.spec.uniformizer());
    if (!base_p && b != 0)
        throw std::invalid_argument("verify_summand_lemma: base must be (p) or (0)");

    auto cert = n_angle_certificate(a);
    if (!cert)
        throw std::invalid_argument("verify_summand_lemma: input is not an n-angle");

    SummandLemmaReport rep;
    rep.base_is_p = base_p;
    rep.fp_rank = cert->fp_rank;
    rep.trivial_summands = cert->trivial_summands;
    if (base_p) {
        rep.found = cert->fp_rank >= 1;
    } else {
        bool slot2 = false, slotn = false;
        for (const auto& [slot, mult] : cert->trivial_summands) {
            if (slot == 2 && mult >= 1)
                slot2 = true;
            if (slot == a.n && mult >= 1)
                slotn = true;
        }
        rep.found = slot2 && slotn;
    }
    return rep;
}

} // namespace nangle
