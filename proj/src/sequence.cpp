#include "nangle/sequence.hpp"

namespace nangle {

NSigmaSequence::NSigmaSequence(RingSpec spec_, int n_, std::vector<int> ranks_,
                               std::vector<Matrix> maps_)
    : spec(spec_), n(n_), ranks(std::move(ranks_)), maps(std::move(maps_))
{
    if (!validate_parity(n, spec)) // throws on n < 3
        throw std::invalid_argument("NSigmaSequence: odd n requires 2p = 0 in the ring");
    if (static_cast<int>(ranks.size()) != n || static_cast<int>(maps.size()) != n)
        throw std::invalid_argument("NSigmaSequence: need exactly n ranks and n maps");
    for (int i = 0; i < n; ++i) {
        if (ranks[i] < 0)
            throw std::invalid_argument("NSigmaSequence: negative rank");
        const Matrix& m = maps[i];
        if (!(m.spec() == spec))
            throw std::invalid_argument("NSigmaSequence: map over wrong ring");
        if (m.cols() != ranks[i] || m.rows() != ranks[(i + 1) % n])
            throw std::invalid_argument("NSigmaSequence: map shape mismatch at slot " +
                                        std::to_string(i + 1));
    }
}

int NSigmaSequence::total_rank() const
{
    int t = 0;
    for (int r : ranks)
        t += r;
    return t;
}

int NSigmaSequence::compare(const NSigmaSequence& a, const NSigmaSequence& b)
{
    if (a.n != b.n)
        return a.n < b.n ? -1 : 1;
    if (a.ranks != b.ranks)
        return a.ranks < b.ranks ? -1 : 1;
    for (int i = 0; i < a.n; ++i)
        if (int c = Matrix::compare(a.maps[i], b.maps[i]); c != 0)
            return c;
    return 0;
}

NSigmaSequence zero_sequence(RingSpec spec, int n)
{
    std::vector<int> ranks(n, 0);
    std::vector<Matrix> maps(n, Matrix::zero(spec, 0, 0));
    return {spec, n, std::move(ranks), std::move(maps)};
}

NSigmaSequence trivial_gamma(RingSpec spec, int n, int rank, int slot)
{
    if (slot < 1 || slot > n)
        throw std::invalid_argument("trivial_gamma: slot out of range");
    std::vector<int> ranks(n, 0);
    const int i = slot - 1;
    ranks[i] = rank;
    ranks[(i + 1) % n] = rank;
    std::vector<Matrix> maps;
    maps.reserve(n);
    for (int j = 0; j < n; ++j) {
        if (j == i)
            maps.push_back(Matrix::identity(spec, rank));
        else
            maps.push_back(Matrix::zero(spec, ranks[(j + 1) % n], ranks[j]));
    }
    return {spec, n, std::move(ranks), std::move(maps)};
}

NSigmaSequence f_p_sequence(RingSpec spec, int n, int rank)
{
    std::vector<int> ranks(n, rank);
    std::vector<Matrix> maps(n, Matrix::scalar(spec, rank, spec.uniformizer()));
    return {spec, n, std::move(ranks), std::move(maps)};
}

NSigmaSequence rotate_left(const NSigmaSequence& a)
{
    const int n = a.n;
    std::vector<int> ranks(n);
    std::vector<Matrix> maps;
    maps.reserve(n);
    for (int i = 0; i < n; ++i)
        ranks[i] = a.ranks[(i + 1) % n];
    for (int i = 0; i < n - 1; ++i)
        maps.push_back(a.maps[i + 1]);
    Matrix wrap = a.maps[0];
    if (n % 2 != 0)
        wrap = wrap.negated();
    maps.push_back(std::move(wrap));
    return {a.spec, n, std::move(ranks), std::move(maps)};
}

NSigmaSequence rotate_right(const NSigmaSequence& a)
{
    const int n = a.n;
    std::vector<int> ranks(n);
    std::vector<Matrix> maps;
    maps.reserve(n);
    for (int i = 0; i < n; ++i)
        ranks[i] = a.ranks[(i - 1 + n) % n];
    Matrix wrap = a.maps[n - 1];
    if (n % 2 != 0)
        wrap = wrap.negated();
    maps.push_back(std::move(wrap));
    for (int i = 0; i < n - 1; ++i)
        maps.push_back(a.maps[i]);
    return {a.spec, n, std::move(ranks), std::move(maps)};
}

NSigmaSequence direct_sum(const NSigmaSequence& a, const NSigmaSequence& b)
{
    if (a.n != b.n || !(a.spec == b.spec))
        throw std::invalid_argument("direct_sum: incompatible sequences");
    const int n = a.n;
    std::vector<int> ranks(n);
    std::vector<Matrix> maps;
    maps.reserve(n);
    for (int i = 0; i < n; ++i)
        ranks[i] = a.ranks[i] + b.ranks[i];
    for (int i = 0; i < n; ++i) {
        const int tr = ranks[(i + 1) % n];
        maps.push_back(block({{a.maps[i], Matrix::zero(a.spec, a.ranks[(i + 1) % n], b.ranks[i])},
                              {Matrix::zero(a.spec, b.ranks[(i + 1) % n], a.ranks[i]), b.maps[i]}}));
        (void)tr;
    }
    return {a.spec, n, std::move(ranks), std::move(maps)};
}

NSigmaSequence conjugate(const NSigmaSequence& a, const std::vector<Matrix>& u)
{
    if (static_cast<int>(u.size()) != a.n)
        throw std::invalid_argument("conjugate: need one matrix per position");
    std::vector<Matrix> u_inv;
    u_inv.reserve(a.n);
    for (int i = 0; i < a.n; ++i) {
        if (u[i].rows() != a.ranks[i] || u[i].cols() != a.ranks[i])
            throw std::invalid_argument("conjugate: basis matrix shape mismatch");
        u_inv.push_back(inverse(u[i])); // throws if singular
    }
    std::vector<Matrix> maps;
    maps.reserve(a.n);
    for (int i = 0; i < a.n; ++i)
        maps.push_back(u[(i + 1) % a.n] * a.maps[i] * u_inv[i]);
    return {a.spec, a.n, a.ranks, std::move(maps)};
}

bool is_candidate(const NSigmaSequence& a)
{
    for (int i = 0; i < a.n; ++i)
        if (!(a.map_at(i + 1) * a.maps[i]).is_zero())
            return false;
    return true;
}

bool is_exact(const NSigmaSequence& a)
{
    if (!is_candidate(a))
        throw std::invalid_argument("is_exact: sequence is not a candidate");
    // im alpha_i <= ker alpha_{i+1} already holds, so compare cardinalities.
    std::vector<SmithForm> snf;
    snf.reserve(a.n);
    for (const Matrix& m : a.maps)
        snf.push_back(smith_normal_form(m));
    for (int i = 0; i < a.n; ++i) {
        const int next = (i + 1) % a.n;
        if (snf[i].image_size(a.spec) != snf[next].kernel_size(a.spec, a.maps[next].cols()))
            return false;
    }
    return true;
}

// ---------------------------------------------------------------------------

SequenceMorphism::SequenceMorphism(NSigmaSequence source_, NSigmaSequence target_,
                                   std::vector<Matrix> components_)
    : source(std::move(source_)), target(std::move(target_)), components(std::move(components_))
{
    if (source.n != target.n || !(source.spec == target.spec))
        throw std::invalid_argument("SequenceMorphism: incompatible sequences");
    if (static_cast<int>(components.size()) != source.n)
        throw std::invalid_argument("SequenceMorphism: need one component per position");
    for (int i = 0; i < source.n; ++i)
        if (components[i].cols() != source.ranks[i] || components[i].rows() != target.ranks[i])
            throw std::invalid_argument("SequenceMorphism: component shape mismatch at position " +
                                        std::to_string(i + 1));
}

SequenceMorphism SequenceMorphism::identity(const NSigmaSequence& a)
{
    std::vector<Matrix> comp;
    comp.reserve(a.n);
    for (int i = 0; i < a.n; ++i)
        comp.push_back(Matrix::identity(a.spec, a.ranks[i]));
    return {a, a, std::move(comp)};
}

SequenceMorphism SequenceMorphism::zero(const NSigmaSequence& source, const NSigmaSequence& target)
{
    std::vector<Matrix> comp;
    comp.reserve(source.n);
    for (int i = 0; i < source.n; ++i)
        comp.push_back(Matrix::zero(source.spec, target.ranks[i], source.ranks[i]));
    return {source, target, std::move(comp)};
}

int SequenceMorphism::compare(const SequenceMorphism& a, const SequenceMorphism& b)
{
    for (size_t i = 0; i < a.components.size() && i < b.components.size(); ++i)
        if (int c = Matrix::compare(a.components[i], b.components[i]); c != 0)
            return c;
    if (a.components.size() != b.components.size())
        return a.components.size() < b.components.size() ? -1 : 1;
    return 0;
}

bool is_morphism(const SequenceMorphism& phi)
{
    const int n = phi.source.n;
    for (int i = 0; i < n; ++i) {
        const Matrix lhs = phi.components[(i + 1) % n] * phi.source.maps[i];
        const Matrix rhs = phi.target.maps[i] * phi.components[i];
        if (!(lhs == rhs))
            return false;
    }
    return true;
}

bool is_isomorphism(const SequenceMorphism& phi)
{
    if (!is_morphism(phi))
        return false;
    for (const Matrix& c : phi.components)
        if (!is_invertible(c))
            return false;
    return true;
}

bool is_weak_isomorphism(const SequenceMorphism& phi)
{
    if (!is_morphism(phi))
        return false;
    const int n = phi.source.n;
    std::vector<bool> inv(n);
    for (int i = 0; i < n; ++i)
        inv[i] = is_invertible(phi.components[i]);
    for (int i = 0; i < n; ++i)
        if (inv[i] && inv[(i + 1) % n])
            return true;
    return false;
}

SequenceMorphism compose(const SequenceMorphism& after, const SequenceMorphism& before)
{
    if (!(after.source == before.target))
        throw std::invalid_argument("compose: middle sequences differ");
    std::vector<Matrix> comp;
    comp.reserve(before.components.size());
    for (size_t i = 0; i < before.components.size(); ++i)
        comp.push_back(after.components[i] * before.components[i]);
    return {before.source, after.target, std::move(comp)};
}

NSigmaSequence mapping_cone(const SequenceMorphism& phi)
{
    if (!is_morphism(phi))
        throw std::invalid_argument("mapping_cone: input is not a morphism");
    const NSigmaSequence& a = phi.source;
    const NSigmaSequence& b = phi.target;
    const int n = a.n;

    std::vector<int> ranks(n);
    for (int i = 0; i < n; ++i)
        ranks[i] = a.ranks[(i + 1) % n] + b.ranks[i];

    std::vector<Matrix> maps;
    maps.reserve(n);
    for (int i = 0; i < n; ++i) {
        const int ai1 = (i + 1) % n; // source A-coordinate block index
        const int ai2 = (i + 2) % n; // target A-coordinate block index
        maps.push_back(block({{a.maps[ai1].negated(), Matrix::zero(a.spec, a.ranks[ai2], b.ranks[i])},
                              {phi.components[ai1], b.maps[i]}}));
    }
    return {a.spec, n, std::move(ranks), std::move(maps)};
}

} // namespace nangle
