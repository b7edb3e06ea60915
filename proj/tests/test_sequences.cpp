#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nangle/angulation.hpp"
#include "nangle/random.hpp"

using namespace nangle;

namespace {
const RingSpec z4 = RingSpec::z_mod_p2(2);
const RingSpec z9 = RingSpec::z_mod_p2(3);
} // namespace

TEST_CASE("trivial sequences")
{
    const NSigmaSequence g = trivial_gamma(z4, 4, 1, 1);
    CHECK(g.ranks == std::vector<int>{1, 1, 0, 0});
    CHECK(g.maps[0] == Matrix::identity(z4, 1));
    CHECK(g.maps[1].rows() == 0);
    CHECK(is_candidate(g));
    CHECK(is_exact(g));

    CHECK(trivial_gamma(z4, 4, 0, 2) == zero_sequence(z4, 4));

    const NSigmaSequence w = trivial_gamma(z4, 4, 2, 4); // identity on the wrap map
    CHECK(w.ranks == std::vector<int>{2, 0, 0, 2});
    CHECK(w.maps[3] == Matrix::identity(z4, 2));

    CHECK_THROWS_AS(trivial_gamma(z4, 4, 1, 5), std::invalid_argument);
}

TEST_CASE("sequences enforce the parity rule at construction")
{
    CHECK_THROWS_AS(f_p_sequence(z9, 5, 1), std::invalid_argument); // 2*3 != 0 in Z/9
    CHECK_THROWS_AS(zero_sequence(RingSpec::z_mod_p2(5), 7), std::invalid_argument);
    CHECK(f_p_sequence(z4, 5, 1).n == 5);                      // 2*2 = 0 in Z/4
    CHECK(f_p_sequence(RingSpec::dual_numbers(2), 7, 1).n == 7);
    CHECK(zero_sequence(z9, 6).n == 6);
}

TEST_CASE("f_p sequences")
{
    const NSigmaSequence f = f_p_sequence(z4, 4, 1);
    for (const Matrix& m : f.maps)
        CHECK(m == Matrix::from_rows(z4, {{2}}));
    CHECK(is_candidate(f));
    CHECK(is_exact(f)); // |im 2| = 2 = |ker 2| over Z/4

    CHECK(f_p_sequence(z4, 4, 0) == zero_sequence(z4, 4));

    const NSigmaSequence f2 = f_p_sequence(z9, 4, 2);
    for (const Matrix& m : f2.maps)
        CHECK(m == Matrix::scalar(z9, 2, 3));
}

TEST_CASE("rotations")
{
    const NSigmaSequence f = f_p_sequence(z4, 4, 1);
    CHECK(rotate_left(f) == f); // (-1)^4 * 2 = 2

    // n = 5 over Z/4: (-1)^5 * 2 = -2 = 2, so F(p) is again fixed
    const NSigmaSequence f5 = f_p_sequence(z4, 5, 1);
    CHECK(rotate_left(f5) == f5);

    SplitMix64 rng(3);
    for (int t = 0; t < 50; ++t) {
        const NSigmaSequence a = random_candidate(rng, z4, 4);
        CHECK(rotate_right(rotate_left(a)) == a);
        CHECK(rotate_left(rotate_right(a)) == a);

        // n-fold rotation returns the original up to (-1)^n on every map
        NSigmaSequence r = a;
        for (int i = 0; i < a.n; ++i)
            r = rotate_left(r);
        NSigmaSequence expect = a;
        if (a.n % 2 != 0)
            for (Matrix& m : expect.maps)
                m = m.negated();
        CHECK(r == expect);
    }

    // rotating a trivial summand walks the identity around the cycle
    NSigmaSequence g = trivial_gamma(z4, 4, 1, 1);
    NSigmaSequence r = rotate_left(g);
    CHECK(r.ranks == std::vector<int>{1, 0, 0, 1});
    CHECK(r.maps[3] == Matrix::identity(z4, 1)); // slot 4, sign (+1)^4
}

TEST_CASE("direct sums and conjugation")
{
    SplitMix64 rng(5);
    const NSigmaSequence a = random_candidate(rng, z4, 4);
    CHECK(direct_sum(zero_sequence(z4, 4), a) == a);

    std::vector<Matrix> ids;
    for (int r : a.ranks)
        ids.push_back(Matrix::identity(z4, r));
    CHECK(conjugate(a, ids) == a);

    for (int t = 0; t < 30; ++t) {
        const NSigmaSequence b = random_candidate(rng, z4, 4);
        const auto u = random_gl_tuple(rng, z4, b.ranks);
        const NSigmaSequence c = conjugate(b, u);
        CHECK(is_candidate(c));
        CHECK(is_exact(c) == is_exact(b));
        // conjugating back restores the original
        std::vector<Matrix> u_inv;
        for (const Matrix& m : u)
            u_inv.push_back(inverse(m));
        CHECK(conjugate(c, u_inv) == b);
    }
}

TEST_CASE("candidate and exactness predicates")
{
    CHECK(is_candidate(f_p_sequence(z4, 4, 3)));
    CHECK(is_candidate(trivial_gamma(z4, 4, 1, 3)));

    // consecutive identities do not compose to zero
    const NSigmaSequence bad(
        z4, 4, {1, 1, 1, 0},
        {Matrix::identity(z4, 1), Matrix::identity(z4, 1), Matrix::zero(z4, 0, 1),
         Matrix::zero(z4, 1, 0)});
    CHECK_FALSE(is_candidate(bad));
    CHECK_THROWS_AS(is_exact(bad), std::invalid_argument);

    // zero maps on nonzero ranks: candidate but not exact
    const NSigmaSequence zz(z4, 4, {1, 1, 1, 1},
                            {Matrix::zero(z4, 1, 1), Matrix::zero(z4, 1, 1),
                             Matrix::zero(z4, 1, 1), Matrix::zero(z4, 1, 1)});
    CHECK(is_candidate(zz));
    CHECK_FALSE(is_exact(zz));
}

TEST_CASE("morphisms and weak isomorphisms")
{
    const NSigmaSequence f = f_p_sequence(z4, 4, 1);
    CHECK(is_isomorphism(SequenceMorphism::identity(f)));

    // componentwise 0 except p on the last object
    SequenceMorphism phi = SequenceMorphism::zero(f, f);
    phi.components[3] = Matrix::from_rows(z4, {{2}});
    CHECK(is_morphism(phi));
    CHECK_FALSE(is_weak_isomorphism(phi));

    // two adjacent invertible legs suffice
    const NSigmaSequence a = angle_on_base(Matrix::from_rows(z4, {{2}}), 4);
    SequenceMorphism psi = SequenceMorphism::identity(f);
    CHECK(is_weak_isomorphism(psi));

    SequenceMorphism bad = SequenceMorphism::zero(f, f);
    bad.components[0] = Matrix::identity(z4, 1);
    CHECK_FALSE(is_morphism(bad)); // square 1 fails: 0*p != p*1
    (void)a;
}

TEST_CASE("weak isomorphism needs two adjacent invertible legs")
{
    // retraction-style morphism: identities on the first two positions,
    // non-invertible elsewhere
    const NSigmaSequence f = f_p_sequence(z4, 4, 1);
    const NSigmaSequence big = direct_sum(f, trivial_gamma(z4, 4, 1, 3));
    std::vector<Matrix> comp;
    comp.push_back(Matrix::identity(z4, 1));
    comp.push_back(Matrix::identity(z4, 1));
    comp.push_back(Matrix::from_rows(z4, {{1, 0}}));
    comp.push_back(Matrix::from_rows(z4, {{1, 0}}));
    const SequenceMorphism retract(big, f, comp);
    REQUIRE(is_morphism(retract));
    CHECK(is_weak_isomorphism(retract));
    CHECK_FALSE(is_isomorphism(retract));
}

TEST_CASE("composition applies the right factor first")
{
    const NSigmaSequence f = f_p_sequence(z4, 4, 1);
    SequenceMorphism g = SequenceMorphism::identity(f);
    SequenceMorphism h = SequenceMorphism::identity(f);
    for (int i = 0; i < 4; ++i) {
        g.components[i] = Matrix::from_rows(z4, {{3}});
        h.components[i] = Matrix::from_rows(z4, {{2}});
    }
    const SequenceMorphism gh = compose(g, h);
    for (int i = 0; i < 4; ++i)
        CHECK(gh.components[i] == g.components[i] * h.components[i]);
    CHECK(gh.source == h.source);
    CHECK(gh.target == g.target);
}

TEST_CASE("mapping cone fixtures")
{
    const NSigmaSequence f = f_p_sequence(z4, 4, 1);
    CHECK(mapping_cone(SequenceMorphism::identity(f)).ranks == std::vector<int>{2, 2, 2, 2});

    // cone(id): maps [[-2, 0], [1, 2]] at every position
    const NSigmaSequence cid = mapping_cone(SequenceMorphism::identity(f));
    for (const Matrix& m : cid.maps)
        CHECK(m == Matrix::from_rows(z4, {{-2, 0}, {1, 2}}));
    CHECK(is_candidate(cid));

    // cone(0) is block-diagonal(-shifted source, target)
    const NSigmaSequence c0 = mapping_cone(SequenceMorphism::zero(f, f));
    for (const Matrix& m : c0.maps)
        CHECK(m == Matrix::from_rows(z4, {{-2, 0}, {0, 2}}));

    // cone of a morphism of candidates is a candidate
    SplitMix64 rng(9);
    for (int t = 0; t < 25; ++t) {
        const NSigmaSequence a = random_member(rng, z4, 4, 1, 2);
        const NSigmaSequence cone = mapping_cone(SequenceMorphism::identity(a));
        CHECK(is_candidate(cone));
        // explicit contracting homotopy with [[0, 1], [0, 0]] blocks
        ContractingHomotopy h;
        for (int i = 0; i < a.n; ++i) {
            const int r_i1 = a.rank_at(i + 1), r_i2 = a.rank_at(i + 2), r_i = a.ranks[i];
            Matrix th(z4, r_i1 + r_i, r_i2 + r_i1);
            for (int k = 0; k < r_i1; ++k)
                th.at(k, r_i2 + k) = 1;
            h.theta.push_back(th);
        }
        CHECK(homotopy_valid(cone, h));
    }

    CHECK_THROWS_AS(mapping_cone(SequenceMorphism(
                        f, f, {Matrix::identity(z4, 1), Matrix::zero(z4, 1, 1),
                               Matrix::zero(z4, 1, 1), Matrix::zero(z4, 1, 1)})),
                    std::invalid_argument);
}

TEST_CASE("candidacy and exactness invariant under sums")
{
    SplitMix64 rng(13);
    for (int t = 0; t < 20; ++t) {
        const NSigmaSequence a = random_candidate(rng, z4, 4);
        const NSigmaSequence b = random_candidate(rng, z4, 4);
        const NSigmaSequence s = direct_sum(a, b);
        CHECK(is_candidate(s));
        CHECK(is_exact(s) == (is_exact(a) && is_exact(b)));
    }
}

TEST_CASE("invariance is exhaustive at rank <= 1")
{
    // every candidate with ranks in {0,1} over Z/4, conjugated by every unit
    // tuple; exactness and candidacy must be unchanged
    for (int rank_bits = 0; rank_bits < 16; ++rank_bits) {
        std::vector<int> ranks(4);
        for (int q = 0; q < 4; ++q)
            ranks[q] = (rank_bits >> q) & 1;
        std::vector<int> dims(4);
        long long total = 1;
        for (int i = 0; i < 4; ++i) {
            dims[i] = ranks[i] * ranks[(i + 1) % 4];
            for (int k = 0; k < dims[i]; ++k)
                total *= 4;
        }
        for (long long code = 0; code < total; ++code) {
            long long c = code;
            std::vector<Matrix> maps;
            for (int i = 0; i < 4; ++i) {
                Matrix m(z4, ranks[(i + 1) % 4], ranks[i]);
                if (dims[i] == 1) {
                    m.at(0, 0) = static_cast<int>(c % 4);
                    c /= 4;
                }
                maps.push_back(std::move(m));
            }
            const NSigmaSequence a(z4, 4, ranks, maps);
            if (!is_candidate(a))
                continue;
            const bool exact = is_exact(a);
            for (int units = 0; units < 16; ++units) {
                std::vector<Matrix> u;
                for (int q = 0; q < 4; ++q) {
                    Matrix m = Matrix::identity(z4, ranks[q]);
                    if (ranks[q] == 1)
                        m.at(0, 0) = ((units >> q) & 1) ? 3 : 1;
                    u.push_back(std::move(m));
                }
                const NSigmaSequence conj = conjugate(a, u);
                CHECK(is_candidate(conj));
                CHECK(is_exact(conj) == exact);
            }
            const NSigmaSequence dbl = direct_sum(a, a);
            CHECK(is_candidate(dbl));
            CHECK(is_exact(dbl) == exact);
        }
    }
}
