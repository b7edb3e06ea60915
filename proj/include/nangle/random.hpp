#pragma once

// Seeded generators for matrices, basis tuples, members and candidates.
// All draws go through SplitMix64 so results are identical across platforms.

#include "nangle/angulation.hpp"
#include "nangle/util.hpp"

namespace nangle {

inline Matrix random_matrix(SplitMix64& rng, RingSpec spec, int rows, int cols)
{
    Matrix m(spec, rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            m.at(r, c) = static_cast<int>(rng.below(spec.size()));
    return m;
}

inline Matrix random_gl(SplitMix64& rng, RingSpec spec, int r)
{
    for (;;) {
        Matrix m = random_matrix(rng, spec, r, r);
        if (residue_matrix(m).invertible())
            return m;
    }
}

inline std::vector<Matrix> random_gl_tuple(SplitMix64& rng, RingSpec spec,
                                           const std::vector<int>& ranks)
{
    std::vector<Matrix> u;
    u.reserve(ranks.size());
    for (int r : ranks)
        u.push_back(random_gl(rng, spec, r));
    return u;
}

// Random direct sum of trivial summands and an F(p) part.
inline NSigmaSequence random_block_form(SplitMix64& rng, RingSpec spec, int n, int max_fp_rank,
                                        int max_trivials)
{
    NSigmaSequence acc = zero_sequence(spec, n);
    const int trivials = static_cast<int>(rng.below(max_trivials + 1));
    for (int t = 0; t < trivials; ++t)
        acc = direct_sum(acc, trivial_gamma(spec, n, 1, 1 + static_cast<int>(rng.below(n))));
    acc = direct_sum(acc, f_p_sequence(spec, n, static_cast<int>(rng.below(max_fp_rank + 1))));
    return acc;
}

inline NSigmaSequence random_member(SplitMix64& rng, RingSpec spec, int n, int max_fp_rank = 2,
                                    int max_trivials = 3)
{
    NSigmaSequence form = random_block_form(rng, spec, n, max_fp_rank, max_trivials);
    return conjugate(form, random_gl_tuple(rng, spec, form.ranks));
}

// Any tuple of maps with all entries in (p) is a candidate; mixing one in
// produces candidates that are usually not members.
inline NSigmaSequence random_reduced(SplitMix64& rng, RingSpec spec, int n, int max_rank)
{
    std::vector<int> ranks(n);
    for (int q = 0; q < n; ++q)
        ranks[q] = static_cast<int>(rng.below(max_rank + 1));
    std::vector<Matrix> maps;
    for (int i = 0; i < n; ++i) {
        Matrix m(spec, ranks[(i + 1) % n], ranks[i]);
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                m.at(r, c) = spec.mul(spec.uniformizer(),
                                      static_cast<int>(rng.below(spec.size())));
        maps.push_back(std::move(m));
    }
    return {spec, n, std::move(ranks), std::move(maps)};
}

inline NSigmaSequence random_candidate(SplitMix64& rng, RingSpec spec, int n, int max_fp_rank = 1,
                                       int max_trivials = 2, int max_reduced_rank = 2)
{
    NSigmaSequence form = direct_sum(random_block_form(rng, spec, n, max_fp_rank, max_trivials),
                                     random_reduced(rng, spec, n, max_reduced_rank));
    return conjugate(form, random_gl_tuple(rng, spec, form.ranks));
}

} // namespace nangle
