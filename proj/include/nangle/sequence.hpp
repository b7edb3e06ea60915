#pragma once

// n-Sigma-sequences over the category of finitely generated free R-modules
// with the suspension hard-wired to the identity functor.  A sequence is n
// object ranks plus n structure maps
//
//     alpha_i : R^{r_i} -> R^{r_{i+1}}      (indices cyclic, position n+1 = 1)
//
// Slots are 1-based in the public API (slot 1 is the base map); internally
// maps[i] is the map out of position i+1, i.e. maps[s-1] sits at slot s.

#include "nangle/matrix.hpp"

#include <vector>

namespace nangle {

struct NSigmaSequence {
    RingSpec spec;
    int n = 0;
    std::vector<int> ranks;   // r_1..r_n
    std::vector<Matrix> maps; // maps[i] : R^{ranks[i]} -> R^{ranks[(i+1)%n]}

    NSigmaSequence(RingSpec spec, int n, std::vector<int> ranks, std::vector<Matrix> maps);

    int rank_at(int i) const { return ranks[mod(i)]; }             // 0-based, cyclic
    const Matrix& map_at(int i) const { return maps[mod(i)]; }     // 0-based, cyclic
    int mod(int i) const { return ((i % n) + n) % n; }

    int total_rank() const;
    bool operator==(const NSigmaSequence&) const = default;

    static int compare(const NSigmaSequence& a, const NSigmaSequence& b);
};

// Zero object at every position.
NSigmaSequence zero_sequence(RingSpec spec, int n);

// Identity map R^rank -> R^rank at the given slot (1-based), zero elsewhere.
NSigmaSequence trivial_gamma(RingSpec spec, int n, int rank, int slot);

// All ranks equal, every map p * identity.
NSigmaSequence f_p_sequence(RingSpec spec, int n, int rank);

// Rotations; the map wrapping past position 1 picks up the sign (-1)^n.
NSigmaSequence rotate_left(const NSigmaSequence& a);
NSigmaSequence rotate_right(const NSigmaSequence& a);

NSigmaSequence direct_sum(const NSigmaSequence& a, const NSigmaSequence& b);

// Basis change: alpha_i -> U_{i+1} * alpha_i * U_i^{-1} (indices cyclic).
NSigmaSequence conjugate(const NSigmaSequence& a, const std::vector<Matrix>& u);

// All n cyclic consecutive composites vanish.
bool is_candidate(const NSigmaSequence& a);

// |im alpha_i| == |ker alpha_{i+1}| for every cyclic i; requires candidacy.
bool is_exact(const NSigmaSequence& a);

// ---------------------------------------------------------------------------

struct SequenceMorphism {
    NSigmaSequence source;
    NSigmaSequence target;
    std::vector<Matrix> components; // components[i] : source ranks[i] -> target ranks[i]

    SequenceMorphism(NSigmaSequence source, NSigmaSequence target, std::vector<Matrix> components);

    static SequenceMorphism identity(const NSigmaSequence& a);
    static SequenceMorphism zero(const NSigmaSequence& source, const NSigmaSequence& target);

    bool operator==(const SequenceMorphism&) const = default;
    static int compare(const SequenceMorphism& a, const SequenceMorphism& b);
};

// All n commuting squares hold: phi_{i+1} * alpha_i = beta_i * phi_i,
// including the wrap square with phi_{n+1} identified with phi_1.
bool is_morphism(const SequenceMorphism& phi);

bool is_isomorphism(const SequenceMorphism& phi);

// Some cyclically adjacent pair phi_i, phi_{i+1} are both invertible.
bool is_weak_isomorphism(const SequenceMorphism& phi);

// compose(after, before): components multiply as Mat(after) * Mat(before).
SequenceMorphism compose(const SequenceMorphism& after, const SequenceMorphism& before);

// Cone of phi : A -> B, position i carrying A_{i+1} (+) B_i and the map
//     [ -alpha_{i+1}   0      ]
//     [  phi_{i+1}     beta_i ]
NSigmaSequence mapping_cone(const SequenceMorphism& phi);

} // namespace nangle
