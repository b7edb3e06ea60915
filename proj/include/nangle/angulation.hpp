#pragma once

// Membership and contractibility for the exotic angulation on free R-modules
// with identity suspension: the distinguished class consists of all sequences
// isomorphic to (contractible candidate) (+) F(p), where F(p) is the
// sequence with every map p * identity.
//
// Two independent deciders are provided and cross-checked:
//   * decide_contractible_homotopy solves the homotopy identities
//         1 = Theta_i * alpha_i + alpha_{i-1} * Theta_{i-1}
//     as one linear system;
//   * strip_units splits off trivial summands at unit entries until every
//     map entry lies in (p), then classifies the reduced core by its
//     monodromy (see docs/membership.md for the correctness argument).
//
// oracle_is_n_angle re-decides membership by brute force over all block
// forms and all conjugating tuples; it exists purely to validate the fast
// path at desk scale.

#include "nangle/sequence.hpp"

#include <optional>

namespace nangle {

struct ContractingHomotopy {
    // theta[i] : R^{ranks[i+1]} -> R^{ranks[i]} (cyclic; theta[n-1] out of position 1)
    std::vector<Matrix> theta;
};

bool homotopy_valid(const NSigmaSequence& a, const ContractingHomotopy& h);

std::optional<ContractingHomotopy> decide_contractible_homotopy(const NSigmaSequence& a);

// ---------------------------------------------------------------------------

struct Decomposition {
    RingSpec spec;
    int n = 0;
    std::vector<std::pair<int, int>> trivial_summands; // (slot 1-based, multiplicity), slots ascending
    int fp_rank = 0;
    std::vector<Matrix> witness; // conjugate(block_form(), witness) == input, exactly
    std::optional<NSigmaSequence> residual;
    std::string residual_reason; // empty when residual is absent

    // Canonical block form: trivial summands by ascending slot, then F(p)^fp
    // (or the residual core when present).
    NSigmaSequence block_form() const;
    NSigmaSequence reassemble() const;
};

// Requires is_candidate(a).  Splits off one rank-1 trivial summand per unit
// entry (scanning maps in slot order, row-major within a map) until all
// entries lie in (p); then either identifies the core with F(p)^f or
// returns it as a residual certified non-isomorphic to any F(p)^f.
Decomposition strip_units(const NSigmaSequence& a);

// For a sequence whose maps all have entries in (p): write alpha_i = p * B_i
// and return the residue-field product B_n * ... * B_1, or nullopt when the
// ranks are not all equal.  Throws if some entry lies outside (p).
std::optional<ResidueMatrix> monodromy(const NSigmaSequence& reduced);

bool is_n_angle(const NSigmaSequence& a);
std::optional<Decomposition> n_angle_certificate(const NSigmaSequence& a);

// ---------------------------------------------------------------------------
// Block forms and the brute-force oracle

struct BlockForm {
    std::vector<int> slot_mult; // slot_mult[s-1] = multiplicity of the slot-s trivial
    int fp_rank = 0;
    NSigmaSequence seq;
};

// All block forms whose rank vector equals `ranks`, in deterministic order.
std::vector<BlockForm> enumerate_block_forms(RingSpec spec, int n, const std::vector<int>& ranks);

// |GL_r(R)| without enumeration.
std::uint64_t gl_size(const RingSpec& spec, int r);

// All invertible r x r matrices together with their inverses (cached).
// Throws BudgetExceeded when the raw carrier |R|^(r^2) is too large to scan.
const std::vector<std::pair<Matrix, Matrix>>& all_gl(const RingSpec& spec, int r);

// True iff some conjugation of some block form equals `a` exactly.  The
// total number of conjugating tuples must not exceed `budget`.
bool oracle_is_n_angle(const NSigmaSequence& a, std::uint64_t budget);

// ---------------------------------------------------------------------------

// Canonical member with the prescribed base map alpha_1 (built from the
// Smith form of the base).
NSigmaSequence angle_on_base(const Matrix& base, int n);

struct SummandLemmaReport {
    bool base_is_p = false; // otherwise the base is the 1x1 zero map
    int fp_rank = 0;
    std::vector<std::pair<int, int>> trivial_summands;
    bool found = false;
};

// For a member with 1x1 base (p) the decomposition must contain an F(p)
// summand; for 1x1 base (0) it must contain the two rotated rank-1 trivial
// summands (slots 2 and n).
SummandLemmaReport verify_summand_lemma(const NSigmaSequence& a);

} // namespace nangle
