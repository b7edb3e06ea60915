#pragma once

// Goodness checkers and bounded searches for morphisms of n-angles.
//
//   good           the mapping cone is an n-angle
//   Verdier good   each phi_i factors through S_i arising from two
//                  interlocking octahedra sharing their middle row
//   middling good  the morphism extends to an (n+1) x (n+1) grid whose
//                  first n rows and columns are n-angles, all squares
//                  commuting except the corner, which anticommutes for odd n
//
// Searches are complete within their stated bounds and always distinguish
// "no extension exists within the bounds" from "ran out of budget".

#include "nangle/angulation.hpp"

#include <cstdint>
#include <string>

namespace nangle {

bool is_good(const SequenceMorphism& phi);

// ---------------------------------------------------------------------------
// Fill-ins for a commuting square between two n-angles
//
//     A_1 --alpha_1--> A_2 --...
//      |phi_1           |phi_2
//     B_1 --beta_1---> B_2 --...
//
// All completions (phi_3..phi_n) making the full diagram a morphism, via
// one linear commutation system.  Deterministic enumeration order.

std::vector<SequenceMorphism> enumerate_fill_ins(const NSigmaSequence& a, const NSigmaSequence& b,
                                                 const Matrix& phi1, const Matrix& phi2,
                                                 std::uint64_t budget);

// First enumerated fill-in whose cone is an n-angle; nullopt only when the
// budget ran out before one was found.
std::optional<SequenceMorphism> find_good_fill_in(const NSigmaSequence& a, const NSigmaSequence& b,
                                                  const Matrix& phi1, const Matrix& phi2,
                                                  std::uint64_t budget);

// ---------------------------------------------------------------------------
// Octahedra
//
// The data of an octahedron on composable maps f : A_1 -> A_2 and
// g : A_2 -> B_2: three rows (n-angles on f, g*f and g), two vertical
// families and the diagonal maps lambda_j : A_j -> C_{j-1}:
//
//     A_1 --f-----> A_2 --alpha_2--> A_3 --...--> A_n ----> A_1
//      ||            |g              |phi_3        |phi_n    ||
//     A_1 --g*f---> B_2 --beta_2---> B_3 --...--> B_n ----> A_1
//      |f            ||              |psi_3        |psi_n    |f
//     A_2 --g-----> B_2 --gamma_2--> C_3 --...--> C_n ----> A_2
//
// The associated n-angle runs over A_3, A_4 (+) B_3, A_5 (+) B_4 (+) C_3, ...
// with the block maps checked in verify_octahedron.

struct OctahedronWitness {
    NSigmaSequence a, b, c;     // rows on f, g*f, g
    std::vector<Matrix> phi;    // n components A -> B; phi[0] = id, phi[1] = g
    std::vector<Matrix> psi;    // n components B -> C; psi[0] = f, psi[1] = id
    std::vector<Matrix> lambda; // lambda[k] = lambda_{k+4} : A_{k+4} -> C_{k+3}, k = 0..n-4

    OctahedronWitness(NSigmaSequence a, NSigmaSequence b, NSigmaSequence c,
                      std::vector<Matrix> phi, std::vector<Matrix> psi,
                      std::vector<Matrix> lambda);
};

// All commutation relations of the diagram above (morphism squares plus the
// diagonal identities that make the associated sequence a complex).
bool octahedron_relations_hold(const OctahedronWitness& w);

// Throws when the relations fail.
NSigmaSequence associated_n_angle(const OctahedronWitness& w);

// Relations hold, rows are n-angles, and the associated sequence is one too.
bool verify_octahedron(const OctahedronWitness& w);

// Staged search over fill-in families for the rows (canonical rows built on
// the bases); nullopt when the budget ran out.
std::optional<OctahedronWitness> search_octahedron(const NSigmaSequence& a, const Matrix& g,
                                                   std::uint64_t budget);

// ---------------------------------------------------------------------------
// Verdier goodness

struct VerdierWitness {
    NSigmaSequence s_row; // n-angle on phi_2 * alpha_1 = beta_1 * phi_1, shared by both octahedra
    NSigmaSequence t_row; // n-angle on phi_2
    NSigmaSequence r_row; // n-angle on phi_1
    std::vector<Matrix> mu1, mu2;     // first octahedron: A -> S, S -> T
    std::vector<Matrix> lambda_t;     // diagonals A_j -> T_{j-1}, j = 4..n
    std::vector<Matrix> nu1, nu2;     // second octahedron: R -> S, S -> B
    std::vector<Matrix> gamma_r;      // diagonals R_j -> B_{j-1}, j = 4..n
};

// Both octahedra commute, all rows are n-angles, and phi_i = nu2_i * mu1_i.
bool verify_verdier(const SequenceMorphism& phi, const VerdierWitness& w);

struct VerdierSearchResult {
    std::optional<VerdierWitness> witness;
    bool exhausted = false; // full staged space scanned (within canonical rows)
    std::uint64_t nodes = 0;
};

VerdierSearchResult search_verdier(const SequenceMorphism& phi, std::uint64_t budget);

// ---------------------------------------------------------------------------
// Middling goodness

struct MiddlingDiagram {
    RingSpec spec;
    int n = 0;
    std::vector<std::vector<int>> ranks;    // ranks[i][j], rows x cols, 0-based
    std::vector<std::vector<Matrix>> hmaps; // hmaps[i][j] : (i,j) -> (i, j+1 mod n)
    std::vector<std::vector<Matrix>> vmaps; // vmaps[i][j] : (i,j) -> (i+1 mod n, j)

    MiddlingDiagram(RingSpec spec, int n, std::vector<std::vector<int>> ranks,
                    std::vector<std::vector<Matrix>> hmaps, std::vector<std::vector<Matrix>> vmaps);

    NSigmaSequence row(int i) const;
    NSigmaSequence column(int j) const;
    MiddlingDiagram transposed() const;
};

// Rows and columns in the class, every square commuting, corner square
// following the parity rule.
bool verify_middling(const MiddlingDiagram& d);

enum class SearchVerdict { Found, NoneExhaustive, NoneWithinBudget };

std::string to_string(SearchVerdict v);

struct MiddlingSearchResult {
    SearchVerdict verdict = SearchVerdict::NoneWithinBudget;
    std::optional<MiddlingDiagram> diagram;
    std::uint64_t column_candidates = 0; // per-column representatives, summed
    std::uint64_t combos_total = 0;
    std::uint64_t combos_processed = 0;
    std::uint64_t nodes = 0;
};

// Complete search for a grid extension of phi with every interior object
// rank bounded by rank_bound.  Column candidates are enumerated up to
// isomorphisms fixing the first two rows (such isomorphisms carry grid
// solutions to grid solutions, so completeness is preserved); row maps are
// then solved strip by strip from the commutation systems.  NoneExhaustive
// certifies that no extension exists within the rank bound.
MiddlingSearchResult search_middling_extension(const SequenceMorphism& phi, int rank_bound,
                                               std::uint64_t budget, int jobs = 1);

// ---------------------------------------------------------------------------
// The not-middling-good morphism

// phi : F(p) -> F(p) with components (0, ..., 0, p).
SequenceMorphism counterexample_morphism(int n, RingSpec spec);

// Shape constraints forced on one unknown map by a strip's linear system:
// each cell is the forced canonical value ("0", "2", ...) or "*" when free;
// "!" marks an unsolvable system.
struct ForcedShape {
    int row_index = 0; // grid row of the unknown map (0-based)
    int strip = 0;     // column pair (j, j+1), identified by j
    int rows = 0, cols = 0;
    std::vector<std::string> cells;
};

struct CounterexampleReport {
    int n = 0;
    RingSpec spec;
    int rank_bound = 0;
    bool morphism_ok = false;
    bool weak_isomorphism = false;
    bool good = false;
    MiddlingSearchResult search;
    // Normal-form trace: Lemma-style column decompositions plus the shapes
    // the commutation systems force on the third row of the distinguished
    // maximal-rank column combination.
    std::vector<std::string> column_decompositions; // one line per column
    std::vector<ForcedShape> third_row_shapes;
    bool trace_row_completable = false; // the traced combo admits a third-row completion
};

CounterexampleReport run_counterexample(int n, RingSpec spec, int rank_bound, std::uint64_t budget,
                                        int jobs = 1);

} // namespace nangle
