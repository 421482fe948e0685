#ifndef SPARSEPR_RETRIEVAL_ND_HPP
#define SPARSEPR_RETRIEVAL_ND_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sparsepr/retrieval_1d.hpp"
#include "sparsepr/signal.hpp"

namespace sparsepr {

// Produces equispaced squared-intensity samples along a line; either a
// synthetic in-process evaluator or a file-backed lookup.
using LineSampler = std::function<LineSampleSet(
    const Eigen::VectorXd& direction, double step, int sample_max_index)>;

// Builds the sampler that evaluates a known signal directly.
LineSampler make_signal_sampler(const SparseSignal& signal);

// Per-anchor candidate positions: anchor n (atom n of the first line) owns
// the vertex set of a (D-1)-cube, one vertex of which is the true atom (up
// to the lines' shift normalizations).
struct CandidateSet {
  std::vector<std::vector<Eigen::VectorXd>> per_anchor;

  std::vector<Eigen::VectorXd> all() const;
  double diameter() const;
};

// Sampling geometry of a full run: D base directions plus D-1 adaptive ones
// that separate the first and last anchor's candidates (ordering condition).
struct DirectionBundle {
  std::vector<Eigen::VectorXd> base;
  std::vector<Eigen::VectorXd> adaptive;
};

// alignment[d][i] = index on line d of the atom whose coefficient modulus
// matches atom i of line 0; alignment[0] is the identity.
using ModulusAlignment = std::vector<std::vector<int>>;

struct RetrieveConfig {
  int samples_per_line = -1;  // M; -1 means the minimal 2N(N-1)+1
  std::uint64_t seed = 0;
  int max_tries = 1000;
  double sep_min_rel = 1e-6;        // ordering-condition margin, x diameter
  double snap_tol_rel = 1e-6;       // candidate consistency, x diameter
  double collision_gap_rel = 1e-9;  // collision checks, x diameter
  double modulus_tol_rel = 1e-6;    // modulus matching, x largest |c|
  std::optional<double> match_tol;  // forwarded to retrieve_line
  // Pre-chosen adaptive directions (validated against the ordering
  // condition) instead of random search.
  std::vector<Eigen::VectorXd> forced_adaptive;
  bool parallel_lines = false;
};

struct LineReport {
  Eigen::VectorXd direction;
  int samples_used = 0;
  bool reflection_fixed = false;
};

struct RetrievalReport {
  std::vector<LineReport> lines;
  long long samples_consumed = 0;
  int direction_tries = 0;
  bool role_swapped = false;  // generic 2D mode only
};

struct RetrievalResult {
  SparseSignal signal;
  RetrievalReport report;
};

// Aligns atoms across lines by coefficient modulus. Throws AmbiguousMatch
// when two moduli on any line are within 2 tol of each other or the nearest
// map fails to be a bijection.
ModulusAlignment match_by_modulus(const std::vector<LabeledProjection>& lines,
                                  double tol);

// Candidate sets from axis-line solutions: anchor i keeps its first-line
// position as coordinate 1 and, per further axis d, either the matched
// position or its reflection about that line's extent.
CandidateSet build_candidates(
    const std::vector<LabeledProjection>& axis_solutions,
    const ModulusAlignment& alignment);

// Same construction for an arbitrary base (Thm-3 style): candidates are
// assembled in base coordinates and mapped through the inverse transpose of
// the direction matrix.
CandidateSet build_candidates(
    const std::vector<LabeledProjection>& base_solutions,
    const ModulusAlignment& alignment,
    const std::vector<Eigen::VectorXd>& base_directions);

// True when max_{S in first} <dir,S> + margin <= min_{S in last} <dir,S>.
bool ordering_condition(const CandidateSet& candidates,
                        const Eigen::VectorXd& direction, double margin);

// Projections of the candidate set stay collision-free along `direction`:
// projected points are pairwise separated, and so are the projections of
// any two difference vectors that differ as vectors. (Reflected vertex
// pairs of distinct anchors repeat difference vectors exactly; those cannot
// be separated by any direction and do not affect the per-transversal
// recovery, so they are exempt.)
bool projections_collision_free(const std::vector<Eigen::VectorXd>& points,
                                const Eigen::VectorXd& direction, double gap);

// Draws random unit directions (cone-biased around the first axis, then
// uniform) until one satisfies the ordering condition with margin sep_min,
// is linearly independent of excluded_span, and keeps the projected
// candidates collision-free. Throws DirectionSearchExhausted after
// max_tries draws.
Eigen::VectorXd choose_adaptive_direction(
    const CandidateSet& candidates,
    const std::vector<Eigen::VectorXd>& excluded_span, std::uint64_t rng_seed,
    int max_tries, double sep_min, double collision_gap,
    int* tries_used = nullptr);

// Solves the per-anchor linear system B^T T = (first-line position, adaptive
// positions) with B = (base_1 | theta_1 | ... | theta_{D-1}), then shifts
// the solution into the candidate frame and verifies every atom lands within
// snap_tol of one of its anchor's candidates.
std::vector<Eigen::VectorXd> resolve_translations(
    const std::vector<LabeledProjection>& base_solutions,
    const std::vector<LabeledProjection>& adaptive_solutions,
    const DirectionBundle& directions, const ModulusAlignment& alignment,
    const CandidateSet& candidates, double snap_tol);

// Full adaptive pipeline: axis sampling, per-line 1D retrieval, candidate
// construction, adaptive direction choice, adaptive-line retrieval with
// reflection fixing, and the linear solve. The result equals the true
// signal up to the inevitable ambiguities; exactly (2D-1)(M+1) samples are
// consumed for N >= 2.
RetrievalResult retrieve_nd(const LineSampler& sampler,
                            const StructureKernel& kernel, int dim,
                            int atom_count, double step,
                            const RetrieveConfig& config);

// Bivariate variant with three fixed generic directions: psi_1, psi_2 play
// the base role and psi_3 the adaptive one; when the ordering condition
// fails for that assignment, the roles of psi_1 and psi_2 are interchanged.
// Throws GenericityFailure when the directions are pairwise dependent or
// both role assignments fail.
RetrievalResult retrieve_2d_generic(const LineSampler& sampler,
                                    const StructureKernel& kernel,
                                    const Eigen::VectorXd& psi_1,
                                    const Eigen::VectorXd& psi_2,
                                    const Eigen::VectorXd& psi_3,
                                    int atom_count, double step,
                                    const RetrieveConfig& config);

}  // namespace sparsepr

#endif
