#ifndef SPARSEPR_ORACLE_HPP
#define SPARSEPR_ORACLE_HPP

#include <vector>

#include <Eigen/Core>

#include "sparsepr/retrieval_1d.hpp"
#include "sparsepr/retrieval_nd.hpp"

namespace sparsepr {

// Unlabeled positive pairwise differences of an N-point set (N(N-1)/2 of
// them); the input of the classical turnpike problem.
struct DifferenceMultiset {
  std::vector<double> diffs;

  static DifferenceMultiset of(const std::vector<double>& positions);
};

// Exhaustive turnpike backtracking: every position set
// {0 = t_1 < ... < t_N = max(diffs)} whose difference multiset matches
// within tol, deduplicated up to reflection. The search walks the largest
// unexplained difference first and aborts past step_budget expansions.
std::vector<std::vector<double>> turnpike_solve(const DifferenceMultiset& diffs,
                                                int atom_count, double tol,
                                                long long step_budget = 50000000);

// Exhaustive multivariate assembly: enumerates per-anchor candidate
// coordinate choices (vertex reflections x modulus-admissible alignments)
// and keeps every full assignment whose projections onto all base and
// adaptive directions reproduce the given line solutions within tol, up to
// one shift and one reflection per line. Anchors keep the first line's
// orientation, which pins the class representative.
std::vector<std::vector<Eigen::VectorXd>> assembly_oracle(
    const std::vector<LabeledProjection>& base_solutions,
    const std::vector<LabeledProjection>& adaptive_solutions,
    const DirectionBundle& directions, double tol);

}  // namespace sparsepr

#endif
