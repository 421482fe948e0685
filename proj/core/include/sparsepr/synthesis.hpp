#ifndef SPARSEPR_SYNTHESIS_HPP
#define SPARSEPR_SYNTHESIS_HPP

#include <cstdint>
#include <random>

#include "sparsepr/signal.hpp"

namespace sparsepr {

struct SynthesisConfig {
  int dim = 2;
  int atom_count = 3;
  StructureKernel kernel = StructureKernel::dirac();
  double box = 10.0;            // translations drawn from [0, box]^D
  double min_gap_rel = 0.05;    // per-axis difference gap, x axis extent
  double min_modulus_gap_rel = 0.1;  // pairwise |c| gaps, x largest |c|
  int max_tries = 20000;
};

// Rejection-samples an instance satisfying the recovery hypotheses: per-axis
// collision-free translations with the requested difference gap, and
// coefficient moduli pairwise separated by the requested fraction. Throws
// SynthesisExhausted when max_tries draws do not produce one.
SparseSignal synthesize_instance(const SynthesisConfig& config,
                                 std::mt19937_64& rng);

// Positions in [0, extent] whose pairwise differences are pairwise separated
// by at least min_gap_rel * extent. Throws SynthesisExhausted on budget
// exhaustion.
std::vector<double> random_collision_free_positions(std::mt19937_64& rng,
                                                    int count, double extent,
                                                    double min_gap_rel,
                                                    int max_tries = 200000);

// Coefficients with pairwise-distinct moduli (relative gaps of at least
// min_modulus_gap_rel) and uniform phases.
std::vector<Complex> random_distinct_coefficients(std::mt19937_64& rng,
                                                  int count,
                                                  double min_modulus_gap_rel);

// The five-source bivariate Gaussian test instance used for the regression
// run (sigma = 1/2, exact coordinates and coefficients).
SparseSignal paper_table1_signal();

}  // namespace sparsepr

#endif
