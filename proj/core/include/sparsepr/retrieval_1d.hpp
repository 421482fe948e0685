#ifndef SPARSEPR_RETRIEVAL_1D_HPP
#define SPARSEPR_RETRIEVAL_1D_HPP

#include <complex>
#include <optional>
#include <vector>

#include "sparsepr/prony.hpp"
#include "sparsepr/signal.hpp"

namespace sparsepr {

// One recovered line solution: strictly increasing positions anchored at 0
// (the shift ambiguity is spent on positions[0] = 0, and the global phase on
// making coeffs[0] real positive); the conjugate reflection stays open.
struct LabeledProjection {
  std::vector<double> positions;
  std::vector<Complex> coeffs;

  int atom_count() const { return static_cast<int>(positions.size()); }
  double extent() const { return positions.empty() ? 0.0 : positions.back(); }
  void validate() const;
};

// Working pool of positive Prony frequencies and their amplitudes, consumed
// as pairwise differences get explained by accepted positions.
struct DifferencePool {
  struct Entry {
    double tau = 0.0;
    Complex gamma;
    bool consumed = false;
  };
  std::vector<Entry> entries;  // tau strictly increasing

  bool empty() const;                  // all consumed
  int largest_unconsumed() const;      // index, -1 when empty
  // Nearest unconsumed entry to target within tol; two equally near
  // candidates raise MatchNotFound, none returns -1.
  int find_unconsumed(double target, double tol) const;
};

struct HypothesisReport {
  bool collision_free = false;
  double min_difference_gap = 0.0;  // smallest diff / smallest diff spacing
  double outer_separation = 0.0;    // ||c_first| - |c_last|| by position
  double outer_separation_rel = 0.0;
  bool passed(double min_outer_rel = 0.0) const {
    return collision_free && outer_separation_rel >= min_outer_rel;
  }
};

// Diagnostic check of the recovery hypotheses for one line: position
// collision-freeness at the given gap, and separation of the outermost
// coefficient moduli. Moduli may be empty (positions-only check).
HypothesisReport assert_hypotheses(const std::vector<double>& positions,
                                   const std::vector<double>& moduli,
                                   double gap);

// Univariate phase retrieval: recovers positions and coefficients of an
// N-atom line signal from samples[m] = |mu_hat(h m)|^2, m = 0..M, with
// M >= 2N(N-1)+1, up to global phase, shift, and conjugate reflection.
//
// The samples are divided by |nu_hat(h m)|^2, the resulting exponential sum
// is fitted by apm, and the N(N-1)/2 positive frequencies (the unlabeled
// pairwise distances) are disentangled greedily from the outside in, using
// the amplitudes gamma = c_n conj(c_k) to decide between the two mirror
// placements of each distance.
//
// match_tol: tolerance for matching distances against pool entries; unset
// means min(0.25 * smallest frequency gap, 1e-6 * largest frequency).
LabeledProjection retrieve_line(const LineSampleSet& samples,
                                const StructureKernel& kernel, int atom_count,
                                std::optional<double> match_tol = std::nullopt,
                                PronyDiagnostics* prony_diagnostics = nullptr);

}  // namespace sparsepr

#endif
