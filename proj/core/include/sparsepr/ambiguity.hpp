#ifndef SPARSEPR_AMBIGUITY_HPP
#define SPARSEPR_AMBIGUITY_HPP

#include <Eigen/Core>

#include "sparsepr/signal.hpp"

namespace sparsepr {

// One element of the inevitable-ambiguity group: conjugate reflection first
// (when set), then phase rotation of the coefficients and shift of the
// translations. All leave the Fourier intensity untouched.
struct AmbiguityFrame {
  Eigen::VectorXd shift;    // x_0
  double phase = 0.0;       // alpha in (-pi, pi]
  bool reflected = false;

  static AmbiguityFrame identity(int dim) {
    AmbiguityFrame f;
    f.shift = Eigen::VectorXd::Zero(dim);
    return f;
  }
};

// c_n -> e^{i alpha} (conj) c_n, T_n -> (-)T_n + x_0.
SparseSignal apply_frame(const SparseSignal& signal, const AmbiguityFrame& frame);

// Shifts the signal so every coordinate has minimum 0 over the atoms (the
// leftmost/lowermost convention). Returns the shifted signal and the frame
// that produced it.
std::pair<SparseSignal, AmbiguityFrame> canonicalize(const SparseSignal& signal);

struct MatchReport {
  double translation_error = 0.0;  // max_n |T_n - T'_n| after alignment
  double coefficient_error = 0.0;  // min_alpha max_n |c_n - e^{i alpha} c'_n|
  AmbiguityFrame frame;            // maps `recovered` onto `truth`
};

// Compares a recovered signal against the truth modulo the inevitable
// ambiguities: both orientations are tried, both signals canonicalized,
// atoms matched bijectively by nearest translation, and the residual global
// phase optimized out of the coefficient error. Throws MatchingFailed when
// no orientation admits a bijective nearest-translation matching.
MatchReport best_match_error(const SparseSignal& truth,
                             const SparseSignal& recovered);

}  // namespace sparsepr

#endif
