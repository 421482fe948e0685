#ifndef SPARSEPR_EXPONENTIAL_SUM_HPP
#define SPARSEPR_EXPONENTIAL_SUM_HPP

#include <complex>
#include <vector>

namespace sparsepr {

// Symmetric nonnegative-type exponential sum
//   E(w) = gamma_0 + sum_{l=1}^{L} (gamma_l e^{-i w tau_l} + conj(gamma_l) e^{i w tau_l}),
// stored through its l = 0..L half; the mirrored half is implied by the
// symmetry gamma_{-l} = conj(gamma_l), tau_{-l} = -tau_l.
struct ExponentialSum {
  struct Term {
    double tau = 0.0;            // frequency, strictly positive
    std::complex<double> gamma;  // amplitude, nonzero
  };

  double dc = 0.0;           // gamma_0 (real)
  std::vector<Term> terms;   // tau strictly increasing

  int order() const { return static_cast<int>(terms.size()); }  // L

  // Total term count over l = -L..L, counting the dc term when nonzero.
  int term_count() const { return 2 * order() + (dc != 0.0 ? 1 : 0); }

  // E(w) = dc + sum 2 Re(gamma_l e^{-i w tau_l}); real by symmetry.
  double evaluate(double omega) const;

  // Samples E(h m) for m = 0..M.
  std::vector<double> sample(double step, int sample_max_index) const;

  // Throws InvalidArgument unless tau values are strictly increasing and
  // positive and every gamma_l (l >= 1) is nonzero.
  void validate() const;
};

}  // namespace sparsepr

#endif
