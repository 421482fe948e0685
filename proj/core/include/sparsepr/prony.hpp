#ifndef SPARSEPR_PRONY_HPP
#define SPARSEPR_PRONY_HPP

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sparsepr/exponential_sum.hpp"

namespace sparsepr {

struct PronyConfig {
  int order_max = 1;      // upper bound on L
  double step = 1.0;      // sampling distance h
  // Roots are kept only when ||z| - 1| <= circle_tolerance. Clustered
  // frequencies push the computed roots radially off the circle well past
  // 1e-6 even on exact data, so the default is loose; the residual polish
  // restores the parameter accuracy afterwards.
  double circle_tolerance = 5e-2;
  // Terms with |gamma| below the threshold are dropped after the Vandermonde
  // solve; unset means 1e-8 * max_m |samples[m]|.
  std::optional<double> amp_threshold;
  // Singular values below rank_tolerance * sigma_max count as zero when the
  // Hankel kernel dimension is reported in the diagnostics.
  double rank_tolerance = 1e-13;
};

// Optional insight into the APM run, mainly for tests and run reports.
struct PronyDiagnostics {
  Eigen::VectorXd prony_coefficients;  // kernel vector = coefficients of Lambda
  int effective_order = 0;             // order the Hankel matrix was built at
  int kernel_dimension = 0;            // near-zero singular values at that order
  std::vector<std::complex<double>> roots;       // all companion roots
  std::vector<std::complex<double>> kept_roots;  // after the circle filter
};

// Approximative Prony Method: recovers the parameters of a symmetric
// exponential sum from equispaced samples samples[m] = E(h m), m = 0..M.
//
// Pipeline: Hankel matrix at order_max, right singular vector of the
// smallest singular value as Prony polynomial coefficients, companion-matrix
// roots, unit-circle filter, conjugate pairing with exact re-symmetrization,
// Vandermonde least squares, amplitude thresholding, and a final
// Levenberg-Marquardt polish of all parameters against the samples. An order
// overestimate only adds spurious polynomial factors whose roots the circle
// filter and the amplitude threshold remove.
//
// RankDeficient signals data whose Hankel structure cannot belong to a
// symmetric exponential sum (zero samples, unpairable or repeated on-circle
// roots); NoUnimodularRoots is raised when the circle filter discards every
// root.
ExponentialSum apm(const std::vector<double>& samples, const PronyConfig& config,
                   PronyDiagnostics* diagnostics = nullptr);

}  // namespace sparsepr

#endif
