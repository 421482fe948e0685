#ifndef SPARSEPR_SIGNAL_HPP
#define SPARSEPR_SIGNAL_HPP

#include <complex>
#include <vector>

#include <Eigen/Core>

namespace sparsepr {

using Complex = std::complex<double>;

// Known building block of the signal: a Dirac spike or an isotropic Gaussian.
// Its Fourier transform is real, strictly positive, and radially symmetric,
// so intensities can be divided by it on any sampling line.
class StructureKernel {
 public:
  enum class Kind { Dirac, Gaussian };

  static StructureKernel dirac() { return StructureKernel(Kind::Dirac, 0.0); }
  static StructureKernel gaussian(double sigma);

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }

  // nu_hat(omega) = 1 (Dirac) or exp(-sigma^2 |omega|^2 / 2) (Gaussian).
  double fourier(const Eigen::VectorXd& omega) const {
    return fourier_radial(omega.norm());
  }
  double fourier_radial(double omega_norm) const;

  // Spatial density of the Gaussian bump (used for plot exports only).
  double density(const Eigen::VectorXd& x) const;

 private:
  StructureKernel(Kind kind, double sigma) : kind_(kind), sigma_(sigma) {}
  Kind kind_;
  double sigma_;
};

// Sparse structured signal: N nonzero complex coefficients attached to N
// pairwise-distinct translations in R^D, all sharing one structure kernel.
struct SparseSignal {
  int dim = 1;
  std::vector<Complex> coeffs;
  std::vector<Eigen::VectorXd> translations;
  StructureKernel kernel = StructureKernel::dirac();

  int atom_count() const { return static_cast<int>(coeffs.size()); }

  // Largest pairwise translation distance (0 for a single atom).
  double diameter() const;

  // Throws InvalidArgument on any invariant breach (zero coefficient,
  // repeated translation, dimension mismatch).
  void validate() const;
};

// Equispaced squared Fourier intensities along one line: values[m] =
// |mu_hat(h m zeta)|^2 for m = 0..M.
struct LineSampleSet {
  Eigen::VectorXd direction;
  double step = 0.0;
  std::vector<double> values;

  int sample_count() const { return static_cast<int>(values.size()); }
  void validate() const;
};

// |mu_hat(omega)|^2 = |nu_hat(omega)|^2 |sum_n c_n exp(-i<omega,T_n>)|^2.
double fourier_intensity(const SparseSignal& signal,
                         const Eigen::VectorXd& omega);

// Same quantity through the autocorrelation double sum
// sum_{n,k} c_n conj(c_k) exp(-i<omega, T_n - T_k>); kept as an independent
// evaluation route for consistency checks.
double fourier_intensity_pair_sum(const SparseSignal& signal,
                                  const Eigen::VectorXd& omega);

// Samples |mu_hat|^2 at h m zeta, m = 0..M. Throws StepTooLarge when
// h max|<zeta, T_n - T_k>| >= pi (projected Prony frequencies would wrap).
LineSampleSet sample_line(const SparseSignal& signal,
                          const Eigen::VectorXd& direction, double step,
                          int sample_max_index);

// Projections <zeta, T_n> in input order.
std::vector<double> project(const std::vector<Eigen::VectorXd>& translations,
                            const Eigen::VectorXd& direction);

// True iff all pairwise differences values[n]-values[k], n != k, are pairwise
// distinct with separation > gap (and no difference vanishes).
bool is_collision_free(const std::vector<double>& values, double gap);

// Vector variant: pairwise difference vectors T_n - T_k distinct under the
// Euclidean norm with separation > gap.
bool is_collision_free(const std::vector<Eigen::VectorXd>& points, double gap);

// Step size h = pi / (2 max|T_n - T_k|), which keeps every projected
// frequency inside (-pi/h, pi/h) with a factor-2 margin.
double suggest_step(const SparseSignal& signal);

}  // namespace sparsepr

#endif
