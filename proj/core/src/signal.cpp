#include "sparsepr/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sparsepr/errors.hpp"

namespace sparsepr {

StructureKernel StructureKernel::gaussian(double sigma) {
  if (!(sigma > 0.0)) {
    fail(ErrorCode::InvalidArgument, "StructureKernel::gaussian",
         "sigma must be positive");
  }
  return StructureKernel(Kind::Gaussian, sigma);
}

double StructureKernel::fourier_radial(double omega_norm) const {
  if (kind_ == Kind::Dirac) return 1.0;
  const double s = sigma_ * omega_norm;
  return std::exp(-0.5 * s * s);
}

double StructureKernel::density(const Eigen::VectorXd& x) const {
  if (kind_ == Kind::Dirac) {
    fail(ErrorCode::InvalidArgument, "StructureKernel::density",
         "Dirac kernel has no density");
  }
  const int d = static_cast<int>(x.size());
  const double norm =
      std::pow(2.0 * std::numbers::pi * sigma_ * sigma_, -0.5 * d);
  return norm * std::exp(-0.5 * x.squaredNorm() / (sigma_ * sigma_));
}

double SparseSignal::diameter() const {
  double diam = 0.0;
  for (std::size_t n = 0; n < translations.size(); ++n) {
    for (std::size_t k = n + 1; k < translations.size(); ++k) {
      diam = std::max(diam, (translations[n] - translations[k]).norm());
    }
  }
  return diam;
}

void SparseSignal::validate() const {
  if (dim < 1) {
    fail(ErrorCode::InvalidArgument, "SparseSignal::validate",
         "dimension must be >= 1");
  }
  if (coeffs.empty() || coeffs.size() != translations.size()) {
    fail(ErrorCode::InvalidArgument, "SparseSignal::validate",
         "coefficients and translations must be nonempty and aligned");
  }
  for (const auto& c : coeffs) {
    if (std::abs(c) == 0.0) {
      fail(ErrorCode::InvalidArgument, "SparseSignal::validate",
           "coefficients must be nonzero");
    }
  }
  for (const auto& t : translations) {
    if (t.size() != dim) {
      fail(ErrorCode::InvalidArgument, "SparseSignal::validate",
           "translation dimension mismatch");
    }
  }
  for (std::size_t n = 0; n < translations.size(); ++n) {
    for (std::size_t k = n + 1; k < translations.size(); ++k) {
      if ((translations[n] - translations[k]).norm() == 0.0) {
        fail(ErrorCode::InvalidArgument, "SparseSignal::validate",
             "translations must be pairwise distinct");
      }
    }
  }
}

void LineSampleSet::validate() const {
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    fail(ErrorCode::InvalidArgument, "LineSampleSet::validate",
         "direction must be a unit vector");
  }
  if (!(step > 0.0)) {
    fail(ErrorCode::InvalidArgument, "LineSampleSet::validate",
         "step must be positive");
  }
  for (double v : values) {
    if (v < 0.0) {
      fail(ErrorCode::InvalidArgument, "LineSampleSet::validate",
           "squared intensities must be nonnegative");
    }
  }
}

double fourier_intensity(const SparseSignal& signal,
                         const Eigen::VectorXd& omega) {
  Complex sum(0.0, 0.0);
  for (std::size_t n = 0; n < signal.coeffs.size(); ++n) {
    const double phase = omega.dot(signal.translations[n]);
    sum += signal.coeffs[n] * std::polar(1.0, -phase);
  }
  const double nu = signal.kernel.fourier(omega);
  return nu * nu * std::norm(sum);
}

double fourier_intensity_pair_sum(const SparseSignal& signal,
                                  const Eigen::VectorXd& omega) {
  Complex acc(0.0, 0.0);
  for (std::size_t n = 0; n < signal.coeffs.size(); ++n) {
    for (std::size_t k = 0; k < signal.coeffs.size(); ++k) {
      const double phase =
          omega.dot(signal.translations[n] - signal.translations[k]);
      acc += signal.coeffs[n] * std::conj(signal.coeffs[k]) *
             std::polar(1.0, -phase);
    }
  }
  const double nu = signal.kernel.fourier(omega);
  return nu * nu * acc.real();
}

LineSampleSet sample_line(const SparseSignal& signal,
                          const Eigen::VectorXd& direction, double step,
                          int sample_max_index) {
  if (direction.size() != signal.dim) {
    fail(ErrorCode::InvalidArgument, "sample_line",
         "direction dimension mismatch");
  }
  if (std::abs(direction.norm() - 1.0) > 1e-12) {
    fail(ErrorCode::InvalidArgument, "sample_line",
         "direction must be a unit vector");
  }
  if (!(step > 0.0) || sample_max_index < 0) {
    fail(ErrorCode::InvalidArgument, "sample_line",
         "need step > 0 and M >= 0");
  }

  double max_proj_diff = 0.0;
  for (std::size_t n = 0; n < signal.translations.size(); ++n) {
    for (std::size_t k = n + 1; k < signal.translations.size(); ++k) {
      const double d =
          std::abs(direction.dot(signal.translations[n] - signal.translations[k]));
      max_proj_diff = std::max(max_proj_diff, d);
    }
  }
  if (step * max_proj_diff >= std::numbers::pi) {
    fail(ErrorCode::StepTooLarge, "sample_line",
         "h * max|<zeta, T_n - T_k>| = " + std::to_string(step * max_proj_diff) +
             " >= pi; projected frequencies would alias");
  }

  LineSampleSet out;
  out.direction = direction;
  out.step = step;
  out.values.resize(static_cast<std::size_t>(sample_max_index) + 1);
  for (int m = 0; m <= sample_max_index; ++m) {
    out.values[static_cast<std::size_t>(m)] =
        fourier_intensity(signal, (step * m) * direction);
  }
  return out;
}

std::vector<double> project(const std::vector<Eigen::VectorXd>& translations,
                            const Eigen::VectorXd& direction) {
  std::vector<double> out;
  out.reserve(translations.size());
  for (const auto& t : translations) out.push_back(direction.dot(t));
  return out;
}

bool is_collision_free(const std::vector<double>& values, double gap) {
  // Differences come in +/- pairs, so distinctness of all ordered
  // differences reduces to distinctness of the positive ones.
  std::vector<double> diffs;
  diffs.reserve(values.size() * (values.size() - 1) / 2);
  for (std::size_t n = 0; n < values.size(); ++n) {
    for (std::size_t k = n + 1; k < values.size(); ++k) {
      diffs.push_back(std::abs(values[n] - values[k]));
    }
  }
  std::sort(diffs.begin(), diffs.end());
  if (!diffs.empty() && diffs.front() <= gap) return false;
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    if (diffs[i] - diffs[i - 1] <= gap) return false;
  }
  return true;
}

bool is_collision_free(const std::vector<Eigen::VectorXd>& points,
                       double gap) {
  std::vector<Eigen::VectorXd> diffs;
  diffs.reserve(points.size() * (points.size() - 1));
  for (std::size_t n = 0; n < points.size(); ++n) {
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (n == k) continue;
      Eigen::VectorXd d = points[n] - points[k];
      if (d.norm() <= gap) return false;  // coincident points
      diffs.push_back(std::move(d));
    }
  }
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    for (std::size_t j = i + 1; j < diffs.size(); ++j) {
      if ((diffs[i] - diffs[j]).norm() <= gap) return false;
    }
  }
  return true;
}

double suggest_step(const SparseSignal& signal) {
  const double diam = signal.diameter();
  if (diam == 0.0) return 1.0;  // single atom: any step works
  return std::numbers::pi / (2.0 * diam);
}

}  // namespace sparsepr
