#include "sparsepr/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "sparsepr/errors.hpp"

namespace sparsepr {

SparseSignal apply_frame(const SparseSignal& signal,
                         const AmbiguityFrame& frame) {
  if (frame.shift.size() != signal.dim) {
    fail(ErrorCode::InvalidArgument, "apply_frame",
         "frame shift dimension mismatch");
  }
  SparseSignal out = signal;
  const Complex rot = std::polar(1.0, frame.phase);
  for (std::size_t n = 0; n < out.coeffs.size(); ++n) {
    Complex c = out.coeffs[n];
    Eigen::VectorXd t = out.translations[n];
    if (frame.reflected) {
      c = std::conj(c);
      t = -t;
    }
    out.coeffs[n] = rot * c;
    out.translations[n] = t + frame.shift;
  }
  return out;
}

std::pair<SparseSignal, AmbiguityFrame> canonicalize(
    const SparseSignal& signal) {
  if (signal.translations.empty()) {
    fail(ErrorCode::InvalidArgument, "canonicalize", "need at least one atom");
  }
  Eigen::VectorXd mins = signal.translations.front();
  for (const auto& t : signal.translations) mins = mins.cwiseMin(t);
  AmbiguityFrame frame = AmbiguityFrame::identity(signal.dim);
  frame.shift = -mins;
  return {apply_frame(signal, frame), frame};
}

namespace {

// Bijective nearest-translation matching: to[i] = index of the truth atom
// closest to recovered atom i, or nullopt when that map is not a bijection.
std::optional<std::vector<std::size_t>> nearest_matching(
    const std::vector<Eigen::VectorXd>& truth,
    const std::vector<Eigen::VectorXd>& recovered) {
  std::vector<std::size_t> to(recovered.size());
  std::vector<bool> hit(truth.size(), false);
  for (std::size_t i = 0; i < recovered.size(); ++i) {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const double d = (recovered[i] - truth[j]).norm();
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    if (hit[best]) return std::nullopt;
    hit[best] = true;
    to[i] = best;
  }
  return to;
}

double phase_objective(const std::vector<Complex>& truth,
                       const std::vector<Complex>& recovered, double alpha) {
  const Complex rot = std::polar(1.0, alpha);
  double worst = 0.0;
  for (std::size_t n = 0; n < truth.size(); ++n) {
    worst = std::max(worst, std::abs(truth[n] - rot * recovered[n]));
  }
  return worst;
}

// min over alpha of max_n |truth_n - e^{i alpha} recovered_n|: coarse grid to
// isolate the basin, golden-section inside it, one parabolic polish.
std::pair<double, double> minimize_phase(const std::vector<Complex>& truth,
                                         const std::vector<Complex>& recovered) {
  constexpr int kGrid = 1024;
  constexpr double kPi = std::numbers::pi;
  double best_alpha = 0.0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kGrid; ++k) {
    const double alpha = -kPi + (2.0 * kPi * k) / kGrid;
    const double value = phase_objective(truth, recovered, alpha);
    if (value < best_value) {
      best_value = value;
      best_alpha = alpha;
    }
  }

  double lo = best_alpha - 2.0 * kPi / kGrid;
  double hi = best_alpha + 2.0 * kPi / kGrid;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = phase_objective(truth, recovered, x1);
  double f2 = phase_objective(truth, recovered, x2);
  while (hi - lo > 1e-13) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = phase_objective(truth, recovered, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = phase_objective(truth, recovered, x2);
    }
  }
  best_alpha = 0.5 * (lo + hi);
  best_value = phase_objective(truth, recovered, best_alpha);

  // Parabolic polish; the objective is smooth near a non-kink minimum.
  const double delta = 1e-7;
  const double fm = phase_objective(truth, recovered, best_alpha - delta);
  const double fp = phase_objective(truth, recovered, best_alpha + delta);
  const double denom = fm - 2.0 * best_value + fp;
  if (denom > 0.0) {
    const double step = 0.5 * delta * (fm - fp) / denom;
    if (std::abs(step) < delta) {
      const double cand = best_alpha + step;
      const double fc = phase_objective(truth, recovered, cand);
      if (fc < best_value) {
        best_value = fc;
        best_alpha = cand;
      }
    }
  }
  if (best_alpha <= -kPi) best_alpha += 2.0 * kPi;
  if (best_alpha > kPi) best_alpha -= 2.0 * kPi;
  return {best_value, best_alpha};
}

struct OrientationResult {
  double t_err = 0.0;
  double c_err = 0.0;
  AmbiguityFrame frame;
};

}  // namespace

MatchReport best_match_error(const SparseSignal& truth,
                             const SparseSignal& recovered) {
  if (truth.dim != recovered.dim ||
      truth.atom_count() != recovered.atom_count()) {
    fail(ErrorCode::InvalidArgument, "best_match_error",
         "signals must share dimension and atom count");
  }

  const auto [truth_canon, truth_frame] = canonicalize(truth);

  // Orientations whose translation errors tie (reflection-symmetric supports,
  // e.g. every two-atom signal) are decided by the coefficient error.
  const double tie_tol = 1e-9 * std::max(truth.diameter(), 1.0);
  std::optional<OrientationResult> best;
  for (bool reflected : {false, true}) {
    AmbiguityFrame orient = AmbiguityFrame::identity(recovered.dim);
    orient.reflected = reflected;
    const auto [rec_canon, rec_frame] =
        canonicalize(apply_frame(recovered, orient));

    const auto matching =
        nearest_matching(truth_canon.translations, rec_canon.translations);
    if (!matching) continue;

    OrientationResult result;
    std::vector<Complex> truth_matched(truth_canon.coeffs.size());
    for (std::size_t i = 0; i < rec_canon.translations.size(); ++i) {
      const std::size_t j = (*matching)[i];
      result.t_err = std::max(
          result.t_err,
          (truth_canon.translations[j] - rec_canon.translations[i]).norm());
      truth_matched[i] = truth_canon.coeffs[j];
    }
    const auto [c_err, alpha] = minimize_phase(truth_matched, rec_canon.coeffs);
    result.c_err = c_err;
    result.frame.reflected = reflected;
    result.frame.phase = alpha;
    // recovered -> truth: reflect, shift into the recovered canonical frame,
    // then undo the truth canonical shift.
    result.frame.shift = rec_frame.shift - truth_frame.shift;
    const bool better =
        !best || result.t_err < best->t_err - tie_tol ||
        (result.t_err <= best->t_err + tie_tol && result.c_err < best->c_err);
    if (better) best = result;
  }

  if (!best) {
    fail(ErrorCode::MatchingFailed, "best_match_error",
         "nearest-translation matching is not bijective in either orientation");
  }
  MatchReport report;
  report.translation_error = best->t_err;
  report.coefficient_error = best->c_err;
  report.frame = best->frame;
  return report;
}

}  // namespace sparsepr
