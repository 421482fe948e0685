#include "sparsepr/prony.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "sparsepr/errors.hpp"

namespace sparsepr {

namespace {

using Complexd = std::complex<double>;

// The Hankel kernel vector and the polynomial roots are computed in extended
// precision: the kernel direction of clustered-frequency data is separated
// from the weakest signal direction by as little as ~1e-15 * sigma_0, which
// double-precision SVD cannot split cleanly.
using LongScalar = long double;
using LongMatrix = Eigen::Matrix<LongScalar, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<LongScalar, Eigen::Dynamic, 1>;

LongMatrix build_hankel(const std::vector<double>& samples, int order) {
  const int m_max = static_cast<int>(samples.size()) - 1;
  const int rows = m_max - 2 * order;
  const int cols = 2 * order + 2;
  LongMatrix hankel(rows, cols);
  for (int m = 0; m < rows; ++m) {
    for (int k = 0; k < cols; ++k) {
      hankel(m, k) =
          static_cast<LongScalar>(samples[static_cast<std::size_t>(m + k)]);
    }
  }
  return hankel;
}

// Roots of sum_k coeffs[k] z^k as eigenvalues of the companion matrix of the
// monic normalization.
std::vector<Complexd> polynomial_roots(LongVector coeffs) {
  const LongScalar scale = coeffs.cwiseAbs().maxCoeff();
  int degree = static_cast<int>(coeffs.size()) - 1;
  while (degree > 0 && std::abs(coeffs(degree)) <= 1e-17L * scale) --degree;
  if (degree < 1) return {};

  LongMatrix companion = LongMatrix::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0L;
  for (int i = 0; i < degree; ++i) {
    companion(i, degree - 1) = -coeffs(i) / coeffs(degree);
  }
  Eigen::EigenSolver<LongMatrix> solver(companion, false);
  std::vector<Complexd> roots(static_cast<std::size_t>(degree));
  for (int i = 0; i < degree; ++i) {
    const std::complex<LongScalar> z = solver.eigenvalues()(i);
    roots[static_cast<std::size_t>(i)] =
        Complexd(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  }
  return roots;
}

// Levenberg-Marquardt polish of (dc, tau_l, gamma_l) against the samples.
// The clustered-frequency Hankel kernel is computed with limited accuracy in
// double precision; driving the (zero-residual) sample misfit to the floor
// restores full precision of the parameters.
void refine_parameters(double& dc, std::vector<ExponentialSum::Term>& terms,
                       const std::vector<double>& samples, double step,
                       double scale) {
  const int order = static_cast<int>(terms.size());
  if (order == 0) return;
  const int n_params = 1 + 3 * order;
  const int n_samples = static_cast<int>(samples.size());

  Eigen::VectorXd params(n_params);
  params(0) = dc;
  for (int l = 0; l < order; ++l) {
    params(1 + 3 * l) = terms[static_cast<std::size_t>(l)].tau;
    params(2 + 3 * l) = terms[static_cast<std::size_t>(l)].gamma.real();
    params(3 + 3 * l) = terms[static_cast<std::size_t>(l)].gamma.imag();
  }

  const auto residual = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r) {
    r.resize(n_samples);
    for (int m = 0; m < n_samples; ++m) {
      double value = q(0);
      for (int l = 0; l < order; ++l) {
        const double a = step * m * q(1 + 3 * l);
        value += 2.0 * (q(2 + 3 * l) * std::cos(a) + q(3 + 3 * l) * std::sin(a));
      }
      r(m) = value - samples[static_cast<std::size_t>(m)];
    }
  };

  Eigen::VectorXd res;
  residual(params, res);
  double misfit = res.squaredNorm();
  const double floor = 1e-26 * scale * scale * n_samples;
  double damping = 1e-10;
  double last_checkpoint = misfit;

  for (int iteration = 0; iteration < 400 && misfit > floor; ++iteration) {
    if (iteration % 20 == 19) {  // stall detection
      if (misfit > 0.99 * last_checkpoint) break;
      last_checkpoint = misfit;
    }
    Eigen::MatrixXd jac(n_samples, n_params);
    for (int m = 0; m < n_samples; ++m) {
      jac(m, 0) = 1.0;
      for (int l = 0; l < order; ++l) {
        const double a = step * m * params(1 + 3 * l);
        const double re = params(2 + 3 * l);
        const double im = params(3 + 3 * l);
        jac(m, 1 + 3 * l) =
            2.0 * step * m * (-re * std::sin(a) + im * std::cos(a));
        jac(m, 2 + 3 * l) = 2.0 * std::cos(a);
        jac(m, 3 + 3 * l) = 2.0 * std::sin(a);
      }
    }
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const Eigen::VectorXd gradient = jac.transpose() * res;

    bool stepped = false;
    for (int backoff = 0; backoff < 25; ++backoff) {
      Eigen::MatrixXd damped = normal;
      damped.diagonal() += damping * normal.diagonal();
      const Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
      const Eigen::VectorXd trial = params + delta;
      Eigen::VectorXd trial_res;
      residual(trial, trial_res);
      if (trial_res.squaredNorm() < misfit) {
        params = trial;
        res = trial_res;
        misfit = trial_res.squaredNorm();
        damping = std::max(damping * 0.3, 1e-14);
        stepped = true;
        break;
      }
      damping *= 10.0;
    }
    if (!stepped) break;
  }

  dc = params(0);
  for (int l = 0; l < order; ++l) {
    terms[static_cast<std::size_t>(l)] = {
        params(1 + 3 * l), Complexd(params(2 + 3 * l), params(3 + 3 * l))};
  }
}

// Linear least squares for the amplitudes at fixed frequencies (dc column
// plus mirrored columns per term).
void solve_amplitudes(double& dc, std::vector<ExponentialSum::Term>& terms,
                      const std::vector<double>& samples, double step) {
  const int n_samples = static_cast<int>(samples.size());
  const int pair_count = static_cast<int>(terms.size());
  Eigen::MatrixXcd vander(n_samples, 2 * pair_count + 1);
  for (int p = 0; p < pair_count; ++p) {
    const Complexd unit =
        std::polar(1.0, -step * terms[static_cast<std::size_t>(p)].tau);
    Complexd wm(1.0, 0.0);
    Complexd wp(1.0, 0.0);
    for (int m = 0; m < n_samples; ++m) {
      vander(m, 2 * p) = wm;
      vander(m, 2 * p + 1) = wp;
      wm *= unit;
      wp *= std::conj(unit);
    }
  }
  vander.col(2 * pair_count).setOnes();
  Eigen::VectorXcd rhs(n_samples);
  for (int m = 0; m < n_samples; ++m) rhs(m) = samples[static_cast<std::size_t>(m)];
  const Eigen::VectorXcd amps =
      vander.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  for (int p = 0; p < pair_count; ++p) {
    terms[static_cast<std::size_t>(p)].gamma =
        0.5 * (amps(2 * p) + std::conj(amps(2 * p + 1)));
  }
  dc = amps(2 * pair_count).real();
}

double max_misfit(double dc, const std::vector<ExponentialSum::Term>& terms,
                  const std::vector<double>& samples, double step) {
  double worst = 0.0;
  for (std::size_t m = 0; m < samples.size(); ++m) {
    double value = dc;
    for (const auto& t : terms) {
      value += 2.0 * (t.gamma * std::polar(1.0, -step * static_cast<double>(m) *
                                                    t.tau))
                         .real();
    }
    worst = std::max(worst, std::abs(value - samples[m]));
  }
  return worst;
}

// Dominant frequency of a real residual sequence: periodogram peak on a fine
// grid over (0, pi/h), golden-section refined.
double residual_peak_frequency(const std::vector<double>& residual,
                               double step) {
  const int n = static_cast<int>(residual.size());
  const auto power = [&](double tau) {
    Complexd acc(0.0, 0.0);
    for (int m = 0; m < n; ++m) {
      acc += residual[static_cast<std::size_t>(m)] *
             std::polar(1.0, step * m * tau);
    }
    return std::norm(acc);
  };
  const double limit = std::numbers::pi / step;
  const int grid = 8 * n;
  double best_tau = limit / 2.0;
  double best_power = -1.0;
  for (int k = 1; k < grid; ++k) {
    const double tau = limit * k / grid;
    const double p = power(tau);
    if (p > best_power) {
      best_power = p;
      best_tau = tau;
    }
  }
  double lo = std::max(best_tau - limit / grid, 0.0);
  double hi = std::min(best_tau + limit / grid, limit);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = power(x1);
  double f2 = power(x2);
  while (hi - lo > 1e-10 * limit) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = power(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = power(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ExponentialSum apm(const std::vector<double>& samples,
                   const PronyConfig& config, PronyDiagnostics* diagnostics) {
  const int m_max = static_cast<int>(samples.size()) - 1;
  if (config.order_max < 1) {
    fail(ErrorCode::InvalidArgument, "apm", "order_max must be >= 1");
  }
  if (!(config.step > 0.0)) {
    fail(ErrorCode::InvalidArgument, "apm", "step must be positive");
  }
  if (m_max < 4 * config.order_max + 1) {
    fail(ErrorCode::InvalidArgument, "apm",
         "need M >= 4 L_max + 1, got M = " + std::to_string(m_max) +
             " for L_max = " + std::to_string(config.order_max));
  }

  double samples_scale = 0.0;
  for (double v : samples) samples_scale = std::max(samples_scale, std::abs(v));
  if (samples_scale == 0.0) {
    fail(ErrorCode::RankDeficient, "apm", "all samples are zero");
  }

  // Right singular vector of the smallest singular value. When order_max
  // overestimates the true order, the kernel vector picks up spurious
  // polynomial factors whose roots either miss the unit circle or receive
  // negligible amplitudes; both filters below remove them.
  const int order = config.order_max;
  const Eigen::JacobiSVD<LongMatrix> svd(build_hankel(samples, order),
                                         Eigen::ComputeFullV);
  int kernel_dim = 0;
  {
    const LongScalar tol = static_cast<LongScalar>(config.rank_tolerance) *
                           svd.singularValues()(0);
    for (int i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) <= tol) ++kernel_dim;
    }
    kernel_dim += 2 * order + 2 - static_cast<int>(svd.singularValues().size());
  }

  LongVector lambda = svd.matrixV().col(2 * order + 1);
  if (lambda(2 * order + 1) < 0.0L) lambda = -lambda;
  const std::vector<Complexd> all_roots = polynomial_roots(lambda);
  std::vector<Complexd> kept;
  for (const Complexd& z : all_roots) {
    if (std::abs(std::abs(z) - 1.0) <= config.circle_tolerance) {
      kept.push_back(z);
    }
  }
  if (kept.empty()) {
    fail(ErrorCode::NoUnimodularRoots, "apm",
         "all " + std::to_string(all_roots.size()) +
             " Prony roots fall outside the unit-circle tolerance");
  }

  // Split the kept roots into the z = 1 group and conjugate pairs; averaging
  // each pair makes the frequencies exactly symmetric. Real roots at the
  // aliasing boundary z = -1 cannot belong to a sum with h|tau| < pi and are
  // discarded.
  constexpr double kZeroArgTol = 1e-9;
  bool has_dc = false;
  std::vector<double> pos_args;
  std::vector<double> neg_args;
  for (const Complexd& z : kept) {
    const double a = std::arg(z);
    if (std::abs(a) <= kZeroArgTol) {
      has_dc = true;
    } else if (std::numbers::pi - std::abs(a) <= kZeroArgTol) {
      continue;
    } else if (a > 0.0) {
      pos_args.push_back(a);
    } else {
      neg_args.push_back(a);
    }
  }
  if (pos_args.size() != neg_args.size()) {
    fail(ErrorCode::RankDeficient, "apm",
         "unit-circle roots do not form conjugate pairs");
  }
  std::sort(pos_args.begin(), pos_args.end());
  std::sort(neg_args.begin(), neg_args.end(), std::greater<double>());

  std::vector<double> frequencies;
  for (std::size_t i = 0; i < pos_args.size(); ++i) {
    if (std::abs(pos_args[i] + neg_args[i]) > 1e-2) {
      fail(ErrorCode::RankDeficient, "apm",
           "conjugate root pairing failed (argument mismatch)");
    }
    frequencies.push_back(0.5 * (pos_args[i] - neg_args[i]) / config.step);
  }
  std::sort(frequencies.begin(), frequencies.end());
  const double tau_scale =
      frequencies.empty() ? 1.0 : std::max(frequencies.back(), 1.0);
  for (std::size_t i = 1; i < frequencies.size(); ++i) {
    if (frequencies[i] - frequencies[i - 1] <= 1e-12 * tau_scale) {
      fail(ErrorCode::RankDeficient, "apm", "repeated recovered frequency");
    }
  }

  // Over-determined Vandermonde system, one column per signed frequency.
  const int pair_count = static_cast<int>(frequencies.size());
  const int col_count = 2 * pair_count + (has_dc ? 1 : 0);
  if (col_count == 0) {
    fail(ErrorCode::NoUnimodularRoots, "apm", "no usable roots after pairing");
  }
  Eigen::MatrixXcd vander(m_max + 1, col_count);
  for (int p = 0; p < pair_count; ++p) {
    const Complexd unit =
        std::polar(1.0, -config.step * frequencies[static_cast<std::size_t>(p)]);
    Complexd wm(1.0, 0.0);
    Complexd wp(1.0, 0.0);
    for (int m = 0; m <= m_max; ++m) {
      vander(m, 2 * p) = wm;      // e^{-i h m tau}
      vander(m, 2 * p + 1) = wp;  // e^{+i h m tau}
      wm *= unit;
      wp *= std::conj(unit);
    }
  }
  if (has_dc) vander.col(col_count - 1).setOnes();

  Eigen::VectorXcd rhs(m_max + 1);
  for (int m = 0; m <= m_max; ++m) {
    rhs(m) = samples[static_cast<std::size_t>(m)];
  }
  const Eigen::VectorXcd amplitudes =
      vander.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);

  ExponentialSum result;
  if (has_dc) {
    const Complexd g0 = amplitudes(col_count - 1);
    if (std::abs(g0.imag()) > 1e-8 * std::max(1.0, samples_scale)) {
      fail(ErrorCode::RankDeficient, "apm",
           "zero-frequency amplitude has non-negligible imaginary part");
    }
    result.dc = g0.real();
  }
  for (int p = 0; p < pair_count; ++p) {
    const Complexd gamma =
        0.5 * (amplitudes(2 * p) + std::conj(amplitudes(2 * p + 1)));
    result.terms.push_back({frequencies[static_cast<std::size_t>(p)], gamma});
  }

  const double amp_threshold =
      config.amp_threshold.value_or(1e-8 * samples_scale);
  std::erase_if(result.terms, [&](const ExponentialSum::Term& t) {
    return std::abs(t.gamma) < amp_threshold;
  });

  // Residual polish with layered structure rescue. The root stage can lose a
  // term when a node cluster collapses; whichever parameters survive, the
  // leftover misfit exposes the missing frequency as the residual's spectral
  // peak. A missing term dominates the residual while small frequency errors
  // do not, so appends are accepted only on a strong misfit reduction.
  {
    const double fit_floor = 1e-9 * samples_scale;
    const auto model_misfit = [&](const double& dc,
                                  const std::vector<ExponentialSum::Term>& t) {
      return max_misfit(dc, t, samples, config.step);
    };
    const auto rescue_pass = [&](double& dc,
                                 std::vector<ExponentialSum::Term>& terms,
                                 bool polish_each) {
      // A junk append barely moves a linear fit while a genuine missing term
      // at least halves it; the polished variant improves even on junk, so
      // it must clear a stronger bar.
      const double accept_factor = polish_each ? 3.0 : 1.5;
      for (int rescue = 0; rescue < 6; ++rescue) {
        const double misfit = model_misfit(dc, terms);
        if (misfit <= fit_floor) break;
        std::vector<double> residual(samples.size());
        for (std::size_t m = 0; m < samples.size(); ++m) {
          double value = dc;
          for (const auto& t : terms) {
            value += 2.0 * (t.gamma *
                            std::polar(1.0, -config.step *
                                                static_cast<double>(m) * t.tau))
                               .real();
          }
          residual[m] = samples[m] - value;
        }
        auto trial_terms = terms;
        trial_terms.push_back({residual_peak_frequency(residual, config.step),
                               Complexd(0.0, 0.0)});
        double trial_dc = dc;
        solve_amplitudes(trial_dc, trial_terms, samples, config.step);
        if (polish_each) {
          refine_parameters(trial_dc, trial_terms, samples, config.step,
                            samples_scale);
        }
        if (model_misfit(trial_dc, trial_terms) <= misfit / accept_factor) {
          dc = trial_dc;
          terms = std::move(trial_terms);
        } else {
          break;
        }
      }
    };

    // Plain polish handles the structure-complete case.
    double dc_a = result.dc;
    auto terms_a = result.terms;
    refine_parameters(dc_a, terms_a, samples, config.step, samples_scale);

    if (model_misfit(dc_a, terms_a) > fit_floor) {
      // Repair the structure on the unpolished parameters, then polish.
      double dc_b = result.dc;
      auto terms_b = result.terms;
      rescue_pass(dc_b, terms_b, false);
      refine_parameters(dc_b, terms_b, samples, config.step, samples_scale);
      if (model_misfit(dc_b, terms_b) < model_misfit(dc_a, terms_a)) {
        dc_a = dc_b;
        terms_a = std::move(terms_b);
      }
      // Last resort: rescue from the polished state.
      if (model_misfit(dc_a, terms_a) > fit_floor) {
        rescue_pass(dc_a, terms_a, true);
      }
    }
    result.dc = dc_a;
    result.terms = std::move(terms_a);
  }

  // Model simplification: a term less than one cycle away (over the whole
  // window) from the dc node or from another term is spectrally inseparable
  // from it. Such splits appear when the dominant dc or a strong term breaks
  // into two nearby components during refinement; undo them whenever the fit
  // floor survives.
  {
    // Artifact splits sit far below the window resolution; genuine close
    // pairs in resolvable data sit near or above it.
    const double resolution =
        0.15 * 2.0 * std::numbers::pi / (config.step * m_max);
    const auto accept = [&](double trial_dc,
                            std::vector<ExponentialSum::Term> trial_terms,
                            double pre) {
      refine_parameters(trial_dc, trial_terms, samples, config.step,
                        samples_scale);
      if (max_misfit(trial_dc, trial_terms, samples, config.step) <=
          std::max(pre, 1e-9 * samples_scale)) {
        result.dc = trial_dc;
        result.terms = std::move(trial_terms);
        return true;
      }
      return false;
    };
    for (bool improved = true; improved;) {
      improved = false;
      const double pre =
          max_misfit(result.dc, result.terms, samples, config.step);
      for (std::size_t i = 0; i < result.terms.size() && !improved; ++i) {
        if (result.terms[i].tau < resolution) {
          auto trial = result.terms;
          trial.erase(trial.begin() + static_cast<long>(i));
          improved = accept(result.dc, std::move(trial), pre);
        }
      }
      for (std::size_t i = 0; i < result.terms.size() && !improved; ++i) {
        for (std::size_t j = i + 1; j < result.terms.size() && !improved;
             ++j) {
          if (std::abs(result.terms[i].tau - result.terms[j].tau) >=
              resolution) {
            continue;
          }
          auto trial = result.terms;
          trial[i].gamma += trial[j].gamma;
          trial.erase(trial.begin() + static_cast<long>(j));
          improved = accept(result.dc, std::move(trial), pre);
        }
      }
    }
  }

  // Post-refinement cleanup: reflect negative frequencies back into the
  // positive half (E is even), fold near-zero frequencies into the dc term,
  // merge duplicates, and re-apply the amplitude threshold. Two frequencies
  // whose relative phase advance over the whole window stays below 1e-6 rad
  // are numerically one term.
  const double merge_tol = 1e-6 / (config.step * m_max);
  std::vector<ExponentialSum::Term> cleaned;
  for (auto term : result.terms) {
    if (term.tau < 0.0) {
      term.tau = -term.tau;
      term.gamma = std::conj(term.gamma);
    }
    if (term.tau <= merge_tol) {
      result.dc += 2.0 * term.gamma.real();
      continue;
    }
    bool merged = false;
    for (auto& existing : cleaned) {
      if (std::abs(existing.tau - term.tau) <= merge_tol) {
        existing.gamma += term.gamma;
        merged = true;
        break;
      }
    }
    if (!merged) cleaned.push_back(term);
  }
  std::erase_if(cleaned, [&](const ExponentialSum::Term& t) {
    return std::abs(t.gamma) < amp_threshold;
  });
  std::sort(cleaned.begin(), cleaned.end(),
            [](const auto& a, const auto& b) { return a.tau < b.tau; });
  result.terms = std::move(cleaned);
  if (std::abs(result.dc) < amp_threshold) result.dc = 0.0;

  if (diagnostics) {
    diagnostics->prony_coefficients = lambda.cast<double>();
    diagnostics->effective_order = order;
    diagnostics->kernel_dimension = kernel_dim;
    diagnostics->roots = all_roots;
    diagnostics->kept_roots = kept;
  }
  result.validate();
  return result;
}

}  // namespace sparsepr
