#include "sparsepr/retrieval_1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sparsepr/errors.hpp"

namespace sparsepr {

void LabeledProjection::validate() const {
  if (positions.empty() || positions.size() != coeffs.size()) {
    fail(ErrorCode::InvalidArgument, "LabeledProjection::validate",
         "positions and coefficients must be nonempty and aligned");
  }
  if (positions.front() != 0.0) {
    fail(ErrorCode::InvalidArgument, "LabeledProjection::validate",
         "positions must be anchored at 0");
  }
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (!(positions[i] > positions[i - 1])) {
      fail(ErrorCode::InvalidArgument, "LabeledProjection::validate",
           "positions must be strictly increasing");
    }
  }
  for (const Complex& c : coeffs) {
    if (std::abs(c) == 0.0) {
      fail(ErrorCode::InvalidArgument, "LabeledProjection::validate",
           "coefficients must be nonzero");
    }
  }
}

bool DifferencePool::empty() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const Entry& e) { return e.consumed; });
}

int DifferencePool::largest_unconsumed() const {
  for (int i = static_cast<int>(entries.size()) - 1; i >= 0; --i) {
    if (!entries[static_cast<std::size_t>(i)].consumed) return i;
  }
  return -1;
}

int DifferencePool::find_unconsumed(double target, double tol) const {
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  double second_dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
    const Entry& e = entries[static_cast<std::size_t>(i)];
    if (e.consumed) continue;
    const double dist = std::abs(e.tau - target);
    if (dist < best_dist) {
      second_dist = best_dist;
      best_dist = dist;
      best = i;
    } else if (dist < second_dist) {
      second_dist = dist;
    }
  }
  if (best < 0 || best_dist > tol) return -1;
  if (second_dist <= tol &&
      second_dist - best_dist <= 1e-12 * std::max(entries.back().tau, 1.0)) {
    fail(ErrorCode::MatchNotFound, "retrieve_line",
         "two pool entries match the distance " + std::to_string(target) +
             " equally well (collision?)");
  }
  return best;
}

HypothesisReport assert_hypotheses(const std::vector<double>& positions,
                                   const std::vector<double>& moduli,
                                   double gap) {
  HypothesisReport report;
  report.collision_free = is_collision_free(positions, gap);

  std::vector<double> diffs;
  for (std::size_t n = 0; n < positions.size(); ++n) {
    for (std::size_t k = n + 1; k < positions.size(); ++k) {
      diffs.push_back(std::abs(positions[n] - positions[k]));
    }
  }
  std::sort(diffs.begin(), diffs.end());
  if (!diffs.empty()) {
    report.min_difference_gap = diffs.front();
    for (std::size_t i = 1; i < diffs.size(); ++i) {
      report.min_difference_gap =
          std::min(report.min_difference_gap, diffs[i] - diffs[i - 1]);
    }
  }

  if (!moduli.empty() && moduli.size() == positions.size()) {
    const auto lo =
        std::min_element(positions.begin(), positions.end()) - positions.begin();
    const auto hi =
        std::max_element(positions.begin(), positions.end()) - positions.begin();
    const double m_lo = moduli[static_cast<std::size_t>(lo)];
    const double m_hi = moduli[static_cast<std::size_t>(hi)];
    report.outer_separation = std::abs(m_lo - m_hi);
    const double scale = std::max(m_lo, m_hi);
    report.outer_separation_rel =
        scale > 0.0 ? report.outer_separation / scale : 0.0;
  }
  return report;
}

namespace {

// Keep exactly the `expected` strongest terms; anything beyond must be
// relative noise (< 1e-6 of the strongest amplitude) or the term count is
// genuinely wrong.
void enforce_term_count(ExponentialSum& sum, int expected) {
  const int got = sum.order();
  if (sum.dc <= 0.0) {
    fail(ErrorCode::WrongTermCount, "retrieve_line",
         "recovered exponential sum lacks the zero-frequency term");
  }
  if (got < expected) {
    fail(ErrorCode::WrongTermCount, "retrieve_line",
         "expected " + std::to_string(2 * expected + 1) + " terms, apm found " +
             std::to_string(2 * got + 1));
  }
  if (got == expected) return;

  std::vector<ExponentialSum::Term> by_amp = sum.terms;
  std::sort(by_amp.begin(), by_amp.end(),
            [](const auto& a, const auto& b) {
              return std::abs(a.gamma) > std::abs(b.gamma);
            });
  double scale = std::abs(sum.dc);
  for (const auto& t : by_amp) scale = std::max(scale, std::abs(t.gamma));
  for (std::size_t i = static_cast<std::size_t>(expected); i < by_amp.size();
       ++i) {
    if (std::abs(by_amp[i].gamma) >= 1e-6 * scale) {
      fail(ErrorCode::WrongTermCount, "retrieve_line",
           "apm found " + std::to_string(2 * got + 1) +
               " significant terms, expected " +
               std::to_string(2 * expected + 1));
    }
  }
  by_amp.resize(static_cast<std::size_t>(expected));
  std::sort(by_amp.begin(), by_amp.end(),
            [](const auto& a, const auto& b) { return a.tau < b.tau; });
  sum.terms = std::move(by_amp);
}

LabeledProjection solve_two_atoms(const ExponentialSum& sum) {
  // gamma_0 = |c_1|^2 + |c_2|^2 and |gamma_1| = |c_1||c_2|; the moduli are
  // the roots of x^2 - gamma_0 x + |gamma_1|^2. Assigning the smaller
  // modulus to position 0 picks one of the two reflections.
  const double g0 = sum.dc;
  const double g1 = std::abs(sum.terms[0].gamma);
  const double disc = g0 * g0 - 4.0 * g1 * g1;
  if (disc <= 1e-12 * g0 * g0) {
    fail(ErrorCode::OuterModulusTie, "retrieve_line",
         "outer coefficient moduli coincide (two-atom case)");
  }
  const double root = std::sqrt(disc);
  const double c1 = std::sqrt(0.5 * (g0 - root));
  LabeledProjection out;
  out.positions = {0.0, sum.terms[0].tau};
  out.coeffs = {Complex(c1, 0.0), sum.terms[0].gamma / c1};
  return out;
}

}  // namespace

LabeledProjection retrieve_line(const LineSampleSet& samples,
                                const StructureKernel& kernel, int atom_count,
                                std::optional<double> match_tol,
                                PronyDiagnostics* prony_diagnostics) {
  const int n_atoms = atom_count;
  const int m_max = samples.sample_count() - 1;
  if (n_atoms < 1) {
    fail(ErrorCode::InvalidArgument, "retrieve_line", "need N >= 1");
  }
  if (m_max < 2 * n_atoms * (n_atoms - 1) + 1) {
    fail(ErrorCode::InvalidArgument, "retrieve_line",
         "need M >= 2N(N-1)+1 = " +
             std::to_string(2 * n_atoms * (n_atoms - 1) + 1) + ", got M = " +
             std::to_string(m_max));
  }
  if (!(samples.step > 0.0)) {
    fail(ErrorCode::InvalidArgument, "retrieve_line", "step must be positive");
  }

  // Divide out the structure kernel: E(hm) = |mu_hat|^2 / |nu_hat|^2.
  std::vector<double> exp_samples(samples.values.size());
  for (int m = 0; m <= m_max; ++m) {
    const double nu = kernel.fourier_radial(samples.step * m);
    if (!(nu > 0.0) || !std::isfinite(1.0 / (nu * nu))) {
      fail(ErrorCode::InvalidArgument, "retrieve_line",
           "kernel transform vanishes numerically at omega = " +
               std::to_string(samples.step * m));
    }
    exp_samples[static_cast<std::size_t>(m)] =
        samples.values[static_cast<std::size_t>(m)] / (nu * nu);
  }

  if (n_atoms == 1) {
    const double g0 = exp_samples[0];
    for (double v : exp_samples) {
      if (std::abs(v - g0) > 1e-6 * std::max(g0, 1.0)) {
        fail(ErrorCode::WrongTermCount, "retrieve_line",
             "single-atom intensity must be constant");
      }
    }
    LabeledProjection out;
    out.positions = {0.0};
    out.coeffs = {Complex(std::sqrt(g0), 0.0)};
    return out;
  }

  const int order = n_atoms * (n_atoms - 1) / 2;
  PronyConfig prony_config;
  prony_config.order_max = order;
  prony_config.step = samples.step;
  ExponentialSum sum = apm(exp_samples, prony_config, prony_diagnostics);
  enforce_term_count(sum, order);

  if (n_atoms == 2) return solve_two_atoms(sum);

  // Matching tolerance: a quarter of the smallest frequency gap, capped
  // relative to the largest frequency.
  double tol;
  if (match_tol && *match_tol > 0.0) {
    tol = *match_tol;
  } else {
    double min_gap = sum.terms[0].tau;
    for (std::size_t i = 1; i < sum.terms.size(); ++i) {
      min_gap = std::min(min_gap, sum.terms[i].tau - sum.terms[i - 1].tau);
    }
    tol = std::min(0.25 * min_gap, 1e-6 * sum.terms.back().tau);
  }

  DifferencePool pool;
  for (const auto& t : sum.terms) pool.entries.push_back({t.tau, t.gamma, false});

  const int last = order - 1;  // index of tau_L in the pool
  auto& entries = pool.entries;

  // Anchor step: T_1 = 0, T_N = tau_L, T_{N-1} = tau_{L-1}; the distance
  // T_N - T_{N-1} identifies gamma_{l*} = c_N conj(c_{N-1}), from which
  // |c_1| and the anchor coefficients follow.
  const double pos_n = entries[static_cast<std::size_t>(last)].tau;
  const double pos_n1 = entries[static_cast<std::size_t>(last - 1)].tau;
  const Complex gamma_n = entries[static_cast<std::size_t>(last)].gamma;
  const Complex gamma_n1 = entries[static_cast<std::size_t>(last - 1)].gamma;
  entries[static_cast<std::size_t>(last)].consumed = true;
  entries[static_cast<std::size_t>(last - 1)].consumed = true;

  const double anchor_gap = pos_n - pos_n1;
  if (std::abs(anchor_gap - pos_n1) <= tol) {
    fail(ErrorCode::MatchNotFound, "retrieve_line",
         "anchor distance T_N - T_{N-1} collides with T_{N-1}");
  }
  const int anchor_idx = pool.find_unconsumed(anchor_gap, tol);
  if (anchor_idx < 0) {
    fail(ErrorCode::MatchNotFound, "retrieve_line",
         "no pool entry matches the anchor distance T_N - T_{N-1}");
  }
  const Complex gamma_anchor = entries[static_cast<std::size_t>(anchor_idx)].gamma;
  entries[static_cast<std::size_t>(anchor_idx)].consumed = true;

  const double c1 =
      std::sqrt(std::abs(gamma_n * std::conj(gamma_n1) / gamma_anchor));
  const Complex coeff_n = gamma_n / c1;
  const Complex coeff_n1 = gamma_n1 / c1;
  if (std::abs(c1 - std::abs(coeff_n)) <=
      1e-12 * std::max(c1, std::abs(coeff_n))) {
    fail(ErrorCode::OuterModulusTie, "retrieve_line",
         "|c_1| and |c_N| coincide; mirror decisions are degenerate");
  }

  std::vector<double> positions = {0.0, pos_n1, pos_n};
  std::vector<Complex> coeffs = {Complex(c1, 0.0), coeff_n1, coeff_n};

  while (!pool.empty()) {
    const int idx_far = pool.largest_unconsumed();
    const double tau_far = entries[static_cast<std::size_t>(idx_far)].tau;
    const Complex gamma_far = entries[static_cast<std::size_t>(idx_far)].gamma;

    // The complementary distance tau_far + tau_near = T_N.
    entries[static_cast<std::size_t>(idx_far)].consumed = true;
    const int idx_near = pool.find_unconsumed(pos_n - tau_far, tol);
    entries[static_cast<std::size_t>(idx_far)].consumed = false;
    if (idx_near < 0) {
      fail(ErrorCode::MatchNotFound, "retrieve_line",
           "no pool entry complements " + std::to_string(tau_far) +
               " to T_N");
    }
    const double tau_near = entries[static_cast<std::size_t>(idx_near)].tau;
    const Complex gamma_near = entries[static_cast<std::size_t>(idx_near)].gamma;

    // Mirror decision: the new atom sits at distance tau_far from T_1 or
    // from T_N; the amplitude products decide which.
    const Complex d_right = gamma_far / c1;
    const Complex d_left = gamma_near / c1;
    const double res_right = std::abs(coeff_n * std::conj(d_right) - gamma_near);
    const double res_left = std::abs(coeff_n * std::conj(d_left) - gamma_far);
    if (std::abs(res_right - res_left) <=
        1e-12 * std::max(std::abs(gamma_far), std::abs(gamma_near))) {
      fail(ErrorCode::OuterModulusTie, "retrieve_line",
           "mirror decision residuals tie; |c_1| = |c_N| degenerate");
    }
    const double new_pos = res_right < res_left ? tau_far : tau_near;
    const Complex new_coeff = res_right < res_left ? d_right : d_left;

    // Consume every distance the new atom creates against accepted atoms.
    for (double s : positions) {
      const int idx = pool.find_unconsumed(std::abs(new_pos - s), tol);
      if (idx < 0) {
        fail(ErrorCode::MatchNotFound, "retrieve_line",
             "pool has no unconsumed entry for distance |" +
                 std::to_string(new_pos) + " - " + std::to_string(s) + "|");
      }
      entries[static_cast<std::size_t>(idx)].consumed = true;
    }
    positions.push_back(new_pos);
    coeffs.push_back(new_coeff);
  }

  if (static_cast<int>(positions.size()) != n_atoms) {
    fail(ErrorCode::MatchNotFound, "retrieve_line",
         "difference pool emptied after " + std::to_string(positions.size()) +
             " atoms, expected " + std::to_string(n_atoms));
  }

  std::vector<std::size_t> perm(positions.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return positions[a] < positions[b];
  });
  LabeledProjection out;
  for (std::size_t i : perm) {
    out.positions.push_back(positions[i]);
    out.coeffs.push_back(coeffs[i]);
  }
  out.validate();
  return out;
}

}  // namespace sparsepr
