#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <sparsepr/errors.hpp>
#include <sparsepr/prony.hpp>
#include <sparsepr/signal.hpp>
#include <sparsepr/synthesis.hpp>

using namespace sparsepr;

namespace {

// Exponential sum of a projected signal straight from the autocorrelation
// pairs: dc = sum |c_n|^2, one term per positive projected difference with
// amplitude c_n conj(c_k).
ExponentialSum pair_sum_of(const SparseSignal& signal,
                           const Eigen::VectorXd& direction) {
  const auto proj = project(signal.translations, direction);
  ExponentialSum sum;
  for (const auto& c : signal.coeffs) sum.dc += std::norm(c);
  for (std::size_t n = 0; n < proj.size(); ++n) {
    for (std::size_t k = 0; k < proj.size(); ++k) {
      if (proj[n] > proj[k]) {
        sum.terms.push_back(
            {proj[n] - proj[k], signal.coeffs[n] * std::conj(signal.coeffs[k])});
      }
    }
  }
  std::sort(sum.terms.begin(), sum.terms.end(),
            [](const auto& a, const auto& b) { return a.tau < b.tau; });
  return sum;
}

ExponentialSum random_sum(std::mt19937_64& rng, int order, double step) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> amp(0.5, 2.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  const double limit = 0.95 * std::numbers::pi / step;
  const double min_sep = 0.1 / step;
  std::vector<double> taus;
  while (static_cast<int>(taus.size()) < order) {
    const double tau = min_sep + (limit - min_sep) * unit(rng);
    const bool clear = std::all_of(taus.begin(), taus.end(), [&](double t) {
      return std::abs(t - tau) >= min_sep;
    });
    if (clear) taus.push_back(tau);
  }
  std::sort(taus.begin(), taus.end());
  ExponentialSum sum;
  sum.dc = amp(rng) * (unit(rng) < 0.5 ? -1.0 : 1.0);
  for (double tau : taus) sum.terms.push_back({tau, std::polar(amp(rng), angle(rng))});
  return sum;
}

void check_sums_match(const ExponentialSum& recovered,
                      const ExponentialSum& truth, double step,
                      double freq_tol_scaled, double amp_tol_rel) {
  REQUIRE(recovered.order() == truth.order());
  CHECK(std::abs(recovered.dc - truth.dc) <=
        amp_tol_rel * std::max(std::abs(truth.dc), 1.0));
  for (int l = 0; l < truth.order(); ++l) {
    const auto& r = recovered.terms[static_cast<std::size_t>(l)];
    const auto& t = truth.terms[static_cast<std::size_t>(l)];
    CHECK(std::abs(r.tau - t.tau) <= freq_tol_scaled / step);
    CHECK(std::abs(r.gamma - t.gamma) <= amp_tol_rel * std::abs(t.gamma));
  }
}

}  // namespace

TEST_CASE("evaluate: constant and two-term sums") {
  ExponentialSum constant;
  constant.dc = 3.0;
  CHECK(constant.evaluate(0.0) == doctest::Approx(3.0));
  CHECK(constant.evaluate(17.3) == doctest::Approx(3.0));

  ExponentialSum pair;
  pair.dc = 2.0;
  pair.terms.push_back({1.0, Complex(0.5, 0.0)});
  CHECK(pair.evaluate(0.0) == doctest::Approx(3.0));
}

TEST_CASE("evaluate: table-1 pair sum equals the sampled intensity path") {
  const SparseSignal s = paper_table1_signal();
  Eigen::VectorXd e1(2);
  e1 << 1.0, 0.0;
  const ExponentialSum sum = pair_sum_of(s, e1);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 50; ++k) {
    const double omega = u(rng);
    const double nu = s.kernel.fourier_radial(std::abs(omega));
    const double reference = fourier_intensity(s, omega * e1) / (nu * nu);
    CHECK(std::abs(sum.evaluate(omega) - reference) <=
          1e-10 * std::max(reference, 1.0));
  }
}

TEST_CASE("apm: single-pair round trip") {
  ExponentialSum truth;
  truth.dc = 2.0;
  truth.terms.push_back({0.7, Complex(0.5, 0.5)});
  PronyConfig config;
  config.order_max = 1;
  config.step = 1.0;
  const ExponentialSum recovered = apm(truth.sample(1.0, 20), config);
  check_sums_match(recovered, truth, 1.0, 1e-8, 1e-8);
}

TEST_CASE("apm: constant samples collapse to the dc term") {
  PronyConfig config;
  config.order_max = 1;
  config.step = 1.0;
  const std::vector<double> samples(12, 2.5);
  const ExponentialSum recovered = apm(samples, config);
  CHECK(recovered.order() == 0);
  CHECK(recovered.dc == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("apm: table-1 first axis recovers all pairwise differences") {
  const SparseSignal s = paper_table1_signal();
  Eigen::VectorXd e1(2);
  e1 << 1.0, 0.0;
  const double h = 0.0387;
  const LineSampleSet line = sample_line(s, e1, h, 99);
  std::vector<double> exp_samples(line.values.size());
  for (std::size_t m = 0; m < exp_samples.size(); ++m) {
    const double nu = s.kernel.fourier_radial(h * static_cast<double>(m));
    exp_samples[m] = line.values[m] / (nu * nu);
  }

  PronyConfig config;
  config.order_max = 10;
  config.step = h;
  const ExponentialSum recovered = apm(exp_samples, config);
  const ExponentialSum truth = pair_sum_of(s, e1);

  // 21 terms counting both mirror halves and the dc term.
  REQUIRE(truth.order() == 10);
  CHECK(recovered.term_count() == 21);
  check_sums_match(recovered, truth, h, 1e-8, 1e-7);
}

TEST_CASE("apm: seeded round trips across orders") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> step_dist(0.4, 1.6);
  for (int trial = 0; trial < 30; ++trial) {
    const int order = 1 + static_cast<int>(rng() % 8);
    const double step = step_dist(rng);
    const ExponentialSum truth = random_sum(rng, order, step);
    PronyConfig config;
    config.order_max = order;
    config.step = step;
    const int m_max = 4 * order + 6;
    const ExponentialSum recovered = apm(truth.sample(step, m_max), config);
    check_sums_match(recovered, truth, step, 1e-7, 1e-7);
  }
}

TEST_CASE("apm: annihilation identity of the Prony coefficients") {
  std::mt19937_64 rng(102);
  const ExponentialSum truth = random_sum(rng, 4, 1.0);
  const int m_max = 30;
  const std::vector<double> samples = truth.sample(1.0, m_max);
  PronyConfig config;
  config.order_max = 4;
  config.step = 1.0;
  PronyDiagnostics diag;
  apm(samples, config, &diag);

  double scale = 0.0;
  for (double v : samples) scale = std::max(scale, std::abs(v));
  const int degree = static_cast<int>(diag.prony_coefficients.size()) - 1;
  for (int m = 0; m + degree <= m_max; ++m) {
    double acc = 0.0;
    for (int k = 0; k <= degree; ++k) {
      acc += diag.prony_coefficients(k) * samples[static_cast<std::size_t>(m + k)];
    }
    CHECK(std::abs(acc) <= 1e-8 * scale);
  }
}

TEST_CASE("apm: order overestimate returns the same sum") {
  std::mt19937_64 rng(103);
  const ExponentialSum truth = random_sum(rng, 3, 1.0);
  const std::vector<double> samples = truth.sample(1.0, 40);

  PronyConfig exact;
  exact.order_max = 3;
  exact.step = 1.0;
  PronyConfig loose = exact;
  loose.order_max = 5;

  const ExponentialSum a = apm(samples, exact);
  const ExponentialSum b = apm(samples, loose);
  check_sums_match(b, a, 1.0, 1e-9, 1e-9);
  b.validate();
}

TEST_CASE("apm: decaying data has no unimodular roots") {
  std::vector<double> samples;
  for (int m = 0; m <= 12; ++m) samples.push_back(2.0 * std::pow(0.5, m));
  PronyConfig config;
  config.order_max = 1;
  config.step = 1.0;
  CHECK_THROWS_AS(apm(samples, config), Error);
  try {
    apm(samples, config);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoUnimodularRoots);
  }
}

TEST_CASE("apm: non-symmetric rank pattern raises RankDeficient") {
  // Two real geometric modes have an even-rank Hankel kernel structure.
  std::vector<double> samples;
  for (int m = 0; m <= 20; ++m) {
    samples.push_back(std::pow(0.8, m) + 2.0 * std::pow(0.3, m));
  }
  PronyConfig config;
  config.order_max = 2;
  config.step = 1.0;
  try {
    apm(samples, config);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::RankDeficient ||
           e.code() == ErrorCode::NoUnimodularRoots));
  }
}

TEST_CASE("apm: validates the sample count against the order") {
  PronyConfig config;
  config.order_max = 3;
  config.step = 1.0;
  const std::vector<double> samples(10, 1.0);  // M = 9 < 4L+1 = 13
  CHECK_THROWS_AS(apm(samples, config), Error);
}
