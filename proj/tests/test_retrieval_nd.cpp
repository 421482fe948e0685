#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <sparsepr/ambiguity.hpp>
#include <sparsepr/errors.hpp>
#include <sparsepr/retrieval_nd.hpp>
#include <sparsepr/signal.hpp>
#include <sparsepr/synthesis.hpp>

using namespace sparsepr;

namespace {

Eigen::VectorXd vec2(double x, double y) {
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

LabeledProjection make_line(const std::vector<double>& positions,
                            const std::vector<Complex>& coeffs) {
  LabeledProjection line;
  line.positions = positions;
  line.coeffs = coeffs;
  return line;
}

SparseSignal random_instance(std::mt19937_64& rng, int dim, int atoms,
                             bool gaussian) {
  SynthesisConfig config;
  config.dim = dim;
  config.atom_count = atoms;
  config.min_gap_rel = 0.05;
  config.kernel =
      gaussian ? StructureKernel::gaussian(0.4) : StructureKernel::dirac();
  return synthesize_instance(config, rng);
}

RetrieveConfig test_config(int atoms, std::uint64_t seed) {
  RetrieveConfig config;
  config.samples_per_line = 5 * atoms * (atoms - 1) + 2;  // ~2.5x minimal
  config.seed = seed;
  return config;
}

void check_match(const SparseSignal& truth, const SparseSignal& recovered) {
  const MatchReport report = best_match_error(truth, recovered);
  double cmax = 0.0;
  for (const auto& c : truth.coeffs) cmax = std::max(cmax, std::abs(c));
  CHECK(report.translation_error < 1e-6 * truth.diameter());
  CHECK(report.coefficient_error < 1e-5 * cmax);
}

}  // namespace

TEST_CASE("match_by_modulus: permutation without and with ties") {
  const auto a = make_line({0.0, 1.0, 2.0}, {Complex(1.0, 0.0), Complex(2.0, 0.0),
                                             Complex(3.0, 0.0)});
  const auto b = make_line({0.0, 0.5, 2.5}, {Complex(0.0, 3.0), Complex(1.0, 0.0),
                                             Complex(0.0, -2.0)});
  const ModulusAlignment alignment = match_by_modulus({a, b}, 1e-6);
  CHECK(alignment[1] == std::vector<int>{1, 2, 0});

  const auto tied =
      make_line({0.0, 1.0, 2.0},
                {Complex(1.0, 0.0), Complex(1.0 + 1e-12, 0.0), Complex(3.0, 0.0)});
  CHECK_THROWS_AS(match_by_modulus({a, tied}, 1e-6), Error);
}

TEST_CASE("match_by_modulus: table-1 moduli align across shuffled lines") {
  const SparseSignal table = paper_table1_signal();
  std::vector<Complex> coeffs_1(table.coeffs.begin(), table.coeffs.end());
  std::vector<Complex> coeffs_2 = {coeffs_1[3], coeffs_1[0], coeffs_1[2],
                                   coeffs_1[4], coeffs_1[1]};
  const auto line_1 = make_line({0.0, 1.0, 2.0, 3.0, 4.0}, coeffs_1);
  const auto line_2 = make_line({0.0, 1.5, 2.5, 3.5, 4.5}, coeffs_2);
  const ModulusAlignment alignment = match_by_modulus({line_1, line_2}, 1e-6);
  CHECK(alignment[1] == std::vector<int>{1, 4, 2, 0, 3});
}

TEST_CASE("build_candidates: reflection pairs per anchor") {
  const auto line_1 =
      make_line({0.0, 2.0, 5.0},
                {Complex(1.0, 0.0), Complex(2.0, 0.0), Complex(3.0, 0.0)});
  const auto line_2 =
      make_line({0.0, 1.0, 4.0},
                {Complex(2.0, 0.0), Complex(1.0, 0.0), Complex(3.0, 0.0)});
  const ModulusAlignment alignment = match_by_modulus({line_1, line_2}, 1e-6);
  const CandidateSet set = build_candidates({line_1, line_2}, alignment);

  REQUIRE(set.per_anchor.size() == 3);
  // Anchor 0 matches line-2 atom at 1.0: candidates {1, 4-1=3}.
  REQUIRE(set.per_anchor[0].size() == 2);
  CHECK(set.per_anchor[0][0](0) == doctest::Approx(0.0));
  const double y0 = set.per_anchor[0][0](1);
  const double y1 = set.per_anchor[0][1](1);
  CHECK(std::min(y0, y1) == doctest::Approx(1.0));
  CHECK(std::max(y0, y1) == doctest::Approx(3.0));
}

TEST_CASE("build_candidates: D=3 anchors carry up to four vertices") {
  const auto line_1 = make_line({0.0, 3.0}, {Complex(1.0, 0.0), Complex(2.0, 0.0)});
  const auto line_2 = make_line({0.0, 1.0}, {Complex(2.0, 0.0), Complex(1.0, 0.0)});
  const auto line_3 = make_line({0.0, 2.0}, {Complex(1.0, 0.0), Complex(2.0, 0.0)});
  const ModulusAlignment alignment =
      match_by_modulus({line_1, line_2, line_3}, 1e-6);
  const CandidateSet set = build_candidates({line_1, line_2, line_3}, alignment);
  REQUIRE(set.per_anchor.size() == 2);
  CHECK(set.per_anchor[0].size() <= 4);
  CHECK(set.per_anchor[1].size() <= 4);
}

TEST_CASE("ordering condition and adaptive direction choice") {
  CandidateSet candidates;
  candidates.per_anchor = {{vec2(0.0, 0.0), vec2(0.0, 5.0)},
                           {vec2(10.0, 0.0), vec2(10.0, 5.0)}};
  // e_1 separates the two anchors with a wide margin.
  CHECK(ordering_condition(candidates, vec2(1.0, 0.0), 1e-6));
  // e_2 projections overlap entirely; such a draw must be rejected and the
  // search still succeeds with another direction.
  CHECK_FALSE(ordering_condition(candidates, vec2(0.0, 1.0), 1e-6));

  int tries = 0;
  const Eigen::VectorXd theta = choose_adaptive_direction(
      candidates, {vec2(1.0, 0.0)}, 99, 1000, 1e-6, 1e-9, &tries);
  CHECK(theta.norm() == doctest::Approx(1.0));
  CHECK(ordering_condition(candidates, theta, 1e-6));
  CHECK(tries >= 1);
}

TEST_CASE("table-1 third line at angle 0.143 pi is a valid adaptive direction") {
  const SparseSignal table = paper_table1_signal();
  const double h = 0.0387;
  std::vector<LabeledProjection> axis_solutions;
  for (int d = 0; d < 2; ++d) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e(d) = 1.0;
    axis_solutions.push_back(
        retrieve_line(sample_line(table, e, h, 99), table.kernel, 5));
  }
  const ModulusAlignment alignment = match_by_modulus(axis_solutions, 1e-4);
  const CandidateSet candidates = build_candidates(axis_solutions, alignment);

  const double angle = 0.143 * std::numbers::pi;
  const Eigen::VectorXd theta = vec2(std::cos(angle), std::sin(angle));
  CHECK(ordering_condition(candidates, theta, 1e-6 * candidates.diameter()));
  CHECK(projections_collision_free(candidates.all(), theta,
                                   1e-9 * candidates.diameter()));
}

TEST_CASE("resolve_translations: axis-aligned adaptive line is the identity") {
  const auto line_1 =
      make_line({0.0, 2.0, 5.0},
                {Complex(1.0, 0.0), Complex(2.0, 0.0), Complex(3.0, 0.0)});
  const auto line_2 =
      make_line({0.0, 1.0, 4.0},
                {Complex(2.0, 0.0), Complex(1.0, 0.0), Complex(3.0, 0.0)});
  ModulusAlignment alignment = match_by_modulus({line_1, line_2}, 1e-6);
  const CandidateSet candidates = build_candidates({line_1, line_2}, alignment);

  DirectionBundle bundle;
  bundle.base = {vec2(1.0, 0.0), vec2(0.0, 1.0)};
  bundle.adaptive = {vec2(0.0, 1.0)};
  alignment.push_back(alignment[1]);  // the adaptive line repeats line 2

  const auto translations = resolve_translations(
      {line_1, line_2}, {line_2}, bundle, alignment, candidates, 1e-6);
  REQUIRE(translations.size() == 3);
  CHECK(translations[0](0) == doctest::Approx(0.0));
  CHECK(translations[0](1) == doctest::Approx(1.0));
  CHECK(translations[1](1) == doctest::Approx(0.0));
  CHECK(translations[2](1) == doctest::Approx(4.0));
}

TEST_CASE("resolve_translations: exact forward projections in 3D") {
  std::mt19937_64 rng(31);
  const SparseSignal truth = random_instance(rng, 3, 3, false);
  const SparseSignal canon = canonicalize(truth).first;

  std::vector<Eigen::VectorXd> dirs;
  for (int d = 0; d < 3; ++d) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
    e(d) = 1.0;
    dirs.push_back(e);
  }
  Eigen::VectorXd t1(3), t2(3);
  t1 << 2.0, 1.0, 0.5;
  t2 << -0.5, 2.0, 1.3;
  t1 /= t1.norm();
  t2 -= t2.dot(t1) * t1;
  t2 /= t2.norm();

  const auto project_line = [&](const Eigen::VectorXd& dir) {
    std::vector<double> proj = project(canon.translations, dir);
    const double lo = *std::min_element(proj.begin(), proj.end());
    std::vector<std::size_t> order(proj.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });
    LabeledProjection line;
    for (std::size_t i : order) {
      line.positions.push_back(proj[i] - lo);
      line.coeffs.push_back(canon.coeffs[i]);
    }
    return line;
  };

  std::vector<LabeledProjection> base = {project_line(dirs[0]),
                                         project_line(dirs[1]),
                                         project_line(dirs[2])};
  std::vector<LabeledProjection> adaptive = {project_line(t1), project_line(t2)};
  ModulusAlignment alignment = match_by_modulus(base, 1e-9);
  const CandidateSet candidates = build_candidates(base, alignment);
  for (const auto& line : adaptive) {
    alignment.push_back(match_by_modulus({base[0], line}, 1e-9)[1]);
  }
  DirectionBundle bundle;
  bundle.base = dirs;
  bundle.adaptive = {t1, t2};

  const auto translations = resolve_translations(base, adaptive, bundle,
                                                 alignment, candidates, 1e-6);
  for (const auto& solved : translations) {
    double best = 1e300;
    for (const auto& t : canon.translations) {
      best = std::min(best, (solved - t).norm());
    }
    CHECK(best <= 1e-10);
  }
}

TEST_CASE("retrieve_nd: table-1 end to end with the published directions") {
  const SparseSignal table = paper_table1_signal();
  RetrieveConfig config;
  config.samples_per_line = 99;
  const double angle = 0.143 * std::numbers::pi;
  config.forced_adaptive = {vec2(std::cos(angle), std::sin(angle))};

  const RetrievalResult result = retrieve_nd(
      make_signal_sampler(table), table.kernel, 2, 5, 0.0387, config);

  CHECK(result.report.samples_consumed == 3 * 100);
  const MatchReport report = best_match_error(table, result.signal);
  CHECK(report.translation_error <= 1e-6);
  CHECK(report.coefficient_error <= 1e-3);
}

TEST_CASE("retrieve_nd: D = 1 degenerates to the line solver") {
  std::mt19937_64 rng(32);
  const SparseSignal truth = random_instance(rng, 1, 3, false);
  const RetrievalResult result =
      retrieve_nd(make_signal_sampler(truth), truth.kernel, 1, 3,
                  suggest_step(truth), test_config(3, 7));
  CHECK(result.report.lines.size() == 1);
  check_match(truth, result.signal);
}

TEST_CASE("retrieve_nd: random 3D Dirac instance") {
  std::mt19937_64 rng(33);
  const SparseSignal truth = random_instance(rng, 3, 3, false);
  const RetrievalResult result =
      retrieve_nd(make_signal_sampler(truth), truth.kernel, 3, 3,
                  suggest_step(truth), test_config(3, 11));
  CHECK(result.report.lines.size() == 5);
  check_match(truth, result.signal);
}

TEST_CASE("retrieve_nd: sample budget at minimal M") {
  SparseSignal truth;
  truth.dim = 2;
  truth.coeffs = {Complex(3.0, 1.0), Complex(-1.0, 1.0)};
  truth.translations = {vec2(0.0, 0.0), vec2(7.0, 3.0)};

  long long counted = 0;
  const LineSampler sampler = [&](const Eigen::VectorXd& dir, double step,
                                  int m_max) {
    LineSampleSet samples = sample_line(truth, dir, step, m_max);
    counted += samples.sample_count();
    return samples;
  };
  RetrieveConfig config;  // samples_per_line = -1 picks minimal M
  config.seed = 5;
  const RetrievalResult result =
      retrieve_nd(sampler, truth.kernel, 2, 2, suggest_step(truth), config);
  const int m_max = 2 * 2 * 1 + 1;
  CHECK(counted == 3ll * (m_max + 1));
  CHECK(result.report.samples_consumed == counted);
  check_match(truth, result.signal);
}

TEST_CASE("retrieve_nd: ground truth lies in the candidate set") {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 5; ++trial) {
    const int dim = 2 + trial % 2;
    const int atoms = 3 + static_cast<int>(rng() % 2);
    const SparseSignal truth = random_instance(rng, dim, atoms, false);
    const double h = suggest_step(truth);
    const int m_max = 5 * atoms * (atoms - 1) + 2;

    std::vector<LabeledProjection> axis_solutions;
    for (int d = 0; d < dim; ++d) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
      e(d) = 1.0;
      axis_solutions.push_back(
          retrieve_line(sample_line(truth, e, h, m_max), truth.kernel, atoms));
    }
    double cmax = 0.0;
    for (const auto& c : truth.coeffs) cmax = std::max(cmax, std::abs(c));
    const ModulusAlignment alignment =
        match_by_modulus(axis_solutions, 1e-6 * cmax);
    const CandidateSet candidates = build_candidates(axis_solutions, alignment);

    // Determine each axis line's realized orientation against the canonical
    // truth, then check the true transversal vertex by vertex.
    const SparseSignal canon = canonicalize(truth).first;
    std::vector<int> orientation(static_cast<std::size_t>(dim), +1);
    for (int d = 0; d < dim; ++d) {
      std::vector<double> proj;
      for (const auto& t : canon.translations) proj.push_back(t(d));
      std::sort(proj.begin(), proj.end());
      const auto& line = axis_solutions[static_cast<std::size_t>(d)].positions;
      double plain = 0.0, mirrored = 0.0;
      for (std::size_t i = 0; i < proj.size(); ++i) {
        plain = std::max(plain, std::abs(proj[i] - line[i]));
        mirrored = std::max(
            mirrored,
            std::abs((proj.back() - proj[proj.size() - 1 - i]) - line[i]));
      }
      orientation[static_cast<std::size_t>(d)] = plain <= mirrored ? +1 : -1;
    }

    for (std::size_t n = 0; n < canon.coeffs.size(); ++n) {
      const double target = std::abs(canon.coeffs[n]);
      int anchor = 0;
      double best = 1e300;
      for (int i = 0; i < axis_solutions[0].atom_count(); ++i) {
        const double d = std::abs(
            std::abs(axis_solutions[0].coeffs[static_cast<std::size_t>(i)]) -
            target);
        if (d < best) {
          best = d;
          anchor = i;
        }
      }
      Eigen::VectorXd expected(dim);
      for (int d = 0; d < dim; ++d) {
        std::vector<double> proj;
        for (const auto& t : canon.translations) proj.push_back(t(d));
        const double hi = *std::max_element(proj.begin(), proj.end());
        expected(d) = orientation[static_cast<std::size_t>(d)] > 0
                          ? canon.translations[n](d)
                          : hi - canon.translations[n](d);
      }
      double nearest = 1e300;
      for (const auto& cand :
           candidates.per_anchor[static_cast<std::size_t>(anchor)]) {
        nearest = std::min(nearest, (cand - expected).norm());
      }
      CHECK(nearest <= 1e-8);
    }
  }
}

TEST_CASE("retrieve_nd: adaptive directions satisfy the ordering post hoc") {
  std::mt19937_64 rng(36);
  const SparseSignal truth = random_instance(rng, 3, 4, true);
  const RetrievalResult result =
      retrieve_nd(make_signal_sampler(truth), truth.kernel, 3, 4,
                  suggest_step(truth), test_config(4, 21));
  check_match(truth, result.signal);

  const auto& atoms = result.signal.translations;
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    if (atoms[i](0) < atoms[lo](0)) lo = i;
    if (atoms[i](0) > atoms[hi](0)) hi = i;
  }
  for (std::size_t l = 3; l < result.report.lines.size(); ++l) {
    const auto& theta = result.report.lines[l].direction;
    CHECK(theta.dot(atoms[lo]) < theta.dot(atoms[hi]));
  }
}

TEST_CASE("retrieve_nd: round trips across dimensions and kernels") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 12; ++trial) {
    const int dim = 2 + trial % 2;
    const int atoms = 2 + static_cast<int>(rng() % 4);
    const SparseSignal truth = random_instance(rng, dim, atoms, trial % 3 == 0);
    const RetrieveConfig config =
        test_config(atoms, 100 + static_cast<std::uint64_t>(trial));
    const RetrievalResult result = retrieve_nd(
        make_signal_sampler(truth), truth.kernel, dim, atoms,
        suggest_step(truth), config);
    CHECK(result.report.samples_consumed ==
          static_cast<long long>(2 * dim - 1) * (config.samples_per_line + 1));
    check_match(truth, result.signal);
  }
}

TEST_CASE("retrieve_2d_generic: axis directions agree with retrieve_nd") {
  std::mt19937_64 rng(38);
  const SparseSignal truth = random_instance(rng, 2, 4, false);
  const double h = suggest_step(truth);
  RetrieveConfig config = test_config(4, 55);
  const double angle = 0.2 * std::numbers::pi;
  const Eigen::VectorXd psi3 = vec2(std::cos(angle), std::sin(angle));
  config.forced_adaptive = {psi3};

  const RetrievalResult nd =
      retrieve_nd(make_signal_sampler(truth), truth.kernel, 2, 4, h, config);
  const RetrievalResult generic = retrieve_2d_generic(
      make_signal_sampler(truth), truth.kernel, vec2(1.0, 0.0), vec2(0.0, 1.0),
      psi3, 4, h, config);

  CHECK_FALSE(generic.report.role_swapped);
  REQUIRE(nd.signal.atom_count() == generic.signal.atom_count());
  for (int n = 0; n < nd.signal.atom_count(); ++n) {
    CHECK((nd.signal.translations[static_cast<std::size_t>(n)] -
           generic.signal.translations[static_cast<std::size_t>(n)])
              .norm() <= 1e-8);
    CHECK(std::abs(nd.signal.coeffs[static_cast<std::size_t>(n)] -
                   generic.signal.coeffs[static_cast<std::size_t>(n)]) <= 1e-8);
  }
  check_match(truth, generic.signal);
}

TEST_CASE("retrieve_2d_generic: wide instance forces the role swap") {
  // The atoms spread along x while psi_3 is nearly vertical: anchoring on
  // psi_1 (x-like) cannot separate the outer candidate sets along psi_3, so
  // the roles of psi_1 and psi_2 must be interchanged.
  SparseSignal truth;
  truth.dim = 2;
  truth.coeffs = {Complex(5.0, 0.0), Complex(0.0, 2.0), Complex(-8.0, 1.0)};
  truth.translations = {vec2(0.0, 0.0), vec2(10.0, 3.0), vec2(4.0, 7.0)};

  const Eigen::VectorXd psi1 = vec2(1.0, 0.05).normalized();
  const Eigen::VectorXd psi2 = vec2(0.05, 1.0).normalized();
  const Eigen::VectorXd psi3 = vec2(0.1, 1.0).normalized();
  const RetrievalResult result =
      retrieve_2d_generic(make_signal_sampler(truth), truth.kernel, psi1, psi2,
                          psi3, 3, suggest_step(truth), test_config(3, 77));
  CHECK(result.report.role_swapped);
  check_match(truth, result.signal);
}

TEST_CASE("retrieve_2d_generic: dependent directions are rejected") {
  std::mt19937_64 rng(39);
  const SparseSignal truth = random_instance(rng, 2, 3, false);
  const Eigen::VectorXd psi1 = vec2(1.0, 0.2).normalized();
  try {
    retrieve_2d_generic(make_signal_sampler(truth), truth.kernel, psi1,
                        vec2(0.0, 1.0), psi1, 3, suggest_step(truth),
                        test_config(3, 88));
    FAIL("expected GenericityFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GenericityFailure);
  }
}
