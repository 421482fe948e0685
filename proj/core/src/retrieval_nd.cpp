#include "sparsepr/retrieval_nd.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sparsepr/errors.hpp"

namespace sparsepr {

namespace {

std::vector<double> moduli_of(const LabeledProjection& line) {
  std::vector<double> out;
  out.reserve(line.coeffs.size());
  for (const Complex& c : line.coeffs) out.push_back(std::abs(c));
  return out;
}

void check_moduli_separation(const LabeledProjection& line, double tol,
                             const char* op) {
  const auto mods = moduli_of(line);
  for (std::size_t i = 0; i < mods.size(); ++i) {
    for (std::size_t j = i + 1; j < mods.size(); ++j) {
      if (std::abs(mods[i] - mods[j]) <= 2.0 * tol) {
        fail(ErrorCode::AmbiguousMatch, op,
             "coefficient moduli " + std::to_string(mods[i]) + " and " +
                 std::to_string(mods[j]) + " are within 2 tol = " +
                 std::to_string(2.0 * tol));
      }
    }
  }
}

// Nearest-modulus assignment of one line against reference moduli; must be
// a bijection.
std::vector<int> match_one_line(const std::vector<double>& reference,
                                const LabeledProjection& line, double tol,
                                const char* op) {
  check_moduli_separation(line, tol, op);
  const auto mods = moduli_of(line);
  if (mods.size() != reference.size()) {
    fail(ErrorCode::InvalidArgument, op, "atom count differs between lines");
  }
  std::vector<int> to(reference.size(), -1);
  std::vector<bool> used(mods.size(), false);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < mods.size(); ++j) {
      const double d = std::abs(mods[j] - reference[i]);
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(j);
      }
    }
    if (used[static_cast<std::size_t>(best)]) {
      fail(ErrorCode::AmbiguousMatch, op,
           "modulus alignment is not a bijection");
    }
    used[static_cast<std::size_t>(best)] = true;
    to[i] = best;
  }
  return to;
}

LabeledProjection reflect_line(const LabeledProjection& line) {
  const double extent = line.extent();
  const std::size_t n = line.positions.size();
  LabeledProjection out;
  out.positions.resize(n);
  out.coeffs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.positions[i] = extent - line.positions[n - 1 - i];
    out.coeffs[i] = std::conj(line.coeffs[n - 1 - i]);
  }
  return out;
}

Eigen::MatrixXd direction_matrix(const std::vector<Eigen::VectorXd>& columns) {
  const int dim = static_cast<int>(columns.front().size());
  Eigen::MatrixXd mat(dim, static_cast<int>(columns.size()));
  for (int j = 0; j < mat.cols(); ++j) mat.col(j) = columns[static_cast<std::size_t>(j)];
  return mat;
}

double condition_number(const Eigen::MatrixXd& mat) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / (sv(sv.size() - 1));
}

// +1: ordering condition holds as stated; -1: holds with the direction
// reversed; 0: candidate projections of the outer anchors overlap.
int ordering_orientation(const CandidateSet& candidates,
                         const Eigen::VectorXd& direction, double margin) {
  double first_lo = std::numeric_limits<double>::infinity();
  double first_hi = -first_lo;
  for (const auto& s : candidates.per_anchor.front()) {
    const double p = direction.dot(s);
    first_lo = std::min(first_lo, p);
    first_hi = std::max(first_hi, p);
  }
  double last_lo = std::numeric_limits<double>::infinity();
  double last_hi = -last_lo;
  for (const auto& s : candidates.per_anchor.back()) {
    const double p = direction.dot(s);
    last_lo = std::min(last_lo, p);
    last_hi = std::max(last_hi, p);
  }
  if (first_hi + margin <= last_lo) return 1;
  if (last_hi + margin <= first_lo) return -1;
  return 0;
}

// Gaussian unit vector, optionally restricted to the cone of opening pi/4
// around the first axis (random draws near e_1 rarely violate the ordering
// condition when the anchors are separated along the first coordinate).
Eigen::VectorXd draw_direction(std::mt19937_64& rng, int dim, bool cone) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (!cone || dim < 2) {
    Eigen::VectorXd v(dim);
    do {
      for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
    } while (v.norm() < 1e-12);
    return v / v.norm();
  }
  Eigen::VectorXd ortho = Eigen::VectorXd::Zero(dim);
  do {
    for (int i = 1; i < dim; ++i) ortho(i) = gauss(rng);
  } while (ortho.norm() < 1e-12);
  ortho /= ortho.norm();
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 4.0);
  const double phi = angle(rng);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(dim);
  dir(0) = std::cos(phi);
  dir += std::sin(phi) * ortho;
  return dir;
}

bool linearly_independent(const std::vector<Eigen::VectorXd>& span,
                          const Eigen::VectorXd& candidate) {
  if (span.empty()) return true;
  Eigen::MatrixXd mat(candidate.size(),
                      static_cast<int>(span.size()) + 1);
  for (int j = 0; j < static_cast<int>(span.size()); ++j) {
    mat.col(j) = span[static_cast<std::size_t>(j)];
  }
  mat.col(mat.cols() - 1) = candidate;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
  if (svd.singularValues().size() < mat.cols()) return false;
  return svd.singularValues()(mat.cols() - 1) > 1e-6;
}

struct ProjectedDiff {
  double value;
  std::size_t from;
  std::size_t to;
};

}  // namespace

LineSampler make_signal_sampler(const SparseSignal& signal) {
  return [signal](const Eigen::VectorXd& direction, double step,
                  int sample_max_index) {
    return sample_line(signal, direction, step, sample_max_index);
  };
}

std::vector<Eigen::VectorXd> CandidateSet::all() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& anchor : per_anchor) {
    out.insert(out.end(), anchor.begin(), anchor.end());
  }
  return out;
}

double CandidateSet::diameter() const {
  const auto pts = all();
  double diam = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      diam = std::max(diam, (pts[i] - pts[j]).norm());
    }
  }
  return diam;
}

ModulusAlignment match_by_modulus(const std::vector<LabeledProjection>& lines,
                                  double tol) {
  if (lines.empty()) {
    fail(ErrorCode::InvalidArgument, "match_by_modulus", "no lines given");
  }
  check_moduli_separation(lines.front(), tol, "match_by_modulus");
  const auto reference = moduli_of(lines.front());
  ModulusAlignment alignment;
  std::vector<int> identity(reference.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<int>(i);
  alignment.push_back(identity);
  for (std::size_t d = 1; d < lines.size(); ++d) {
    alignment.push_back(
        match_one_line(reference, lines[d], tol, "match_by_modulus"));
  }
  return alignment;
}

CandidateSet build_candidates(
    const std::vector<LabeledProjection>& axis_solutions,
    const ModulusAlignment& alignment) {
  const int dim = static_cast<int>(axis_solutions.size());
  const int n_atoms = axis_solutions.front().atom_count();
  if (static_cast<int>(alignment.size()) < dim) {
    fail(ErrorCode::InvalidArgument, "build_candidates",
         "alignment does not cover all base lines");
  }

  CandidateSet set;
  set.per_anchor.resize(static_cast<std::size_t>(n_atoms));
  for (int i = 0; i < n_atoms; ++i) {
    auto& anchor = set.per_anchor[static_cast<std::size_t>(i)];
    const unsigned combos = 1u << (dim - 1);
    for (unsigned mask = 0; mask < combos; ++mask) {
      Eigen::VectorXd point(dim);
      point(0) = axis_solutions[0].positions[static_cast<std::size_t>(i)];
      for (int d = 1; d < dim; ++d) {
        const auto& line = axis_solutions[static_cast<std::size_t>(d)];
        const int nd = alignment[static_cast<std::size_t>(d)][static_cast<std::size_t>(i)];
        const double u = line.positions[static_cast<std::size_t>(nd)];
        point(d) = (mask >> (d - 1)) & 1u ? line.extent() - u : u;
      }
      const bool duplicate =
          std::any_of(anchor.begin(), anchor.end(), [&](const auto& q) {
            return (q - point).norm() <= 1e-12 * (1.0 + point.norm());
          });
      if (!duplicate) anchor.push_back(std::move(point));
    }
  }
  return set;
}

CandidateSet build_candidates(
    const std::vector<LabeledProjection>& base_solutions,
    const ModulusAlignment& alignment,
    const std::vector<Eigen::VectorXd>& base_directions) {
  CandidateSet set = build_candidates(base_solutions, alignment);
  const Eigen::MatrixXd basis_t = direction_matrix(base_directions).transpose();
  if (condition_number(basis_t) > 1e12) {
    fail(ErrorCode::SingularBasis, "build_candidates",
         "base directions are numerically dependent");
  }
  const auto lu = basis_t.fullPivLu();
  for (auto& anchor : set.per_anchor) {
    for (auto& point : anchor) point = lu.solve(point);
  }
  return set;
}

bool ordering_condition(const CandidateSet& candidates,
                        const Eigen::VectorXd& direction, double margin) {
  return ordering_orientation(candidates, direction, margin) == 1;
}

bool projections_collision_free(const std::vector<Eigen::VectorXd>& points,
                                const Eigen::VectorXd& direction, double gap) {
  std::vector<double> projections;
  projections.reserve(points.size());
  for (const auto& p : points) projections.push_back(direction.dot(p));

  // Distinct projected points first.
  for (std::size_t i = 0; i < projections.size(); ++i) {
    for (std::size_t j = i + 1; j < projections.size(); ++j) {
      if (std::abs(projections[i] - projections[j]) <= gap) return false;
    }
  }

  double diameter = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      diameter = std::max(diameter, (points[i] - points[j]).norm());
    }
  }
  const double equal_tol = 1e-12 * std::max(diameter, 1.0);

  std::vector<ProjectedDiff> diffs;
  diffs.reserve(points.size() * (points.size() - 1));
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i != j) diffs.push_back({projections[i] - projections[j], i, j});
    }
  }
  std::sort(diffs.begin(), diffs.end(),
            [](const ProjectedDiff& a, const ProjectedDiff& b) {
              return a.value < b.value;
            });
  for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
    for (std::size_t j = i + 1; j < diffs.size(); ++j) {
      if (diffs[j].value - diffs[i].value > gap) break;
      const Eigen::VectorXd va = points[diffs[i].from] - points[diffs[i].to];
      const Eigen::VectorXd vb = points[diffs[j].from] - points[diffs[j].to];
      // Equal difference vectors cannot be separated by any direction and
      // never occur inside one transversal; everything else must separate.
      if ((va - vb).norm() > equal_tol) return false;
    }
  }
  return true;
}

Eigen::VectorXd choose_adaptive_direction(
    const CandidateSet& candidates,
    const std::vector<Eigen::VectorXd>& excluded_span, std::uint64_t rng_seed,
    int max_tries, double sep_min, double collision_gap, int* tries_used) {
  if (candidates.per_anchor.size() < 2 ||
      candidates.per_anchor.front().empty() ||
      candidates.per_anchor.back().empty()) {
    fail(ErrorCode::InvalidArgument, "choose_adaptive_direction",
         "need nonempty candidate sets for the first and last anchor");
  }
  const int dim = static_cast<int>(candidates.per_anchor.front().front().size());
  const auto points = candidates.all();
  std::mt19937_64 rng(rng_seed);

  for (int attempt = 1; attempt <= max_tries; ++attempt) {
    const bool cone = attempt <= max_tries / 2;
    Eigen::VectorXd theta = draw_direction(rng, dim, cone);
    const int orient = ordering_orientation(candidates, theta, sep_min);
    if (orient == 0) continue;
    if (orient < 0) theta = -theta;
    if (!linearly_independent(excluded_span, theta)) continue;
    if (!projections_collision_free(points, theta, collision_gap)) continue;
    if (tries_used) *tries_used = attempt;
    return theta;
  }
  fail(ErrorCode::DirectionSearchExhausted, "choose_adaptive_direction",
       "no direction satisfied the ordering condition after " +
           std::to_string(max_tries) + " draws");
}

std::vector<Eigen::VectorXd> resolve_translations(
    const std::vector<LabeledProjection>& base_solutions,
    const std::vector<LabeledProjection>& adaptive_solutions,
    const DirectionBundle& directions, const ModulusAlignment& alignment,
    const CandidateSet& candidates, double snap_tol) {
  const int dim = static_cast<int>(directions.base.front().size());
  if (static_cast<int>(adaptive_solutions.size()) != dim - 1 ||
      static_cast<int>(directions.adaptive.size()) != dim - 1) {
    fail(ErrorCode::InvalidArgument, "resolve_translations",
         "need D-1 adaptive lines");
  }
  const std::size_t base_count = directions.base.size();
  if (alignment.size() != base_count + adaptive_solutions.size()) {
    fail(ErrorCode::InvalidArgument, "resolve_translations",
         "alignment must cover base then adaptive lines");
  }

  std::vector<Eigen::VectorXd> system_columns;
  system_columns.push_back(directions.base.front());
  for (const auto& theta : directions.adaptive) system_columns.push_back(theta);
  const Eigen::MatrixXd basis = direction_matrix(system_columns);
  if (condition_number(basis) > 1e12) {
    fail(ErrorCode::SingularBasis, "resolve_translations",
         "direction basis condition number exceeds 1e12");
  }
  const auto solver = basis.transpose().colPivHouseholderQr();

  const LabeledProjection& first_line = base_solutions.front();
  const int n_atoms = first_line.atom_count();
  std::vector<Eigen::VectorXd> solved(static_cast<std::size_t>(n_atoms));
  for (int i = 0; i < n_atoms; ++i) {
    Eigen::VectorXd rhs(dim);
    rhs(0) = first_line.positions[static_cast<std::size_t>(i)];
    for (int d = 0; d < dim - 1; ++d) {
      const auto& line = adaptive_solutions[static_cast<std::size_t>(d)];
      const int idx =
          alignment[base_count + static_cast<std::size_t>(d)][static_cast<std::size_t>(i)];
      rhs(d + 1) = line.positions[static_cast<std::size_t>(idx)];
    }
    solved[static_cast<std::size_t>(i)] = solver.solve(rhs);
  }

  // The per-line shift normalizations displace the solution from the
  // candidate frame by one common offset; the first anchor's candidates
  // supply the hypotheses for it.
  double best_worst = std::numeric_limits<double>::infinity();
  std::optional<Eigen::VectorXd> best_offset;
  for (const auto& hypothesis : candidates.per_anchor.front()) {
    const Eigen::VectorXd offset = hypothesis - solved.front();
    double worst = 0.0;
    for (int i = 0; i < n_atoms && worst <= snap_tol; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& cand :
           candidates.per_anchor[static_cast<std::size_t>(i)]) {
        nearest = std::min(nearest,
                           (solved[static_cast<std::size_t>(i)] + offset - cand).norm());
      }
      worst = std::max(worst, nearest);
    }
    if (worst <= snap_tol && worst < best_worst) {
      best_worst = worst;
      best_offset = offset;
    }
  }
  if (!best_offset) {
    fail(ErrorCode::CandidateMismatch, "resolve_translations",
         "solved translations do not land on the candidate set (snap_tol = " +
             std::to_string(snap_tol) + ")");
  }
  for (auto& t : solved) t += *best_offset;
  return solved;
}

namespace {

struct PreparedLine {
  LineSampleSet samples;
  LabeledProjection solution;
};

LabeledProjection solve_and_check_line(const LineSampleSet& samples,
                                       const StructureKernel& kernel,
                                       int atom_count,
                                       const RetrieveConfig& config) {
  LabeledProjection line =
      retrieve_line(samples, kernel, atom_count, config.match_tol);
  const auto report =
      assert_hypotheses(line.positions, moduli_of(line),
                        config.collision_gap_rel * std::max(line.extent(), 1.0));
  if (!report.collision_free) {
    fail(ErrorCode::HypothesisViolation, "retrieve_nd",
         "recovered line support is not collision-free");
  }
  return line;
}

SparseSignal output_from_line(const LabeledProjection& line,
                              const StructureKernel& kernel) {
  SparseSignal out;
  out.dim = 1;
  out.kernel = kernel;
  out.coeffs = line.coeffs;
  for (double p : line.positions) {
    Eigen::VectorXd t(1);
    t << p;
    out.translations.push_back(t);
  }
  return out;
}

}  // namespace

RetrievalResult retrieve_nd(const LineSampler& sampler,
                            const StructureKernel& kernel, int dim,
                            int atom_count, double step,
                            const RetrieveConfig& config) {
  if (dim < 1 || atom_count < 1) {
    fail(ErrorCode::InvalidArgument, "retrieve_nd", "need D >= 1 and N >= 1");
  }
  if (!(step > 0.0)) {
    fail(ErrorCode::InvalidArgument, "retrieve_nd", "step must be positive");
  }
  const int minimal = 2 * atom_count * (atom_count - 1) + 1;
  const int m_max = config.samples_per_line < 0 ? minimal : config.samples_per_line;
  if (m_max < minimal) {
    fail(ErrorCode::InvalidArgument, "retrieve_nd",
         "need M >= 2N(N-1)+1 = " + std::to_string(minimal) + ", got M = " +
             std::to_string(m_max));
  }

  RetrievalResult result;
  RetrievalReport& report = result.report;

  const auto fetch_line = [&](const Eigen::VectorXd& direction) {
    LineSampleSet samples = sampler(direction, step, m_max);
    if (samples.sample_count() != m_max + 1) {
      fail(ErrorCode::InvalidArgument, "retrieve_nd",
           "sampler returned " + std::to_string(samples.sample_count()) +
               " values, expected " + std::to_string(m_max + 1));
    }
    if (std::abs(samples.step - step) > 1e-12 * step) {
      fail(ErrorCode::InvalidArgument, "retrieve_nd",
           "sampler returned mismatching step");
    }
    report.samples_consumed += samples.sample_count();
    report.lines.push_back({direction, samples.sample_count(), false});
    return samples;
  };

  // Base lines along the Cartesian axes.
  std::vector<LineSampleSet> axis_samples;
  for (int d = 0; d < dim; ++d) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e(d) = 1.0;
    axis_samples.push_back(fetch_line(e));
  }

  std::vector<LabeledProjection> axis_solutions(static_cast<std::size_t>(dim));
  if (config.parallel_lines && dim > 1) {
    std::vector<std::future<LabeledProjection>> futures;
    for (int d = 0; d < dim; ++d) {
      futures.push_back(std::async(std::launch::async, [&, d] {
        return solve_and_check_line(axis_samples[static_cast<std::size_t>(d)],
                                    kernel, atom_count, config);
      }));
    }
    for (int d = 0; d < dim; ++d) {
      axis_solutions[static_cast<std::size_t>(d)] =
          futures[static_cast<std::size_t>(d)].get();
    }
  } else {
    for (int d = 0; d < dim; ++d) {
      axis_solutions[static_cast<std::size_t>(d)] = solve_and_check_line(
          axis_samples[static_cast<std::size_t>(d)], kernel, atom_count, config);
    }
  }

  if (dim == 1) {
    result.signal = output_from_line(axis_solutions.front(), kernel);
    return result;
  }
  if (atom_count == 1) {
    SparseSignal out;
    out.dim = dim;
    out.kernel = kernel;
    out.coeffs = axis_solutions.front().coeffs;
    out.translations.push_back(Eigen::VectorXd::Zero(dim));
    result.signal = out;
    return result;
  }

  const auto reference_moduli = moduli_of(axis_solutions.front());
  const double modulus_tol =
      config.modulus_tol_rel *
      *std::max_element(reference_moduli.begin(), reference_moduli.end());
  ModulusAlignment alignment = match_by_modulus(axis_solutions, modulus_tol);
  const CandidateSet candidates = build_candidates(axis_solutions, alignment);

  const double diameter = std::max(candidates.diameter(), 1e-300);
  const double sep_min = config.sep_min_rel * diameter;
  const double collision_gap = config.collision_gap_rel * diameter;
  const double snap_tol = config.snap_tol_rel * diameter;

  DirectionBundle bundle;
  for (int d = 0; d < dim; ++d) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    e(d) = 1.0;
    bundle.base.push_back(e);
  }

  std::vector<Eigen::VectorXd> excluded = {bundle.base.front()};
  std::vector<LabeledProjection> adaptive_solutions;
  for (int d = 0; d < dim - 1; ++d) {
    Eigen::VectorXd theta;
    if (static_cast<std::size_t>(d) < config.forced_adaptive.size()) {
      theta = config.forced_adaptive[static_cast<std::size_t>(d)];
      if (theta.size() != dim || theta.norm() == 0.0) {
        fail(ErrorCode::InvalidArgument, "retrieve_nd",
             "forced adaptive direction has wrong shape");
      }
      theta /= theta.norm();
      const int orient = ordering_orientation(candidates, theta, sep_min);
      if (orient == 0) {
        fail(ErrorCode::DirectionSearchExhausted, "retrieve_nd",
             "forced adaptive direction violates the ordering condition");
      }
      if (orient < 0) theta = -theta;
      if (!linearly_independent(excluded, theta)) {
        fail(ErrorCode::DirectionSearchExhausted, "retrieve_nd",
             "forced adaptive direction is dependent on previous directions");
      }
      if (!projections_collision_free(candidates.all(), theta, collision_gap)) {
        fail(ErrorCode::DirectionSearchExhausted, "retrieve_nd",
             "forced adaptive direction produces colliding projections");
      }
    } else {
      int tries = 0;
      theta = choose_adaptive_direction(
          candidates, excluded, config.seed + 0x9e3779b97f4a7c15ull * (d + 1),
          config.max_tries, sep_min, collision_gap, &tries);
      report.direction_tries += tries;
    }

    LineSampleSet samples = fetch_line(theta);
    LabeledProjection line =
        solve_and_check_line(samples, kernel, atom_count, config);

    // Fix the conjugate reflection: under the ordering condition the atom
    // matched to the first anchor projects strictly before the one matched
    // to the last anchor.
    std::vector<int> line_alignment =
        match_one_line(reference_moduli, line, modulus_tol, "retrieve_nd");
    const int first_idx = line_alignment.front();
    const int last_idx = line_alignment.back();
    if (line.positions[static_cast<std::size_t>(first_idx)] >
        line.positions[static_cast<std::size_t>(last_idx)]) {
      line = reflect_line(line);
      line_alignment =
          match_one_line(reference_moduli, line, modulus_tol, "retrieve_nd");
      report.lines.back().reflection_fixed = true;
    }

    bundle.adaptive.push_back(theta);
    adaptive_solutions.push_back(std::move(line));
    alignment.push_back(std::move(line_alignment));
    excluded.push_back(theta);
  }

  const std::vector<Eigen::VectorXd> translations =
      resolve_translations(axis_solutions, adaptive_solutions, bundle,
                           alignment, candidates, snap_tol);

  SparseSignal out;
  out.dim = dim;
  out.kernel = kernel;
  out.coeffs = axis_solutions.front().coeffs;
  out.translations = translations;
  out.validate();
  result.signal = out;
  return result;
}

RetrievalResult retrieve_2d_generic(const LineSampler& sampler,
                                    const StructureKernel& kernel,
                                    const Eigen::VectorXd& psi_1,
                                    const Eigen::VectorXd& psi_2,
                                    const Eigen::VectorXd& psi_3,
                                    int atom_count, double step,
                                    const RetrieveConfig& config) {
  const std::vector<Eigen::VectorXd> raw = {psi_1, psi_2, psi_3};
  std::vector<Eigen::VectorXd> psi;
  for (const auto& v : raw) {
    if (v.size() != 2 || v.norm() == 0.0) {
      fail(ErrorCode::InvalidArgument, "retrieve_2d_generic",
           "directions must be nonzero 2-vectors");
    }
    psi.push_back(v / v.norm());
  }
  for (std::size_t i = 0; i < psi.size(); ++i) {
    for (std::size_t j = i + 1; j < psi.size(); ++j) {
      const double det = psi[i](0) * psi[j](1) - psi[i](1) * psi[j](0);
      if (std::abs(det) <= 1e-9) {
        fail(ErrorCode::GenericityFailure, "retrieve_2d_generic",
             "directions " + std::to_string(i + 1) + " and " +
                 std::to_string(j + 1) + " are linearly dependent");
      }
    }
  }
  if (atom_count < 2) {
    fail(ErrorCode::InvalidArgument, "retrieve_2d_generic", "need N >= 2");
  }

  const int minimal = 2 * atom_count * (atom_count - 1) + 1;
  const int m_max = config.samples_per_line < 0 ? minimal : config.samples_per_line;
  if (m_max < minimal) {
    fail(ErrorCode::InvalidArgument, "retrieve_2d_generic",
         "need M >= 2N(N-1)+1 = " + std::to_string(minimal) + ", got M = " +
             std::to_string(m_max));
  }

  RetrievalResult result;
  RetrievalReport& report = result.report;
  std::vector<LabeledProjection> solutions;
  for (const auto& direction : psi) {
    LineSampleSet samples = sampler(direction, step, m_max);
    if (samples.sample_count() != m_max + 1) {
      fail(ErrorCode::InvalidArgument, "retrieve_2d_generic",
           "sampler returned wrong sample count");
    }
    report.samples_consumed += samples.sample_count();
    report.lines.push_back({direction, samples.sample_count(), false});
    solutions.push_back(
        solve_and_check_line(samples, kernel, atom_count, config));
  }

  // Try (psi_1, psi_2) as the base; on an ordering-condition failure swap
  // their roles, which moves the outer candidate sets to the other pair of
  // parallelogram edges.
  std::string failure;
  for (int swap = 0; swap < 2; ++swap) {
    const std::size_t b0 = swap == 0 ? 0 : 1;
    const std::size_t b1 = swap == 0 ? 1 : 0;
    const auto reference = moduli_of(solutions[b0]);
    const double modulus_tol =
        config.modulus_tol_rel *
        *std::max_element(reference.begin(), reference.end());

    ModulusAlignment alignment;
    std::vector<int> identity(reference.size());
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<int>(i);
    alignment.push_back(identity);
    alignment.push_back(match_one_line(reference, solutions[b1], modulus_tol,
                                       "retrieve_2d_generic"));

    const std::vector<LabeledProjection> base_solutions = {solutions[b0],
                                                           solutions[b1]};
    const std::vector<Eigen::VectorXd> base_directions = {psi[b0], psi[b1]};
    const CandidateSet candidates =
        build_candidates(base_solutions, alignment, base_directions);

    const double diameter = std::max(candidates.diameter(), 1e-300);
    const double sep_min = config.sep_min_rel * diameter;
    const double snap_tol = config.snap_tol_rel * diameter;

    const int orient = ordering_orientation(candidates, psi[2], sep_min);
    if (orient == 0) {
      failure = "ordering condition fails for assignment " +
                std::to_string(swap + 1);
      continue;
    }
    const Eigen::VectorXd theta = orient < 0 ? Eigen::VectorXd(-psi[2]) : psi[2];

    LabeledProjection adaptive = solutions[2];
    std::vector<int> adaptive_alignment = match_one_line(
        reference, adaptive, modulus_tol, "retrieve_2d_generic");
    if (adaptive.positions[static_cast<std::size_t>(adaptive_alignment.front())] >
        adaptive.positions[static_cast<std::size_t>(adaptive_alignment.back())]) {
      adaptive = reflect_line(adaptive);
      adaptive_alignment = match_one_line(reference, adaptive, modulus_tol,
                                          "retrieve_2d_generic");
      report.lines.back().reflection_fixed = true;
    }
    alignment.push_back(adaptive_alignment);

    DirectionBundle bundle;
    bundle.base = base_directions;
    bundle.adaptive = {theta};

    const std::vector<Eigen::VectorXd> translations =
        resolve_translations(base_solutions, {adaptive}, bundle, alignment,
                             candidates, snap_tol);

    SparseSignal out;
    out.dim = 2;
    out.kernel = kernel;
    out.coeffs = solutions[b0].coeffs;
    out.translations = translations;
    out.validate();
    result.signal = out;
    report.role_swapped = swap == 1;
    return result;
  }
  fail(ErrorCode::GenericityFailure, "retrieve_2d_generic",
       "both role assignments fail the ordering condition (" + failure + ")");
}

}  // namespace sparsepr
