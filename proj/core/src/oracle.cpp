#include "sparsepr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "sparsepr/errors.hpp"

namespace sparsepr {

DifferenceMultiset DifferenceMultiset::of(const std::vector<double>& positions) {
  DifferenceMultiset out;
  for (std::size_t n = 0; n < positions.size(); ++n) {
    for (std::size_t k = n + 1; k < positions.size(); ++k) {
      out.diffs.push_back(std::abs(positions[n] - positions[k]));
    }
  }
  std::sort(out.diffs.begin(), out.diffs.end());
  return out;
}

namespace {

struct TurnpikeSearch {
  std::vector<double> pool;  // ascending
  std::vector<bool> used;
  std::vector<double> placed;
  std::vector<std::vector<double>> solutions;
  double tol = 0.0;
  double span = 0.0;
  int target = 0;
  long long budget = 0;

  // Nearest unused pool entry within tol, -1 if none.
  int take(double value) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      const double d = std::abs(pool[i] - value);
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(i);
      }
    }
    if (best < 0 || best_dist > tol) return -1;
    used[static_cast<std::size_t>(best)] = true;
    return best;
  }

  int largest_unused() const {
    for (int i = static_cast<int>(pool.size()) - 1; i >= 0; --i) {
      if (!used[static_cast<std::size_t>(i)]) return i;
    }
    return -1;
  }

  // Tries to explain all distances from `candidate` to the placed points;
  // on success recurses, always restoring the pool.
  void try_place(double candidate) {
    std::vector<int> taken;
    for (double s : placed) {
      const int idx = take(std::abs(candidate - s));
      if (idx < 0) {
        for (int t : taken) used[static_cast<std::size_t>(t)] = false;
        return;
      }
      taken.push_back(idx);
    }
    placed.push_back(candidate);
    search();
    placed.pop_back();
    for (int t : taken) used[static_cast<std::size_t>(t)] = false;
  }

  void search() {
    if (--budget < 0) {
      fail(ErrorCode::InvalidArgument, "turnpike_solve",
           "step budget exhausted");
    }
    const int next = largest_unused();
    if (next < 0) {
      if (static_cast<int>(placed.size()) == target) {
        std::vector<double> sol = placed;
        std::sort(sol.begin(), sol.end());
        solutions.push_back(std::move(sol));
      }
      return;
    }
    if (static_cast<int>(placed.size()) >= target) return;
    const double d = pool[static_cast<std::size_t>(next)];
    try_place(d);         // distance realized from the left endpoint
    const double mirror = span - d;
    if (std::abs(mirror - d) > tol) {
      try_place(mirror);  // realized from the right endpoint
    }
  }
};

bool positions_equal(const std::vector<double>& a, const std::vector<double>& b,
                     double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

std::vector<double> reflect_positions(const std::vector<double>& positions) {
  std::vector<double> out;
  const double span = positions.back();
  for (auto it = positions.rbegin(); it != positions.rend(); ++it) {
    out.push_back(span - *it);
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> turnpike_solve(const DifferenceMultiset& diffs,
                                                int atom_count, double tol,
                                                long long step_budget) {
  const int expected =
      atom_count >= 1 ? atom_count * (atom_count - 1) / 2 : -1;
  if (expected < 0 || static_cast<int>(diffs.diffs.size()) != expected) {
    fail(ErrorCode::InvalidArgument, "turnpike_solve",
         "difference multiset must hold N(N-1)/2 entries");
  }
  if (atom_count == 1) return {{0.0}};

  TurnpikeSearch search;
  search.pool = diffs.diffs;
  std::sort(search.pool.begin(), search.pool.end());
  search.used.assign(search.pool.size(), false);
  search.tol = tol;
  search.target = atom_count;
  search.budget = step_budget;
  search.span = search.pool.back();
  search.used.back() = true;  // span consumed by the endpoints
  search.placed = {0.0, search.span};
  search.search();

  // Deduplicate up to reflection.
  std::vector<std::vector<double>> classes;
  for (const auto& sol : search.solutions) {
    const auto mirrored = reflect_positions(sol);
    const bool seen = std::any_of(
        classes.begin(), classes.end(), [&](const std::vector<double>& c) {
          return positions_equal(c, sol, tol) || positions_equal(c, mirrored, tol);
        });
    if (!seen) classes.push_back(sol);
  }
  return classes;
}

namespace {

// All bijections line -> reference admissible by modulus within tol.
void admissible_alignments(const std::vector<double>& reference,
                           const std::vector<double>& moduli, double tol,
                           std::vector<int>& current, std::vector<bool>& used,
                           std::vector<std::vector<int>>& out) {
  const std::size_t i = current.size();
  if (i == reference.size()) {
    out.push_back(current);
    return;
  }
  for (std::size_t j = 0; j < moduli.size(); ++j) {
    if (used[j]) continue;
    if (std::abs(moduli[j] - reference[i]) > tol) continue;
    used[j] = true;
    current.push_back(static_cast<int>(j));
    admissible_alignments(reference, moduli, tol, current, used, out);
    current.pop_back();
    used[j] = false;
  }
}

std::vector<double> line_moduli(const LabeledProjection& line) {
  std::vector<double> out;
  for (const auto& c : line.coeffs) out.push_back(std::abs(c));
  return out;
}

// Does some admissible (alignment, orientation, shift) reproduce the line's
// positions from the given projections?
bool line_consistent(const std::vector<double>& projections,
                     const LabeledProjection& line,
                     const std::vector<std::vector<int>>& alignments,
                     double tol) {
  for (const auto& align : alignments) {
    for (int orientation : {+1, -1}) {
      const double shift =
          projections[0] -
          orientation * line.positions[static_cast<std::size_t>(align[0])];
      bool ok = true;
      for (std::size_t i = 1; i < projections.size() && ok; ++i) {
        const double expected =
            orientation * line.positions[static_cast<std::size_t>(align[i])] +
            shift;
        ok = std::abs(projections[i] - expected) <= tol;
      }
      if (ok) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<std::vector<Eigen::VectorXd>> assembly_oracle(
    const std::vector<LabeledProjection>& base_solutions,
    const std::vector<LabeledProjection>& adaptive_solutions,
    const DirectionBundle& directions, double tol) {
  if (base_solutions.empty() ||
      base_solutions.size() != directions.base.size() ||
      adaptive_solutions.size() != directions.adaptive.size()) {
    fail(ErrorCode::InvalidArgument, "assembly_oracle",
         "line solutions and directions are inconsistent");
  }
  const int dim = static_cast<int>(base_solutions.size());
  const int n_atoms = base_solutions.front().atom_count();
  const auto reference = line_moduli(base_solutions.front());

  if (dim == 1) {
    std::vector<Eigen::VectorXd> only;
    for (double p : base_solutions.front().positions) {
      Eigen::VectorXd v(1);
      v << p;
      only.push_back(v);
    }
    return {only};
  }

  // Per anchor and base line d >= 2: candidate coordinate values from every
  // modulus-admissible atom, plain or reflected about the line extent.
  std::vector<std::vector<std::vector<double>>> choices(
      static_cast<std::size_t>(n_atoms),
      std::vector<std::vector<double>>(static_cast<std::size_t>(dim - 1)));
  double scale = 1.0;
  for (const auto& line : base_solutions) scale = std::max(scale, line.extent());
  long long combinations = 1;
  for (int d = 1; d < dim; ++d) {
    const auto& line = base_solutions[static_cast<std::size_t>(d)];
    const auto mods = line_moduli(line);
    for (int i = 0; i < n_atoms; ++i) {
      auto& values =
          choices[static_cast<std::size_t>(i)][static_cast<std::size_t>(d - 1)];
      for (std::size_t j = 0; j < mods.size(); ++j) {
        if (std::abs(mods[j] - reference[static_cast<std::size_t>(i)]) > tol) {
          continue;
        }
        for (double v :
             {line.positions[j], line.extent() - line.positions[j]}) {
          const bool dup = std::any_of(values.begin(), values.end(), [&](double w) {
            return std::abs(w - v) <= 1e-12 * scale;
          });
          if (!dup) values.push_back(v);
        }
      }
      if (values.empty()) return {};
      combinations *= static_cast<long long>(values.size());
      if (combinations > (1ll << 24)) {
        fail(ErrorCode::InvalidArgument, "assembly_oracle",
             "assignment space too large to enumerate");
      }
    }
  }

  // Admissible alignments per checked line (base lines 2..D and adaptive).
  std::vector<const LabeledProjection*> check_lines;
  std::vector<Eigen::VectorXd> check_directions;
  for (int d = 1; d < dim; ++d) {
    check_lines.push_back(&base_solutions[static_cast<std::size_t>(d)]);
    check_directions.push_back(directions.base[static_cast<std::size_t>(d)]);
  }
  for (std::size_t a = 0; a < adaptive_solutions.size(); ++a) {
    check_lines.push_back(&adaptive_solutions[a]);
    check_directions.push_back(directions.adaptive[a]);
  }
  std::vector<std::vector<std::vector<int>>> line_alignments;
  for (const auto* line : check_lines) {
    std::vector<std::vector<int>> alignments;
    std::vector<int> current;
    std::vector<bool> used(static_cast<std::size_t>(n_atoms), false);
    admissible_alignments(reference, line_moduli(*line), tol, current, used,
                          alignments);
    if (alignments.empty()) return {};
    line_alignments.push_back(std::move(alignments));
  }

  // Base-coordinate points map to real space through the inverse transpose
  // of the base-direction matrix (identity for Cartesian axes).
  Eigen::MatrixXd basis(dim, dim);
  for (int d = 0; d < dim; ++d) basis.col(d) = directions.base[static_cast<std::size_t>(d)];
  const auto base_lu = basis.transpose().fullPivLu();
  if (!base_lu.isInvertible()) {
    fail(ErrorCode::SingularBasis, "assembly_oracle",
         "base directions are dependent");
  }

  std::vector<std::vector<Eigen::VectorXd>> classes;
  std::vector<int> pick(static_cast<std::size_t>(n_atoms * (dim - 1)), 0);
  while (true) {
    // Assemble the transversal for the current choice vector.
    std::vector<Eigen::VectorXd> points;
    points.reserve(static_cast<std::size_t>(n_atoms));
    for (int i = 0; i < n_atoms; ++i) {
      Eigen::VectorXd coords(dim);
      coords(0) = base_solutions.front().positions[static_cast<std::size_t>(i)];
      for (int d = 1; d < dim; ++d) {
        const auto& values =
            choices[static_cast<std::size_t>(i)][static_cast<std::size_t>(d - 1)];
        coords(d) = values[static_cast<std::size_t>(
            pick[static_cast<std::size_t>(i * (dim - 1) + d - 1)])];
      }
      points.push_back(base_lu.solve(coords));
    }

    bool consistent = true;
    for (std::size_t l = 0; l < check_lines.size() && consistent; ++l) {
      std::vector<double> projections;
      projections.reserve(points.size());
      for (const auto& p : points) {
        projections.push_back(check_directions[l].dot(p));
      }
      consistent =
          line_consistent(projections, *check_lines[l], line_alignments[l], tol);
    }
    if (consistent) {
      const bool seen =
          std::any_of(classes.begin(), classes.end(), [&](const auto& c) {
            for (std::size_t i = 0; i < c.size(); ++i) {
              if ((c[i] - points[i]).norm() > tol) return false;
            }
            return true;
          });
      if (!seen) classes.push_back(points);
    }

    // Next choice vector.
    std::size_t slot = 0;
    while (slot < pick.size()) {
      const std::size_t i = slot / static_cast<std::size_t>(dim - 1);
      const std::size_t d = slot % static_cast<std::size_t>(dim - 1);
      if (++pick[slot] < static_cast<int>(choices[i][d].size())) break;
      pick[slot] = 0;
      ++slot;
    }
    if (slot == pick.size()) break;
  }
  return classes;
}

}  // namespace sparsepr
