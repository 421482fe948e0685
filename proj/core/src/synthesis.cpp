#include "sparsepr/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sparsepr/errors.hpp"

namespace sparsepr {

std::vector<double> random_collision_free_positions(std::mt19937_64& rng,
                                                    int count, double extent,
                                                    double min_gap_rel,
                                                    int max_tries) {
  if (count < 1 || !(extent > 0.0)) {
    fail(ErrorCode::InvalidArgument, "random_collision_free_positions",
         "need count >= 1 and extent > 0");
  }
  if (count == 1) return {0.0};

  // Sequential greedy placement: pin the endpoints, then grow the set one
  // point at a time, keeping all pairwise differences separated by the gap
  // (measured against the full extent, hence at least gap-relative to the
  // final diameter). Restart when a partial set dead-ends.
  std::uniform_real_distribution<double> uniform(0.0, extent);
  const double gap = min_gap_rel * extent;
  int draws = 0;
  while (draws < max_tries) {
    std::vector<double> positions = {0.0, extent};
    while (static_cast<int>(positions.size()) < count && draws < max_tries) {
      bool placed = false;
      for (int inner = 0; inner < 200 && draws < max_tries; ++inner) {
        ++draws;
        const double candidate = uniform(rng);
        std::vector<double> trial = positions;
        trial.push_back(candidate);
        if (is_collision_free(trial, gap)) {
          positions = std::move(trial);
          placed = true;
          break;
        }
      }
      if (!placed) break;
    }
    if (static_cast<int>(positions.size()) == count) {
      std::sort(positions.begin(), positions.end());
      return positions;
    }
  }
  fail(ErrorCode::SynthesisExhausted, "random_collision_free_positions",
       "no collision-free position set with relative gap " +
           std::to_string(min_gap_rel) + " found in " +
           std::to_string(max_tries) + " draws");
}

std::vector<Complex> random_distinct_coefficients(std::mt19937_64& rng,
                                                  int count,
                                                  double min_modulus_gap_rel) {
  std::uniform_real_distribution<double> modulus(1.0, 10.0);
  std::uniform_real_distribution<double> phase(-std::numbers::pi,
                                               std::numbers::pi);
  std::vector<double> moduli(static_cast<std::size_t>(count));
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (double& m : moduli) m = modulus(rng);
    const double scale = *std::max_element(moduli.begin(), moduli.end());
    bool ok = true;
    for (std::size_t i = 0; i < moduli.size() && ok; ++i) {
      for (std::size_t j = i + 1; j < moduli.size() && ok; ++j) {
        ok = std::abs(moduli[i] - moduli[j]) >= min_modulus_gap_rel * scale;
      }
    }
    if (!ok) continue;
    std::vector<Complex> out;
    out.reserve(moduli.size());
    for (double m : moduli) out.push_back(std::polar(m, phase(rng)));
    return out;
  }
  fail(ErrorCode::SynthesisExhausted, "random_distinct_coefficients",
       "modulus gap " + std::to_string(min_modulus_gap_rel) +
           " unreachable for " + std::to_string(count) + " coefficients");
}

SparseSignal synthesize_instance(const SynthesisConfig& config,
                                 std::mt19937_64& rng) {
  if (config.dim < 1 || config.atom_count < 1) {
    fail(ErrorCode::InvalidArgument, "synthesize_instance",
         "need dim >= 1 and atom_count >= 1");
  }
  SparseSignal signal;
  signal.dim = config.dim;
  signal.kernel = config.kernel;
  signal.coeffs =
      random_distinct_coefficients(rng, config.atom_count,
                                   config.min_modulus_gap_rel);

  if (config.atom_count == 1) {
    signal.translations.push_back(Eigen::VectorXd::Zero(config.dim));
    signal.validate();
    return signal;
  }

  std::uniform_real_distribution<double> uniform(0.0, config.box);
  for (int attempt = 0; attempt < config.max_tries; ++attempt) {
    std::vector<Eigen::VectorXd> points(
        static_cast<std::size_t>(config.atom_count));
    for (auto& p : points) {
      p.resize(config.dim);
      for (int d = 0; d < config.dim; ++d) p(d) = uniform(rng);
    }
    bool ok = true;
    for (int d = 0; d < config.dim && ok; ++d) {
      std::vector<double> axis;
      axis.reserve(points.size());
      for (const auto& p : points) axis.push_back(p(d));
      const double diam = *std::max_element(axis.begin(), axis.end()) -
                          *std::min_element(axis.begin(), axis.end());
      ok = diam > 0.0 && is_collision_free(axis, config.min_gap_rel * diam);
    }
    if (!ok) continue;
    signal.translations = std::move(points);
    signal.validate();
    return signal;
  }
  fail(ErrorCode::SynthesisExhausted, "synthesize_instance",
       "hypotheses unreachable in " + std::to_string(config.max_tries) +
           " draws (dim " + std::to_string(config.dim) + ", atoms " +
           std::to_string(config.atom_count) + ", gap " +
           std::to_string(config.min_gap_rel) + ")");
}

SparseSignal paper_table1_signal() {
  SparseSignal signal;
  signal.dim = 2;
  signal.kernel = StructureKernel::gaussian(0.5);
  const double coords[5][2] = {{27.374, 27.258},
                               {13.065, 32.008},
                               {8.847, 37.665},
                               {0.000, 13.874},
                               {23.876, 0.000}};
  const Complex coeffs[5] = {{7.293, 5.115},
                             {30.665, 2.258},
                             {2.740, 22.286},
                             {1.576, 49.834},
                             {17.400, 46.587}};
  for (int n = 0; n < 5; ++n) {
    Eigen::VectorXd t(2);
    t << coords[n][0], coords[n][1];
    signal.translations.push_back(t);
    signal.coeffs.push_back(coeffs[n]);
  }
  signal.validate();
  return signal;
}

}  // namespace sparsepr
