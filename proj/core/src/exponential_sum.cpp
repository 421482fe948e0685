#include "sparsepr/exponential_sum.hpp"

#include <cmath>

#include "sparsepr/errors.hpp"

namespace sparsepr {

double ExponentialSum::evaluate(double omega) const {
  double value = dc;
  for (const Term& t : terms) {
    value += 2.0 * (t.gamma * std::polar(1.0, -omega * t.tau)).real();
  }
  return value;
}

std::vector<double> ExponentialSum::sample(double step,
                                           int sample_max_index) const {
  std::vector<double> out(static_cast<std::size_t>(sample_max_index) + 1);
  for (int m = 0; m <= sample_max_index; ++m) {
    out[static_cast<std::size_t>(m)] = evaluate(step * m);
  }
  return out;
}

void ExponentialSum::validate() const {
  double prev = 0.0;
  for (const Term& t : terms) {
    if (!(t.tau > prev)) {
      fail(ErrorCode::InvalidArgument, "ExponentialSum::validate",
           "frequencies must be strictly increasing and positive");
    }
    if (std::abs(t.gamma) == 0.0) {
      fail(ErrorCode::InvalidArgument, "ExponentialSum::validate",
           "amplitudes must be nonzero");
    }
    prev = t.tau;
  }
}

}  // namespace sparsepr
