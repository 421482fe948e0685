#include "sparsepr/serialization.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sparsepr/errors.hpp"

namespace sparsepr {

namespace {

using nlohmann::json;

json complex_to_json(const Complex& c) { return json::array({c.real(), c.imag()}); }

Complex complex_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) {
    fail(ErrorCode::IoError, "serialization",
         std::string(what) + " must be a [re, im] pair");
  }
  return Complex(j[0].get<double>(), j[1].get<double>());
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) {
    fail(ErrorCode::IoError, "serialization",
         std::string(what) + " must be a nonempty array");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

json to_json(const SparseSignal& signal) {
  json kernel;
  if (signal.kernel.kind() == StructureKernel::Kind::Dirac) {
    kernel = {{"kind", "dirac"}};
  } else {
    kernel = {{"kind", "gaussian"}, {"sigma", signal.kernel.sigma()}};
  }
  json atoms = json::array();
  for (std::size_t n = 0; n < signal.coeffs.size(); ++n) {
    atoms.push_back({{"c", complex_to_json(signal.coeffs[n])},
                     {"t", vector_to_json(signal.translations[n])}});
  }
  return {{"dim", signal.dim}, {"kernel", kernel}, {"atoms", atoms}};
}

SparseSignal signal_from_json(const json& j) {
  SparseSignal signal;
  try {
    signal.dim = j.at("dim").get<int>();
    const auto& kernel = j.at("kernel");
    const std::string kind = kernel.at("kind").get<std::string>();
    if (kind == "dirac") {
      signal.kernel = StructureKernel::dirac();
    } else if (kind == "gaussian") {
      signal.kernel = StructureKernel::gaussian(kernel.at("sigma").get<double>());
    } else {
      fail(ErrorCode::IoError, "signal_from_json",
           "unknown kernel kind '" + kind + "'");
    }
    for (const auto& atom : j.at("atoms")) {
      signal.coeffs.push_back(complex_from_json(atom.at("c"), "coefficient"));
      signal.translations.push_back(
          vector_from_json(atom.at("t"), "translation"));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "signal_from_json", e.what());
  }
  signal.validate();
  return signal;
}

json to_json(const LineSampleSet& samples) {
  return {{"direction", vector_to_json(samples.direction)},
          {"step", samples.step},
          {"values", samples.values}};
}

LineSampleSet samples_from_json(const json& j) {
  LineSampleSet samples;
  try {
    samples.direction = vector_from_json(j.at("direction"), "direction");
    samples.step = j.at("step").get<double>();
    samples.values = j.at("values").get<std::vector<double>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "samples_from_json", e.what());
  }
  samples.validate();
  return samples;
}

json to_json(const ExponentialSum& sum) {
  json terms = json::array();
  terms.push_back({{"tau", 0.0}, {"gamma", complex_to_json(Complex(sum.dc, 0.0))}});
  for (const auto& t : sum.terms) {
    terms.push_back({{"tau", t.tau}, {"gamma", complex_to_json(t.gamma)}});
  }
  return {{"terms", terms}};
}

ExponentialSum exponential_sum_from_json(const json& j) {
  ExponentialSum sum;
  try {
    for (const auto& term : j.at("terms")) {
      const double tau = term.at("tau").get<double>();
      const Complex gamma = complex_from_json(term.at("gamma"), "gamma");
      if (tau == 0.0) {
        sum.dc = gamma.real();
      } else {
        sum.terms.push_back({tau, gamma});
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "exponential_sum_from_json", e.what());
  }
  std::sort(sum.terms.begin(), sum.terms.end(),
            [](const auto& a, const auto& b) { return a.tau < b.tau; });
  sum.validate();
  return sum;
}

json to_json(const LabeledProjection& line) {
  json coeffs = json::array();
  for (const auto& c : line.coeffs) coeffs.push_back(complex_to_json(c));
  return {{"positions", line.positions}, {"coeffs", coeffs}};
}

LabeledProjection projection_from_json(const json& j) {
  LabeledProjection line;
  try {
    line.positions = j.at("positions").get<std::vector<double>>();
    for (const auto& c : j.at("coeffs")) {
      line.coeffs.push_back(complex_from_json(c, "coefficient"));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "projection_from_json", e.what());
  }
  line.validate();
  return line;
}

json to_json(const MatchReport& report) {
  return {{"t_err", report.translation_error},
          {"c_err", report.coefficient_error},
          {"reflected", report.frame.reflected},
          {"alpha", report.frame.phase},
          {"shift", vector_to_json(report.frame.shift)}};
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoError, "load_json", "cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::IoError, "load_json",
         path.string() + ": " + std::string(e.what()));
  }
}

void save_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    fail(ErrorCode::IoError, "save_json", "cannot open " + path.string());
  }
  out << j.dump(2) << '\n';
  if (!out) {
    fail(ErrorCode::IoError, "save_json", "write failed for " + path.string());
  }
}

SparseSignal load_signal(const std::filesystem::path& path) {
  return signal_from_json(load_json(path));
}

LineSampleSet load_samples(const std::filesystem::path& path) {
  return samples_from_json(load_json(path));
}

}  // namespace sparsepr
