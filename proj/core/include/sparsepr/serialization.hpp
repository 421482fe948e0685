#ifndef SPARSEPR_SERIALIZATION_HPP
#define SPARSEPR_SERIALIZATION_HPP

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "sparsepr/ambiguity.hpp"
#include "sparsepr/exponential_sum.hpp"
#include "sparsepr/retrieval_1d.hpp"
#include "sparsepr/signal.hpp"

namespace sparsepr {

// JSON formats (complex numbers as [re, im] pairs throughout):
//   signal:     {"dim": D, "kernel": {"kind": "dirac"|"gaussian", "sigma": s},
//                "atoms": [{"c": [re, im], "t": [x_1..x_D]}, ...]}
//   samples:    {"direction": [..], "step": h, "values": [..]}
//   exp sum:    {"terms": [{"tau": t, "gamma": [re, im]}, ...]}  (l = 0..L)
//   projection: {"positions": [..], "coeffs": [[re, im], ...]}
//   match:      {"t_err": ., "c_err": ., "reflected": b, "alpha": ., "shift": [..]}

nlohmann::json to_json(const SparseSignal& signal);
SparseSignal signal_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LineSampleSet& samples);
LineSampleSet samples_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExponentialSum& sum);
ExponentialSum exponential_sum_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LabeledProjection& line);
LabeledProjection projection_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MatchReport& report);

// File helpers; IoError on missing/garbled files.
nlohmann::json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const nlohmann::json& j);

SparseSignal load_signal(const std::filesystem::path& path);
LineSampleSet load_samples(const std::filesystem::path& path);

}  // namespace sparsepr

#endif
