#pragma once

#include <string>

#include <json.hpp>

#include "laakso/certifier.hpp"
#include "laakso/doubling.hpp"
#include "laakso/embedding_lab.hpp"
#include "laakso/instance.hpp"
#include "laakso/metric.hpp"

namespace laakso::io {

using nlohmann::json;

inline constexpr const char* kFormatVersion = "laakso-lab/1";

json to_json(const Params& params);
Params params_from_json(const json& j);

json to_json(const Instance& inst);
/// Throws SchemaError on missing fields or broken invariants.
Instance instance_from_json(const json& j);

json to_json(const Embedding& emb);
Embedding embedding_from_json(const json& j);

json to_json(const DistortionReport& report);
json to_json(const CertifierParams& cp);
json to_json(const PotentialWitness& witness);
json to_json(const OptimizerConfig& cfg);
/// Fields missing from `j` keep their value in `base`.
OptimizerConfig optimizer_config_from_json(const json& j, const OptimizerConfig& base = {});

json to_json(const SweepRow& row);
json to_json(const DoublingEstimate& est);
json to_json(const EnvelopeReport& report);

/// Sweep spec document: {"k":[..], "d":[..], "p":[..], "eps":[..],
/// "seeds":[..], "methods":[..], "optimizer":{..}}.
SweepSpec sweep_spec_from_json(const json& j);
json to_json(const SweepSpec& spec);

/// Fixed-column CSV row for a distortion evaluation:
/// n,k,p,eps,d,method,seed,expansion,contraction,distortion
std::string distortion_csv_header();
std::string distortion_csv_row(const Instance& inst, const Embedding& emb,
                               const DistortionReport& report);

/// k,n,p,eps,d,method,seed,distortion,cert_lb,wall_ms
std::string sweep_csv(const SweepResult& result);
std::string doubling_csv(const DoublingEstimate& est);
std::string envelope_csv(const EnvelopeReport& report);

/// Shortest decimal that round-trips the double; "inf"/"nan" for non-finite.
std::string format_double(double x);

/// Reads a whole file or throws SchemaError.
std::string read_file(const std::string& path);
json read_json_file(const std::string& path);
/// Writes `text` atomically enough for CLI use; throws SchemaError on I/O failure.
void write_file(const std::string& path, const std::string& text);
/// Stable pretty-printed dump (sorted keys, two-space indent, trailing newline).
std::string dump(const json& j);

}  // namespace laakso::io
