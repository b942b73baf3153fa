#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmlab/solver.hpp"
#include "cmlab/verify.hpp"

namespace cmlab {

// Structured artifacts are JSON text. Complex matrices are {"re": [[...]], "im": [[...]]};
// a plain nested list is read as a real matrix. Complex vectors likewise use {"re", "im"} or a plain list.
// Doubles are written with 17 significant digits, so files round-trip exactly.

// {"n": 2, "samples": 2000, "omega0": {"kind": ..., "params": {...}}, "omega1": {...}}
// kinds: ball {radius, center?}, ellipsoid {H, center?}, dumbbell {a, b}.
std::string ring_to_json(const RingDomain& ring);
RingDomain ring_from_json(const std::string& text);

std::string metric_to_json(const MetricForm& G);
MetricForm metric_from_json(const std::string& text);

// {"format": "cmlab-field", "version": 1, "rep": ..., "eps", "metric", "ring"?, ...payload}
std::string field_to_json(const ScalarField& field);
FieldPtr field_from_json(const std::string& text);
void write_field(const ScalarField& field, const std::string& path);
FieldPtr read_field(const std::string& path);

std::string config_to_json(const SolveConfig& cfg);
SolveConfig config_from_json(const std::string& text);

std::string report_to_json(const SolveReport& rep);
std::string check_to_json(const CheckReport& rep);
std::string checks_to_json(const std::vector<CheckReport>& reps);
std::string tangent_gauge_to_json(const TangentGauge& g, const Jet& j);

struct ExperimentSpec {
  std::optional<RingDomain> ring;
  MetricForm G = MetricForm::identity(2);
  SolveConfig solve;
  Tier tier = Tier::automatic;
  FullOptions full;
  std::vector<std::string> checks;
  std::string output = ".";
  std::uint64_t seed = 99;
};

// "domain" is an inline object or a path relative to base_dir; unknown keys are format errors.
ExperimentSpec experiment_from_json(const std::string& text, const std::string& base_dir = ".");

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace cmlab
