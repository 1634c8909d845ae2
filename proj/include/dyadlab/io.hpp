#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "dyadlab/norms.hpp"
#include "dyadlab/probes.hpp"
#include "dyadlab/step_function.hpp"

namespace dyadlab {

using Json = nlohmann::json;

// Sorted keys, two-space indent, floats as %.17g, non-finite floats as the
// strings "inf", "-inf", "nan". Same value gives the same bytes.
std::string canonical_dump(const Json& j);

// {"dim", "k_min", "box": {"lo": [x, y], "n": [nx, ny]}, "values": [...]}
Json to_json(const StepFunction& f);
StepFunction step_function_from_json(const Json& j);

// {"k": scale, "m": [mx] or [mx, my]}
Json to_json(const DyadicInterval& I);
DyadicInterval interval_from_json(const Json& j, int dim);

Json to_json(const DecayFit& fit);
Json to_json(const FkrtReport& r);
Json to_json(const NoncompactReport& r);
Json to_json(const PiProbeReport& r);
Json to_json(const CommutatorProbeReport& r);
Json to_json(const ShiftCommutatorReport& r);
Json to_json(const Remark31Report& r);
Json to_json(const ContinuityReport& r);
Json to_json(const WeightedRatioReport& r);
Json to_json(const BmoReport& r);
Json to_json(const Bmo2Report& r);
Json to_json(const ShiftedBmoReport& r);
Json to_json(const CmoReport& r);
Json to_json(const ApReport& r);

// Plain CSV table. Comment lines (prefixed "# ") come first, then the header.
// When labels is nonempty it holds one entry per row, written as the first column.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> rows;
};
void write_csv(std::ostream& os, const CsvTable& t);

// Cell table of a one- or two-dimensional step function: x_lo, x_hi[, y_lo, y_hi], value.
CsvTable step_function_csv(const StepFunction& f, const std::string& quantity);

}  // namespace dyadlab
