#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dyadlab/io.hpp"
#include "dyadlab/operators.hpp"

namespace dyadlab::cli {

// Throws PreconditionError naming the first key of j not in allowed.
void check_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where);

// {"dim": 1, "K": 6, "L": 8} with optional "top_lo", "top_hi" (top-cell index range).
TruncatedLattice lattice_from_json(const Json& j);

// Named generator ({"generator": name, ...}) or an explicit step function.
StepFunction input_from_json(const Json& j, const TruncatedLattice& lat);

struct GeneratorInfo {
  std::string name;
  std::string fields;
  std::string description;
};
const std::vector<GeneratorInfo>& generators();

// {"constant": v} or {"right_of": x0, "value": v, "default": d}, optional
// "assign": [{"interval": {...}, "value": v}].
EpsilonSeq eps_from_json(const Json& j, int dim);

ShiftSpec shift_from_json(const Json& j, const TruncatedLattice& lat);

// Parsed operator description; kind is one of identity, T, P, pi, shift,
// commutator, iterated.
struct OperatorConfig {
  std::string kind;
  EpsilonSeq eps = EpsilonSeq::constant(1.0);
  AlphaVector alpha;
  bool tops = false;
  std::vector<StepFunction> b;  // pi and commutator: one symbol; iterated: one per slot
  ShiftSpec shift;
  int slot = 1;
  std::shared_ptr<OperatorConfig> inner;  // commutator

  OperatorHandle handle() const;
  int dim() const;
};
OperatorConfig operator_from_json(const Json& j, const TruncatedLattice& lat);

}  // namespace dyadlab::cli
