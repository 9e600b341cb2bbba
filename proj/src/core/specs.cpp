#include "ebi/core/specs.hpp"

#include <cmath>
#include <set>

#include "ebi/core/error.hpp"

namespace ebi {

std::string PromptProtocol::label() const {
  std::string out = "t" + std::to_string(ptype);
  if (variant == PromptVariant::starred) out += "*";
  if (delegate_model) out += "'";
  return out + "-" + std::to_string(calls);
}

void validate(const PromptProtocol& proto) {
  if (proto.ptype != 1 && proto.ptype != 2) {
    throw ValidationError("prompt type must be 1 or 2, got " + std::to_string(proto.ptype));
  }
  if (proto.calls < 1) throw ValidationError("call count must be >= 1");
  if (proto.block_size < 1) throw ValidationError("block size must be >= 1");
}

void validate(const SystemSpec& spec) {
  if (spec.model.empty()) throw ValidationError("system " + std::to_string(spec.system_id) + ": empty model");
  validate(spec.c_protocol);
  validate(spec.s_protocol);
}

void validate(const EnsembleSpec& spec) {
  if (spec.components.empty()) throw ValidationError("ensemble has no components");
  if (spec.components.size() != spec.weights.size()) {
    throw ValidationError("ensemble has " + std::to_string(spec.components.size()) +
                          " components but " + std::to_string(spec.weights.size()) + " weights");
  }
  for (double w : spec.weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("ensemble weights must be positive");
  }
}

void validate(const Assignment& assignment, const IdAxes& axes) {
  if (assignment.pairs.size() != axes.size()) {
    throw ValidationError("assignment covers " + std::to_string(assignment.pairs.size()) + " of " +
                          std::to_string(axes.size()) + " id_B");
  }
  std::set<IdA> used;
  for (const auto& [b, a] : assignment.pairs) {
    if (!axes.find(b)) throw ValidationError("assignment names unknown id_B " + to_string(b));
    if (!axes.find(a)) throw ValidationError("assignment names unknown id_A " + to_string(a));
    if (!used.insert(a).second) {
      throw ValidationError("assignment not a bijection: id_A " + to_string(a) + " used twice");
    }
  }
  if (assignment.trace.size() != axes.size()) {
    throw ValidationError("assignment trace length " + std::to_string(assignment.trace.size()) +
                          " != " + std::to_string(axes.size()));
  }
}

}  // namespace ebi
