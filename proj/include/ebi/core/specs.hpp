#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ebi/core/dataset.hpp"
#include "ebi/core/ids.hpp"

namespace ebi {

enum class PromptVariant { plain, starred };

// How one matrix (c or s) of a system is elicited from a model.
struct PromptProtocol {
  int ptype = 1;  // 1: id-selection frequency, 2: ranked certainty lists
  int calls = 1;
  PromptVariant variant = PromptVariant::plain;
  std::optional<std::string> delegate_model;  // the "t2'" case
  int block_size = 7;

  // Appendix-D style label, e.g. "t1*-100" or "t2'-10".
  std::string label() const;
};

void validate(const PromptProtocol& proto);

struct SamplingParams {
  std::optional<double> temperature;
  // "none": no seed sent; "call_index": seed = base_seed + call index.
  std::string seed_policy = "none";
  std::int64_t base_seed = 0;

  bool operator==(const SamplingParams&) const = default;
};

// One language model plus prompt configuration.
struct SystemSpec {
  int system_id = 0;
  std::string model;
  PromptProtocol c_protocol;
  PromptProtocol s_protocol;
  SamplingParams sampling;
};

void validate(const SystemSpec& spec);

struct EnsembleSpec {
  std::optional<int> ensemble_id;
  std::vector<int> components;
  std::vector<double> weights;
};

void validate(const EnsembleSpec& spec);

struct TraceStep {
  int step = 0;
  IdB b{};
  IdA a{};
  double value = 0.0;

  bool operator==(const TraceStep&) const = default;
};

// Duplicate-free pairing of every id_B with one id_A.
struct Assignment {
  std::map<IdB, IdA> pairs;
  std::vector<TraceStep> trace;

  bool operator==(const Assignment&) const = default;
};

// Throws ValidationError unless pairs is a bijection over exactly the axes'
// id sets and the trace has one entry per pair.
void validate(const Assignment& assignment, const IdAxes& axes);

}  // namespace ebi
