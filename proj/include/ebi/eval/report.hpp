#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "ebi/eval/metrics.hpp"

namespace ebi::eval {

struct SystemRow {
  int system_id = 0;
  std::string model;
  std::string c_label;  // e.g. "t1*-100"
  std::string s_label;
  EvalReport report;
};

struct EnsembleRow {
  std::string system;  // ensemble label, e.g. "83" or "grid-12"
  std::vector<int> components;
  std::vector<double> weights;
  EvalReport report;
};

// "n_c, Lift, Reach" cells as printed in results tables: "27, 27.4%, 96.4%".
std::string metric_cells(const EvalReport& report);

std::string format_components(const std::vector<int>& components);  // "{37,40}"
std::string format_weights(const std::vector<double>& weights);     // "[1,1,2,3]"

// Tables are sorted by n_c, highest first; ties keep input order.
std::string system_table_csv(std::vector<SystemRow> rows);
std::string ensemble_table_csv(std::vector<EnsembleRow> rows);
nlohmann::json system_table_json(std::vector<SystemRow> rows);
nlohmann::json ensemble_table_json(std::vector<EnsembleRow> rows);
// Fixed-width text rendering for the terminal.
std::string system_table_text(std::vector<SystemRow> rows);
std::string ensemble_table_text(std::vector<EnsembleRow> rows);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

inline constexpr const char* kAccuracyNote =
    "Acc compares systems only within one dataset; use Lift to compare across datasets.";

}  // namespace ebi::eval
