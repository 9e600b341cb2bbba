#include "ebi/eval/report.hpp"

#include <algorithm>
#include <cstdio>

#include "ebi/core/csv.hpp"
#include "ebi/core/error.hpp"
#include "ebi/core/matrix_io.hpp"

namespace ebi::eval {

using nlohmann::json;

namespace {

template <class Row>
void sort_rows(std::vector<Row>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& x, const Row& y) { return x.report.n_c > y.report.n_c; });
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

std::string metric_cells(const EvalReport& r) {
  return std::to_string(r.n_c) + ", " + percent(r.lift) + ", " + percent(r.reach);
}

std::string format_components(const std::vector<int>& components) {
  std::string out = "{";
  for (std::size_t k = 0; k < components.size(); ++k) {
    if (k) out += ",";
    out += std::to_string(components[k]);
  }
  return out + "}";
}

std::string format_weights(const std::vector<double>& weights) {
  std::string out = "[";
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (k) out += ",";
    out += format_double(weights[k]);
  }
  return out + "]";
}

json to_json(const EvalReport& r) {
  return {{"n_c", r.n_c},
          {"N", r.n},
          {"acc", r.acc},
          {"lift", r.lift},
          {"reach", r.reach},
          {"lift_base", r.lift_base},
          {"reach_base", r.reach_base},
          {"base_used", r.base_used == BaseKind::human ? "human" : "llm"},
          {"flags", r.flags}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  try {
    r.n_c = j.at("n_c").get<int>();
    r.n = j.at("N").get<int>();
    r.acc = j.at("acc").get<double>();
    r.lift = j.at("lift").get<double>();
    r.reach = j.at("reach").get<double>();
    r.lift_base = j.at("lift_base").get<double>();
    r.reach_base = j.at("reach_base").get<double>();
    r.base_used = j.at("base_used").get<std::string>() == "human" ? BaseKind::human : BaseKind::llm;
    r.flags = j.at("flags").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

std::string system_table_csv(std::vector<SystemRow> rows) {
  sort_rows(rows);
  std::string out = csv::format_row({"system", "model", "c_ji", "s_ij", "n_c", "Lift", "Reach"});
  for (const auto& r : rows) {
    out += csv::format_row({std::to_string(r.system_id), r.model, r.c_label, r.s_label,
                            std::to_string(r.report.n_c), percent(r.report.lift),
                            percent(r.report.reach)});
  }
  return out;
}

std::string ensemble_table_csv(std::vector<EnsembleRow> rows) {
  sort_rows(rows);
  std::string out = csv::format_row({"system", "components", "weights", "n_c", "Lift", "Reach"});
  for (const auto& r : rows) {
    out += csv::format_row({r.system, format_components(r.components), format_weights(r.weights),
                            std::to_string(r.report.n_c), percent(r.report.lift),
                            percent(r.report.reach)});
  }
  return out;
}

json system_table_json(std::vector<SystemRow> rows) {
  sort_rows(rows);
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"system", r.system_id},
                   {"model", r.model},
                   {"c_ji", r.c_label},
                   {"s_ij", r.s_label},
                   {"n_c", r.report.n_c},
                   {"Lift", percent(r.report.lift)},
                   {"Reach", percent(r.report.reach)},
                   {"metrics", to_json(r.report)}});
  }
  return {{"rows", arr}, {"note", kAccuracyNote}};
}

json ensemble_table_json(std::vector<EnsembleRow> rows) {
  sort_rows(rows);
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"system", r.system},
                   {"components", r.components},
                   {"weights", r.weights},
                   {"n_c", r.report.n_c},
                   {"Lift", percent(r.report.lift)},
                   {"Reach", percent(r.report.reach)},
                   {"metrics", to_json(r.report)}});
  }
  return {{"rows", arr}, {"note", kAccuracyNote}};
}

std::string system_table_text(std::vector<SystemRow> rows) {
  sort_rows(rows);
  std::string out = pad("system", 8) + pad("model", 34) + pad("c_ji", 10) + pad("s_ij", 10) +
                    pad("n_c", 5) + pad("Lift", 9) + "Reach\n";
  for (const auto& r : rows) {
    out += pad(std::to_string(r.system_id), 8) + pad(r.model, 34) + pad(r.c_label, 10) +
           pad(r.s_label, 10) + pad(std::to_string(r.report.n_c), 5) +
           pad(percent(r.report.lift), 9) + percent(r.report.reach) + "\n";
  }
  return out;
}

std::string ensemble_table_text(std::vector<EnsembleRow> rows) {
  sort_rows(rows);
  std::string out = pad("system", 10) + pad("components", 26) + pad("weights", 22) + pad("n_c", 5) +
                    pad("Lift", 9) + "Reach\n";
  for (const auto& r : rows) {
    out += pad(r.system, 10) + pad(format_components(r.components), 26) +
           pad(format_weights(r.weights), 22) + pad(std::to_string(r.report.n_c), 5) +
           pad(percent(r.report.lift), 9) + percent(r.report.reach) + "\n";
  }
  return out;
}

}  // namespace ebi::eval
