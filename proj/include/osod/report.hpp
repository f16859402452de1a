#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "osod/common.hpp"
#include "osod/io.hpp"
#include "osod/metrics.hpp"

namespace osod {

// Numbers are rounded once, at serialization time, to keep artifacts
// byte-reproducible: 6 decimals in machine files, 2 in human tables.
inline double round6(double v) { return std::round(v * 1e6) / 1e6; }

inline std::string fixed_decimals(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline std::string fixed6(double v) { return fixed_decimals(v, 6); }
inline std::string fixed2(double v) { return fixed_decimals(v, 2); }

namespace detail {

inline ordered_json opt_metric(const std::optional<double>& v) {
  if (!v) return nullptr;
  return round6(*v);
}

}  // namespace detail

// Canonical JSON artifact: format version, verbatim config echo, summary
// metrics, per-class table, notes. Field order is fixed.
inline ordered_json report_to_json(const EvalReport& rep, const ordered_json& config) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config;
  ordered_json metrics;
  metrics["map_known"] = round6(rep.map_known);
  metrics["wilderness_impact"] = detail::opt_metric(rep.wilderness_impact);
  metrics["aose"] = rep.aose;
  metrics["unknown_ap"] = detail::opt_metric(rep.unknown_ap);
  metrics["unknown_recall"] = detail::opt_metric(rep.unknown_recall);
  j["metrics"] = metrics;
  j["per_class"] = ordered_json::array();
  for (const auto& c : rep.per_class) {
    ordered_json row;
    row["category_id"] = c.category_id;
    row["num_gt"] = c.num_gt;
    row["num_detections"] = c.num_detections;
    row["ap"] = detail::opt_metric(c.ap);
    row["wi"] = detail::opt_metric(c.wi);
    j["per_class"].push_back(row);
  }
  j["notes"] = rep.notes;
  return j;
}

// Long-format CSV: metric,class,value. Summary rows first, then per-class
// rows in slot order. Undefined values serialize as empty cells.
inline std::string report_to_csv(const EvalReport& rep) {
  std::ostringstream out;
  auto cell = [](const std::optional<double>& v) {
    return v ? fixed6(*v) : std::string();
  };
  out << "metric,class,value\n";
  out << "map_known,," << fixed6(rep.map_known) << "\n";
  out << "wilderness_impact,," << cell(rep.wilderness_impact) << "\n";
  out << "aose,," << rep.aose << "\n";
  out << "unknown_ap,," << cell(rep.unknown_ap) << "\n";
  out << "unknown_recall,," << cell(rep.unknown_recall) << "\n";
  for (const auto& c : rep.per_class) {
    out << "ap," << c.category_id << "," << cell(c.ap) << "\n";
    out << "wi," << c.category_id << "," << cell(c.wi) << "\n";
    out << "num_gt," << c.category_id << "," << c.num_gt << "\n";
    out << "num_detections," << c.category_id << "," << c.num_detections << "\n";
  }
  return out.str();
}

// Plot-ready operating points: one row per PR point, known classes in slot
// order, the merged-unknown curve last under the label "unknown".
inline std::string pr_curves_to_csv(const EvalReport& rep) {
  std::ostringstream out;
  out << "class,recall,precision,score\n";
  auto emit = [&](const std::string& label, const PRCurve& c) {
    for (std::size_t i = 0; i < c.recall.size(); ++i) {
      out << label << "," << fixed6(c.recall[i]) << "," << fixed6(c.precision[i])
          << "," << fixed6(c.score[i]) << "\n";
    }
  };
  for (std::size_t slot = 0; slot < rep.class_curves.size(); ++slot) {
    if (slot < rep.per_class.size()) {
      emit(std::to_string(rep.per_class[slot].category_id), rep.class_curves[slot]);
    }
  }
  if (rep.unknown_curve) emit("unknown", *rep.unknown_curve);
  return out.str();
}

// Two-decimal human summary for the terminal.
inline std::string report_to_table(const EvalReport& rep) {
  std::ostringstream out;
  auto row = [&](const std::string& name, const std::string& value) {
    out << name;
    for (std::size_t i = name.size(); i < 22; ++i) out << ' ';
    out << value << "\n";
  };
  row("metric", "value");
  row("mAP (known)", fixed2(rep.map_known));
  row("WI", rep.wilderness_impact ? fixed2(*rep.wilderness_impact) : "undefined");
  row("AOSE", std::to_string(rep.aose));
  row("U-AP", rep.unknown_ap ? fixed2(*rep.unknown_ap) : "undefined");
  row("U-Recall", rep.unknown_recall ? fixed2(*rep.unknown_recall) : "undefined");
  for (const auto& note : rep.notes) out << "note: " << note << "\n";
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  out << content;
}

}  // namespace osod
