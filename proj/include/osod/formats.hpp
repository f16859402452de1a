#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "osod/assignment.hpp"
#include "osod/io.hpp"
#include "osod/metrics.hpp"
#include "osod/split.hpp"

namespace osod {

// --- proposals: JSONL of {image_id, bbox, objectness} ----------------------

inline std::vector<Proposal> load_proposals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path);
  std::vector<Proposal> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw io_error("parse error in " + path + " line " + std::to_string(line_no) +
                     ": " + e.what());
    }
    Proposal p;
    p.image_id = j.at("image_id").get<image_id_t>();
    p.box = detail::bbox_from_json(j.at("bbox"), path + " line " + std::to_string(line_no));
    p.objectness = j.at("objectness").get<double>();
    if (p.objectness < 0.0 || p.objectness > 1.0) {
      throw validation_error("proposal at " + path + " line " + std::to_string(line_no) +
                             " has objectness outside [0,1]");
    }
    out.push_back(p);
  }
  return out;
}

inline void save_proposals(const std::vector<Proposal>& proposals,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  for (const auto& p : proposals) {
    ordered_json j;
    j["image_id"] = p.image_id;
    j["bbox"] = detail::bbox_to_json(p.box);
    j["objectness"] = p.objectness;
    out << j.dump() << "\n";
  }
}

// --- label dumps: JSONL of {image_id, proposal_index, labels:[...]} --------

struct LabelRecord {
  image_id_t image_id = 0;
  std::size_t proposal_index = 0;
  std::vector<double> labels;
};

inline void save_label_records(const std::vector<LabelRecord>& records,
                               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  for (const auto& r : records) {
    ordered_json j;
    j["image_id"] = r.image_id;
    j["proposal_index"] = r.proposal_index;
    j["labels"] = r.labels;
    out << j.dump() << "\n";
  }
}

inline std::vector<LabelRecord> load_label_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path);
  std::vector<LabelRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw io_error("parse error in " + path + " line " + std::to_string(line_no) +
                     ": " + e.what());
    }
    LabelRecord r;
    r.image_id = j.at("image_id").get<image_id_t>();
    r.proposal_index = j.at("proposal_index").get<std::size_t>();
    r.labels = j.at("labels").get<std::vector<double>>();
    out.push_back(r);
  }
  return out;
}

// --- embeddings: JSONL of {class, vector:[...]} ----------------------------

inline std::vector<EmbeddingRecord> load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path);
  std::vector<EmbeddingRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw io_error("parse error in " + path + " line " + std::to_string(line_no) +
                     ": " + e.what());
    }
    EmbeddingRecord r;
    r.label = j.at("class").get<std::string>();
    r.features = j.at("vector").get<std::vector<double>>();
    out.push_back(r);
  }
  return out;
}

// --- split manifests: {mode, n, level|multiplier, seed, image_ids} ---------

inline void save_manifest(const SplitManifest& m, const std::string& path) {
  ordered_json j;
  j["mode"] = m.mode;
  j["n"] = m.n;
  if (m.level) j["level"] = *m.level;
  if (m.multiplier) j["multiplier"] = *m.multiplier;
  j["seed"] = m.seed;
  j["image_ids"] = m.image_ids;
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

inline SplitManifest load_manifest(const std::string& path) {
  json j = detail::parse_file(path);
  SplitManifest m;
  m.mode = j.at("mode").get<std::string>();
  m.n = j.at("n").get<std::size_t>();
  if (j.contains("level")) m.level = j["level"].get<int>();
  if (j.contains("multiplier")) m.multiplier = j["multiplier"].get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.image_ids = j.at("image_ids").get<std::vector<image_id_t>>();
  return m;
}

// --- semantic groups: {groups:[{name, category_ids:[...]}]} ----------------

inline std::vector<SemanticGroup> load_groups(const std::string& path) {
  json j = detail::parse_file(path);
  detail::require_key(j, "groups", path);
  std::vector<SemanticGroup> out;
  for (const auto& g : j["groups"]) {
    SemanticGroup sg;
    sg.name = g.at("name").get<std::string>();
    sg.category_ids = g.at("category_ids").get<std::vector<int>>();
    out.push_back(sg);
  }
  if (out.empty()) throw io_error("schema error in " + path + ": empty group list");
  return out;
}

inline void save_groups(const std::vector<SemanticGroup>& groups,
                        const std::string& path) {
  ordered_json j;
  j["groups"] = json::array();
  for (const auto& g : groups) {
    ordered_json rec;
    rec["name"] = g.name;
    rec["category_ids"] = g.category_ids;
    j["groups"].push_back(rec);
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace osod
