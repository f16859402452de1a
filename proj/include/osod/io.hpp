#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "osod/data.hpp"
#include "osod/geometry.hpp"
#include "osod/taxonomy.hpp"

namespace osod {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct LoadOptions {
  // Strict rejects out-of-space category ids and dangling image ids;
  // lenient drops the offending records and counts them.
  bool strict = true;
  bool clip_to_image = true;
};

struct LoadStats {
  std::size_t dropped_bad_category = 0;
  std::size_t dropped_missing_image = 0;
};

namespace detail {

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw io_error("parse error in " + path + ": " + e.what());
  }
  return j;
}

inline void require_key(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) {
    throw io_error("schema error in " + path + ": missing \"" + key + "\" key");
  }
}

inline BBox bbox_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() != 4) {
    throw io_error("schema error: bbox must be [x,y,w,h] (" + where + ")");
  }
  return from_xywh(arr[0].get<double>(), arr[1].get<double>(),
                   arr[2].get<double>(), arr[3].get<double>());
}

inline json bbox_to_json(const BBox& b) {
  return json::array({b.x_min, b.y_min, b.width(), b.height()});
}

}  // namespace detail

// Category-space config: {known_ids:[...], unknown_source_ids:[...], unknown_wire_id}.
inline CategorySpace load_category_space(const std::string& path) {
  json j = detail::parse_file(path);
  detail::require_key(j, "known_ids", path);
  std::vector<int> known = j["known_ids"].get<std::vector<int>>();
  std::set<int> unknown;
  if (j.contains("unknown_source_ids")) {
    for (const auto& v : j["unknown_source_ids"]) unknown.insert(v.get<int>());
  }
  std::optional<int> wire;
  if (j.contains("unknown_wire_id")) wire = j["unknown_wire_id"].get<int>();
  return CategorySpace(std::move(known), std::move(unknown), wire);
}

inline void save_category_space(const CategorySpace& space, const std::string& path) {
  ordered_json j;
  j["known_ids"] = space.known_ids();
  j["unknown_source_ids"] = space.unknown_source_ids();
  j["unknown_wire_id"] = space.unknown_wire_id();
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

// COCO-style annotation reader. Boxes are converted from [x,y,w,h] and
// clipped to image bounds; iscrowd is passed through.
inline Dataset load_annotations(const std::string& path, const CategorySpace& space,
                                const LoadOptions& opts = {},
                                LoadStats* stats = nullptr) {
  json j = detail::parse_file(path);
  detail::require_key(j, "images", path);
  detail::require_key(j, "annotations", path);
  detail::require_key(j, "categories", path);

  Dataset ds;
  std::unordered_map<image_id_t, std::size_t> image_index;
  for (const auto& im : j["images"]) {
    ImageRecord rec;
    rec.id = im.at("id").get<image_id_t>();
    rec.width = im.at("width").get<double>();
    rec.height = im.at("height").get<double>();
    image_index.emplace(rec.id, ds.images.size());
    ds.images.push_back(rec);
  }

  LoadStats local;
  for (const auto& a : j["annotations"]) {
    Annotation ann;
    ann.id = a.at("id").get<std::int64_t>();
    ann.image_id = a.at("image_id").get<image_id_t>();
    ann.category_id = a.at("category_id").get<int>();
    ann.box = detail::bbox_from_json(a.at("bbox"), "annotation " + std::to_string(ann.id));
    ann.is_crowd = a.contains("iscrowd") && a["iscrowd"].get<int>() != 0;

    auto img_it = image_index.find(ann.image_id);
    if (img_it == image_index.end()) {
      if (opts.strict) {
        throw io_error("annotation " + std::to_string(ann.id) +
                       " references missing image " + std::to_string(ann.image_id));
      }
      ++local.dropped_missing_image;
      continue;
    }
    if (!space.is_known(ann.category_id) && !space.is_unknown_source(ann.category_id)) {
      if (opts.strict) {
        throw io_error("annotation " + std::to_string(ann.id) +
                       " has out-of-space category id " + std::to_string(ann.category_id));
      }
      ++local.dropped_bad_category;
      continue;
    }
    if (opts.clip_to_image) {
      const ImageRecord& im = ds.images[img_it->second];
      ann.box.x_min = std::clamp(ann.box.x_min, 0.0, im.width);
      ann.box.x_max = std::clamp(ann.box.x_max, 0.0, im.width);
      ann.box.y_min = std::clamp(ann.box.y_min, 0.0, im.height);
      ann.box.y_max = std::clamp(ann.box.y_max, 0.0, im.height);
    }
    ds.annotations.push_back(ann);
  }
  if (stats) *stats = local;
  return ds;
}

inline void save_annotations(const Dataset& ds, const CategorySpace& space,
                             const std::string& path) {
  ordered_json j;
  j["images"] = json::array();
  for (const auto& im : ds.images) {
    j["images"].push_back({{"id", im.id}, {"width", im.width}, {"height", im.height}});
  }
  j["annotations"] = json::array();
  for (const auto& a : ds.annotations) {
    ordered_json rec;
    rec["id"] = a.id;
    rec["image_id"] = a.image_id;
    rec["category_id"] = a.category_id;
    rec["bbox"] = detail::bbox_to_json(a.box);
    rec["iscrowd"] = a.is_crowd ? 1 : 0;
    j["annotations"].push_back(rec);
  }
  j["categories"] = json::array();
  std::unordered_set<int> present(space.known_ids().begin(), space.known_ids().end());
  for (int id : space.known_ids()) {
    j["categories"].push_back({{"id", id}, {"name", "category_" + std::to_string(id)}});
  }
  for (int id : space.unknown_source_ids()) {
    if (!present.count(id)) {
      j["categories"].push_back({{"id", id}, {"name", "category_" + std::to_string(id)}});
    }
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  out << j.dump() << "\n";
}

// COCO results-format reader: array of {image_id, category_id, bbox, score}.
// Output is stably sorted by (image_id, descending score); the unknown wire
// id and any unknown-source id map onto the unknown slot.
inline std::vector<Detection> load_detections(const std::string& path,
                                              const CategorySpace& space) {
  json j = detail::parse_file(path);
  if (!j.is_array()) {
    throw io_error("schema error in " + path + ": detections must be a JSON array");
  }
  std::vector<Detection> dets;
  dets.reserve(j.size());
  std::size_t i = 0;
  for (const auto& r : j) {
    Detection d;
    d.image_id = r.at("image_id").get<image_id_t>();
    d.box = detail::bbox_from_json(r.at("bbox"), "detection " + std::to_string(i));
    d.score = r.at("score").get<double>();
    if (d.score < 0.0 || d.score > 1.0) {
      throw validation_error("detection " + std::to_string(i) + " has score " +
                             std::to_string(d.score) + " outside [0,1]");
    }
    const int cat = r.at("category_id").get<int>();
    if (!space.is_known(cat) && !space.is_unknown_source(cat) &&
        cat != space.unknown_wire_id()) {
      throw validation_error("detection " + std::to_string(i) +
                             " has unknown category id " + std::to_string(cat));
    }
    d.class_slot = space.slot_of(cat);
    dets.push_back(d);
    ++i;
  }
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.score > b.score;
  });
  return dets;
}

inline void save_detections(const std::vector<Detection>& dets,
                            const CategorySpace& space, const std::string& path) {
  ordered_json j = json::array();
  for (const auto& d : dets) {
    ordered_json rec;
    rec["image_id"] = d.image_id;
    rec["category_id"] = space.category_of_slot(d.class_slot);
    rec["bbox"] = detail::bbox_to_json(d.box);
    rec["score"] = d.score;
    j.push_back(rec);
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot write file: " + path);
  out << j.dump() << "\n";
}

}  // namespace osod
