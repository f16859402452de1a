#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "osod/geometry.hpp"
#include "osod/taxonomy.hpp"

namespace osod {

struct ImageRecord {
  image_id_t id = 0;
  double width = 0.0;
  double height = 0.0;
};

// Ground-truth object. category_id is a dataset id (known or unknown-source).
struct Annotation {
  std::int64_t id = 0;
  image_id_t image_id = 0;
  int category_id = 0;
  BBox box;
  bool is_crowd = false;
};

// Scored model prediction. class_slot is 0-based, in [0, K] — known class
// or the unknown slot; background is never emitted.
struct Detection {
  image_id_t image_id = 0;
  std::size_t class_slot = 0;
  BBox box;
  double score = 0.0;
};

struct Dataset {
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;

  bool has_image(image_id_t id) const {
    for (const auto& im : images)
      if (im.id == id) return true;
    return false;
  }

  // image id -> indices into annotations, in input order.
  std::unordered_map<image_id_t, std::vector<std::size_t>> annotations_by_image() const {
    std::unordered_map<image_id_t, std::vector<std::size_t>> idx;
    idx.reserve(images.size());
    for (std::size_t i = 0; i < annotations.size(); ++i) {
      idx[annotations[i].image_id].push_back(i);
    }
    return idx;
  }
};

}  // namespace osod
