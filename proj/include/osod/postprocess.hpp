#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <vector>

#include "osod/data.hpp"
#include "osod/geometry.hpp"
#include "osod/taxonomy.hpp"

namespace osod {

struct PostprocessOptions {
  double score_threshold = 0.05;
  double nms_threshold = 0.5;
  std::size_t max_per_image = 100;
};

// Boundary scores survive: keep score >= thr.
inline std::vector<Detection> score_filter(const std::vector<Detection>& dets,
                                           double thr) {
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& d : dets) {
    if (d.score >= thr) out.push_back(d);
  }
  return out;
}

// Greedy non-maximum suppression. Returns kept indices in selection order
// (descending score, score ties by input order). Suppression is strict:
// a candidate is dropped only when IoU with a kept box exceeds the
// threshold, so IoU exactly at the threshold survives.
inline std::vector<std::size_t> nms_keep(const std::vector<BBox>& boxes,
                                         const std::vector<double>& scores,
                                         double thr) {
  if (boxes.size() != scores.size()) {
    throw validation_error("nms: box and score counts differ");
  }
  if (!(thr >= 0.0 && thr <= 1.0)) {
    throw validation_error("nms: threshold must lie in [0, 1]");
  }
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  std::vector<char> suppressed(boxes.size(), 0);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t a = order[i];
    if (suppressed[a]) continue;
    keep.push_back(a);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t b = order[j];
      if (suppressed[b]) continue;
      if (iou(boxes[a], boxes[b]) > thr) suppressed[b] = 1;
    }
  }
  return keep;
}

namespace detail {

inline void require_slots(const std::vector<Detection>& dets, const CategorySpace& space) {
  for (const auto& d : dets) {
    if (d.class_slot > space.unknown_slot()) {
      throw validation_error("detection slot out of range for the category space");
    }
  }
}

}  // namespace detail

// NMS applied per known class independently; unknown detections form one
// pooled class of their own. Input is one image's detections; output keeps
// per-group selection order concatenated known slots first, unknown last.
inline std::vector<Detection> per_class_nms(const std::vector<Detection>& dets,
                                            const CategorySpace& space, double thr) {
  detail::require_slots(dets, space);
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (std::size_t slot = 0; slot <= space.unknown_slot(); ++slot) {
    std::vector<BBox> boxes;
    std::vector<double> scores;
    std::vector<std::size_t> source;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (dets[i].class_slot == slot) {
        boxes.push_back(dets[i].box);
        scores.push_back(dets[i].score);
        source.push_back(i);
      }
    }
    for (std::size_t local : nms_keep(boxes, scores, thr)) {
      out.push_back(dets[source[local]]);
    }
  }
  return out;
}

// Keep the k highest-scoring detections of one image. Score ties prefer
// known classes over unknown, then input order.
inline std::vector<Detection> select_topk(const std::vector<Detection>& dets,
                                          std::size_t k, const CategorySpace& space) {
  detail::require_slots(dets, space);
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    const bool ua = dets[a].class_slot == space.unknown_slot();
    const bool ub = dets[b].class_slot == space.unknown_slot();
    return !ua && ub;
  });
  std::vector<Detection> out;
  out.reserve(std::min(k, order.size()));
  for (std::size_t i = 0; i < order.size() && out.size() < k; ++i) {
    out.push_back(dets[order[i]]);
  }
  return out;
}

// Full per-image chain: score filter, per-class NMS, per-image cap. The
// output is sorted by descending score with the known-first tie rule, so
// applying the chain twice changes nothing.
inline std::vector<Detection> postprocess_image(const std::vector<Detection>& dets,
                                                const CategorySpace& space,
                                                const PostprocessOptions& opts = {}) {
  std::vector<Detection> stage = score_filter(dets, opts.score_threshold);
  stage = per_class_nms(stage, space, opts.nms_threshold);
  return select_topk(stage, opts.max_per_image, space);
}

// Multi-image driver: images processed independently, output grouped by
// ascending image id with the per-image order inside each group.
inline std::vector<Detection> postprocess(const std::vector<Detection>& dets,
                                          const CategorySpace& space,
                                          const PostprocessOptions& opts = {}) {
  std::map<image_id_t, std::vector<Detection>> by_image;
  for (const auto& d : dets) by_image[d.image_id].push_back(d);
  std::vector<Detection> out;
  out.reserve(dets.size());
  for (auto& [id, image_dets] : by_image) {
    auto kept = postprocess_image(image_dets, space, opts);
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

}  // namespace osod
