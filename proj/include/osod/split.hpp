#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "osod/coco_classes.hpp"
#include "osod/data.hpp"
#include "osod/taxonomy.hpp"

namespace osod {

struct SemanticGroup {
  std::string name;
  std::vector<int> category_ids;
};

// Group 0 is the closed-set vocabulary; groups 1..3 are the candidate
// open-set vocabularies in benchmark order.
inline std::vector<SemanticGroup> default_benchmark_groups() {
  return {
      {"voc", voc_category_ids()},
      {"nonvoc-vehicle-outdoor-animal-accessory-appliance", nonvoc_group_ids(1)},
      {"nonvoc-sports-food", nonvoc_group_ids(2)},
      {"nonvoc-electronic-indoor-kitchen-furniture", nonvoc_group_ids(3)},
  };
}

enum class OwodBenchmark { Mixed, Superclass };

inline std::vector<SemanticGroup> default_owod_groups(OwodBenchmark b) {
  if (b == OwodBenchmark::Mixed) {
    auto g = default_benchmark_groups();
    g[0].name = "task1-voc";
    g[1].name = "task2-outdoor-accessory-appliance-truck";
    g[2].name = "task3-sports-food";
    g[3].name = "task4-electronic-indoor-kitchen-furniture";
    return g;
  }
  return {
      {"task1-animal-person-vehicle", superclass_task_ids(1)},
      {"task2-appliance-accessory-outdoor-furniture", superclass_task_ids(2)},
      {"task3-sports-food", superclass_task_ids(3)},
      {"task4-electronic-indoor-kitchen", superclass_task_ids(4)},
  };
}

struct SplitManifest {
  std::string mode;                   // "t1" | "t2" | "owod-task"
  std::size_t n = 0;                  // leading known-source image count
  std::optional<int> level;           // t1: 20 | 40 | 60; owod-task: task index
  std::optional<double> multiplier;   // t2: 0.5 | 1 | 2 | 4
  std::uint64_t seed = 0;
  // First n entries are known-source images, the rest open-pool images;
  // both blocks are sorted ascending.
  std::vector<image_id_t> image_ids;
};

struct SplitResult {
  Dataset data;
  SplitManifest manifest;
};

namespace detail {

// Standard-specified engine plus explicit Fisher-Yates, so the same seed
// selects the same ids on every platform and standard library.
inline void deterministic_shuffle(std::vector<image_id_t>& ids, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(ids[i - 1], ids[j]);
  }
}

// Canonical order, seeded shuffle, prefix-take, then ascending for output.
inline std::vector<image_id_t> sample_ids(std::vector<image_id_t> ids, std::size_t count,
                                          std::uint64_t seed, const std::string& what) {
  if (ids.size() < count) {
    throw capacity_error("not enough qualifying " + what + " images: need " +
                         std::to_string(count) + ", have " + std::to_string(ids.size()));
  }
  std::sort(ids.begin(), ids.end());
  deterministic_shuffle(ids, seed);
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline std::unordered_map<image_id_t, std::vector<const Annotation*>> annotations_by_image(
    const Dataset& ds) {
  std::unordered_map<image_id_t, std::vector<const Annotation*>> out;
  for (const auto& a : ds.annotations) out[a.image_id].push_back(&a);
  return out;
}

inline void check_id_collision(const Dataset& known, const Dataset& open) {
  std::unordered_set<image_id_t> ids;
  for (const auto& im : known.images) ids.insert(im.id);
  for (const auto& im : open.images) {
    if (ids.count(im.id)) {
      throw validation_error("image id " + std::to_string(im.id) +
                             " appears in both the known and open pools");
    }
  }
}

// Assemble the output dataset: images in manifest order, annotations per
// image in ascending annotation-id order, filtered to the active classes.
inline Dataset assemble(const Dataset& known, const Dataset& open,
                        const std::vector<image_id_t>& known_ids,
                        const std::vector<image_id_t>& open_ids,
                        const std::unordered_set<int>& active_categories) {
  std::unordered_map<image_id_t, const ImageRecord*> images;
  for (const auto& im : known.images) images[im.id] = &im;
  for (const auto& im : open.images) images[im.id] = &im;
  auto known_anns = annotations_by_image(known);
  auto open_anns = annotations_by_image(open);

  Dataset out;
  auto append = [&](const std::vector<image_id_t>& ids, const auto& anns) {
    for (image_id_t id : ids) {
      out.images.push_back(*images.at(id));
      auto it = anns.find(id);
      if (it == anns.end()) continue;
      std::vector<const Annotation*> rows = it->second;
      std::sort(rows.begin(), rows.end(),
                [](const Annotation* a, const Annotation* b) { return a->id < b->id; });
      for (const Annotation* a : rows) {
        if (active_categories.count(a->category_id)) out.annotations.push_back(*a);
      }
    }
  };
  append(known_ids, known_anns);
  append(open_ids, open_anns);
  return out;
}

}  // namespace detail

// Graded open-set splits: n known-source images plus {n, 2n, 3n} open-pool
// images for levels {20, 40, 60}, where the level is the number of open-set
// classes drawn from the leading groups after the closed-set group. Every
// selected open image contains at least one object of those classes;
// closed-set objects inside open images are kept.
inline SplitResult build_t1_split(const Dataset& known_eval, const Dataset& open_pool,
                                  const std::vector<SemanticGroup>& groups, int level,
                                  std::size_t n, std::uint64_t seed) {
  if (level != 20 && level != 40 && level != 60) {
    throw validation_error("t1 level must be 20, 40 or 60");
  }
  if (n == 0) throw validation_error("t1 split needs n >= 1");
  if (groups.empty()) throw validation_error("t1 split needs semantic groups");
  detail::check_id_collision(known_eval, open_pool);

  std::unordered_set<int> known_ids(groups[0].category_ids.begin(),
                                    groups[0].category_ids.end());
  std::unordered_set<int> open_ids;
  const std::size_t groups_needed = static_cast<std::size_t>(level / 20);
  if (groups.size() < 1 + groups_needed) {
    throw validation_error("groups do not cover open-set level " + std::to_string(level));
  }
  for (std::size_t g = 1; g <= groups_needed; ++g) {
    open_ids.insert(groups[g].category_ids.begin(), groups[g].category_ids.end());
  }
  if (open_ids.size() != static_cast<std::size_t>(level)) {
    throw validation_error("groups yield " + std::to_string(open_ids.size()) +
                           " open-set classes, expected " + std::to_string(level));
  }

  auto known_anns = detail::annotations_by_image(known_eval);
  std::vector<image_id_t> known_candidates;
  for (const auto& im : known_eval.images) {
    auto it = known_anns.find(im.id);
    if (it == known_anns.end()) continue;
    for (const Annotation* a : it->second) {
      if (known_ids.count(a->category_id)) {
        known_candidates.push_back(im.id);
        break;
      }
    }
  }
  auto open_anns = detail::annotations_by_image(open_pool);
  std::vector<image_id_t> open_candidates;
  for (const auto& im : open_pool.images) {
    auto it = open_anns.find(im.id);
    if (it == open_anns.end()) continue;
    for (const Annotation* a : it->second) {
      if (open_ids.count(a->category_id)) {
        open_candidates.push_back(im.id);
        break;
      }
    }
  }

  const std::size_t open_count = groups_needed * n;
  auto picked_known = detail::sample_ids(std::move(known_candidates), n, seed, "known-source");
  auto picked_open =
      detail::sample_ids(std::move(open_candidates), open_count, seed + 1, "open-pool");

  std::unordered_set<int> active = known_ids;
  active.insert(open_ids.begin(), open_ids.end());

  SplitResult result;
  result.data = detail::assemble(known_eval, open_pool, picked_known, picked_open, active);
  result.manifest.mode = "t1";
  result.manifest.n = n;
  result.manifest.level = level;
  result.manifest.seed = seed;
  result.manifest.image_ids = picked_known;
  result.manifest.image_ids.insert(result.manifest.image_ids.end(), picked_open.begin(),
                                   picked_open.end());
  return result;
}

// Wilderness-graded splits: n known-source images plus multiplier * n
// open-pool images that contain at least one unknown object and no known
// object, so the wilderness ratio equals the multiplier exactly.
inline SplitResult build_t2_split(const Dataset& known_eval, const Dataset& open_pool,
                                  const CategorySpace& space, double multiplier,
                                  std::size_t n, std::uint64_t seed) {
  if (multiplier != 0.5 && multiplier != 1.0 && multiplier != 2.0 && multiplier != 4.0) {
    throw validation_error("t2 multiplier must be one of 0.5, 1, 2, 4");
  }
  if (n == 0) throw validation_error("t2 split needs n >= 1");
  const double raw = multiplier * static_cast<double>(n);
  if (raw != std::floor(raw)) {
    throw validation_error("multiplier * n must be an integer image count");
  }
  const auto open_count = static_cast<std::size_t>(raw);
  detail::check_id_collision(known_eval, open_pool);

  auto known_anns = detail::annotations_by_image(known_eval);
  std::vector<image_id_t> known_candidates;
  for (const auto& im : known_eval.images) {
    auto it = known_anns.find(im.id);
    if (it == known_anns.end()) continue;
    for (const Annotation* a : it->second) {
      if (space.is_known(a->category_id)) {
        known_candidates.push_back(im.id);
        break;
      }
    }
  }

  auto open_anns = detail::annotations_by_image(open_pool);
  std::vector<image_id_t> open_candidates;
  for (const auto& im : open_pool.images) {
    auto it = open_anns.find(im.id);
    if (it == open_anns.end()) continue;
    bool has_unknown = false;
    bool has_known = false;
    for (const Annotation* a : it->second) {
      if (space.is_known(a->category_id)) has_known = true;
      if (space.is_unknown_source(a->category_id)) has_unknown = true;
    }
    if (has_unknown && !has_known) open_candidates.push_back(im.id);
  }

  auto picked_known = detail::sample_ids(std::move(known_candidates), n, seed, "known-source");
  auto picked_open =
      detail::sample_ids(std::move(open_candidates), open_count, seed + 1, "open-pool");

  std::unordered_set<int> active(space.known_ids().begin(), space.known_ids().end());
  active.insert(space.unknown_source_ids().begin(), space.unknown_source_ids().end());

  SplitResult result;
  result.data = detail::assemble(known_eval, open_pool, picked_known, picked_open, active);
  result.manifest.mode = "t2";
  result.manifest.n = n;
  result.manifest.multiplier = multiplier;
  result.manifest.seed = seed;
  result.manifest.image_ids = picked_known;
  result.manifest.image_ids.insert(result.manifest.image_ids.end(), picked_open.begin(),
                                   picked_open.end());
  return result;
}

// Object-level wilderness ratio: images holding only unknown objects over
// images holding at least one known object.
inline double wilderness_ratio(const Dataset& split, const CategorySpace& space) {
  if (split.images.empty()) throw validation_error("wilderness ratio of an empty split");
  auto anns = detail::annotations_by_image(split);
  std::size_t with_known = 0, unknown_only = 0;
  for (const auto& im : split.images) {
    bool has_known = false, has_unknown = false;
    auto it = anns.find(im.id);
    if (it != anns.end()) {
      for (const Annotation* a : it->second) {
        if (space.is_known(a->category_id)) has_known = true;
        if (space.is_unknown_source(a->category_id)) has_unknown = true;
      }
    }
    if (has_known) ++with_known;
    else if (has_unknown) ++unknown_only;
  }
  if (with_known == 0) {
    throw metric_error("wilderness ratio undefined: no image contains a known object");
  }
  return static_cast<double>(unknown_only) / static_cast<double>(with_known);
}

// Provenance-based ratio for manifests whose open images may also contain
// known objects: open-source count over known-source count.
inline double wilderness_ratio(const SplitManifest& manifest) {
  if (manifest.n == 0) {
    throw metric_error("wilderness ratio undefined: manifest has no known-source images");
  }
  if (manifest.image_ids.size() < manifest.n) {
    throw validation_error("manifest image list shorter than its known count");
  }
  return static_cast<double>(manifest.image_ids.size() - manifest.n) /
         static_cast<double>(manifest.n);
}

// Incremental task splits: task t keeps the images holding at least one
// object of group t and only that group's annotations.
inline std::vector<Dataset> build_owod_tasks(const Dataset& pool,
                                             const std::vector<SemanticGroup>& task_groups) {
  if (task_groups.empty()) throw validation_error("owod tasks need semantic groups");

  std::unordered_set<int> seen;
  for (const auto& a : pool.annotations) seen.insert(a.category_id);
  std::vector<int> missing;
  for (const auto& g : task_groups) {
    for (int id : g.category_ids) {
      if (!seen.count(id)) missing.push_back(id);
    }
  }
  if (!missing.empty()) {
    throw capacity_error("pool is missing annotations for " +
                         std::to_string(missing.size()) + " task classes");
  }

  auto anns = detail::annotations_by_image(pool);
  std::vector<Dataset> tasks;
  tasks.reserve(task_groups.size());
  for (const auto& g : task_groups) {
    std::unordered_set<int> ids(g.category_ids.begin(), g.category_ids.end());
    Dataset t;
    for (const auto& im : pool.images) {
      auto it = anns.find(im.id);
      if (it == anns.end()) continue;
      std::vector<const Annotation*> keep;
      for (const Annotation* a : it->second) {
        if (ids.count(a->category_id)) keep.push_back(a);
      }
      if (keep.empty()) continue;
      std::sort(keep.begin(), keep.end(),
                [](const Annotation* a, const Annotation* b) { return a->id < b->id; });
      t.images.push_back(im);
      for (const Annotation* a : keep) t.annotations.push_back(*a);
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

inline std::vector<Dataset> build_owod_tasks(const Dataset& pool, OwodBenchmark benchmark) {
  return build_owod_tasks(pool, default_owod_groups(benchmark));
}

}  // namespace osod
