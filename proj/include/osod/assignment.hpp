#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "osod/data.hpp"
#include "osod/geometry.hpp"
#include "osod/taxonomy.hpp"

namespace osod {

// Candidate box with a first-stage objectness score.
struct Proposal {
  image_id_t image_id = 0;
  BBox box;
  double objectness = 0.0;
};

struct MatchResult {
  std::size_t proposal_index = 0;
  std::optional<std::int64_t> matched_annotation_id;
  double max_iou = 0.0;  // max IoU over known-class GT in the image
  bool is_positive = false;
};

// Target distribution over K+2 slots: [0,K) known, K unknown, K+1 background.
struct LabelVector {
  std::vector<double> values;

  double unknown_mass() const { return values[values.size() - 2]; }
  double background_mass() const { return values.back(); }
  double sum() const { return std::accumulate(values.begin(), values.end(), 0.0); }
};

inline LabelVector one_hot(std::size_t slot, std::size_t num_slots) {
  LabelVector v;
  v.values.assign(num_slots, 0.0);
  v.values[slot] = 1.0;
  return v;
}

enum class GeometryTransform { OneMinusU, OneMinusUSquared, SqrtOneMinusU };

// One row of the appearance x geometry combination table. The six named
// configurations pair the objectness exponent {2,1} with the three
// transforms of (1 - u); (e) is the default.
struct UncertaintyCombinator {
  int appearance_exponent = 1;                                   // 1 or 2
  GeometryTransform geometry = GeometryTransform::OneMinusU;
  char name = 'e';

  static UncertaintyCombinator from_name(char name) {
    switch (name) {
      case 'a': return {2, GeometryTransform::OneMinusUSquared, 'a'};
      case 'b': return {2, GeometryTransform::OneMinusU, 'b'};
      case 'c': return {2, GeometryTransform::SqrtOneMinusU, 'c'};
      case 'd': return {1, GeometryTransform::OneMinusUSquared, 'd'};
      case 'e': return {1, GeometryTransform::OneMinusU, 'e'};
      case 'f': return {1, GeometryTransform::SqrtOneMinusU, 'f'};
      default:
        throw validation_error(std::string("unknown combinator '") + name +
                               "', expected a..f");
    }
  }

  static std::vector<UncertaintyCombinator> all() {
    std::vector<UncertaintyCombinator> out;
    for (char c = 'a'; c <= 'f'; ++c) out.push_back(from_name(c));
    return out;
  }

  double appearance(double objectness) const {
    return appearance_exponent == 2 ? objectness * objectness : objectness;
  }

  double geometry_term(double u) const {
    const double g = 1.0 - u;
    switch (geometry) {
      case GeometryTransform::OneMinusU: return g;
      case GeometryTransform::OneMinusUSquared: return g * g;
      case GeometryTransform::SqrtOneMinusU: return std::sqrt(g);
    }
    return g;
  }
};

// Per-proposal matching against known-class GT of one image: u is the max
// IoU over all known GT, the match is the argmax (ties to the lowest
// annotation id) and positivity follows the threshold.
inline std::vector<MatchResult> match_proposals(const std::vector<Proposal>& proposals,
                                                const std::vector<Annotation>& gt,
                                                double positive_threshold = 0.5) {
  if (positive_threshold <= 0.0 || positive_threshold > 1.0) {
    throw validation_error("positive threshold must lie in (0,1]");
  }
  std::optional<image_id_t> image;
  for (const auto& p : proposals) {
    if (image && *image != p.image_id) {
      throw validation_error("match_proposals: proposals span multiple images");
    }
    image = p.image_id;
  }
  for (const auto& g : gt) {
    if (image && *image != g.image_id) {
      throw validation_error("match_proposals: GT image id does not match proposals");
    }
  }

  std::vector<MatchResult> out;
  out.reserve(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    MatchResult m;
    m.proposal_index = i;
    for (const auto& g : gt) {
      const double v = iou(proposals[i].box, g.box);
      const bool better =
          v > m.max_iou ||
          (v == m.max_iou && m.matched_annotation_id && v > 0.0 &&
           g.id < *m.matched_annotation_id);
      if (better) {
        m.max_iou = v;
        m.matched_annotation_id = g.id;
      }
    }
    if (m.max_iou <= 0.0) m.matched_annotation_id.reset();
    m.is_positive = m.max_iou >= positive_threshold;
    out.push_back(m);
  }
  return out;
}

// Soft target for a negative proposal: zero mass on known slots, unknown
// mass o^a * g(1-u), remainder on background.
inline LabelVector soft_label(double objectness, double u,
                              const UncertaintyCombinator& comb,
                              const CategorySpace& space) {
  if (objectness < 0.0 || objectness > 1.0) {
    throw validation_error("soft_label: objectness outside [0,1]");
  }
  if (u < 0.0 || u > 1.0) {
    throw validation_error("soft_label: IoU outside [0,1]");
  }
  LabelVector v;
  v.values.assign(space.num_slots(), 0.0);
  const double unknown = comb.appearance(objectness) * comb.geometry_term(u);
  v.values[space.unknown_slot()] = unknown;
  v.values[space.background_slot()] = 1.0 - unknown;
  return v;
}

struct AssignOptions {
  UncertaintyCombinator combinator;
  double positive_threshold = 0.5;
  // Consumers embedding this in a training loop gate the soft labels on a
  // warmup iteration count; below the gate negatives are pure background.
  std::int64_t warmup_iterations = 1000;
  std::int64_t current_iteration = -1;  // -1 disables the gate

  bool warmup_active() const {
    return current_iteration >= 0 && current_iteration < warmup_iterations;
  }
};

// Uncertainty-aware assignment for one image: positives keep the one-hot
// label of their matched class, negatives receive the soft label.
inline std::vector<LabelVector> assign_labels(const std::vector<Proposal>& proposals,
                                              const std::vector<Annotation>& gt,
                                              const CategorySpace& space,
                                              const AssignOptions& opts = {}) {
  std::vector<Annotation> known_gt;
  for (const auto& g : gt) {
    if (space.is_known(g.category_id)) known_gt.push_back(g);
  }
  const auto matches = match_proposals(proposals, known_gt, opts.positive_threshold);

  std::vector<LabelVector> labels;
  labels.reserve(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    const MatchResult& m = matches[i];
    if (m.is_positive) {
      int cat = 0;
      for (const auto& g : known_gt) {
        if (g.id == *m.matched_annotation_id) { cat = g.category_id; break; }
      }
      labels.push_back(one_hot(space.slot_of(cat), space.num_slots()));
    } else if (opts.warmup_active()) {
      labels.push_back(one_hot(space.background_slot(), space.num_slots()));
    } else {
      labels.push_back(soft_label(proposals[i].objectness, m.max_iou,
                                  opts.combinator, space));
    }
  }
  return labels;
}

// Hard-label baseline for one image: the k negatives with the highest
// objectness become one-hot unknown, the rest one-hot background. Ties
// break by input order; k beyond the negative count labels them all.
inline std::vector<LabelVector> topk_hard_labels(const std::vector<Proposal>& proposals,
                                                 const std::vector<Annotation>& gt,
                                                 std::size_t k,
                                                 const CategorySpace& space,
                                                 double positive_threshold = 0.5) {
  if (k < 1) throw validation_error("topk_hard_labels: k must be >= 1");
  std::vector<Annotation> known_gt;
  for (const auto& g : gt) {
    if (space.is_known(g.category_id)) known_gt.push_back(g);
  }
  const auto matches = match_proposals(proposals, known_gt, positive_threshold);

  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (!matches[i].is_positive) negatives.push_back(i);
  }
  std::stable_sort(negatives.begin(), negatives.end(), [&](std::size_t a, std::size_t b) {
    return proposals[a].objectness > proposals[b].objectness;
  });

  std::vector<bool> unknown_flag(proposals.size(), false);
  for (std::size_t i = 0; i < std::min(k, negatives.size()); ++i) {
    unknown_flag[negatives[i]] = true;
  }

  std::vector<LabelVector> labels;
  labels.reserve(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (matches[i].is_positive) {
      int cat = 0;
      for (const auto& g : known_gt) {
        if (g.id == *matches[i].matched_annotation_id) { cat = g.category_id; break; }
      }
      labels.push_back(one_hot(space.slot_of(cat), space.num_slots()));
    } else if (unknown_flag[i]) {
      labels.push_back(one_hot(space.unknown_slot(), space.num_slots()));
    } else {
      labels.push_back(one_hot(space.background_slot(), space.num_slots()));
    }
  }
  return labels;
}

struct HistogramResult {
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<double> fraction;
  bool empty_input = false;
};

// Score histogram over [edges]; fractions sum to 1 unless the input is
// empty, which is flagged. Bins are [lo, hi), last bin closed.
inline HistogramResult rpn_score_histogram(const std::vector<double>& scores,
                                           const std::vector<double>& edges) {
  if (edges.size() < 2) throw validation_error("histogram needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] <= edges[i - 1]) {
      throw validation_error("histogram edges must be strictly increasing");
    }
  }
  HistogramResult h;
  const std::size_t nbins = edges.size() - 1;
  h.fraction.assign(nbins, 0.0);
  for (std::size_t b = 0; b < nbins; ++b) {
    h.bin_lo.push_back(edges[b]);
    h.bin_hi.push_back(edges[b + 1]);
  }
  if (scores.empty()) {
    h.empty_input = true;
    return h;
  }
  std::vector<std::size_t> counts(nbins, 0);
  std::size_t total = 0;
  for (double s : scores) {
    if (s < edges.front() || s > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), s);
    std::size_t b = static_cast<std::size_t>(it - edges.begin());
    b = (b == 0) ? 0 : b - 1;
    if (b >= nbins) b = nbins - 1;  // top edge lands in the last bin
    ++counts[b];
    ++total;
  }
  if (total > 0) {
    for (std::size_t b = 0; b < nbins; ++b) {
      h.fraction[b] = static_cast<double>(counts[b]) / static_cast<double>(total);
    }
  } else {
    h.empty_input = true;
  }
  return h;
}

}  // namespace osod
