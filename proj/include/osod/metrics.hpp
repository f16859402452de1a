#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "osod/data.hpp"
#include "osod/geometry.hpp"
#include "osod/parallel.hpp"
#include "osod/taxonomy.hpp"

namespace osod {

enum class Disposition : std::uint8_t {
  TruePositive,
  FalsePositiveKnown,    // matched nothing
  FalsePositiveUnknown,  // consumed an unknown GT box
};

struct TallyRow {
  std::size_t detection_index = 0;
  double score = 0.0;
  Disposition disposition = Disposition::FalsePositiveKnown;
  // Overlap with any non-crowd unknown GT at the sweep threshold,
  // regardless of consumption. Feeds the raw AOSE counting mode.
  bool overlaps_unknown = false;
};

// Result of one class sweep. Rows follow the detection processing order
// (descending score); detections absorbed by crowd GT emit no row.
struct MatchTally {
  std::vector<TallyRow> rows;
  std::size_t num_gt = 0;          // non-crowd known GT of the swept class
  std::size_t num_gt_unknown = 0;  // non-crowd unknown GT seen by the sweep
};

// Score-ordered greedy assignment with one-to-one GT consumption, per image.
// Priority per detection: unconsumed known GT at IoU >= thr (TP, best IoU,
// ties to the earliest GT), else crowd known GT (row dropped), else
// unconsumed unknown GT (FP_unknown), else crowd unknown GT (row dropped),
// else FP_known. Crowd boxes absorb any number of detections and are
// excluded from every denominator.
//
// Detections may span images (each competes only for GT of its own image)
// and must arrive sorted by descending score, ties by input order.
inline MatchTally greedy_match(const std::vector<Detection>& detections,
                               const std::vector<Annotation>& gt_known,
                               const std::vector<Annotation>& gt_unknown,
                               double iou_thr) {
  struct GtBox {
    BBox box;
    bool is_crowd = false;
    bool consumed = false;
  };
  struct ImageGt {
    std::vector<GtBox> known;
    std::vector<GtBox> unknown;
  };
  std::unordered_map<image_id_t, ImageGt> by_image;
  MatchTally tally;
  for (const auto& g : gt_known) {
    by_image[g.image_id].known.push_back({g.box, g.is_crowd, false});
    if (!g.is_crowd) ++tally.num_gt;
  }
  for (const auto& g : gt_unknown) {
    by_image[g.image_id].unknown.push_back({g.box, g.is_crowd, false});
    if (!g.is_crowd) ++tally.num_gt_unknown;
  }

  tally.rows.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& d = detections[i];
    auto it = by_image.find(d.image_id);
    ImageGt* gt = it == by_image.end() ? nullptr : &it->second;

    TallyRow row;
    row.detection_index = i;
    row.score = d.score;

    double best_known = 0.0;
    GtBox* best_known_box = nullptr;
    bool crowd_known_hit = false;
    double best_unknown = 0.0;
    GtBox* best_unknown_box = nullptr;
    bool crowd_unknown_hit = false;
    if (gt) {
      for (auto& g : gt->known) {
        const double v = iou(d.box, g.box);
        if (v < iou_thr) continue;
        if (g.is_crowd) {
          crowd_known_hit = true;
        } else if (!g.consumed && v > best_known) {
          best_known = v;
          best_known_box = &g;
        }
      }
      for (auto& g : gt->unknown) {
        const double v = iou(d.box, g.box);
        if (v < iou_thr) continue;
        if (g.is_crowd) {
          crowd_unknown_hit = true;
        } else {
          row.overlaps_unknown = true;
          if (!g.consumed && v > best_unknown) {
            best_unknown = v;
            best_unknown_box = &g;
          }
        }
      }
    }

    if (best_known_box) {
      best_known_box->consumed = true;
      row.disposition = Disposition::TruePositive;
      tally.rows.push_back(row);
    } else if (crowd_known_hit) {
      // absorbed, no row
    } else if (best_unknown_box) {
      best_unknown_box->consumed = true;
      row.disposition = Disposition::FalsePositiveUnknown;
      tally.rows.push_back(row);
    } else if (crowd_unknown_hit) {
      // absorbed, no row
    } else {
      row.disposition = Disposition::FalsePositiveKnown;
      tally.rows.push_back(row);
    }
  }
  return tally;
}

struct PRCurve {
  std::vector<double> recall;     // non-decreasing
  std::vector<double> precision;
  std::vector<double> score;      // operating score per point
  std::size_t num_gt = 0;
};

inline PRCurve pr_curve(const MatchTally& tally) {
  if (tally.num_gt == 0) {
    throw metric_error("AP undefined: class has no ground truth");
  }
  PRCurve c;
  c.num_gt = tally.num_gt;
  c.recall.reserve(tally.rows.size());
  c.precision.reserve(tally.rows.size());
  std::size_t tp = 0, fp = 0;
  for (const auto& row : tally.rows) {
    if (row.disposition == Disposition::TruePositive) ++tp; else ++fp;
    c.recall.push_back(static_cast<double>(tp) / static_cast<double>(tally.num_gt));
    c.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    c.score.push_back(row.score);
  }
  return c;
}

enum class ApVariant { Voc07, AllPoint };

inline ApVariant ap_variant_from_string(const std::string& s) {
  if (s == "voc07") return ApVariant::Voc07;
  if (s == "area") return ApVariant::AllPoint;
  throw validation_error("unknown AP variant \"" + s + "\", expected voc07|area");
}

inline const char* to_string(ApVariant v) {
  return v == ApVariant::Voc07 ? "voc07" : "area";
}

// Percent AP: 11-point interpolation or area under the monotone envelope.
inline double average_precision(const PRCurve& curve, ApVariant variant) {
  const std::size_t n = curve.recall.size();
  if (variant == ApVariant::Voc07) {
    double sum = 0.0;
    for (int step = 0; step <= 10; ++step) {
      const double r = 0.1 * step;
      double best = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (curve.recall[i] >= r) best = std::max(best, curve.precision[i]);
      }
      sum += best;
    }
    return 100.0 * sum / 11.0;
  }
  // Monotone envelope from the right, integrated over recall increments.
  std::vector<double> env(n);
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    running = std::max(running, curve.precision[i]);
    env[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (curve.recall[i] - prev_recall) * env[i];
    prev_recall = curve.recall[i];
  }
  return 100.0 * ap;
}

namespace detail {

// Known-class detections of one class slot, stably re-sorted to the
// canonical sweep order (descending score, ties by input order).
inline std::vector<Detection> class_detections(const std::vector<Detection>& dets,
                                               std::size_t slot) {
  std::vector<Detection> out;
  for (const auto& d : dets) {
    if (d.class_slot == slot) out.push_back(d);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  return out;
}

struct GtSplit {
  // known annotations bucketed per known slot; unknown-source merged
  std::vector<std::vector<Annotation>> known_by_slot;
  std::vector<Annotation> unknown;
};

inline GtSplit split_gt(const Dataset& ds, const CategorySpace& space) {
  GtSplit s;
  s.known_by_slot.resize(space.num_known());
  for (const auto& a : ds.annotations) {
    if (space.is_known(a.category_id)) {
      s.known_by_slot[space.slot_of(a.category_id)].push_back(a);
    } else if (space.is_unknown_source(a.category_id)) {
      s.unknown.push_back(a);
    }
  }
  return s;
}

}  // namespace detail

// Per known class: sweep that class's detections against its GT plus the
// merged unknown GT. Parallel across classes; output indexed by slot, so
// the result is independent of scheduling.
inline std::vector<MatchTally> known_class_sweeps(const std::vector<Detection>& dets,
                                                  const Dataset& ds,
                                                  const CategorySpace& space,
                                                  double iou_thr,
                                                  std::size_t threads = 0) {
  const detail::GtSplit gt = detail::split_gt(ds, space);
  std::vector<MatchTally> tallies(space.num_known());
  parallel_for(space.num_known(), threads, [&](std::size_t slot) {
    tallies[slot] = greedy_match(detail::class_detections(dets, slot),
                                 gt.known_by_slot[slot], gt.unknown, iou_thr);
  });
  return tallies;
}

// Class-agnostic sweep of unknown-slot detections against merged unknown GT.
inline MatchTally unknown_sweep(const std::vector<Detection>& dets, const Dataset& ds,
                                const CategorySpace& space, double iou_thr) {
  const detail::GtSplit gt = detail::split_gt(ds, space);
  return greedy_match(detail::class_detections(dets, space.unknown_slot()),
                      gt.unknown, {}, iou_thr);
}

// Mean AP over known classes holding at least one GT box.
inline double map_known(const std::vector<Detection>& dets, const Dataset& ds,
                        const CategorySpace& space, double iou_thr = 0.5,
                        ApVariant variant = ApVariant::Voc07,
                        std::size_t threads = 0) {
  const auto tallies = known_class_sweeps(dets, ds, space, iou_thr, threads);
  double sum = 0.0;
  std::size_t classes = 0;
  for (const auto& t : tallies) {
    if (t.num_gt == 0) continue;
    sum += average_precision(pr_curve(t), variant);
    ++classes;
  }
  if (classes == 0) throw metric_error("mAP undefined: no known ground truth");
  return sum / static_cast<double>(classes);
}

inline double unknown_ap(const std::vector<Detection>& dets, const Dataset& ds,
                         const CategorySpace& space, double iou_thr = 0.5,
                         ApVariant variant = ApVariant::Voc07) {
  const MatchTally t = unknown_sweep(dets, ds, space, iou_thr);
  if (t.num_gt == 0) throw metric_error("U-AP undefined: no unknown ground truth");
  return average_precision(pr_curve(t), variant);
}

inline double unknown_recall(const std::vector<Detection>& dets, const Dataset& ds,
                             const CategorySpace& space, double iou_thr = 0.5) {
  const MatchTally t = unknown_sweep(dets, ds, space, iou_thr);
  if (t.num_gt == 0) throw metric_error("U-Recall undefined: no unknown ground truth");
  std::size_t matched = 0;
  for (const auto& r : t.rows) {
    if (r.disposition == Disposition::TruePositive) ++matched;
  }
  return 100.0 * static_cast<double>(matched) / static_cast<double>(t.num_gt);
}

// Fraction of GT boxes covered by at least one box at the IoU threshold,
// ignoring classes entirely. Crowd GT are excluded from the denominator.
inline double class_agnostic_recall(const std::vector<Detection>& boxes,
                                    const std::vector<Annotation>& gt,
                                    double iou_thr) {
  std::unordered_map<image_id_t, std::vector<const Detection*>> by_image;
  for (const auto& b : boxes) by_image[b.image_id].push_back(&b);
  std::size_t total = 0, covered = 0;
  for (const auto& g : gt) {
    if (g.is_crowd) continue;
    ++total;
    auto it = by_image.find(g.image_id);
    if (it == by_image.end()) continue;
    for (const Detection* b : it->second) {
      if (iou(b->box, g.box) >= iou_thr) { ++covered; break; }
    }
  }
  if (total == 0) throw metric_error("recall undefined: no ground truth");
  return 100.0 * static_cast<double>(covered) / static_cast<double>(total);
}

enum class WiVariant { PerClassMean, Pooled };

inline WiVariant wi_variant_from_string(const std::string& s) {
  if (s == "per-class") return WiVariant::PerClassMean;
  if (s == "pooled") return WiVariant::Pooled;
  throw validation_error("unknown WI variant \"" + s + "\", expected per-class|pooled");
}

inline const char* to_string(WiVariant v) {
  return v == WiVariant::PerClassMean ? "per-class" : "pooled";
}

struct WiPrefix {
  std::size_t tp = 0;
  std::size_t fp_known = 0;
  std::size_t fp_unknown = 0;
  bool reached = false;
};

// Walk a tally in score order until recall reaches the requested level.
inline WiPrefix wi_operating_prefix(const MatchTally& tally, double recall_level) {
  WiPrefix p;
  if (tally.num_gt == 0) return p;
  for (const auto& row : tally.rows) {
    switch (row.disposition) {
      case Disposition::TruePositive: ++p.tp; break;
      case Disposition::FalsePositiveKnown: ++p.fp_known; break;
      case Disposition::FalsePositiveUnknown: ++p.fp_unknown; break;
    }
    const double recall = static_cast<double>(p.tp) / static_cast<double>(tally.num_gt);
    if (recall >= recall_level) {
      p.reached = true;
      return p;
    }
  }
  return p;
}

inline double wi_from_prefix(const WiPrefix& p) {
  const std::size_t denom = p.tp + p.fp_known;
  if (denom == 0) return 0.0;
  return static_cast<double>(p.fp_unknown) / static_cast<double>(denom);
}

struct WiClassDiagnostic {
  std::size_t slot = 0;
  bool has_gt = false;
  bool reached_recall = false;
  double wi = 0.0;  // valid only when reached_recall
};

// Wilderness impact at a fixed recall level, scaled by 100. Per-class mean
// over classes that reach the level, or a single pooled sweep.
inline std::optional<double> wilderness_impact_from_tallies(
    const std::vector<MatchTally>& tallies, double recall_level, WiVariant variant,
    std::vector<WiClassDiagnostic>* diagnostics = nullptr) {
  if (variant == WiVariant::PerClassMean) {
    double sum = 0.0;
    std::size_t reached = 0;
    for (std::size_t slot = 0; slot < tallies.size(); ++slot) {
      WiClassDiagnostic diag;
      diag.slot = slot;
      diag.has_gt = tallies[slot].num_gt > 0;
      if (diag.has_gt) {
        const WiPrefix p = wi_operating_prefix(tallies[slot], recall_level);
        diag.reached_recall = p.reached;
        if (p.reached) {
          diag.wi = 100.0 * wi_from_prefix(p);
          sum += diag.wi;
          ++reached;
        }
      }
      if (diagnostics) diagnostics->push_back(diag);
    }
    if (reached == 0) return std::nullopt;
    return sum / static_cast<double>(reached);
  }

  // Pooled: merge every class sweep into one score-ordered tally.
  MatchTally pooled;
  for (const auto& t : tallies) {
    pooled.num_gt += t.num_gt;
    pooled.rows.insert(pooled.rows.end(), t.rows.begin(), t.rows.end());
  }
  std::stable_sort(pooled.rows.begin(), pooled.rows.end(),
                   [](const TallyRow& a, const TallyRow& b) { return a.score > b.score; });
  if (pooled.num_gt == 0) return std::nullopt;
  const WiPrefix p = wi_operating_prefix(pooled, recall_level);
  if (!p.reached) return std::nullopt;
  return 100.0 * wi_from_prefix(p);
}

inline std::optional<double> wilderness_impact(const std::vector<Detection>& dets,
                                               const Dataset& ds,
                                               const CategorySpace& space,
                                               double iou_thr = 0.8,
                                               double recall_level = 0.8,
                                               WiVariant variant = WiVariant::PerClassMean,
                                               std::size_t threads = 0) {
  const auto tallies = known_class_sweeps(dets, ds, space, iou_thr, threads);
  return wilderness_impact_from_tallies(tallies, recall_level, variant);
}

enum class AoseMode {
  ConsumeGt,      // each unknown GT absorbs one detection per class sweep
  RawDetections,  // every non-TP detection overlapping unknown GT counts
};

inline AoseMode aose_mode_from_string(const std::string& s) {
  if (s == "consume") return AoseMode::ConsumeGt;
  if (s == "raw") return AoseMode::RawDetections;
  throw validation_error("unknown AOSE mode \"" + s + "\", expected consume|raw");
}

inline const char* to_string(AoseMode m) {
  return m == AoseMode::ConsumeGt ? "consume" : "raw";
}

inline std::int64_t aose_from_tallies(const std::vector<MatchTally>& tallies,
                                      AoseMode mode = AoseMode::ConsumeGt) {
  std::int64_t count = 0;
  for (const auto& t : tallies) {
    for (const auto& row : t.rows) {
      if (mode == AoseMode::ConsumeGt) {
        if (row.disposition == Disposition::FalsePositiveUnknown) ++count;
      } else {
        if (row.disposition != Disposition::TruePositive && row.overlaps_unknown) ++count;
      }
    }
  }
  return count;
}

inline std::int64_t aose(const std::vector<Detection>& dets, const Dataset& ds,
                         const CategorySpace& space, double iou_thr = 0.5,
                         AoseMode mode = AoseMode::ConsumeGt,
                         std::size_t threads = 0) {
  return aose_from_tallies(known_class_sweeps(dets, ds, space, iou_thr, threads), mode);
}

// --- latent-space statistics ---------------------------------------------

struct EmbeddingRecord {
  std::string label;
  std::vector<double> features;
};

struct EmbeddingStats {
  double intra_class_variance = 0.0;
  double inter_class_distance = 0.0;
};

// intra: mean over classes of mean squared distance to the class centroid.
// inter: mean pairwise Euclidean distance between class centroids.
inline EmbeddingStats embedding_stats(const std::vector<EmbeddingRecord>& records) {
  if (records.empty()) throw validation_error("embedding_stats: no records");
  const std::size_t dim = records.front().features.size();
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<const EmbeddingRecord*>> by_class;
  for (const auto& r : records) {
    if (r.features.size() != dim) {
      throw validation_error("embedding_stats: inconsistent feature dimensions");
    }
    auto [it, inserted] = by_class.try_emplace(r.label);
    if (inserted) order.push_back(r.label);
    it->second.push_back(&r);
  }
  if (order.size() < 2) {
    throw metric_error("inter-class distance undefined with a single class");
  }

  std::vector<std::vector<double>> centroids;
  double intra_sum = 0.0;
  for (const auto& label : order) {
    const auto& members = by_class[label];
    std::vector<double> c(dim, 0.0);
    for (const auto* r : members) {
      for (std::size_t k = 0; k < dim; ++k) c[k] += r->features[k];
    }
    for (double& v : c) v /= static_cast<double>(members.size());
    double sq = 0.0;
    for (const auto* r : members) {
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = r->features[k] - c[k];
        sq += d * d;
      }
    }
    intra_sum += sq / static_cast<double>(members.size());
    centroids.push_back(std::move(c));
  }

  double inter_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    for (std::size_t j = i + 1; j < centroids.size(); ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = centroids[i][k] - centroids[j][k];
        sq += d * d;
      }
      inter_sum += std::sqrt(sq);
      ++pairs;
    }
  }
  return EmbeddingStats{intra_sum / static_cast<double>(centroids.size()),
                        inter_sum / static_cast<double>(pairs)};
}

// --- full evaluation -------------------------------------------------------

struct MetricOptions {
  double iou_thr = 0.5;
  double wi_iou_thr = 0.8;
  double wi_recall_level = 0.8;
  ApVariant ap_variant = ApVariant::Voc07;
  WiVariant wi_variant = WiVariant::PerClassMean;
  AoseMode aose_mode = AoseMode::ConsumeGt;
  std::size_t threads = 0;  // 0 = resolve from hardware / OSOD_THREADS
};

struct ClassReport {
  int category_id = 0;
  std::size_t slot = 0;
  std::size_t num_gt = 0;
  std::size_t num_detections = 0;
  std::optional<double> ap;        // absent when the class has no GT
  std::optional<double> wi;        // absent when the recall level is unreached
};

struct EvalReport {
  double map_known = 0.0;                  // percent
  std::optional<double> wilderness_impact; // scaled by 100
  std::int64_t aose = 0;
  std::optional<double> unknown_ap;        // percent; absent without unknown GT
  std::optional<double> unknown_recall;    // percent; absent without unknown GT
  std::vector<ClassReport> per_class;
  std::vector<std::string> notes;
  // curves for plot output, indexed by known slot; unknown curve last if defined
  std::vector<PRCurve> class_curves;
  std::optional<PRCurve> unknown_curve;
};

inline EvalReport evaluate_all(const std::vector<Detection>& dets, const Dataset& ds,
                               const CategorySpace& space,
                               const MetricOptions& opts = {}) {
  EvalReport rep;
  const std::size_t threads = resolve_thread_count(opts.threads);

  const auto ap_tallies = known_class_sweeps(dets, ds, space, opts.iou_thr, threads);
  const auto wi_tallies = known_class_sweeps(dets, ds, space, opts.wi_iou_thr, threads);
  const MatchTally u_tally = unknown_sweep(dets, ds, space, opts.iou_thr);

  std::vector<WiClassDiagnostic> wi_diag;
  const auto wi_value = wilderness_impact_from_tallies(wi_tallies, opts.wi_recall_level,
                                                       opts.wi_variant, &wi_diag);

  double ap_sum = 0.0;
  std::size_t ap_classes = 0;
  for (std::size_t slot = 0; slot < ap_tallies.size(); ++slot) {
    ClassReport cls;
    cls.category_id = space.category_of_slot(slot);
    cls.slot = slot;
    cls.num_gt = ap_tallies[slot].num_gt;
    cls.num_detections = ap_tallies[slot].rows.size();
    if (cls.num_gt > 0) {
      PRCurve curve = pr_curve(ap_tallies[slot]);
      cls.ap = average_precision(curve, opts.ap_variant);
      ap_sum += *cls.ap;
      ++ap_classes;
      rep.class_curves.push_back(std::move(curve));
    } else {
      rep.notes.push_back("class " + std::to_string(cls.category_id) +
                          " has no ground truth; excluded from mAP");
      rep.class_curves.push_back(PRCurve{});
    }
    if (opts.wi_variant == WiVariant::PerClassMean && slot < wi_diag.size() &&
        wi_diag[slot].reached_recall) {
      cls.wi = wi_diag[slot].wi;
    }
    rep.per_class.push_back(cls);
  }
  if (ap_classes == 0) throw metric_error("mAP undefined: no known ground truth");
  rep.map_known = ap_sum / static_cast<double>(ap_classes);

  rep.wilderness_impact = wi_value;
  if (!wi_value) {
    rep.notes.push_back("WI undefined: no class reached recall level");
  }
  rep.aose = aose_from_tallies(ap_tallies, opts.aose_mode);

  if (u_tally.num_gt > 0) {
    PRCurve curve = pr_curve(u_tally);
    rep.unknown_ap = average_precision(curve, opts.ap_variant);
    std::size_t matched = 0;
    for (const auto& r : u_tally.rows) {
      if (r.disposition == Disposition::TruePositive) ++matched;
    }
    rep.unknown_recall =
        100.0 * static_cast<double>(matched) / static_cast<double>(u_tally.num_gt);
    rep.unknown_curve = std::move(curve);
  } else {
    rep.notes.push_back("no unknown ground truth; U-AP and U-Recall undefined");
  }
  return rep;
}

}  // namespace osod
