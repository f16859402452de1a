// End-to-end tour of the library API on a tiny in-memory scene: soft-label
// assignment for proposals, post-processing for raw detections, and the
// full open-set metric report.

#include <iostream>

#include "osod/osod.hpp"

int main() {
  // Two known classes (wire ids 1 and 2), one unknown-source class (99).
  const osod::CategorySpace space({1, 2}, {99});

  osod::Dataset ds;
  ds.images = {{1, 100.0, 100.0}, {2, 100.0, 100.0}};
  ds.annotations = {
      {1001, 1, 1, {10, 10, 30, 30}, false},   // known class 1
      {1002, 1, 99, {60, 60, 80, 80}, false},  // unknown object
      {1003, 2, 2, {20, 20, 50, 50}, false},   // known class 2
  };

  // --- proposal labeling -------------------------------------------------
  const std::vector<osod::Proposal> proposals = {
      {1, {11, 11, 30, 30}, 0.9},  // overlaps the class-1 object
      {1, {55, 55, 85, 85}, 0.8},  // overlaps only the unknown object
      {1, {0, 0, 5, 5}, 0.1},      // background clutter
  };
  osod::AssignOptions opts;
  opts.combinator = osod::UncertaintyCombinator::from_name('e');
  std::vector<osod::Annotation> image1_gt;
  for (const auto& a : ds.annotations) {
    if (a.image_id == 1) image1_gt.push_back(a);
  }
  const auto labels = osod::assign_labels(proposals, image1_gt, space, opts);
  std::cout << "proposal labels (slots: class1, class2, unknown, background)\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::cout << "  proposal " << i << ":";
    for (double v : labels[i].values) std::cout << " " << osod::fixed2(v);
    std::cout << "\n";
  }

  // --- detection post-processing -----------------------------------------
  std::vector<osod::Detection> dets = {
      {1, 0, {10, 10, 30, 30}, 0.95},  // class-1 hit
      {1, 0, {11, 11, 30, 30}, 0.60},  // duplicate, suppressed by NMS
      {1, 2, {60, 60, 80, 80}, 0.70},  // flagged as unknown
      {2, 1, {20, 20, 50, 50}, 0.90},  // class-2 hit
      {2, 1, {0, 0, 9, 9}, 0.01},      // below the score floor
  };
  dets = osod::postprocess(dets, space, {});
  std::cout << "post-processed detections: " << dets.size() << "\n";

  // --- open-set metrics --------------------------------------------------
  const auto report = osod::evaluate_all(dets, ds, space, {});
  std::cout << osod::report_to_table(report);
  return 0;
}
