#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "osod/postprocess.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;

TEST_CASE("score filter keeps the boundary score") {
  const std::vector<osod::Detection> dets = {
      support::det(1, 0, support::box(0, 0, 10, 10), 0.051),
      support::det(1, 0, support::box(0, 0, 10, 10), 0.05),
      support::det(1, 0, support::box(0, 0, 10, 10), 0.049),
  };
  const auto kept = osod::score_filter(dets, 0.05);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].score == 0.051);
  CHECK(kept[1].score == 0.05);
}

TEST_CASE("nms suppresses strictly above the threshold") {
  // boxes 0 and 1 overlap with IoU exactly 0.5: both survive at thr 0.5
  const std::vector<osod::BBox> boxes = {
      support::box(0, 0, 10, 10),
      support::box(0, 0, 10, 5),     // IoU vs box0 = 50/100 = 0.5
      support::box(1, 0, 11, 10),    // IoU vs box0 = 90/110 > 0.5
  };
  const std::vector<double> scores = {0.9, 0.8, 0.7};
  const auto keep = osod::nms_keep(boxes, scores, 0.5);
  REQUIRE(keep.size() == 2);
  CHECK(keep[0] == 0);
  CHECK(keep[1] == 1);
}

TEST_CASE("nms keeps selection order and breaks score ties by input order") {
  const std::vector<osod::BBox> boxes = {
      support::box(0, 0, 10, 10),
      support::box(100, 0, 110, 10),
      support::box(0, 0, 10, 10),
  };
  const std::vector<double> scores = {0.5, 0.9, 0.5};
  const auto keep = osod::nms_keep(boxes, scores, 0.5);
  REQUIRE(keep.size() == 2);
  CHECK(keep[0] == 1);   // highest score first
  CHECK(keep[1] == 0);   // tie: earlier input wins, duplicate suppressed
}

TEST_CASE("nms input validation") {
  CHECK_THROWS_AS(osod::nms_keep({support::box(0, 0, 1, 1)}, {}, 0.5),
                  osod::validation_error);
  CHECK_THROWS_AS(osod::nms_keep({support::box(0, 0, 1, 1)}, {0.5}, 1.5),
                  osod::validation_error);
  CHECK(osod::nms_keep({}, {}, 0.5).empty());
}

TEST_CASE("per-class nms treats classes independently and pools unknown") {
  const auto space = support::make_space(2);
  const auto b = support::box(0, 0, 10, 10);
  const std::vector<osod::Detection> dets = {
      support::det(1, 0, b, 0.9),
      support::det(1, 1, b, 0.8),                   // other class: kept
      support::det(1, 0, b, 0.7),                   // same class duplicate: suppressed
      support::det(1, space.unknown_slot(), b, 0.6),
      support::det(1, space.unknown_slot(), b, 0.5),  // unknown duplicate: suppressed
  };
  const auto kept = osod::per_class_nms(dets, space, 0.5);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].class_slot == 0);
  CHECK(kept[1].class_slot == 1);
  CHECK(kept[2].class_slot == space.unknown_slot());
  CHECK(kept[2].score == 0.6);

  const std::vector<osod::Detection> bad = {
      support::det(1, space.background_slot(), b, 0.5)};
  CHECK_THROWS_AS(osod::per_class_nms(bad, space, 0.5), osod::validation_error);
}

TEST_CASE("top-k cap prefers known classes on score ties") {
  const auto space = support::make_space(1);
  const auto b = support::box(0, 0, 10, 10);
  const std::vector<osod::Detection> dets = {
      support::det(1, space.unknown_slot(), b, 0.9),
      support::det(1, 0, b, 0.9),
      support::det(1, space.unknown_slot(), b, 0.8),
  };
  const auto top2 = osod::select_topk(dets, 2, space);
  REQUIRE(top2.size() == 2);
  CHECK(top2[0].class_slot == 0);  // known wins the 0.9 tie
  CHECK(top2[1].class_slot == space.unknown_slot());
  CHECK(top2[1].score == 0.9);

  CHECK(osod::select_topk(dets, 10, space).size() == 3);
  CHECK(osod::select_topk(dets, 0, space).empty());
}

TEST_CASE("postprocess pipeline is idempotent and capped on random scenes") {
  const auto space = support::make_space(3);
  osod::PostprocessOptions opts;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int scene = 0; scene < 60; ++scene) {
    std::vector<osod::Detection> dets;
    const int n = 20 + static_cast<int>(rng() % 200);
    for (int i = 0; i < n; ++i) {
      const double x = 100.0 * unit(rng), y = 100.0 * unit(rng);
      const double w = 5.0 + 30.0 * unit(rng), h = 5.0 + 30.0 * unit(rng);
      dets.push_back(support::det(scene, rng() % 4,
                                  support::box(x, y, x + w, y + h), unit(rng)));
    }
    const auto once = osod::postprocess_image(dets, space, opts);
    const auto twice = osod::postprocess_image(once, space, opts);
    REQUIRE(once.size() <= opts.max_per_image);
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      REQUIRE(once[i].box == twice[i].box);
      REQUIRE(once[i].score == twice[i].score);
      REQUIRE(once[i].class_slot == twice[i].class_slot);
      REQUIRE(once[i].score >= opts.score_threshold);
    }
    // survivors of one class never overlap above the nms threshold
    for (std::size_t i = 0; i < once.size(); ++i) {
      for (std::size_t j = i + 1; j < once.size(); ++j) {
        if (once[i].class_slot != once[j].class_slot) continue;
        REQUIRE(osod::iou(once[i].box, once[j].box) <= opts.nms_threshold + 1e-12);
      }
    }
  }
}

TEST_CASE("multi-image postprocess groups by ascending image id") {
  const auto space = support::make_space(1);
  const auto b = support::box(0, 0, 10, 10);
  const std::vector<osod::Detection> dets = {
      support::det(7, 0, b, 0.9),
      support::det(3, 0, b, 0.8),
      support::det(7, 0, support::box(50, 0, 60, 10), 0.7),
  };
  const auto out = osod::postprocess(dets, space, {});
  REQUIRE(out.size() == 3);
  CHECK(out[0].image_id == 3);
  CHECK(out[1].image_id == 7);
  CHECK(out[1].score == 0.9);
  CHECK(out[2].image_id == 7);
}
