#include <catch2/catch_amalgamated.hpp>

#include "osod/io.hpp"
#include "osod/taxonomy.hpp"
#include "test_support.hpp"

using osod::CategorySpace;

TEST_CASE("category space slots and lookups") {
  const CategorySpace space({10, 20, 30}, {77, 88});
  CHECK(space.num_known() == 3);
  CHECK(space.unknown_slot() == 3);
  CHECK(space.background_slot() == 4);
  CHECK(space.num_slots() == 5);
  CHECK(space.slot_of(20) == 1);
  CHECK(space.slot_of(77) == space.unknown_slot());
  CHECK(space.slot_of(88) == space.unknown_slot());
  CHECK(space.is_known(10));
  CHECK_FALSE(space.is_known(77));
  CHECK(space.is_unknown_source(88));
  // default wire id: 1 + max known id
  CHECK(space.unknown_wire_id() == 31);
  CHECK(space.slot_of(31) == space.unknown_slot());
  CHECK(space.category_of_slot(0) == 10);
  CHECK(space.category_of_slot(3) == 31);
  CHECK_THROWS_AS(space.category_of_slot(4), osod::validation_error);
  CHECK_THROWS_AS(space.slot_of(999), osod::validation_error);
}

TEST_CASE("category space rejects malformed configs") {
  CHECK_THROWS_AS(CategorySpace({}, {}), osod::validation_error);
  CHECK_THROWS_AS(CategorySpace({1, 2, 2}, {}), osod::validation_error);
  CHECK_THROWS_AS(CategorySpace({1, 2}, {2}), osod::validation_error);
  CHECK_THROWS_AS(CategorySpace({1, 2}, {9}, 2), osod::validation_error);
  CHECK_NOTHROW(CategorySpace({1, 2}, {9}, 50));
}

TEST_CASE("category space file round trip") {
  support::TempDir tmp;
  const CategorySpace space({1, 2, 3}, {9, 11}, 42);
  osod::save_category_space(space, tmp.path("space.json"));
  const CategorySpace loaded = osod::load_category_space(tmp.path("space.json"));
  CHECK(loaded.known_ids() == space.known_ids());
  CHECK(loaded.unknown_source_ids() == space.unknown_source_ids());
  CHECK(loaded.unknown_wire_id() == 42);
}

TEST_CASE("annotation files round trip and clip to image bounds") {
  support::TempDir tmp;
  const auto space = support::make_space(2);
  osod::Dataset ds;
  ds.images.push_back({1, 100.0, 80.0});
  ds.annotations.push_back(support::ann(5, 1, 1, support::box(10, 10, 30, 30)));
  ds.annotations.push_back(support::ann(6, 1, 101, support::box(0, 0, 20, 20), true));
  osod::save_annotations(ds, space, tmp.path("ann.json"));

  const osod::Dataset loaded = osod::load_annotations(tmp.path("ann.json"), space);
  REQUIRE(loaded.images.size() == 1);
  REQUIRE(loaded.annotations.size() == 2);
  CHECK(loaded.annotations[0].box == support::box(10, 10, 30, 30));
  CHECK(loaded.annotations[0].category_id == 1);
  CHECK_FALSE(loaded.annotations[0].is_crowd);
  CHECK(loaded.annotations[1].is_crowd);
}

TEST_CASE("strict loading rejects bad references, lenient drops and counts") {
  support::TempDir tmp;
  const auto space = support::make_space(2);
  const std::string path = tmp.path("bad.json");
  osod::write_text_file(path, R"({
    "images": [{"id": 1, "width": 50, "height": 50}],
    "annotations": [
      {"id": 1, "image_id": 1, "category_id": 1, "bbox": [0, 0, 10, 10]},
      {"id": 2, "image_id": 99, "category_id": 1, "bbox": [0, 0, 10, 10]},
      {"id": 3, "image_id": 1, "category_id": 555, "bbox": [0, 0, 10, 10]},
      {"id": 4, "image_id": 1, "category_id": 1, "bbox": [40, 40, 30, 30]}
    ],
    "categories": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}]
  })");

  CHECK_THROWS_AS(osod::load_annotations(path, space), osod::io_error);

  osod::LoadOptions lenient;
  lenient.strict = false;
  osod::LoadStats stats;
  const osod::Dataset ds = osod::load_annotations(path, space, lenient, &stats);
  CHECK(ds.annotations.size() == 2);
  CHECK(stats.dropped_missing_image == 1);
  CHECK(stats.dropped_bad_category == 1);
  // the out-of-bounds box was clipped to the 50x50 image
  CHECK(ds.annotations[1].box == support::box(40, 40, 50, 50));
}

TEST_CASE("detection files round trip with wire-id mapping and sorting") {
  support::TempDir tmp;
  const auto space = support::make_space(2);  // known {1,2}, unknown source {101}
  std::vector<osod::Detection> dets = {
      support::det(2, 0, support::box(0, 0, 10, 10), 0.5),
      support::det(1, 1, support::box(0, 0, 10, 10), 0.3),
      support::det(1, space.unknown_slot(), support::box(5, 5, 15, 15), 0.9),
  };
  osod::save_detections(dets, space, tmp.path("dets.json"));
  const auto loaded = osod::load_detections(tmp.path("dets.json"), space);
  REQUIRE(loaded.size() == 3);
  // sorted by image id, then descending score
  CHECK(loaded[0].image_id == 1);
  CHECK(loaded[0].score == 0.9);
  CHECK(loaded[0].class_slot == space.unknown_slot());
  CHECK(loaded[1].score == 0.3);
  CHECK(loaded[2].image_id == 2);
}

TEST_CASE("detection loading validates scores and categories") {
  support::TempDir tmp;
  const auto space = support::make_space(1);
  osod::write_text_file(tmp.path("bad_score.json"),
                        R"([{"image_id": 1, "category_id": 1, "bbox": [0,0,1,1], "score": 1.5}])");
  CHECK_THROWS_AS(osod::load_detections(tmp.path("bad_score.json"), space),
                  osod::validation_error);
  osod::write_text_file(tmp.path("bad_cat.json"),
                        R"([{"image_id": 1, "category_id": 9999, "bbox": [0,0,1,1], "score": 0.5}])");
  CHECK_THROWS_AS(osod::load_detections(tmp.path("bad_cat.json"), space),
                  osod::validation_error);
  // unknown-source ids and the wire id both land on the unknown slot
  osod::write_text_file(
      tmp.path("unknown.json"),
      R"([{"image_id": 1, "category_id": 101, "bbox": [0,0,1,1], "score": 0.5},
          {"image_id": 1, "category_id": 2, "bbox": [0,0,1,1], "score": 0.4}])");
  const auto dets = osod::load_detections(tmp.path("unknown.json"), space);
  REQUIRE(dets.size() == 2);
  CHECK(dets[0].class_slot == space.unknown_slot());
  CHECK(dets[1].class_slot == space.unknown_slot());
}

TEST_CASE("missing files and malformed JSON raise io errors") {
  support::TempDir tmp;
  const auto space = support::make_space(1);
  CHECK_THROWS_AS(osod::load_annotations(tmp.path("absent.json"), space), osod::io_error);
  osod::write_text_file(tmp.path("garbage.json"), "{not json");
  CHECK_THROWS_AS(osod::load_annotations(tmp.path("garbage.json"), space), osod::io_error);
  osod::write_text_file(tmp.path("nokeys.json"), "{}");
  CHECK_THROWS_AS(osod::load_annotations(tmp.path("nokeys.json"), space), osod::io_error);
}
