#include <catch2/catch_amalgamated.hpp>

#include "osod/formats.hpp"
#include "osod/report.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;

TEST_CASE("proposal JSONL round trip and validation") {
  support::TempDir tmp;
  const std::vector<osod::Proposal> props = {
      support::prop(1, support::box(0, 0, 10, 10), 0.9),
      support::prop(2, support::box(5, 5, 20, 25), 0.1),
  };
  osod::save_proposals(props, tmp.path("props.jsonl"));
  const auto loaded = osod::load_proposals(tmp.path("props.jsonl"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].image_id == 1);
  CHECK(loaded[0].box == props[0].box);
  CHECK(loaded[1].objectness == 0.1);

  osod::write_text_file(tmp.path("bad.jsonl"),
                        R"({"image_id": 1, "bbox": [0,0,1,1], "objectness": 2.0})"
                        "\n");
  CHECK_THROWS_AS(osod::load_proposals(tmp.path("bad.jsonl")), osod::validation_error);
  osod::write_text_file(tmp.path("garbage.jsonl"), "not json\n");
  CHECK_THROWS_AS(osod::load_proposals(tmp.path("garbage.jsonl")), osod::io_error);
  CHECK_THROWS_AS(osod::load_proposals(tmp.path("missing.jsonl")), osod::io_error);
}

TEST_CASE("label record JSONL round trip") {
  support::TempDir tmp;
  const std::vector<osod::LabelRecord> records = {
      {1, 0, {0.0, 0.0, 0.6, 0.4}},
      {1, 1, {0.0, 1.0, 0.0, 0.0}},
  };
  osod::save_label_records(records, tmp.path("labels.jsonl"));
  const auto loaded = osod::load_label_records(tmp.path("labels.jsonl"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].labels == records[0].labels);
  CHECK(loaded[1].proposal_index == 1);
}

TEST_CASE("embedding JSONL loader") {
  support::TempDir tmp;
  osod::write_text_file(tmp.path("emb.jsonl"),
                        R"({"class": "cat", "vector": [1.0, 2.0]})"
                        "\n"
                        R"({"class": "dog", "vector": [3.0, 4.0]})"
                        "\n");
  const auto records = osod::load_embeddings(tmp.path("emb.jsonl"));
  REQUIRE(records.size() == 2);
  CHECK(records[0].label == "cat");
  CHECK(records[1].features == std::vector<double>{3.0, 4.0});
}

TEST_CASE("manifest round trip preserves mode-specific fields") {
  support::TempDir tmp;
  osod::SplitManifest m;
  m.mode = "t2";
  m.n = 4;
  m.multiplier = 0.5;
  m.seed = 99;
  m.image_ids = {1, 2, 3, 4, 100, 101};
  osod::save_manifest(m, tmp.path("manifest.json"));
  const auto loaded = osod::load_manifest(tmp.path("manifest.json"));
  CHECK(loaded.mode == "t2");
  CHECK(loaded.n == 4);
  REQUIRE(loaded.multiplier.has_value());
  CHECK(*loaded.multiplier == 0.5);
  CHECK_FALSE(loaded.level.has_value());
  CHECK(loaded.seed == 99);
  CHECK(loaded.image_ids == m.image_ids);
  CHECK_THAT(osod::wilderness_ratio(loaded), WithinAbs(0.5, 1e-12));
}

TEST_CASE("semantic group files round trip, defaults included") {
  support::TempDir tmp;
  const auto groups = osod::default_benchmark_groups();
  osod::save_groups(groups, tmp.path("groups.json"));
  const auto loaded = osod::load_groups(tmp.path("groups.json"));
  REQUIRE(loaded.size() == groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    CHECK(loaded[i].name == groups[i].name);
    CHECK(loaded[i].category_ids == groups[i].category_ids);
  }
  osod::write_text_file(tmp.path("empty.json"), R"({"groups": []})");
  CHECK_THROWS_AS(osod::load_groups(tmp.path("empty.json")), osod::io_error);
}

TEST_CASE("report artifacts: structure, fixed precision, reproducible bytes") {
  osod::EvalReport rep;
  rep.map_known = 83.333333333;
  rep.wilderness_impact = std::nullopt;
  rep.aose = 7;
  rep.unknown_ap = 50.0;
  rep.unknown_recall = 2.0 / 3.0 * 100.0;
  osod::ClassReport cls;
  cls.category_id = 1;
  cls.slot = 0;
  cls.num_gt = 3;
  cls.num_detections = 5;
  cls.ap = 100.0 / 3.0;
  rep.per_class.push_back(cls);
  rep.notes.push_back("WI undefined: no class reached recall level");

  osod::ordered_json config;
  config["iou_thr"] = 0.5;
  const auto j = osod::report_to_json(rep, config);
  CHECK(j["format_version"] == osod::kFormatVersion);
  CHECK(j["config"]["iou_thr"] == 0.5);
  CHECK(j["metrics"]["wilderness_impact"].is_null());
  CHECK(j["metrics"]["aose"] == 7);
  // six-decimal rounding applied at serialization
  CHECK(j["metrics"]["map_known"].get<double>() == 83.333333);
  CHECK(j["per_class"][0]["ap"].get<double>() == 33.333333);

  const auto csv = osod::report_to_csv(rep);
  CHECK(csv.find("metric,class,value") == 0);
  CHECK(csv.find("map_known,,83.333333") != std::string::npos);
  CHECK(csv.find("wilderness_impact,,\n") != std::string::npos);
  CHECK(csv.find("aose,,7") != std::string::npos);
  CHECK(csv.find("ap,1,33.333333") != std::string::npos);

  // identical input -> identical bytes
  CHECK(osod::report_to_json(rep, config).dump(2) == j.dump(2));
  CHECK(osod::report_to_csv(rep) == csv);

  const auto table = osod::report_to_table(rep);
  CHECK(table.find("83.33") != std::string::npos);
  CHECK(table.find("undefined") != std::string::npos);
}

TEST_CASE("pr curve csv lists known classes then the unknown curve") {
  osod::EvalReport rep;
  osod::ClassReport cls;
  cls.category_id = 7;
  rep.per_class.push_back(cls);
  osod::PRCurve curve;
  curve.recall = {0.5, 1.0};
  curve.precision = {1.0, 2.0 / 3.0};
  curve.score = {0.9, 0.7};
  rep.class_curves.push_back(curve);
  osod::PRCurve ucurve;
  ucurve.recall = {1.0};
  ucurve.precision = {1.0};
  ucurve.score = {0.8};
  rep.unknown_curve = ucurve;

  const auto csv = osod::pr_curves_to_csv(rep);
  CHECK(csv.find("class,recall,precision,score") == 0);
  CHECK(csv.find("7,0.500000,1.000000,0.900000") != std::string::npos);
  CHECK(csv.find("7,1.000000,0.666667,0.700000") != std::string::npos);
  CHECK(csv.find("unknown,1.000000,1.000000,0.800000") != std::string::npos);
}
