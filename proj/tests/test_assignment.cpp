#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "osod/assignment.hpp"
#include "test_support.hpp"

using Catch::Matchers::WithinAbs;
using osod::UncertaintyCombinator;

TEST_CASE("soft label point values") {
  const auto space = support::make_space(3);
  const auto e = UncertaintyCombinator::from_name('e');

  // objectness 0.8, IoU 0.25: unknown mass 0.8 * 0.75 = 0.6
  const auto v = osod::soft_label(0.8, 0.25, e, space);
  CHECK_THAT(v.unknown_mass(), WithinAbs(0.6, 1e-12));
  CHECK_THAT(v.background_mass(), WithinAbs(0.4, 1e-12));
  for (std::size_t i = 0; i < space.num_known(); ++i) CHECK(v.values[i] == 0.0);

  // boundary: full objectness, zero overlap -> all mass on unknown
  const auto hi = osod::soft_label(1.0, 0.0, e, space);
  CHECK(hi.unknown_mass() == 1.0);
  CHECK(hi.background_mass() == 0.0);

  // zero objectness -> all mass on background for any overlap
  for (double u : {0.0, 0.3, 1.0}) {
    const auto lo = osod::soft_label(0.0, u, e, space);
    CHECK(lo.unknown_mass() == 0.0);
    CHECK(lo.background_mass() == 1.0);
  }

  CHECK_THROWS_AS(osod::soft_label(1.2, 0.0, e, space), osod::validation_error);
  CHECK_THROWS_AS(osod::soft_label(0.5, -0.1, e, space), osod::validation_error);
}

TEST_CASE("all six combinators match their longhand formulas") {
  const auto space = support::make_space(2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& comb : UncertaintyCombinator::all()) {
    for (int i = 0; i < 500; ++i) {
      const double o = unit(rng), u = unit(rng);
      const auto v = osod::soft_label(o, u, comb, space);
      REQUIRE_THAT(v.unknown_mass(),
                   WithinAbs(oracle::soft_unknown_mass(comb.name, o, u), 1e-12));
      REQUIRE_THAT(v.sum(), WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("soft label mass is monotone in objectness and overlap") {
  const auto space = support::make_space(2);
  for (const auto& comb : UncertaintyCombinator::all()) {
    // non-decreasing in objectness at fixed overlap
    for (double u : {0.0, 0.25, 0.5, 0.9}) {
      double prev = -1.0;
      for (int step = 0; step <= 50; ++step) {
        const double o = step / 50.0;
        const double mass = osod::soft_label(o, u, comb, space).unknown_mass();
        REQUIRE(mass >= prev);
        prev = mass;
      }
    }
    // non-increasing in overlap at fixed objectness
    for (double o : {0.1, 0.5, 1.0}) {
      double prev = 2.0;
      for (int step = 0; step <= 50; ++step) {
        const double u = step / 50.0;
        const double mass = osod::soft_label(o, u, comb, space).unknown_mass();
        REQUIRE(mass <= prev);
        prev = mass;
      }
    }
  }
}

TEST_CASE("proposal matching picks the argmax with ties to the lowest id") {
  const std::vector<osod::Annotation> gt = {
      support::ann(7, 1, 1, support::box(0, 0, 10, 10)),
      support::ann(3, 1, 2, support::box(20, 0, 30, 10)),
      support::ann(5, 1, 1, support::box(40, 0, 50, 10)),
  };
  const std::vector<osod::Proposal> props = {
      support::prop(1, support::box(0, 0, 10, 10), 0.9),    // exact hit on id 7
      support::prop(1, support::box(22, 0, 30, 10), 0.8),   // best overlap id 3
      support::prop(1, support::box(100, 100, 110, 110), 0.7),  // no overlap
  };
  const auto matches = osod::match_proposals(props, gt, 0.5);
  REQUIRE(matches.size() == 3);
  CHECK(matches[0].is_positive);
  CHECK(matches[0].matched_annotation_id == 7);
  CHECK_THAT(matches[0].max_iou, WithinAbs(1.0, 1e-12));
  CHECK(matches[1].is_positive);
  CHECK(matches[1].matched_annotation_id == 3);
  CHECK_FALSE(matches[2].is_positive);
  CHECK_FALSE(matches[2].matched_annotation_id.has_value());
  CHECK(matches[2].max_iou == 0.0);
}

TEST_CASE("equal-overlap ties resolve to the lowest annotation id") {
  // proposal centered between two identical-overlap boxes
  const std::vector<osod::Annotation> gt = {
      support::ann(9, 1, 1, support::box(0, 0, 10, 10)),
      support::ann(4, 1, 2, support::box(10, 0, 20, 10)),
  };
  const std::vector<osod::Proposal> props = {
      support::prop(1, support::box(5, 0, 15, 10), 0.5),
  };
  const auto matches = osod::match_proposals(props, gt, 0.5);
  CHECK(matches[0].matched_annotation_id == 4);
}

TEST_CASE("matching validates image consistency and threshold domain") {
  const std::vector<osod::Proposal> props = {
      support::prop(1, support::box(0, 0, 1, 1), 0.5),
      support::prop(2, support::box(0, 0, 1, 1), 0.5),
  };
  CHECK_THROWS_AS(osod::match_proposals(props, {}, 0.5), osod::validation_error);
  const std::vector<osod::Proposal> one = {support::prop(1, support::box(0, 0, 1, 1), 0.5)};
  const std::vector<osod::Annotation> other_image = {
      support::ann(1, 2, 1, support::box(0, 0, 1, 1))};
  CHECK_THROWS_AS(osod::match_proposals(one, other_image, 0.5), osod::validation_error);
  CHECK_THROWS_AS(osod::match_proposals(one, {}, 0.0), osod::validation_error);
  CHECK_THROWS_AS(osod::match_proposals(one, {}, 1.5), osod::validation_error);
}

TEST_CASE("assignment: positives one-hot, negatives soft, warmup backgrounds") {
  const auto space = support::make_space(2);
  const std::vector<osod::Annotation> gt = {
      support::ann(1, 5, 2, support::box(0, 0, 10, 10)),
      support::ann(2, 5, 101, support::box(50, 50, 60, 60)),  // unknown-source: ignored
  };
  const std::vector<osod::Proposal> props = {
      support::prop(5, support::box(0, 0, 10, 10), 0.95),  // positive on class 2
      support::prop(5, support::box(0, 0, 16, 10), 0.5),   // IoU 10/16 = 0.625 positive
      support::prop(5, support::box(30, 30, 40, 40), 0.8), // negative, u = 0
  };

  osod::AssignOptions opts;
  opts.combinator = UncertaintyCombinator::from_name('e');
  auto labels = osod::assign_labels(props, gt, space, opts);
  REQUIRE(labels.size() == 3);
  CHECK(labels[0].values == std::vector<double>{0.0, 1.0, 0.0, 0.0});
  CHECK(labels[1].values == std::vector<double>{0.0, 1.0, 0.0, 0.0});
  CHECK_THAT(labels[2].unknown_mass(), WithinAbs(0.8, 1e-12));
  CHECK_THAT(labels[2].background_mass(), WithinAbs(0.2, 1e-12));
  CHECK_THAT(labels[2].sum(), WithinAbs(1.0, 1e-12));

  // during warmup every negative is pure background
  opts.current_iteration = 500;
  REQUIRE(opts.warmup_active());
  labels = osod::assign_labels(props, gt, space, opts);
  CHECK(labels[2].values == std::vector<double>{0.0, 0.0, 0.0, 1.0});
  CHECK(labels[0].values == std::vector<double>{0.0, 1.0, 0.0, 0.0});

  // past the warmup gate the soft labels return
  opts.current_iteration = 1000;
  CHECK_FALSE(opts.warmup_active());
  labels = osod::assign_labels(props, gt, space, opts);
  CHECK_THAT(labels[2].unknown_mass(), WithinAbs(0.8, 1e-12));
}

TEST_CASE("top-k hard labels: count monotone in k and saturating") {
  const auto space = support::make_space(2);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int scene = 0; scene < 100; ++scene) {
    const std::vector<osod::Annotation> gt = {
        support::ann(1, scene, 1, support::box(0, 0, 10, 10))};
    std::vector<osod::Proposal> props;
    const int n = 3 + scene % 8;
    for (int i = 0; i < n; ++i) {
      const double off = 30.0 + 15.0 * i;
      props.push_back(support::prop(scene, support::box(off, 0, off + 10, 10), unit(rng)));
    }
    props.push_back(support::prop(scene, support::box(0, 0, 10, 10), unit(rng)));

    std::size_t negatives = 0;
    for (const auto& m : osod::match_proposals(props, gt, 0.5)) {
      if (!m.is_positive) ++negatives;
    }

    std::size_t prev = 0;
    for (std::size_t k = 1; k <= props.size() + 2; ++k) {
      const auto labels = osod::topk_hard_labels(props, gt, k, space);
      std::size_t unknown_count = 0;
      for (const auto& l : labels) {
        if (l.unknown_mass() == 1.0) ++unknown_count;
        // hard labels everywhere
        REQUIRE_THAT(l.sum(), WithinAbs(1.0, 1e-12));
        REQUIRE(l.values[0] * l.values[1] == 0.0);
      }
      REQUIRE(unknown_count >= prev);
      REQUIRE(unknown_count == std::min(k, negatives));
      prev = unknown_count;
    }
  }
  CHECK_THROWS_AS(osod::topk_hard_labels({}, {}, 0, space), osod::validation_error);
}

TEST_CASE("top-k selects the highest-objectness negatives, ties by input order") {
  const auto space = support::make_space(1);
  const std::vector<osod::Proposal> props = {
      support::prop(1, support::box(0, 0, 10, 10), 0.5),
      support::prop(1, support::box(20, 0, 30, 10), 0.9),
      support::prop(1, support::box(40, 0, 50, 10), 0.9),
      support::prop(1, support::box(60, 0, 70, 10), 0.2),
  };
  const auto labels = osod::topk_hard_labels(props, {}, 2, space);
  CHECK(labels[0].unknown_mass() == 0.0);
  CHECK(labels[1].unknown_mass() == 1.0);
  CHECK(labels[2].unknown_mass() == 1.0);
  CHECK(labels[3].unknown_mass() == 0.0);
}

TEST_CASE("score histogram bins, closure and empty input") {
  const std::vector<double> edges = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const std::vector<double> scores = {0.1, 0.85, 0.9, 0.95, 1.0, 0.5};
  const auto h = osod::rpn_score_histogram(scores, edges);
  REQUIRE(h.fraction.size() == 5);
  CHECK_FALSE(h.empty_input);
  double sum = 0.0;
  for (double f : h.fraction) sum += f;
  CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
  // 4 of 6 scores sit in the closed top bin [0.8, 1.0]
  CHECK_THAT(h.fraction[4], WithinAbs(4.0 / 6.0, 1e-12));
  CHECK_THAT(h.fraction[0], WithinAbs(1.0 / 6.0, 1e-12));
  CHECK_THAT(h.fraction[2], WithinAbs(1.0 / 6.0, 1e-12));

  const auto empty = osod::rpn_score_histogram({}, edges);
  CHECK(empty.empty_input);
  CHECK_THROWS_AS(osod::rpn_score_histogram(scores, {0.5}), osod::validation_error);
  CHECK_THROWS_AS(osod::rpn_score_histogram(scores, {0.0, 0.0, 1.0}),
                  osod::validation_error);
}
