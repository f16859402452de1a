// Batch front end: evaluate / split / assign / postprocess / selfcheck.
// Exit codes: 0 success, 1 metric or invariant failure, 2 I/O or schema error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "osod/osod.hpp"
#include "../tests/oracles.hpp"

namespace fs = std::filesystem;
using osod::ordered_json;

namespace {

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw osod::io_error("cannot create output directory " + out + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_run_config(const std::string& out, const ordered_json& config) {
  ordered_json j;
  j["format_version"] = osod::kFormatVersion;
  j["config"] = config;
  osod::write_text_file(join_path(out, "run_config.json"), j.dump(2) + "\n");
}

// CSV artifacts carry the version and config echo as comment lines.
std::string csv_header(const ordered_json& config) {
  return "# format_version=" + std::string(osod::kFormatVersion) + "\n# config=" +
         config.dump() + "\n";
}

// Rewrite a COCO-style file with an info block carrying the run config.
void inject_info(const std::string& path, const ordered_json& config) {
  osod::json raw = osod::detail::parse_file(path);
  ordered_json j;
  j["info"] = ordered_json{{"format_version", osod::kFormatVersion}, {"config", config}};
  j["images"] = raw["images"];
  j["annotations"] = raw["annotations"];
  j["categories"] = raw["categories"];
  osod::write_text_file(path, j.dump() + "\n");
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string annotations, detections, space, out;
  double iou_thr = 0.5, wi_iou_thr = 0.8, wi_recall = 0.8;
  std::string ap_variant = "voc07", wi_variant = "per-class", aose_mode = "consume";
  std::size_t threads = 0;
  bool lenient = false;
  bool run_postprocess = false;
  double score_thr = 0.05, nms_thr = 0.5;
  std::size_t max_dets = 100;
};

int cmd_evaluate(const EvaluateArgs& a) {
  osod::MetricOptions mo;
  mo.iou_thr = a.iou_thr;
  mo.wi_iou_thr = a.wi_iou_thr;
  mo.wi_recall_level = a.wi_recall;
  mo.ap_variant = osod::ap_variant_from_string(a.ap_variant);
  mo.wi_variant = osod::wi_variant_from_string(a.wi_variant);
  mo.aose_mode = osod::aose_mode_from_string(a.aose_mode);
  mo.threads = a.threads;

  ordered_json config;
  config["subcommand"] = "evaluate";
  config["annotations"] = a.annotations;
  config["detections"] = a.detections;
  config["space"] = a.space;
  config["iou_thr"] = a.iou_thr;
  config["wi_iou_thr"] = a.wi_iou_thr;
  config["wi_recall"] = a.wi_recall;
  config["ap_variant"] = a.ap_variant;
  config["wi_variant"] = a.wi_variant;
  config["aose_mode"] = a.aose_mode;
  config["threads"] = a.threads;
  config["lenient"] = a.lenient;
  config["postprocess"] = ordered_json{{"enabled", a.run_postprocess},
                                       {"score_thr", a.score_thr},
                                       {"nms_thr", a.nms_thr},
                                       {"max_dets", a.max_dets}};

  const auto space = osod::load_category_space(a.space);
  osod::LoadOptions lo;
  lo.strict = !a.lenient;
  osod::LoadStats stats;
  const auto ds = osod::load_annotations(a.annotations, space, lo, &stats);
  auto dets = osod::load_detections(a.detections, space);
  if (a.run_postprocess) {
    osod::PostprocessOptions po;
    po.score_threshold = a.score_thr;
    po.nms_threshold = a.nms_thr;
    po.max_per_image = a.max_dets;
    dets = osod::postprocess(dets, space, po);
  }

  const auto rep = osod::evaluate_all(dets, ds, space, mo);

  ensure_out_dir(a.out);
  write_run_config(a.out, config);
  osod::write_text_file(join_path(a.out, "report.json"),
                        osod::report_to_json(rep, config).dump(2) + "\n");
  osod::write_text_file(join_path(a.out, "report.csv"),
                        csv_header(config) + osod::report_to_csv(rep));
  osod::write_text_file(join_path(a.out, "pr_curves.csv"),
                        csv_header(config) + osod::pr_curves_to_csv(rep));

  std::cout << osod::report_to_table(rep);
  if (a.lenient && (stats.dropped_bad_category || stats.dropped_missing_image)) {
    std::cout << "note: dropped " << stats.dropped_bad_category
              << " out-of-space and " << stats.dropped_missing_image
              << " dangling annotations\n";
  }
  std::cout << "wrote report.json, report.csv, pr_curves.csv to " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------------- split

struct SplitArgs {
  std::string mode;  // t1 | t2 | owod
  std::string known, open, pool, space, groups, out;
  std::string benchmark = "mixed";
  int level = 20;
  double multiplier = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

osod::CategorySpace space_from_groups(const std::vector<osod::SemanticGroup>& groups) {
  if (groups.empty()) throw osod::validation_error("group file defines no groups");
  std::set<int> unknown;
  for (std::size_t g = 1; g < groups.size(); ++g) {
    unknown.insert(groups[g].category_ids.begin(), groups[g].category_ids.end());
  }
  return osod::CategorySpace(groups[0].category_ids, unknown);
}

void write_split_outputs(const osod::SplitResult& result, const osod::CategorySpace& space,
                         const ordered_json& config, const std::string& out) {
  ensure_out_dir(out);
  write_run_config(out, config);
  const std::string data_path = join_path(out, "split.json");
  osod::save_annotations(result.data, space, data_path);
  inject_info(data_path, config);

  ordered_json m;
  m["format_version"] = osod::kFormatVersion;
  m["config"] = config;
  m["mode"] = result.manifest.mode;
  m["n"] = result.manifest.n;
  if (result.manifest.level) m["level"] = *result.manifest.level;
  if (result.manifest.multiplier) m["multiplier"] = *result.manifest.multiplier;
  m["seed"] = result.manifest.seed;
  m["image_ids"] = result.manifest.image_ids;
  osod::write_text_file(join_path(out, "manifest.json"), m.dump(2) + "\n");

  std::cout << "split: " << result.manifest.n << " known-source + "
            << result.manifest.image_ids.size() - result.manifest.n
            << " open-pool images, wilderness ratio "
            << osod::fixed2(osod::wilderness_ratio(result.manifest)) << "\n";
  std::cout << "wrote split.json, manifest.json to " << out << "\n";
}

int cmd_split(const SplitArgs& a) {
  ordered_json config;
  config["subcommand"] = "split";
  config["mode"] = a.mode;

  if (a.mode == "t1" || a.mode == "t2") {
    if (a.known.empty() || a.open.empty()) {
      throw osod::validation_error("split mode " + a.mode +
                                   " needs --known and --open annotation files");
    }
    if (a.n == 0) throw osod::validation_error("split needs --n >= 1");
    config["known"] = a.known;
    config["open"] = a.open;
    config["n"] = a.n;
    config["seed"] = a.seed;

    if (a.mode == "t1") {
      const auto groups = a.groups.empty() ? osod::default_benchmark_groups()
                                           : osod::load_groups(a.groups);
      config["groups"] = a.groups.empty() ? "<default>" : a.groups;
      config["level"] = a.level;
      const auto space = space_from_groups(groups);
      const auto known_ds = osod::load_annotations(a.known, space);
      const auto open_ds = osod::load_annotations(a.open, space);
      const auto result =
          osod::build_t1_split(known_ds, open_ds, groups, a.level, a.n, a.seed);
      write_split_outputs(result, space, config, a.out);
      return 0;
    }

    if (a.space.empty()) {
      throw osod::validation_error("split mode t2 needs --space");
    }
    config["space"] = a.space;
    config["multiplier"] = a.multiplier;
    const auto space = osod::load_category_space(a.space);
    const auto known_ds = osod::load_annotations(a.known, space);
    const auto open_ds = osod::load_annotations(a.open, space);
    const auto result =
        osod::build_t2_split(known_ds, open_ds, space, a.multiplier, a.n, a.seed);
    write_split_outputs(result, space, config, a.out);
    return 0;
  }

  if (a.mode == "owod") {
    if (a.pool.empty()) throw osod::validation_error("split mode owod needs --pool");
    config["pool"] = a.pool;
    std::vector<osod::SemanticGroup> groups;
    if (!a.groups.empty()) {
      groups = osod::load_groups(a.groups);
      config["groups"] = a.groups;
    } else if (a.benchmark == "mixed") {
      groups = osod::default_owod_groups(osod::OwodBenchmark::Mixed);
      config["benchmark"] = "mixed";
    } else if (a.benchmark == "superclass") {
      groups = osod::default_owod_groups(osod::OwodBenchmark::Superclass);
      config["benchmark"] = "superclass";
    } else {
      throw osod::validation_error("unknown benchmark \"" + a.benchmark +
                                   "\", expected mixed|superclass");
    }

    std::vector<int> all_ids;
    for (const auto& g : groups) {
      all_ids.insert(all_ids.end(), g.category_ids.begin(), g.category_ids.end());
    }
    const osod::CategorySpace pool_space(all_ids, {});
    const auto pool = osod::load_annotations(a.pool, pool_space);
    const auto tasks = osod::build_owod_tasks(pool, groups);

    ensure_out_dir(a.out);
    write_run_config(a.out, config);
    ordered_json summary;
    summary["format_version"] = osod::kFormatVersion;
    summary["config"] = config;
    summary["tasks"] = ordered_json::array();
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const osod::CategorySpace task_space(groups[t].category_ids, {});
      const std::string name = "task_" + std::to_string(t + 1) + ".json";
      const std::string path = join_path(a.out, name);
      osod::save_annotations(tasks[t], task_space, path);
      inject_info(path, config);
      summary["tasks"].push_back(
          ordered_json{{"index", t + 1},
                       {"name", groups[t].name},
                       {"file", name},
                       {"num_classes", groups[t].category_ids.size()},
                       {"num_images", tasks[t].images.size()},
                       {"num_annotations", tasks[t].annotations.size()}});
    }
    osod::write_text_file(join_path(a.out, "tasks.json"), summary.dump(2) + "\n");
    std::cout << "wrote " << tasks.size() << " task files to " << a.out << "\n";
    return 0;
  }

  throw osod::validation_error("unknown split mode \"" + a.mode + "\", expected t1|t2|owod");
}

// ------------------------------------------------------------------ assign

struct AssignArgs {
  std::string proposals, annotations, space, out;
  std::vector<std::string> strategies;  // soft-a..soft-f, topk
  std::vector<std::size_t> k_values;
  double positive_thr = 0.5;
  std::int64_t warmup_iterations = 1000;
  std::int64_t current_iteration = -1;
};

struct StrategyStats {
  std::string name, file;
  std::size_t rows = 0, positives = 0, negatives = 0, hard_unknown = 0;
  double mean_unknown_mass = 0.0;
  osod::HistogramResult histogram;
};

int cmd_assign(const AssignArgs& a) {
  std::vector<std::string> strategies = a.strategies;
  if (strategies.empty()) {
    strategies = {"soft-a", "soft-b", "soft-c", "soft-d", "soft-e", "soft-f"};
  }
  std::vector<std::size_t> ks = a.k_values;
  if (ks.empty()) ks = {1, 5, 10};

  ordered_json config;
  config["subcommand"] = "assign";
  config["proposals"] = a.proposals;
  config["annotations"] = a.annotations;
  config["space"] = a.space;
  config["strategies"] = strategies;
  config["k"] = ks;
  config["positive_thr"] = a.positive_thr;
  config["warmup_iterations"] = a.warmup_iterations;
  config["current_iteration"] = a.current_iteration;

  const auto space = osod::load_category_space(a.space);
  const auto ds = osod::load_annotations(a.annotations, space);
  const auto proposals = osod::load_proposals(a.proposals);

  std::unordered_set<osod::image_id_t> image_ids;
  for (const auto& im : ds.images) image_ids.insert(im.id);
  std::map<osod::image_id_t, std::vector<osod::Proposal>> by_image;
  for (const auto& p : proposals) {
    if (!image_ids.count(p.image_id)) {
      throw osod::validation_error("proposal references missing image " +
                                   std::to_string(p.image_id));
    }
    by_image[p.image_id].push_back(p);
  }
  std::unordered_map<osod::image_id_t, std::vector<osod::Annotation>> gt_by_image;
  for (const auto& ann : ds.annotations) gt_by_image[ann.image_id].push_back(ann);

  ensure_out_dir(a.out);
  write_run_config(a.out, config);

  // Run one labeling pass and collect per-strategy statistics.
  auto run_pass = [&](const std::string& name,
                      const std::function<std::vector<osod::LabelVector>(
                          const std::vector<osod::Proposal>&,
                          const std::vector<osod::Annotation>&)>& label_fn) {
    StrategyStats st;
    st.name = name;
    st.file = "labels_" + name + ".jsonl";
    std::vector<osod::LabelRecord> records;
    std::vector<double> negative_masses;
    for (const auto& [image_id, props] : by_image) {
      static const std::vector<osod::Annotation> kNoGt;
      auto it = gt_by_image.find(image_id);
      const auto& gt = it == gt_by_image.end() ? kNoGt : it->second;
      const auto labels = label_fn(props, gt);
      for (std::size_t i = 0; i < labels.size(); ++i) {
        osod::LabelRecord rec;
        rec.image_id = image_id;
        rec.proposal_index = i;
        rec.labels = labels[i].values;
        records.push_back(std::move(rec));

        double known_mass = 0.0;
        for (std::size_t s = 0; s < space.num_known(); ++s) known_mass += labels[i].values[s];
        if (known_mass > 0.0) {
          ++st.positives;
        } else {
          ++st.negatives;
          const double mass = labels[i].unknown_mass();
          negative_masses.push_back(mass);
          if (mass == 1.0) ++st.hard_unknown;
        }
      }
    }
    st.rows = records.size();
    if (!negative_masses.empty()) {
      double sum = 0.0;
      for (double m : negative_masses) sum += m;
      st.mean_unknown_mass = sum / static_cast<double>(negative_masses.size());
    }
    st.histogram = osod::rpn_score_histogram(
        negative_masses, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    osod::save_label_records(records, join_path(a.out, st.file));
    return st;
  };

  std::vector<StrategyStats> stats;
  for (const auto& strat : strategies) {
    if (strat.rfind("soft-", 0) == 0 && strat.size() == 6) {
      osod::AssignOptions opts;
      opts.combinator = osod::UncertaintyCombinator::from_name(strat[5]);
      opts.positive_threshold = a.positive_thr;
      opts.warmup_iterations = a.warmup_iterations;
      opts.current_iteration = a.current_iteration;
      stats.push_back(run_pass(strat, [&](const auto& props, const auto& gt) {
        return osod::assign_labels(props, gt, space, opts);
      }));
    } else if (strat == "topk") {
      for (std::size_t k : ks) {
        stats.push_back(run_pass("topk_" + std::to_string(k),
                                 [&](const auto& props, const auto& gt) {
                                   return osod::topk_hard_labels(props, gt, k, space,
                                                                 a.positive_thr);
                                 }));
      }
    } else {
      throw osod::validation_error("unknown strategy \"" + strat +
                                   "\", expected soft-a..soft-f or topk");
    }
  }

  ordered_json summary;
  summary["format_version"] = osod::kFormatVersion;
  summary["config"] = config;
  summary["num_images"] = by_image.size();
  summary["num_proposals"] = proposals.size();
  summary["strategies"] = ordered_json::array();
  for (const auto& st : stats) {
    ordered_json h;
    h["bin_lo"] = st.histogram.bin_lo;
    h["bin_hi"] = st.histogram.bin_hi;
    ordered_json fractions = ordered_json::array();
    for (double f : st.histogram.fraction) fractions.push_back(osod::round6(f));
    h["fraction"] = fractions;
    h["empty_input"] = st.histogram.empty_input;
    summary["strategies"].push_back(
        ordered_json{{"name", st.name},
                     {"file", st.file},
                     {"rows", st.rows},
                     {"positives", st.positives},
                     {"negatives", st.negatives},
                     {"hard_unknown", st.hard_unknown},
                     {"mean_unknown_mass", osod::round6(st.mean_unknown_mass)},
                     {"unknown_mass_histogram", h}});
  }
  osod::write_text_file(join_path(a.out, "summary.json"), summary.dump(2) + "\n");

  std::cout << "assigned " << proposals.size() << " proposals across " << by_image.size()
            << " images, " << stats.size() << " label dumps\n";
  std::cout << "wrote summary.json to " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------- postprocess

struct PostprocessArgs {
  std::string detections, space, out;
  double score_thr = 0.05, nms_thr = 0.5;
  std::size_t max_dets = 100;
};

int cmd_postprocess(const PostprocessArgs& a) {
  ordered_json config;
  config["subcommand"] = "postprocess";
  config["detections"] = a.detections;
  config["space"] = a.space;
  config["score_thr"] = a.score_thr;
  config["nms_thr"] = a.nms_thr;
  config["max_dets"] = a.max_dets;

  const auto space = osod::load_category_space(a.space);
  const auto dets = osod::load_detections(a.detections, space);
  osod::PostprocessOptions po;
  po.score_threshold = a.score_thr;
  po.nms_threshold = a.nms_thr;
  po.max_per_image = a.max_dets;
  const auto kept = osod::postprocess(dets, space, po);

  ensure_out_dir(a.out);
  write_run_config(a.out, config);
  osod::save_detections(kept, space, join_path(a.out, "postprocessed.json"));

  std::cout << "kept " << kept.size() << " of " << dets.size() << " detections\n";
  std::cout << "wrote postprocessed.json to " << a.out << "\n";
  return 0;
}

// --------------------------------------------------------------- selfcheck

struct CheckReporter {
  int failures = 0;

  void pass(const std::string& name) { std::cout << "[ok]   " << name << "\n"; }
  void fail(const std::string& name, const std::string& detail) {
    ++failures;
    std::cout << "[FAIL] " << name << ": " << detail << "\n";
  }
  void check(bool ok, const std::string& name, const std::string& detail) {
    ok ? pass(name) : fail(name, detail);
  }
};

int cmd_selfcheck() {
  CheckReporter rep;
  std::mt19937_64 rng(20240817);

  {
    std::uniform_int_distribution<int> coord(0, 64);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      int ax0 = coord(rng), ay0 = coord(rng), ax1 = coord(rng), ay1 = coord(rng);
      int bx0 = coord(rng), by0 = coord(rng), bx1 = coord(rng), by1 = coord(rng);
      if (ax0 > ax1) std::swap(ax0, ax1);
      if (ay0 > ay1) std::swap(ay0, ay1);
      if (bx0 > bx1) std::swap(bx0, bx1);
      if (by0 > by1) std::swap(by0, by1);
      const osod::BBox a{double(ax0), double(ay0), double(ax1), double(ay1)};
      const osod::BBox b{double(bx0), double(by0), double(bx1), double(by1)};
      const double expected = oracle::grid_iou(ax0, ay0, ax1, ay1, bx0, by0, bx1, by1, 64);
      worst = std::max(worst, std::abs(osod::iou(a, b) - expected));
    }
    rep.check(worst <= 1e-9, "iou matches grid-rasterization oracle",
              "max abs error " + std::to_string(worst));
  }

  {
    const osod::CategorySpace space({1, 2}, {});
    bool ok = true;
    std::string detail;
    for (const auto& comb : osod::UncertaintyCombinator::all()) {
      for (int oi = 0; oi <= 20 && ok; ++oi) {
        for (int ui = 0; ui <= 20 && ok; ++ui) {
          const double o = oi / 20.0, u = ui / 20.0;
          const auto label = osod::soft_label(o, u, comb, space);
          const double expected = oracle::soft_unknown_mass(comb.name, o, u);
          if (std::abs(label.unknown_mass() - expected) > 1e-12 ||
              std::abs(label.sum() - 1.0) > 1e-12) {
            ok = false;
            detail = std::string("combinator ") + comb.name + " at o=" +
                     std::to_string(o) + " u=" + std::to_string(u);
          }
        }
      }
    }
    rep.check(ok, "soft labels match longhand combinators and sum to one", detail);
  }

  {
    const osod::CategorySpace space({1, 2}, {});
    const auto e = osod::UncertaintyCombinator::from_name('e');
    const double point = osod::soft_label(0.8, 0.25, e, space).unknown_mass();
    rep.check(std::abs(point - 0.6) <= 1e-12 &&
                  osod::soft_label(1.0, 0.0, e, space).unknown_mass() == 1.0 &&
                  osod::soft_label(0.0, 0.7, e, space).unknown_mass() == 0.0,
              "soft-label point and boundary values", "got " + std::to_string(point));
  }

  {
    std::uniform_real_distribution<double> logit(-3.0, 3.0);
    std::uniform_real_distribution<double> mass(0.0, 1.0);
    double worst_exact = 0.0, worst_fd = 0.0;
    for (int i = 0; i < 20; ++i) {
      std::vector<double> logits(6), q(6);
      double qsum = 0.0;
      for (int j = 0; j < 6; ++j) {
        logits[j] = logit(rng);
        q[j] = mass(rng);
        qsum += q[j];
      }
      for (auto& v : q) v /= qsum;
      const auto analytic = osod::softmax_xent_gradient(logits, q);
      const auto p = osod::softmax(logits);
      for (int j = 0; j < 6; ++j) {
        worst_exact = std::max(worst_exact, std::abs(analytic[j] - (p[j] - q[j])));
      }
      auto loss = [&](const std::vector<double>& x) {
        return osod::soft_cross_entropy(osod::softmax(x), q);
      };
      const auto numeric = oracle::fd_gradient(loss, logits, 1e-6);
      for (int j = 0; j < 6; ++j) {
        const double denom = std::max({std::abs(analytic[j]), std::abs(numeric[j]), 1e-8});
        worst_fd = std::max(worst_fd, std::abs(analytic[j] - numeric[j]) / denom);
      }
    }
    rep.check(worst_exact <= 1e-12 && worst_fd < 1e-4,
              "softmax cross-entropy gradient (analytic + finite differences)",
              "exact " + std::to_string(worst_exact) + ", fd " + std::to_string(worst_fd));
  }

  {
    bool ok = true;
    std::string detail;
    std::uniform_int_distribution<int> det_count(1, 8), gt_count(1, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 50 && ok; ++i) {
      const int m = det_count(rng);
      const std::size_t num_gt = static_cast<std::size_t>(gt_count(rng));
      osod::MatchTally tally;
      tally.num_gt = num_gt;
      std::set<double> seen;
      std::size_t tp_budget = num_gt;
      std::vector<oracle::SweepRow> rows;
      for (int d = 0; d < m; ++d) {
        double s = unit(rng);
        while (!seen.insert(s).second) s = unit(rng);
        const bool is_tp = tp_budget > 0 && unit(rng) < 0.5;
        if (is_tp) --tp_budget;
        rows.push_back({s, is_tp});
      }
      std::sort(rows.begin(), rows.end(),
                [](const auto& x, const auto& y) { return x.score > y.score; });
      for (std::size_t r = 0; r < rows.size(); ++r) {
        tally.rows.push_back({r, rows[r].score,
                              rows[r].is_tp ? osod::Disposition::TruePositive
                                            : osod::Disposition::FalsePositiveKnown,
                              false});
      }
      const auto curve = osod::pr_curve(tally);
      const double lib07 = osod::average_precision(curve, osod::ApVariant::Voc07);
      const double libarea = osod::average_precision(curve, osod::ApVariant::AllPoint);
      if (lib07 != oracle::sweep_ap_voc07(rows, num_gt) ||
          libarea != oracle::sweep_ap_area(rows, num_gt)) {
        ok = false;
        detail = "average_precision diverges from threshold sweep at instance " +
                 std::to_string(i);
      }
    }
    rep.check(ok, "average_precision equals exhaustive threshold-sweep oracle", detail);
  }

  {
    bool ok = true;
    std::string detail;
    for (std::size_t tp = 1; tp <= 6 && ok; ++tp) {
      for (std::size_t fpk = 0; fpk <= 5 && ok; ++fpk) {
        for (std::size_t fpu = 0; fpu <= 5 && ok; ++fpu) {
          const double precision_form = oracle::wi_precision_form(tp, fpk, fpu);
          const double count_form = oracle::wi_count_form(tp, fpk, fpu);
          const osod::WiPrefix prefix{tp, fpk, fpu, true};
          const double lib = osod::wi_from_prefix(prefix);
          if (std::abs(precision_form - count_form) > 1e-9 ||
              std::abs(lib - count_form) > 1e-9 || (fpu == 0 && lib != 0.0)) {
            ok = false;
            detail = "tp=" + std::to_string(tp) + " fpk=" + std::to_string(fpk) +
                     " fpu=" + std::to_string(fpu);
          }
        }
      }
    }
    rep.check(ok, "wilderness-impact dual forms agree", detail);
  }

  {
    bool ok = true;
    std::string detail;
    for (double beta : {0.25, 1.0, 3.0}) {
      const double eps = 1e-7;
      const double jump_value =
          std::abs(osod::smooth_l1_scalar(beta + eps, beta) -
                   osod::smooth_l1_scalar(beta - eps, beta));
      const double jump_grad =
          std::abs(osod::smooth_l1_scalar_gradient(beta + eps, beta) -
                   osod::smooth_l1_scalar_gradient(beta - eps, beta));
      if (jump_value > 1e-6 || jump_grad > 1e-6) {
        ok = false;
        detail = "discontinuity at beta=" + std::to_string(beta);
      }
    }
    rep.check(ok, "smooth-L1 is C1 across the knee", detail);
  }

  if (rep.failures > 0) {
    throw osod::metric_error("self-check failed: " + std::to_string(rep.failures) +
                             " check(s) violated");
  }
  std::cout << "all self-checks passed\n";
  return 0;
}

int fail_with_json(const char* type, const std::string& message, int code) {
  ordered_json j;
  j["error"] = ordered_json{{"type", type}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic toolkit for uncertainty-aware open-set detection"};
  app.set_version_flag("--version", osod::kVersion);
  app.require_subcommand(1);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "run open-set metrics over detections");
  evaluate->add_option("--annotations", ev.annotations, "COCO-style GT file")->required();
  evaluate->add_option("--detections", ev.detections, "COCO-results detections file")->required();
  evaluate->add_option("--space", ev.space, "category-space config")->required();
  evaluate->add_option("--out", ev.out, "output directory")->required();
  evaluate->add_option("--iou-thr", ev.iou_thr, "match IoU for AP/AOSE (default 0.5)");
  evaluate->add_option("--wi-iou-thr", ev.wi_iou_thr, "match IoU for WI (default 0.8)");
  evaluate->add_option("--wi-recall", ev.wi_recall, "WI operating recall (default 0.8)");
  evaluate->add_option("--ap-variant", ev.ap_variant, "voc07|area");
  evaluate->add_option("--wi-variant", ev.wi_variant, "per-class|pooled");
  evaluate->add_option("--aose-mode", ev.aose_mode, "consume|raw");
  evaluate->add_option("--threads", ev.threads, "worker threads (0 = auto)");
  evaluate->add_flag("--lenient", ev.lenient, "drop bad annotations instead of failing");
  evaluate->add_flag("--postprocess", ev.run_postprocess, "filter detections first");
  evaluate->add_option("--score-thr", ev.score_thr, "postprocess score floor");
  evaluate->add_option("--nms-thr", ev.nms_thr, "postprocess NMS IoU");
  evaluate->add_option("--max-dets", ev.max_dets, "postprocess per-image cap");

  SplitArgs sp;
  auto* split = app.add_subcommand("split", "build benchmark splits");
  split->add_option("--mode", sp.mode, "t1|t2|owod")->required();
  split->add_option("--known", sp.known, "known-source annotation file");
  split->add_option("--open", sp.open, "open-pool annotation file");
  split->add_option("--pool", sp.pool, "owod source annotation file");
  split->add_option("--space", sp.space, "category-space config (t2)");
  split->add_option("--groups", sp.groups, "semantic-group file (optional)");
  split->add_option("--benchmark", sp.benchmark, "owod grouping: mixed|superclass");
  split->add_option("--level", sp.level, "t1 open-class count: 20|40|60");
  split->add_option("--multiplier", sp.multiplier, "t2 wilderness multiplier: 0.5|1|2|4");
  split->add_option("--n", sp.n, "known-source image count");
  split->add_option("--seed", sp.seed, "sampling seed");
  split->add_option("--out", sp.out, "output directory")->required();

  AssignArgs as;
  auto* assign = app.add_subcommand("assign", "label proposals against GT");
  assign->add_option("--proposals", as.proposals, "proposal JSONL file")->required();
  assign->add_option("--annotations", as.annotations, "COCO-style GT file")->required();
  assign->add_option("--space", as.space, "category-space config")->required();
  assign->add_option("--out", as.out, "output directory")->required();
  assign->add_option("--strategy", as.strategies, "soft-a..soft-f and/or topk (repeatable)");
  assign->add_option("--k", as.k_values, "top-k sizes for the topk strategy (repeatable)");
  assign->add_option("--positive-thr", as.positive_thr, "positive IoU threshold");
  assign->add_option("--warmup-iterations", as.warmup_iterations, "soft-label warmup gate");
  assign->add_option("--current-iteration", as.current_iteration,
                     "training iteration (-1 disables the gate)");

  PostprocessArgs pp;
  auto* post = app.add_subcommand("postprocess", "filter raw detections");
  post->add_option("--detections", pp.detections, "COCO-results detections file")->required();
  post->add_option("--space", pp.space, "category-space config")->required();
  post->add_option("--out", pp.out, "output directory")->required();
  post->add_option("--score-thr", pp.score_thr, "score floor (default 0.05)");
  post->add_option("--nms-thr", pp.nms_thr, "NMS IoU threshold (default 0.5)");
  post->add_option("--max-dets", pp.max_dets, "per-image cap (default 100)");

  auto* selfcheck = app.add_subcommand("selfcheck", "run embedded oracle comparisons");

  try {
    app.parse(argc, argv);
    if (*evaluate) return cmd_evaluate(ev);
    if (*split) return cmd_split(sp);
    if (*assign) return cmd_assign(as);
    if (*post) return cmd_postprocess(pp);
    if (*selfcheck) return cmd_selfcheck();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const osod::io_error& e) {
    return fail_with_json("io_error", e.what(), 2);
  } catch (const osod::validation_error& e) {
    return fail_with_json("validation_error", e.what(), 2);
  } catch (const osod::capacity_error& e) {
    return fail_with_json("capacity_error", e.what(), 1);
  } catch (const osod::metric_error& e) {
    return fail_with_json("metric_error", e.what(), 1);
  } catch (const std::exception& e) {
    return fail_with_json("internal_error", e.what(), 1);
  }
  return 0;
}
