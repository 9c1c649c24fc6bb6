#include "costlens/cli.hpp"

#include "costlens/costspace.hpp"
#include "costlens/dataset.hpp"
#include "costlens/decision.hpp"
#include "costlens/error.hpp"
#include "costlens/evaluation.hpp"
#include "costlens/fields.hpp"
#include "costlens/geography.hpp"
#include "costlens/image_io.hpp"
#include "costlens/report.hpp"
#include "costlens/service.hpp"
#include "costlens/sweep.hpp"
#include "costlens/synth.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>

namespace costlens::cli {

namespace {

namespace fs = std::filesystem;

Json read_json(const fs::path& path) {
  const Bytes bytes = read_file(path);
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_atomically(path, Bytes(text.begin(), text.end()));
}

void write_json(const fs::path& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

ClassCatalog load_catalog(const std::string& path) {
  return path.empty() ? builtin_cityscapes_catalog() : catalog_from_json(read_json(path));
}

std::vector<double> parse_numbers(const std::string& text, std::size_t expected,
                                  const char* what) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                           : comma - start);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError(std::string("cannot parse ") + what + " '" + text + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.size() != expected)
    throw UsageError(std::string(what) + " needs " + std::to_string(expected) + " values");
  return values;
}

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t a = 0, b = 0;
    const int h = std::stoi(text.substr(0, x), &a);
    const int w = std::stoi(text.substr(x + 1), &b);
    if (a != x || b != text.size() - x - 1) throw std::invalid_argument(text);
    return {h, w};
  } catch (const std::logic_error&) {
    throw UsageError("size must look like HxW, got '" + text + "'");
  }
}

std::vector<int> parse_region_ids(const std::string& text, int region_count) {
  std::vector<int> ids;
  if (text == "all") {
    for (int id = 0; id <= region_count; ++id) ids.push_back(id);
    return ids;
  }
  for (double v : parse_numbers(text, std::count(text.begin(), text.end(), ',') + 1, "RoI ids")) {
    const int id = static_cast<int>(v);
    if (id != v || id < 0 || id > region_count)
      throw ValidationError("RoI id must lie in 0.." + std::to_string(region_count));
    ids.push_back(id);
  }
  return ids;
}

// Either one corner JSON file or three comma-separated entries, each a
// builtin name or a cost matrix file, in robotistic,altruistic,egoistic order.
CornerSet load_corners(const std::string& spec, const ClassCatalog& catalog, double epsilon,
                       double sky_cost) {
  if (spec.empty()) return CornerSet::builtin(catalog, epsilon, sky_cost);
  if (spec.find(',') == std::string::npos)
    return corners_from_json(read_json(spec), catalog, epsilon, sky_cost);
  static constexpr const char* kNames[3] = {"robotistic", "altruistic", "egoistic"};
  std::vector<std::string> parts;
  std::stringstream in(spec);
  for (std::string item; std::getline(in, item, ',');) parts.push_back(item);
  if (parts.size() != 3) throw UsageError("--corners needs three comma-separated entries");
  Json doc = Json::object();
  for (int i = 0; i < 3; ++i)
    doc[kNames[i]] = is_builtin_matrix_name(parts[i]) ? Json(parts[i]) : read_json(parts[i]);
  return corners_from_json(doc, catalog, epsilon, sky_cost);
}

int max_region(const RoiMap& roi) { return roi.size() ? static_cast<int>(roi.maxCoeff()) : 0; }

// --- decide ----------------------------------------------------------------

struct DecideArgs {
  std::string probs, out, cost, bary, corners, rule, priors, catalog, report;
  double epsilon = kDefaultEpsilon;
  double sky_cost = kDefaultSkyCost;
};

void run_decide(const DecideArgs& a, std::ostream&) {
  const int sources = !a.cost.empty() + !a.bary.empty() + !a.rule.empty();
  if (sources > 1 || (!a.corners.empty() && a.bary.empty()))
    throw UsageError("conflicting cost sources");
  if (sources == 0) throw UsageError("no cost source: give --cost, --bary or --rule");
  if (!a.priors.empty() && a.rule != "ml") throw UsageError("--priors only applies to --rule ml");

  const ClassCatalog catalog = load_catalog(a.catalog);
  const ProbabilityField field = load_probability_field(a.probs);
  if (field.num_classes() != catalog.size())
    throw ValidationError("probability field has " + std::to_string(field.num_classes()) +
                          " classes, catalog has " + std::to_string(catalog.size()));

  Json meta{{"command", "decide"}, {"probs", a.probs}};
  Mask mask;
  if (!a.rule.empty()) {
    if (a.rule == "bayes") {
      mask = decide_bayes(field);
    } else if (a.rule == "ml") {
      if (a.priors.empty()) throw UsageError("--rule ml needs --priors");
      mask = decide_ml(field, priors_from_json(read_json(a.priors)));
      meta["priors"] = a.priors;
    } else {
      throw UsageError("unknown rule '" + a.rule + "' (bayes|ml)");
    }
    meta["rule"] = a.rule;
  } else {
    CostMatrixd cost;
    if (!a.cost.empty()) {
      cost = is_builtin_matrix_name(a.cost)
                 ? expand_aggregate_matrix(builtin_matrix(a.cost), catalog, a.epsilon, a.sky_cost)
                 : resolve_cost_document(cost_document_from_json(read_json(a.cost)), catalog,
                                         a.epsilon, a.sky_cost);
      meta["cost"] = a.cost;
    } else {
      const auto w = parse_numbers(a.bary, 3, "barycentric point");
      const BarycentricPoint point(w[0], w[1], w[2]);
      const CornerSet corners = load_corners(a.corners, catalog, a.epsilon, a.sky_cost);
      cost = corners.at(point);
      meta["bary"] = {w[0], w[1], w[2]};
      if (!a.corners.empty()) meta["corners"] = a.corners;
    }
    meta["epsilon"] = a.epsilon;
    meta["sky_cost"] = a.sky_cost;
    mask = decide(field, cost);
  }

  save_mask(mask, a.out, catalog.size());
  if (!a.report.empty()) {
    Json histogram = Json::object();
    for (int k = 0; k < catalog.size(); ++k) {
      const auto n = (mask.array() == k).count();
      if (n) histogram[catalog.name(k)] = n;
    }
    meta["height"] = field.height();
    meta["width"] = field.width();
    meta["pixels_per_class"] = std::move(histogram);
    write_json(a.report, meta);
  }
}

// --- metrics ---------------------------------------------------------------

struct MetricsArgs {
  std::string pred, gt, roi, roi_ids = "all", classes = "all", catalog, out;
};

void run_metrics(const MetricsArgs& a, std::ostream& out) {
  const ClassCatalog catalog = load_catalog(a.catalog);
  const LabelField gt = load_label_field(a.gt, catalog);
  const Mask pred = load_mask(a.pred, catalog.size());
  std::optional<RoiMap> roi;
  if (!a.roi.empty()) roi = load_roi_map(a.roi);
  const int region_count = roi ? max_region(*roi) : 0;
  const auto classes = parse_class_list(a.classes, catalog);
  const auto regions = parse_region_ids(a.roi_ids, region_count);

  Json report = metrics_report(pred, gt, catalog, classes, regions, roi ? &*roi : nullptr,
                               region_count);
  Json meta{{"pred", a.pred}, {"gt", a.gt}, {"ignore_label", catalog.ignore_label()}};
  if (roi) meta["roi"] = a.roi;
  meta["region_count"] = region_count;
  meta["regions"] = Json::array();
  for (int id : regions) meta["regions"].push_back(region_key(id));
  try {
    meta["mean_iou"] = mean_iou(pred, gt, catalog);
  } catch (const ValidationError&) {
    meta["mean_iou"] = nullptr;
  }
  report["_meta"] = std::move(meta);
  if (a.out.empty())
    out << report.dump(2) << "\n";
  else
    write_json(a.out, report);
}

// --- priors / roi ----------------------------------------------------------

struct PriorsArgs {
  std::string labels, out, frequencies, catalog;
};

void run_priors(const PriorsArgs& a, std::ostream&) {
  const ClassCatalog catalog = load_catalog(a.catalog);
  const auto labels = load_label_directory(a.labels, catalog);
  if (a.out.empty() && a.frequencies.empty())
    throw UsageError("nothing to write: give --out and/or --frequencies");
  // Compute everything before writing anything.
  std::optional<PriorField> field;
  if (!a.out.empty()) field = prior_field(labels, catalog);
  std::optional<PriorVector> freq;
  if (!a.frequencies.empty()) freq = class_frequencies(labels, catalog);
  if (field) save_prior_field(*field, a.out);
  if (freq) {
    Json doc = to_json(*freq);
    doc["classes"] = catalog.class_names();
    doc["label_maps"] = labels.size();
    write_json(a.frequencies, doc);
  }
}

struct RoiArgs {
  std::string priors, out, classes, report, catalog;
};

void run_roi(const RoiArgs& a, std::ostream& out) {
  const ClassCatalog catalog = load_catalog(a.catalog);
  const PriorField priors = load_prior_field(a.priors);
  if (priors.num_classes() != catalog.size())
    throw ValidationError("prior field class count differs from the catalog");
  const auto classes =
      a.classes.empty() ? default_roi_classes(catalog) : parse_class_list(a.classes, catalog);
  const RoiDerivation roi = derive_roi(priors, classes);
  Json doc{{"priors", a.priors}, {"region_count", roi.region_count}};
  doc["regions"] = Json::array();
  for (std::size_t i = 0; i < classes.size(); ++i)
    doc["regions"].push_back({{"id", i + 1}, {"class", catalog.name(classes[i])}});
  doc["degenerate_pixels"] = roi.degenerate_pixels.size();
  write_gray8(roi.roi, a.out);
  if (!a.report.empty()) write_json(a.report, doc);
  if (!roi.degenerate_pixels.empty())
    out << "warning: " << roi.degenerate_pixels.size()
        << " pixels have zero prior for every RoI class\n";
}

// --- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string dataset, corners, metric = "recall", klass = "person", roi = "all", roi_map;
  std::string step = "0.05", out, render, render_size = "300x346";
  double epsilon = kDefaultEpsilon;
  double sky_cost = kDefaultSkyCost;
};

void run_sweep(const SweepArgs& a, std::ostream&) {
  if (a.out.empty() && a.render.empty()) throw UsageError("give --out and/or --render");
  const Dataset ds = load_dataset(a.dataset);
  const Metric metric = parse_metric(a.metric);
  const int k = parse_class_list(a.klass, ds.catalog).front();
  const int n = divisions_from_step(a.step);
  const CornerSet corners = load_corners(a.corners, ds.catalog, a.epsilon, a.sky_cost);
  std::optional<RoiMap> roi;
  int region_count = 0;
  std::optional<RoiSelection> selection;
  if (a.roi != "all") {
    if (!a.roi_map.empty()) {
      roi = load_roi_map(a.roi_map);
      region_count = max_region(*roi);
    } else if (auto derived = derive_dataset_roi(ds)) {
      roi = std::move(derived->roi);
      region_count = derived->region_count;
    } else {
      throw ValidationError("scenes differ in shape; pass --roi-map");
    }
    const auto ids = parse_region_ids(a.roi, region_count);
    if (ids.size() != 1 || ids[0] == 0) throw UsageError("--roi takes one RoI id or 'all'");
    selection = RoiSelection{&*roi, ids[0], region_count};
  }
  const auto [h, w] = parse_size(a.render_size);
  const MetricSurface surface = evaluate_surface(ds.scenes, corners, simplex_grid(n), metric, k,
                                                 ds.catalog.ignore_label(), selection);
  std::optional<RgbImage> image;
  if (!a.render.empty()) image = render_heatmap(surface, w, h);
  if (!a.out.empty()) write_text(a.out, surface_csv(surface));
  if (image) write_rgb(*image, a.render);
}

// --- gen -------------------------------------------------------------------

struct GenArgs {
  std::uint64_t seed = 42;
  int count = 20;
  std::string size = "128x256", out;
  double noise = 0.3;
  int blur = 3;
};

void run_gen(const GenArgs& a, std::ostream& out) {
  const auto [h, w] = parse_size(a.size);
  const ClassCatalog catalog = builtin_cityscapes_catalog();
  const auto scenes = generate_suite(a.count, a.seed, h, w, a.noise, catalog, a.blur);
  const Json generator{{"seed", a.seed}, {"count", a.count}, {"height", h},
                       {"width", w},     {"noise", a.noise}, {"blur_radius", a.blur}};
  write_dataset(a.out, scenes, catalog, generator);
  out << "wrote " << scenes.size() << " scenes to " << a.out << "\n";
}

// --- report ----------------------------------------------------------------

struct ReportArgs {
  std::string dataset, roi_map, classes = "person,building", rois = "1,2", out;
};

void run_report(const ReportArgs& a, std::ostream& out) {
  const Dataset ds = load_dataset(a.dataset);
  RoiMap roi;
  int region_count = 0;
  if (!a.roi_map.empty()) {
    roi = load_roi_map(a.roi_map);
    region_count = max_region(roi);
  } else if (auto derived = derive_dataset_roi(ds)) {
    roi = std::move(derived->roi);
    region_count = derived->region_count;
  } else {
    throw ValidationError("scenes differ in shape; pass --roi-map");
  }
  const auto classes = parse_class_list(a.classes, ds.catalog);
  const auto regions = parse_region_ids(a.rois, region_count);
  static constexpr const char* kMatrices[3] = {"altruistic", "robotistic", "egoistic"};

  Json rows = Json::array();
  for (int k : classes) {
    for (int id : regions) {
      for (const char* name : kMatrices) {
        const CostMatrixd cost = expand_aggregate_matrix(builtin_matrix(name), ds.catalog);
        std::optional<RoiSelection> sel;
        if (id > 0) sel = RoiSelection{&roi, id, region_count};
        const PixelCounts c = pooled_counts(ds.scenes, cost, k, ds.catalog.ignore_label(), sel);
        const auto p = precision(c), r = recall(c);
        rows.push_back({{"matrix", name},
                        {"class", ds.catalog.name(k)},
                        {"roi", region_key(id)},
                        {"precision", p ? Json(*p) : Json(nullptr)},
                        {"recall", r ? Json(*r) : Json(nullptr)},
                        {"tp", c.tp},
                        {"fp", c.fp},
                        {"fn", c.fn}});
      }
    }
  }
  const Json doc{{"dataset", a.dataset}, {"scenes", ds.scenes.size()}, {"rows", rows}};
  if (a.out.empty()) {
    auto pct = [](const Json& v) {
      if (v.is_null()) return std::string("    n/a");
      char buf[32];
      std::snprintf(buf, sizeof buf, "%7.2f%%", v.get<double>() * 100.0);
      return std::string(buf);
    };
    char line[160];
    out << "matrix      class      roi  precision   recall\n";
    for (const auto& row : rows) {
      std::snprintf(line, sizeof line, "%-11s %-10s %-4s %s %s\n",
                    row["matrix"].get<std::string>().c_str(),
                    row["class"].get<std::string>().c_str(), row["roi"].get<std::string>().c_str(),
                    pct(row["precision"]).c_str(), pct(row["recall"]).c_str());
      out << line;
    }
  } else {
    write_json(a.out, doc);
  }
}

// --- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string dataset, host = "127.0.0.1", static_dir;
  int port = 8080;
};

void run_serve(const ServeArgs& a, std::ostream& out) {
  std::optional<fs::path> static_dir;
  if (!a.static_dir.empty()) static_dir = a.static_dir;
  serve(a.dataset, a.host, a.port, static_dir, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cost-based decision rules for segmentation probability fields", "costlens"};
  app.set_version_flag("--version",
                       std::string(R"({"name":"costlens","version":")") + kVersion + "\"}");
  app.require_subcommand(1);
  std::function<void()> action;

  DecideArgs d;
  auto* decide_cmd = app.add_subcommand("decide", "Per-pixel minimum expected cost decision");
  decide_cmd->add_option("--probs", d.probs, "Probability field (.spf)")->required();
  decide_cmd->add_option("--out", d.out, "Output mask (.png or .pgm)")->required();
  decide_cmd->add_option("--cost", d.cost, "Builtin matrix name or cost matrix JSON");
  decide_cmd->add_option("--bary", d.bary, "Barycentric point alpha,beta,gamma");
  decide_cmd->add_option("--corners", d.corners, "Corners for --bary: JSON file or three names/files");
  decide_cmd->add_option("--rule", d.rule, "bayes | ml");
  decide_cmd->add_option("--priors", d.priors, "Class priors JSON for --rule ml");
  decide_cmd->add_option("--epsilon", d.epsilon, "Intra-aggregate cost")->capture_default_str();
  decide_cmd->add_option("--sky-cost", d.sky_cost, "Sky row cost")->capture_default_str();
  decide_cmd->add_option("--catalog", d.catalog, "Class catalog JSON (default: Cityscapes)");
  decide_cmd->add_option("--report", d.report, "Write run metadata JSON");
  decide_cmd->callback([&] { action = [&] { run_decide(d, out); }; });

  MetricsArgs m;
  auto* metrics_cmd = app.add_subcommand("metrics", "Precision, recall and segment errors");
  metrics_cmd->add_option("--pred", m.pred, "Predicted mask")->required();
  metrics_cmd->add_option("--gt", m.gt, "Ground-truth labels")->required();
  metrics_cmd->add_option("--roi", m.roi, "RoI map (ids >= 1)");
  metrics_cmd->add_option("--roi-id", m.roi_ids, "Comma-separated RoI ids, 0 = full frame, or all")
      ->capture_default_str();
  metrics_cmd->add_option("--classes", m.classes, "Comma-separated classes or all")
      ->capture_default_str();
  metrics_cmd->add_option("--catalog", m.catalog, "Class catalog JSON");
  metrics_cmd->add_option("--out", m.out, "Output JSON (default: stdout)");
  metrics_cmd->callback([&] { action = [&] { run_metrics(m, out); }; });

  PriorsArgs p;
  auto* priors_cmd = app.add_subcommand("priors", "Pixel-wise and global class priors");
  priors_cmd->add_option("--labels", p.labels, "Label directory or dataset")->required();
  priors_cmd->add_option("--out", p.out, "Prior field (.spf)");
  priors_cmd->add_option("--frequencies", p.frequencies, "Global class frequencies JSON");
  priors_cmd->add_option("--catalog", p.catalog, "Class catalog JSON");
  priors_cmd->callback([&] { action = [&] { run_priors(p, out); }; });

  RoiArgs r;
  auto* roi_cmd = app.add_subcommand("roi", "Regions of interest from a prior field");
  roi_cmd->add_option("--priors", r.priors, "Prior field (.spf)")->required();
  roi_cmd->add_option("--out", r.out, "RoI map (.png or .pgm)")->required();
  roi_cmd->add_option("--classes", r.classes, "RoI classes (default road,sidewalk,building,sky)");
  roi_cmd->add_option("--report", r.report, "Write region legend JSON");
  roi_cmd->add_option("--catalog", r.catalog, "Class catalog JSON");
  roi_cmd->callback([&] { action = [&] { run_roi(r, out); }; });

  SweepArgs s;
  auto* sweep_cmd = app.add_subcommand("sweep", "Metric surface over the corner triangle");
  sweep_cmd->add_option("--dataset", s.dataset, "Dataset directory")->required();
  sweep_cmd->add_option("--corners", s.corners, "Corners: JSON file or three names/files (default: builtin)");
  sweep_cmd->add_option("--metric", s.metric, "recall | precision")->capture_default_str();
  sweep_cmd->add_option("--class", s.klass, "Class name or index")->capture_default_str();
  sweep_cmd->add_option("--roi", s.roi, "RoI id or all")->capture_default_str();
  sweep_cmd->add_option("--roi-map", s.roi_map, "RoI map (default: derived from the dataset)");
  sweep_cmd->add_option("--step", s.step, "Grid step 1/n")->capture_default_str();
  sweep_cmd->add_option("--out", s.out, "Surface CSV");
  sweep_cmd->add_option("--render", s.render, "Heatmap image (.png or .ppm)");
  sweep_cmd->add_option("--render-size", s.render_size, "Heatmap size HxW")->capture_default_str();
  sweep_cmd->add_option("--epsilon", s.epsilon, "Intra-aggregate cost")->capture_default_str();
  sweep_cmd->add_option("--sky-cost", s.sky_cost, "Sky row cost")->capture_default_str();
  sweep_cmd->callback([&] { action = [&] { run_sweep(s, out); }; });

  GenArgs g;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a seeded synthetic scene suite");
  gen_cmd->add_option("--seed", g.seed, "Base seed")->capture_default_str();
  gen_cmd->add_option("--count", g.count, "Number of scenes")->capture_default_str();
  gen_cmd->add_option("--size", g.size, "Scene size HxW")->capture_default_str();
  gen_cmd->add_option("--noise", g.noise, "Confusion temperature")->capture_default_str();
  gen_cmd->add_option("--blur", g.blur, "Confusion neighbourhood radius")->capture_default_str();
  gen_cmd->add_option("--out", g.out, "Output dataset directory")->required();
  gen_cmd->callback([&] { action = [&] { run_gen(g, out); }; });

  ReportArgs rep;
  auto* report_cmd =
      app.add_subcommand("report", "Precision/recall table for the three builtin matrices");
  report_cmd->add_option("--dataset", rep.dataset, "Dataset directory")->required();
  report_cmd->add_option("--roi-map", rep.roi_map, "RoI map (default: derived from the dataset)");
  report_cmd->add_option("--classes", rep.classes, "Classes")->capture_default_str();
  report_cmd->add_option("--roi", rep.rois, "RoI ids, 0 = full frame")->capture_default_str();
  report_cmd->add_option("--out", rep.out, "Output JSON (default: table on stdout)");
  report_cmd->callback([&] { action = [&] { run_report(rep, out); }; });

  ServeArgs sv;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP API over a dataset");
  serve_cmd->add_option("--dataset", sv.dataset, "Dataset directory")->required();
  serve_cmd->add_option("--port", sv.port, "Port (0 picks a free one)")->capture_default_str();
  serve_cmd->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--static", sv.static_dir, "Directory served at /");
  serve_cmd->callback([&] { action = [&] { run_serve(sv, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    action();
    return kOk;
  } catch (const UsageError& e) {
    err << "costlens: " << e.what() << "\n";
    return kUsage;
  } catch (const ValidationError& e) {
    err << "costlens: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "costlens: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "costlens: " << e.what() << "\n";
    return kIo;
  }
}

}  // namespace costlens::cli
