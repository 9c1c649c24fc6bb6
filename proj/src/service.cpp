#include "costlens/service.hpp"

#include "costlens/decision.hpp"
#include "costlens/error.hpp"
#include "costlens/image_io.hpp"
#include "costlens/report.hpp"
#include "costlens/synth.hpp"

#include "httplib.h"

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <thread>

namespace costlens {

namespace {

std::atomic<bool> g_stop_requested{false};

extern "C" void on_stop_signal(int) { g_stop_requested = true; }

std::string as_string(const Bytes& bytes) { return std::string(bytes.begin(), bytes.end()); }

HttpResponse json_response(const Json& doc) { return {200, "application/json", doc.dump()}; }

int quantize(double v) { return static_cast<int>(std::llround(v * 1000.0)); }

double number_field(const Json& body, const char* key) {
  if (!body.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  if (!body.at(key).is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
  return body.at(key).get<double>();
}

std::vector<int> all_regions(const std::optional<RoiDerivation>& roi) {
  std::vector<int> ids{0};
  if (roi)
    for (int id = 1; id <= roi->region_count; ++id) ids.push_back(id);
  return ids;
}

}  // namespace

BarycentricPoint QuantizedPoint::point() const {
  return BarycentricPoint(alpha / 1000.0, beta / 1000.0, gamma() / 1000.0);
}

QuantizedPoint QuantizedPoint::from(const BarycentricPoint& p) {
  QuantizedPoint q{quantize(p.alpha()), quantize(p.beta())};
  if (q.alpha + q.beta > 1000) q.beta = 1000 - q.alpha;
  return q;
}

HttpResponse error_response(int status, const std::string& error, const std::string& detail) {
  return {status, "application/json", Json{{"error", error}, {"detail", detail}}.dump()};
}

Session::Session(Dataset dataset)
    : dataset_(std::move(dataset)), corners_(CornerSet::builtin(dataset_.catalog)) {
  if (dataset_.scenes.empty()) throw ValidationError("dataset has no scenes");
  // Mixed scene sizes leave no pixel-wise priors: full-frame metrics only.
  roi_ = derive_dataset_roi(dataset_);
}

int Session::scene_index(const std::string& id) const {
  for (std::size_t i = 0; i < dataset_.scenes.size(); ++i)
    if (dataset_.scenes[i].id == id) return static_cast<int>(i);
  return -1;
}

HttpResponse Session::scenes() const {
  Json list = Json::array();
  for (const auto& s : dataset_.scenes)
    list.push_back({{"id", s.id},
                    {"width", s.probabilities.width()},
                    {"height", s.probabilities.height()}});
  return json_response(list);
}

HttpResponse Session::scene_image(const std::string& id, const std::string& kind) const {
  const int i = scene_index(id);
  if (i < 0) return error_response(404, "unknown scene", id);
  const SceneBundle& scene = dataset_.scenes[i];
  if (kind == "gt") return {200, "image/png", as_string(encode_png(scene.ground_truth))};
  if (kind == "preview") {
    if (static_cast<std::size_t>(i) < dataset_.files.size()) {
      const auto& preview_file = dataset_.files[i].preview;
      if (preview_file && std::filesystem::exists(dataset_.root / *preview_file))
        return {200, "image/png", as_string(read_file(dataset_.root / *preview_file))};
    }
    // Without a stored preview, render the ground truth in class colours.
    const RgbImage preview = class_color_preview(scene.ground_truth, dataset_.catalog.ignore_label());
    return {200, "image/png", as_string(encode_png(preview))};
  }
  return error_response(404, "unknown image kind", kind);
}

std::shared_ptr<const Mask> Session::mask_for(std::size_t scene, const QuantizedPoint& q,
                                              double epsilon, double sky_cost) {
  const MaskKey key{scene, q.alpha, q.beta, epsilon, sky_cost};
  {
    std::lock_guard lock(mutex_);
    if (auto it = masks_.find(key); it != masks_.end()) return it->second;
  }
  const bool defaults = epsilon == kDefaultEpsilon && sky_cost == kDefaultSkyCost;
  const CostMatrixd cost =
      defaults ? corners_.at(q.point())
               : CornerSet::builtin(dataset_.catalog, epsilon, sky_cost).at(q.point());
  auto mask = std::make_shared<const Mask>(costlens::decide(dataset_.scenes[scene].probabilities, cost));
  std::lock_guard lock(mutex_);
  masks_[key] = mask;  // identical keys compute identical masks
  return mask;
}

std::size_t Session::cached_masks() const {
  std::lock_guard lock(mutex_);
  return masks_.size();
}

HttpResponse Session::decide(const std::string& request_body) {
  Json body;
  try {
    body = Json::parse(request_body);
  } catch (const Json::parse_error& e) {
    return error_response(400, "malformed JSON", e.what());
  }
  if (!body.is_object()) return error_response(400, "malformed request", "expected an object");
  try {
    if (!body.contains("scene") || !body.at("scene").is_string())
      throw ValidationError("missing field 'scene'");
    const std::string id = body.at("scene").get<std::string>();
    const int i = scene_index(id);
    if (i < 0) return error_response(404, "unknown scene", id);
    const BarycentricPoint requested(number_field(body, "alpha"), number_field(body, "beta"),
                                     number_field(body, "gamma"));
    const double epsilon = body.contains("epsilon") ? number_field(body, "epsilon") : kDefaultEpsilon;
    const double sky_cost =
        body.contains("sky_cost") ? number_field(body, "sky_cost") : kDefaultSkyCost;
    const QuantizedPoint q = QuantizedPoint::from(requested);
    const auto mask = mask_for(static_cast<std::size_t>(i), q, epsilon, sky_cost);

    const SceneBundle& scene = dataset_.scenes[i];
    std::vector<int> classes;
    if (body.contains("classes")) {
      for (const auto& c : body.at("classes")) {
        if (!c.is_string()) throw ValidationError("'classes' must list class names");
        classes.push_back(dataset_.catalog.index_of(c.get<std::string>()));
      }
    } else {
      classes = parse_class_list("all", dataset_.catalog);
    }
    const std::vector<int> regions = all_regions(roi_);
    const BarycentricPoint used = q.point();
    Json out;
    out["scene"] = id;
    out["alpha"] = used.alpha();
    out["beta"] = used.beta();
    out["gamma"] = used.gamma();
    out["epsilon"] = epsilon;
    out["sky_cost"] = sky_cost;
    out["mask_png_b64"] = httplib::detail::base64_encode(as_string(encode_png(*mask)));
    out["palette"] = palette_legend(dataset_.catalog);
    out["metrics"] = metrics_report(*mask, scene.ground_truth, dataset_.catalog, classes,
                                    regions, roi_ ? &roi_->roi : nullptr,
                                    roi_ ? roi_->region_count : 0);
    return json_response(out);
  } catch (const ValidationError& e) {
    return error_response(422, "validation error", e.what());
  }
}

HttpResponse Session::sweep(const std::map<std::string, std::string>& query) {
  auto get = [&](const std::string& key, const std::string& fallback) {
    const auto it = query.find(key);
    return it == query.end() ? fallback : it->second;
  };
  try {
    const Metric metric = parse_metric(get("metric", "recall"));
    const int k = parse_class_list(get("class", "person"), dataset_.catalog).front();
    const std::string roi_text = get("roi", "all");
    int roi_id = 0;
    if (roi_text != "all") {
      try {
        roi_id = std::stoi(roi_text);
      } catch (const std::logic_error&) {
        throw ValidationError("cannot parse roi '" + roi_text + "'");
      }
      if (!roi_) throw ValidationError("no RoI map for this dataset");
      if (roi_id < 1 || roi_id > roi_->region_count)
        throw ValidationError("roi must lie in 1.." + std::to_string(roi_->region_count));
    }
    const int n = divisions_from_step(get("step", "0.05"));
    if (n > 200) throw ValidationError("grid step too fine (n > 200)");
    const SweepKey key{static_cast<int>(metric), k, roi_id, n, kDefaultEpsilon, kDefaultSkyCost};
    {
      std::lock_guard lock(mutex_);
      if (auto it = sweeps_.find(key); it != sweeps_.end())
        return {200, "application/json", *it->second};
    }
    std::optional<RoiSelection> selection;
    if (roi_id > 0) selection = RoiSelection{&roi_->roi, roi_id, roi_->region_count};
    const MetricSurface surface =
        evaluate_surface(dataset_.scenes, corners_, simplex_grid(n), metric, k,
                         dataset_.catalog.ignore_label(), selection);
    Json points = Json::array();
    for (std::size_t i = 0; i < surface.grid.size(); ++i) {
      const auto& p = surface.grid.points[i];
      points.push_back({{"alpha", p.alpha()},
                        {"beta", p.beta()},
                        {"gamma", p.gamma()},
                        {"value", surface.values[i] ? Json(*surface.values[i]) : Json(nullptr)}});
    }
    Json out{{"metric", std::string(metric_name(metric))},
             {"class", dataset_.catalog.name(k)},
             {"roi", region_key(roi_id)},
             {"divisions", n},
             {"points", std::move(points)}};
    auto text = std::make_shared<const std::string>(out.dump());
    std::lock_guard lock(mutex_);
    sweeps_[key] = text;
    return {200, "application/json", *text};
  } catch (const ValidationError& e) {
    return error_response(422, "validation error", e.what());
  }
}

HttpResponse Session::corners() const { return json_response(corners_.to_json()); }

void Session::mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get("/api/scenes", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, scenes());
  });
  server.Get(R"(/api/scenes/([^/]+)/(gt|preview))",
             [this, reply](const httplib::Request& req, httplib::Response& res) {
               reply(res, scene_image(req.matches[1], req.matches[2]));
             });
  server.Post("/api/decide", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, decide(req.body));
  });
  server.Get("/api/sweep", [this, reply](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    reply(res, sweep(query));
  });
  server.Get("/api/corners", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, corners());
  });
  server.set_exception_handler(
      [reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          reply(res, error_response(500, "internal error", e.what()));
        } catch (...) {
          reply(res, error_response(500, "internal error", "unknown exception"));
        }
      });
  server.set_error_handler([reply](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    reply(res, error_response(res.status, httplib::status_message(res.status), req.path));
  });
}

void serve(const std::filesystem::path& dataset_dir, const std::string& host, int port,
           const std::optional<std::filesystem::path>& static_dir, std::ostream& log) {
  Session session(load_dataset(dataset_dir));
  httplib::Server server;
  // httplib enables SO_REUSEPORT by default, which lets a second server share a busy port.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  session.mount(server);
  if (static_dir && !server.set_mount_point("/", static_dir->string()))
    throw IoError("static directory not found: " + static_dir->string());

  int bound = port;
  if (port == 0) {
    bound = server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
  } else if (!server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  }

  g_stop_requested = false;
  auto previous_int = std::signal(SIGINT, on_stop_signal);
  auto previous_term = std::signal(SIGTERM, on_stop_signal);
  std::thread watcher([&server] {
    while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  log << "serving " << session.dataset().scenes.size() << " scenes on http://" << host << ":"
      << bound << std::endl;
  const bool ok = server.listen_after_bind();
  g_stop_requested = true;
  watcher.join();
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);
  log << "stopped" << std::endl;
  if (!ok) throw IoError("server terminated abnormally");
}

}  // namespace costlens
