#pragma once

#include "costlens/dataset.hpp"
#include "costlens/geography.hpp"
#include "costlens/json.hpp"
#include "costlens/sweep.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>

namespace httplib {
class Server;
}

namespace costlens {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Barycentric coordinates rounded to multiples of 1e-3; gamma takes the
// remainder so the point stays on the simplex.
struct QuantizedPoint {
  int alpha = 0;
  int beta = 0;
  int gamma() const { return 1000 - alpha - beta; }
  BarycentricPoint point() const;
  static QuantizedPoint from(const BarycentricPoint& p);
};

// Immutable scene set plus the decision cache. Handlers are safe to call
// from many threads.
class Session {
 public:
  explicit Session(Dataset dataset);

  const Dataset& dataset() const { return dataset_; }
  const std::optional<RoiDerivation>& roi() const { return roi_; }

  HttpResponse scenes() const;
  HttpResponse scene_image(const std::string& id, const std::string& kind) const;
  HttpResponse decide(const std::string& request_body);
  HttpResponse sweep(const std::map<std::string, std::string>& query);
  HttpResponse corners() const;

  std::size_t cached_masks() const;

  // Registers the /api routes.
  void mount(httplib::Server& server);

 private:
  using MaskKey = std::tuple<std::size_t, int, int, double, double>;
  using SweepKey = std::tuple<int, int, int, int, double, double>;

  int scene_index(const std::string& id) const;
  std::shared_ptr<const Mask> mask_for(std::size_t scene, const QuantizedPoint& q,
                                       double epsilon, double sky_cost);

  Dataset dataset_;
  std::optional<RoiDerivation> roi_;
  CornerSet corners_;
  mutable std::mutex mutex_;
  std::map<MaskKey, std::shared_ptr<const Mask>> masks_;
  std::map<SweepKey, std::shared_ptr<const std::string>> sweeps_;
};

HttpResponse error_response(int status, const std::string& error, const std::string& detail);

// Blocks until SIGINT/SIGTERM. Throws IoError when the port cannot be bound.
// Static assets under `static_dir` (if given) are served at /.
void serve(const std::filesystem::path& dataset_dir, const std::string& host, int port,
           const std::optional<std::filesystem::path>& static_dir, std::ostream& log);

}  // namespace costlens
