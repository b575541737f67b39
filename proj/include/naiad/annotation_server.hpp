#pragma once

// HTTP+JSON front of an AnnotationStore. Every error body is {code, message}.

#include <charconv>
#include <optional>
#include <string>

#include <httplib.h>
// <resolv.h>, pulled in by httplib, defines _res as a macro, which breaks
// Eigen headers included later in the same translation unit.
#undef _res

#include "naiad/annotation.hpp"
#include "naiad/jsonl.hpp"

namespace naiad {

class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationStore& store, std::optional<std::string> static_dir = std::nullopt)
      : store_(store) {
    routes();
    if (static_dir && !server_.set_mount_point("/", *static_dir)) {
      throw InvalidArgument("static directory not found: " + *static_dir);
    }
  }

  /// Bind to host:port (0 picks a free port) and return the bound port.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      port_ = server_.bind_to_any_port(host);
    } else {
      port_ = server_.bind_to_port(host, port) ? port : -1;
    }
    if (port_ < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port_;
  }

  /// Blocks until stop().
  bool serve() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }
  int port() const { return port_; }

 private:
  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, std::string code, std::string message) {
    send_json(res, status, json{{"code", std::move(code)}, {"message", std::move(message)}});
  }

  static std::optional<double> number_param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    const std::string v = req.get_param_value(name);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) {
      throw InvalidArgument(std::string("query parameter ") + name + " must be a number");
    }
    return x;
  }

  template <typename Fn>
  static void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const json::exception& e) {
      send_error(res, 400, "malformed_json", e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, "malformed_request", e.what());
    } catch (const BoundError& e) {
      send_error(res, 400, "bound_error", e.what());
    } catch (const InvalidArgument& e) {
      send_error(res, 400, "invalid_argument", e.what());
    } catch (const NotFound& e) {
      send_error(res, 404, "not_found", e.what());
    } catch (const Conflict& e) {
      send_error(res, 409, "conflict", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  }

  void routes() {
    server_.Get("/api/rubric", [](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, rubric_json()); });
    });

    server_.Post("/api/annotators", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = json::parse(req.body);
        const std::string id = detail::get_as<std::string>(body, "annotator_id");
        store_.register_annotator(id);
        send_json(res, 201, json{{"annotator_id", id}});
      });
    });

    server_.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_param("annotator")) throw InvalidArgument("missing query parameter annotator");
        const auto t = store_.next_task(req.get_param_value("annotator"));
        send_json(res, 200, json{{"task", t ? rater_payload(*t) : json(nullptr)}});
      });
    });

    server_.Get(R"(/api/tasks/([^/]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        if (!store_.task(id)) throw NotFound("unknown task " + id);
        send_json(res, 200, json{{"task_id", id}, {"labels", store_.labels(id)}});
      });
    });

    server_.Post("/api/labels", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const LabelSubmission sub = parse_submission(json::parse(req.body));
        bool replayed = false;
        const Label l = store_.submit_label(sub, &replayed);
        send_json(res, replayed ? 200 : 201, l);
      });
    });

    server_.Get("/api/review/flags", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const double thr = number_param(req, "threshold").value_or(store_.config().variance_threshold);
        json flags = json::array();
        for (const auto& f : store_.flag_discrepancies(thr)) {
          flags.push_back({{"task_id", f.task_id},
                           {"variance", f.variance},
                           {"labels", f.labels},
                           {"task", rater_payload(*store_.task(f.task_id))}});
        }
        send_json(res, 200, json{{"threshold", thr}, {"flags", flags}});
      });
    });

    server_.Get(R"(/api/drift/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::optional<std::size_t> window;
        if (auto w = number_param(req, "window")) {
          if (*w < 0 || *w != std::floor(*w)) throw InvalidArgument("window must be a non-negative integer");
          window = static_cast<std::size_t>(*w);
        }
        send_json(res, 200, to_json(store_.gold_drift(req.matches[1], window, number_param(req, "bound"))));
      });
    });

    server_.Get("/api/export/anchors", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::size_t min_labels = 1;
        if (auto m = number_param(req, "min_labels")) {
          if (*m < 1 || *m != std::floor(*m)) throw InvalidArgument("min_labels must be a positive integer");
          min_labels = static_cast<std::size_t>(*m);
        }
        res.status = 200;
        res.set_content(to_jsonl(store_.export_anchors(min_labels)), "application/x-ndjson");
      });
    });

    server_.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) send_error(res, 404, "not_found", "no route for " + req.path);
    });
  }

  AnnotationStore& store_;
  httplib::Server server_;
  int port_ = -1;
};

}  // namespace naiad
