#include "treequery/service.hpp"

#include <httplib.h>

#include <charconv>
#include <cstdlib>
#include <future>
#include <json.hpp>
#include <thread>

#include "treequery/matcher.hpp"
#include "treequery/parser.hpp"
#include "treequery/recommender.hpp"
#include "treequery/serialize.hpp"
#include "treequery/similarity.hpp"

namespace treequery {

using json = nlohmann::json;

namespace {

Response failure(int status, const std::string& code, const std::string& message) {
  nlohmann::ordered_json doc;
  doc["error"] = code;
  doc["message"] = message;
  return {status, doc.dump()};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::SizeBoundExceeded: return 413;
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

/// Runs `work` on its own thread and gives up waiting after `timeout`. The
/// thread keeps whatever it captured alive until it finishes.
Response with_timeout(std::chrono::milliseconds timeout, std::function<Response()> work) {
  auto task = std::make_shared<std::packaged_task<Response()>>([work = std::move(work)] {
    try {
      return work();
    } catch (const Error& e) {
      return Response{status_for(e.code()), error_json(e)};
    } catch (const std::exception& e) {
      return failure(500, "Internal", e.what());
    }
  });
  auto result = task->get_future();
  std::thread([task] { (*task)(); }).detach();
  if (result.wait_for(timeout) == std::future_status::timeout) {
    return failure(504, "Timeout",
                   "request exceeded " + std::to_string(timeout.count()) + " ms");
  }
  return result.get();
}

struct TargetRequest {
  std::shared_ptr<const Corpus> corpus;
  QueryTarget target;
  bool from_text = false;
  json body;
};

}  // namespace

ServiceConfig service_config_from_env() {
  ServiceConfig c;
  if (const char* v = std::getenv("TQ_MAX_CORPUS_NODES")) c.max_corpus_nodes = std::stoull(v);
  if (const char* v = std::getenv("TQ_TIMEOUT_MS")) {
    c.timeout = std::chrono::milliseconds(std::stoll(v));
  }
  return c;
}

std::string snapshot_id(const Corpus& corpus) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_corpus(corpus)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Service::Service(ServiceConfig config) : config_(config) {}

std::shared_ptr<const Corpus> Service::snapshot(const std::string& id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = snapshots_.find(id);
  return it == snapshots_.end() ? nullptr : it->second;
}

Response Service::post_corpus(const std::string& body) {
  try {
    auto corpus = std::make_shared<Corpus>(load_corpus(body));
    if (corpus->node_count() > config_.max_corpus_nodes) {
      return failure(413, "CorpusTooLarge",
                     "corpus has " + std::to_string(corpus->node_count()) +
                         " nodes; limit is " + std::to_string(config_.max_corpus_nodes));
    }
    std::string id = snapshot_id(*corpus);
    std::string stats = stats_json(corpus_stats(*corpus));
    {
      std::lock_guard<std::mutex> lock(mutex_);
      snapshots_.emplace(id, std::move(corpus));
    }
    return {200, "{\"snapshot_id\":" + json(id).dump() + ",\"stats\":" + stats + "}"};
  } catch (const Error& e) {
    return {status_for(e.code()), error_json(e)};
  }
}

namespace {

/// Decodes {snapshot_id, expr | ast, ...}; returns a failure response instead
/// when the request is unusable.
std::variant<TargetRequest, Response> read_target(const Service& service,
                                                  const std::string& body) {
  TargetRequest req;
  try {
    req.body = json::parse(body);
  } catch (const json::exception& e) {
    return failure(400, "BadRequest", std::string("request body is not JSON: ") + e.what());
  }
  if (!req.body.is_object()) return failure(400, "BadRequest", "request body must be an object");
  auto sid = req.body.find("snapshot_id");
  if (sid == req.body.end() || !sid->is_string()) {
    return failure(400, "BadRequest", "snapshot_id is required");
  }
  req.corpus = service.snapshot(sid->get<std::string>());
  if (!req.corpus) {
    return failure(404, "UnknownSnapshot", "no snapshot '" + sid->get<std::string>() + "'");
  }
  bool has_expr = req.body.contains("expr");
  bool has_ast = req.body.contains("ast");
  if (has_expr == has_ast) {
    return failure(400, "BadRequest", "supply exactly one of expr and ast");
  }
  try {
    if (has_expr) {
      if (!req.body["expr"].is_string()) return failure(400, "BadRequest", "expr must be a string");
      req.target = parse_for(*req.corpus, req.body["expr"].get<std::string>());
      req.from_text = true;
    } else {
      const auto& ast = req.body["ast"];
      req.target = decode_for(*req.corpus, ast.is_string() ? ast.get<std::string>() : ast.dump());
    }
  } catch (const Error& e) {
    return Response{status_for(e.code()), error_json(e)};
  }
  return req;
}

}  // namespace

Response Service::post_query(const std::string& body) {
  auto read = read_target(*this, body);
  if (auto* r = std::get_if<Response>(&read)) return *r;
  auto req = std::make_shared<TargetRequest>(std::move(std::get<TargetRequest>(read)));
  return with_timeout(config_.timeout, [req] {
    auto report = match_corpus(req->target, *req->corpus);
    std::optional<std::string> expr;
    if (req->from_text) expr = format(req->target);
    return Response{200, report_json(report, *req->corpus, expr)};
  });
}

Response Service::post_recommend(const std::string& body) {
  auto read = read_target(*this, body);
  if (auto* r = std::get_if<Response>(&read)) return *r;
  auto req = std::make_shared<TargetRequest>(std::move(std::get<TargetRequest>(read)));
  std::size_t k = config_.default_k;
  if (auto it = req->body.find("k"); it != req->body.end()) {
    if (!it->is_number_unsigned()) {
      return failure(400, "BadRequest", "k must be a non-negative integer");
    }
    k = it->get<std::size_t>();
  }
  return with_timeout(config_.timeout, [req, k] {
    return Response{200, recommendations_json(recommend(req->target, *req->corpus, k))};
  });
}

Response Service::get_projection(const std::string& id, const std::string& method,
                                 const std::string& seed) {
  auto corpus = snapshot(id);
  if (!corpus) return failure(404, "UnknownSnapshot", "no snapshot '" + id + "'");
  auto m = projection_method(method.empty() ? "tsne" : method);
  if (!m) return failure(400, "BadRequest", "method must be tsne or pca");
  std::uint64_t s = 0;
  if (!seed.empty()) {
    auto [end, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), s);
    if (ec != std::errc() || end != seed.data() + seed.size()) {
      return failure(400, "BadRequest", "seed must be a non-negative integer");
    }
  }
  ProjectionMethod method_value = *m;
  return with_timeout(config_.timeout, [corpus, method_value, s] {
    return Response{200, projection_json(project(*corpus, method_value, s))};
  });
}

Response Service::get_stats(const std::string& id) {
  auto corpus = snapshot(id);
  if (!corpus) return failure(404, "UnknownSnapshot", "no snapshot '" + id + "'");
  return {200, stats_json(corpus_stats(*corpus))};
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>()) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  auto& s = impl_->server;
  s.Post("/corpus", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.post_corpus(req.body));
  });
  s.Post("/query", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.post_query(req.body));
  });
  s.Post("/recommend", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.post_recommend(req.body));
  });
  s.Get("/projection", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_projection(req.get_param_value("snapshot_id"),
                                      req.get_param_value("method"),
                                      req.get_param_value("seed")));
  });
  s.Get("/stats", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.get_stats(req.get_param_value("snapshot_id")));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace treequery
