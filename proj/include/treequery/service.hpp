#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "treequery/tree_model.hpp"

namespace treequery {

struct ServiceConfig {
  std::size_t max_corpus_nodes = 1000000;
  std::chrono::milliseconds timeout{60000};
  std::size_t default_k = 10;
};

/// Reads TQ_MAX_CORPUS_NODES and TQ_TIMEOUT_MS over the defaults.
ServiceConfig service_config_from_env();

struct Response {
  int status = 200;
  std::string body;
};

/// Request handlers, independent of the transport. Every handler works on one
/// immutable corpus snapshot.
class Service {
 public:
  explicit Service(ServiceConfig config = {});

  Response post_corpus(const std::string& body);
  Response post_query(const std::string& body);
  Response post_recommend(const std::string& body);
  Response get_projection(const std::string& snapshot_id, const std::string& method,
                          const std::string& seed);
  Response get_stats(const std::string& snapshot_id);

  std::shared_ptr<const Corpus> snapshot(const std::string& id) const;
  const ServiceConfig& config() const { return config_; }

 private:
  ServiceConfig config_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Corpus>> snapshots_;
};

/// Content address of a corpus: FNV-1a 64 of its canonical document, as hex.
std::string snapshot_id(const Corpus& corpus);

/// HTTP front end over a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace treequery
