#pragma once

#include <chrono>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "dlvgen/config.hpp"
#include "dlvgen/dialogue.hpp"
#include "dlvgen/generate.hpp"
#include "dlvgen/model.hpp"

namespace dlvgen::serve {

// Failure that maps onto an HTTP status.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class SelectMode { lexdiv, first, random };
SelectMode parse_select_mode(std::string_view text);  // ServiceError(400) if unknown

struct MessageRequest {
  std::string text;
  std::optional<std::size_t> n;
  SelectMode select = SelectMode::lexdiv;
};

struct MessageReply {
  CandidateSet candidates;  // `selected` set per the request's mode
  std::string reply;
};

struct ModelInfo {
  std::string variant;
  std::size_t d_latent = 0;
  std::string checkpoint_hash;
};

// Chat sessions over a frozen model. Sessions live in memory, least recently
// used first out once `capacity` is exceeded. Each session is serialized by
// its own lock; distinct sessions run concurrently.
class ChatService {
 public:
  static constexpr std::size_t kDefaultCapacity = 1000;
  static constexpr std::size_t kMaxCandidates = 16;

  ChatService(std::shared_ptr<const DialogueModel> model, SelectionConfig select, std::uint64_t seed,
              std::string checkpoint_hash, std::size_t capacity = kDefaultCapacity);

  std::string create_session();
  // Appends the user turn, generates and selects, appends the reply. Throws
  // ServiceError 404 for an unknown session, 400 for empty text or a bad n.
  MessageReply message(const std::string& session_id, const MessageRequest& request);
  std::vector<Turn> history(const std::string& session_id) const;
  ModelInfo info() const;
  std::size_t session_count() const;

 private:
  struct Session {
    std::string id;
    std::uint64_t ordinal = 0;
    std::uint64_t requests = 0;
    std::chrono::system_clock::time_point created;
    std::vector<Turn> turns;
    mutable std::mutex mutex;
  };
  std::shared_ptr<Session> find(const std::string& id) const;

  std::shared_ptr<const DialogueModel> model_;
  SelectionConfig select_;
  std::uint64_t seed_;
  std::string hash_;
  std::size_t capacity_;

  mutable std::mutex store_mutex_;
  std::uint64_t next_ordinal_ = 0;
  mutable std::list<std::string> lru_;  // front = most recent
  std::unordered_map<std::string, std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>> sessions_;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// Routes one request: POST /sessions, POST /sessions/{id}/message,
// GET /sessions/{id}/history, GET /health.
HttpResponse route(ChatService& service, const std::string& method, const std::string& path,
                   const std::string& body);

// HTTP front end on a background thread; CORS open to any origin.
class HttpServer {
 public:
  explicit HttpServer(ChatService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and starts serving; returns the port.
  int start(const std::string& host, int port);
  void stop();
  // Blocks until stop() is called from elsewhere.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dlvgen::serve
