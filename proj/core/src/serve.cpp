#include "dlvgen/serve.hpp"

#include <cmath>
#include <httplib.h>
#include <json.hpp>

#include "dlvgen/checkpoint.hpp"
#include "dlvgen/errors.hpp"
#include "dlvgen/rng.hpp"

namespace dlvgen::serve {
namespace {

using nlohmann::json;

double round6(double x) { return std::round(x * 1e6) / 1e6; }

json error_body(const std::string& message) { return json{{"error", message}}; }

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

MessageRequest parse_message(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ServiceError(400, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ServiceError(400, "body must be a JSON object");
  MessageRequest req;
  if (!j.contains("text") || !j["text"].is_string()) throw ServiceError(400, "missing string field 'text'");
  req.text = j["text"].get<std::string>();
  if (j.contains("n") && !j["n"].is_null()) {
    if (!j["n"].is_number_integer() || j["n"].get<long long>() < 1) {
      throw ServiceError(400, "'n' must be a positive integer");
    }
    req.n = j["n"].get<std::size_t>();
  }
  if (j.contains("select") && !j["select"].is_null()) {
    if (!j["select"].is_string()) throw ServiceError(400, "'select' must be a string");
    req.select = parse_select_mode(j["select"].get<std::string>());
  }
  return req;
}

json turns_json(const std::vector<Turn>& turns) {
  json out = json::array();
  for (const auto& t : turns) out.push_back({{"speaker", std::string(speaker_name(t.speaker))}, {"text", t.text}});
  return out;
}

}  // namespace

SelectMode parse_select_mode(std::string_view text) {
  if (text == "lexdiv") return SelectMode::lexdiv;
  if (text == "first") return SelectMode::first;
  if (text == "random") return SelectMode::random;
  throw ServiceError(400, "unknown select mode '" + std::string(text) + "' (lexdiv, first, random)");
}

ChatService::ChatService(std::shared_ptr<const DialogueModel> model, SelectionConfig select, std::uint64_t seed,
                         std::string checkpoint_hash, std::size_t capacity)
    : model_(std::move(model)), select_(select), seed_(seed), hash_(std::move(checkpoint_hash)), capacity_(capacity) {
  if (!model_) throw ContractError("ChatService needs a loaded model");
  if (capacity_ == 0) throw ContractError("ChatService capacity must be positive");
}

std::string ChatService::create_session() {
  auto s = std::make_shared<Session>();
  s->created = std::chrono::system_clock::now();
  std::lock_guard lock(store_mutex_);
  s->ordinal = next_ordinal_++;
  // mix64 is a bijection, so ordinals map to distinct ids.
  s->id = hex64(mix64(seed_ ^ mix64(s->ordinal + 1)));
  lru_.push_front(s->id);
  sessions_[s->id] = {s, lru_.begin()};
  while (sessions_.size() > capacity_) {
    sessions_.erase(lru_.back());
    lru_.pop_back();
  }
  return s->id;
}

std::shared_ptr<ChatService::Session> ChatService::find(const std::string& id) const {
  std::lock_guard lock(store_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
  lru_.splice(lru_.begin(), lru_, it->second.second);
  return it->second.first;
}

MessageReply ChatService::message(const std::string& session_id, const MessageRequest& request) {
  auto session = find(session_id);
  if (blank(request.text)) throw ServiceError(400, "message text is empty");
  const std::size_t n = request.n.value_or(select_.n_candidates);
  if (n == 0 || n > kMaxCandidates) {
    throw ServiceError(400, "'n' must be between 1 and " + std::to_string(kMaxCandidates));
  }

  std::lock_guard lock(session->mutex);
  Rng rng(derive_seed(derive_seed(seed_, session->ordinal), session->requests++));
  session->turns.push_back({Speaker::user, request.text});
  GenerationSettings gen;
  gen.n = n;
  gen.beam = select_.beam;
  gen.max_len = select_.max_response_len;
  MessageReply out;
  try {
    out.candidates = generate_candidates(*model_, session->turns, gen, rng);
  } catch (...) {
    session->turns.pop_back();
    throw;
  }
  select_lexdiv(out.candidates, select_);
  if (request.select == SelectMode::first) out.candidates.selected = 0;
  if (request.select == SelectMode::random) out.candidates.selected = rng.below(n);
  out.reply = out.candidates.candidates[out.candidates.selected].text;
  session->turns.push_back({Speaker::agent, out.reply});
  return out;
}

std::vector<Turn> ChatService::history(const std::string& session_id) const {
  auto session = find(session_id);
  std::lock_guard lock(session->mutex);
  return session->turns;
}

ModelInfo ChatService::info() const {
  return {std::string(variant_name(model_->variant())), model_->config().d_latent, hash_};
}

std::size_t ChatService::session_count() const {
  std::lock_guard lock(store_mutex_);
  return sessions_.size();
}

HttpResponse route(ChatService& service, const std::string& method, const std::string& path,
                   const std::string& body) {
  try {
    if (method == "GET" && path == "/health") {
      const auto info = service.info();
      return {200, json{{"status", "ok"},
                        {"model_info",
                         {{"variant", info.variant},
                          {"d_latent", info.d_latent},
                          {"checkpoint_hash", info.checkpoint_hash}}}}
                       .dump()};
    }
    if (method == "POST" && path == "/sessions") {
      return {201, json{{"session_id", service.create_session()}}.dump()};
    }
    constexpr std::string_view prefix = "/sessions/";
    if (path.starts_with(prefix)) {
      const auto rest = path.substr(prefix.size());
      const auto slash = rest.find('/');
      if (slash != std::string::npos && slash > 0) {
        const auto id = rest.substr(0, slash);
        const auto action = rest.substr(slash + 1);
        if (method == "GET" && action == "history") return {200, turns_json(service.history(id)).dump()};
        if (method == "POST" && action == "message") {
          const auto reply = service.message(id, parse_message(body));
          json candidates = json::array();
          for (const auto& c : reply.candidates.candidates) {
            candidates.push_back({{"text", c.text},
                                  {"mtld", round6(c.score.mtld)},
                                  {"mattr", round6(c.score.mattr)},
                                  {"combined", round6(c.score.combined)}});
          }
          return {200, json{{"candidates", candidates},
                            {"selected_index", reply.candidates.selected},
                            {"reply", reply.reply}}
                           .dump()};
        }
      }
    }
    return {404, error_body("no route for " + method + " " + path).dump()};
  } catch (const ServiceError& e) {
    return {e.status(), error_body(e.what()).dump()};
  } catch (const std::exception& e) {
    return {500, error_body(e.what()).dump()};
  }
}

struct HttpServer::Impl {
  ChatService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(ChatService& s) : service(s) {}
};

HttpServer::HttpServer(ChatService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const auto out = route(impl_->service, req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json; charset=utf-8");
  };
  svr.Get(R"(/.*)", handler);
  svr.Post(R"(/.*)", handler);
  svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& svr = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = svr.bind_to_any_port(host);
  } else if (!svr.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw FileError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([&svr] { svr.listen_after_bind(); });
  svr.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace dlvgen::serve
