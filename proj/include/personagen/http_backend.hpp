#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "personagen/backend.hpp"
#include "personagen/embedding.hpp"
#include "personagen/error.hpp"

namespace pgen {

// OpenAI-compatible chat/embeddings client over plain HTTP. The API key is
// read from the environment variable named in the config and is only ever
// placed in the Authorization header, never logged or serialized.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(BackendConfig cfg)
      : cfg_(std::move(cfg)), limiter_(cfg_.rate_limit) {
    cfg_.validate();
    if (cfg_.endpoint_url.empty())
      throw InvalidInput("http backend requires endpoint_url");
    split_endpoint(cfg_.endpoint_url, origin_, base_path_);
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
  }

  const BackendConfig& config() const override { return cfg_; }

  std::string complete(const ChatRequest& request) override {
    request.validate();
    nlohmann::json body;
    body["model"] = cfg_.model_name;
    body["temperature"] = cfg_.temperature;
    body["messages"] = nlohmann::json::array();
    for (const ChatMessage& m : request.messages)
      body["messages"].push_back(
          {{"role", std::string(role_name(m.role))}, {"content", m.content}});

    nlohmann::json reply = post_json("/chat/completions", body);
    try {
      return reply.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw BackendRejected(200, "chat completion reply missing choices[0].message.content");
    }
  }

  std::vector<std::vector<double>> embed(
      const std::vector<std::string>& texts) override {
    nlohmann::json body;
    body["model"] = cfg_.model_name;
    body["input"] = texts;
    nlohmann::json reply = post_json("/embeddings", body);
    std::vector<std::vector<double>> out(texts.size());
    try {
      for (const auto& item : reply.at("data")) {
        size_t idx = item.at("index").get<size_t>();
        if (idx >= out.size())
          throw BackendRejected(200, "embedding reply index out of range");
        out[idx] = item.at("embedding").get<std::vector<double>>();
      }
    } catch (const nlohmann::json::exception&) {
      throw BackendRejected(200, "embeddings reply missing data[].embedding");
    }
    for (auto& v : out) {
      if (v.empty()) throw BackendRejected(200, "embeddings reply incomplete");
      v = normalized(std::move(v));
    }
    return out;
  }

 private:
  static void split_endpoint(const std::string& url, std::string& origin,
                             std::string& base_path) {
    size_t scheme = url.find("://");
    if (scheme == std::string::npos)
      throw InvalidInput("endpoint_url must include a scheme: " + url);
    size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) {
      origin = url;
      base_path = "";
    } else {
      origin = url.substr(0, path);
      base_path = url.substr(path);
      while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();
    }
  }

  // Retries transport failures, 429 and 5xx with exponential backoff;
  // any other non-2xx status is a hard rejection.
  nlohmann::json post_json(const std::string& route, const nlohmann::json& body) {
    std::string payload = body.dump();
    int attempts = cfg_.max_retries + 1;
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0)
        std::this_thread::sleep_for(
            std::chrono::milliseconds(100 * (1 << (attempt - 1))));
      limiter_.acquire();

      httplib::Client client(origin_);
      client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
      client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
      client.set_write_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
      httplib::Headers headers;
      if (!api_key_.empty())
        headers.emplace("Authorization", "Bearer " + api_key_);

      auto res = client.Post(base_path_ + route, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "status " + std::to_string(res->status);
        continue;
      }
      if (res->status < 200 || res->status >= 300)
        throw BackendRejected(res->status,
                              "endpoint rejected request with status " +
                                  std::to_string(res->status));
      nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
      if (parsed.is_discarded())
        throw BackendRejected(res->status, "endpoint returned invalid JSON");
      return parsed;
    }
    throw BackendUnavailable("endpoint unavailable after " +
                             std::to_string(attempts) + " attempts (" +
                             last_error + ")");
  }

  BackendConfig cfg_;
  RateLimiter limiter_;
  std::string origin_;
  std::string base_path_;
  std::string api_key_;
};

}  // namespace pgen
