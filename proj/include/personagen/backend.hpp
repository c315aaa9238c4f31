#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "personagen/error.hpp"

namespace pgen {

struct BackendConfig {
  std::string endpoint_url;
  std::string model_name = "mock-model";
  std::string api_key_env = "PGEN_API_KEY";
  int max_retries = 3;
  double rate_limit = 100000.0;  // requests per second
  double timeout_seconds = 60.0;
  double temperature = 0.7;
  std::optional<std::uint64_t> seed;

  void validate() const {
    if (max_retries < 0 || max_retries > 10)
      throw InvalidInput("max_retries must be in [0, 10]");
    if (!(rate_limit > 0.0))
      throw InvalidInput("rate_limit must be positive");
    if (!(timeout_seconds > 0.0))
      throw InvalidInput("timeout_seconds must be positive");
    if (temperature < 0.0 || temperature > 2.0)
      throw InvalidInput("temperature must be in [0, 2]");
  }
};

enum class Role { kSystem, kUser, kAssistant };

inline std::string_view role_name(Role r) {
  switch (r) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

struct ChatMessage {
  Role role;
  std::string content;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;

  static ChatRequest user(std::string text) {
    ChatRequest r;
    r.messages.push_back({Role::kUser, std::move(text)});
    return r;
  }

  static ChatRequest system_user(std::string system, std::string user_text) {
    ChatRequest r;
    r.messages.push_back({Role::kSystem, std::move(system)});
    r.messages.push_back({Role::kUser, std::move(user_text)});
    return r;
  }

  void validate() const {
    if (messages.empty()) throw InvalidInput("chat request has no messages");
    Role first = messages.front().role;
    if (first == Role::kAssistant)
      throw InvalidInput("chat request must start with a system or user turn");
  }
};

enum class ValueKind { kString, kStringList, kObject };

struct KeySpec {
  std::string name;
  ValueKind kind = ValueKind::kString;
  bool required = true;
};

// Declarative shape for one-level JSON object validation.
struct JsonShape {
  std::vector<KeySpec> keys;

  // Empty optional when the value conforms; otherwise a description.
  std::optional<std::string> check(const nlohmann::json& value) const {
    if (!value.is_object()) return "reply is not a JSON object";
    for (const KeySpec& key : keys) {
      auto it = value.find(key.name);
      if (it == value.end()) {
        if (key.required) return "missing required key: " + key.name;
        continue;
      }
      switch (key.kind) {
        case ValueKind::kString:
          if (!it->is_string()) return "key is not a string: " + key.name;
          break;
        case ValueKind::kStringList: {
          if (!it->is_array()) return "key is not a list: " + key.name;
          for (const auto& elem : *it)
            if (!elem.is_string())
              return "list has a non-string element: " + key.name;
          break;
        }
        case ValueKind::kObject:
          if (!it->is_object()) return "key is not an object: " + key.name;
          break;
      }
    }
    return std::nullopt;
  }
};

// Serializes request starts so a shared backend never exceeds its rate.
// acquire() hands out evenly spaced slots under a mutex and sleeps the
// caller until its slot arrives; slots are never closer than 1/rate.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second) : interval_(spacing(per_second)) {}

  std::chrono::steady_clock::time_point acquire() {
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto now = std::chrono::steady_clock::now();
      slot = next_free_ < now ? now : next_free_;
      next_free_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
    return slot;
  }

  std::chrono::steady_clock::duration interval() const { return interval_; }

 private:
  static std::chrono::steady_clock::duration spacing(double per_second) {
    if (!(per_second > 0.0)) throw InvalidInput("rate must be positive");
    return std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / per_second));
  }

  std::mutex mu_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_free_{};
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string complete(const ChatRequest& request) = 0;

  // One unit-length embedding per input text, all the same dimension.
  virtual std::vector<std::vector<double>> embed(
      const std::vector<std::string>& texts) = 0;

  virtual const BackendConfig& config() const = 0;
};

inline constexpr std::string_view kJsonRepairInstruction =
    "Your previous reply was not valid JSON. Reply with ONLY the JSON object.";

// First balanced {...} region in the text, string- and escape-aware.
// Returns an empty string when no complete object is present.
inline std::string extract_json_object(std::string_view text) {
  size_t start = text.find('{');
  if (start == std::string_view::npos) return "";
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      --depth;
      if (depth == 0) return std::string(text.substr(start, i - start + 1));
    }
  }
  return "";
}

// Completion with shape enforcement. On a malformed reply the failed text
// is appended as an assistant turn followed by a fixed repair instruction,
// and the exchange is retried up to config().max_retries more times.
inline nlohmann::json complete_json(Backend& backend, ChatRequest request,
                                    const JsonShape& shape) {
  request.validate();
  int attempts = backend.config().max_retries + 1;
  std::string last_raw;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    last_raw = backend.complete(request);
    std::string candidate = extract_json_object(last_raw);
    if (!candidate.empty()) {
      nlohmann::json parsed = nlohmann::json::parse(candidate, nullptr, false);
      if (!parsed.is_discarded() && !shape.check(parsed)) return parsed;
    }
    request.messages.push_back({Role::kAssistant, last_raw});
    request.messages.push_back({Role::kUser, std::string(kJsonRepairInstruction)});
  }
  throw SchemaViolation("model reply never matched the requested JSON shape",
                        last_raw);
}

using EmbedFn =
    std::function<std::vector<std::vector<double>>(const std::vector<std::string>&)>;

inline EmbedFn embedder(Backend& backend) {
  return [&backend](const std::vector<std::string>& texts) {
    return backend.embed(texts);
  };
}

}  // namespace pgen
