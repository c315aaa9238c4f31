#pragma once

#include <cstdlib>
#include <functional>
#include <optional>
#include <string>

#include "personagen/backend.hpp"
#include "personagen/error.hpp"
#include "personagen/json_util.hpp"
#include "personagen/text.hpp"

namespace pgen {

// Layered settings: built-in defaults, then a key=value config file, then
// PGEN_* environment variables, then command-line flags. Later layers win.
struct AppConfig {
  BackendConfig backend;
  std::string backend_kind = "mock";
  std::string taxonomy_file;
  std::string tables_file;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int k = 200;
  double threshold = 0.70;
  int concurrency = 4;

  void validate() const {
    backend.validate();
    if (backend_kind != "mock" && backend_kind != "http")
      throw InvalidInput("backend must be 'mock' or 'http', got " + backend_kind);
    if (k < 0) throw InvalidInput("k must be non-negative");
    if (threshold <= 0.0) throw InvalidInput("threshold must be positive");
    if (concurrency < 1) throw InvalidInput("concurrency must be at least 1");
  }

  void apply_kv(const std::string& key, const std::string& value) {
    try {
      if (key == "backend") backend_kind = value;
      else if (key == "endpoint_url") backend.endpoint_url = value;
      else if (key == "model_name") backend.model_name = value;
      else if (key == "api_key_env") backend.api_key_env = value;
      else if (key == "max_retries") backend.max_retries = std::stoi(value);
      else if (key == "rate_limit") backend.rate_limit = std::stod(value);
      else if (key == "timeout_seconds") backend.timeout_seconds = std::stoi(value);
      else if (key == "temperature") backend.temperature = std::stod(value);
      else if (key == "taxonomy") taxonomy_file = value;
      else if (key == "tables") tables_file = value;
      else if (key == "output_dir") output_dir = value;
      else if (key == "seed") seed = std::stoull(value);
      else if (key == "k") k = std::stoi(value);
      else if (key == "threshold") threshold = std::stod(value);
      else if (key == "concurrency") concurrency = std::stoi(value);
      else throw InvalidInput("unknown config key: " + key);
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::exception&) {
      throw InvalidInput("bad value for config key " + key + ": " + value);
    }
  }

  // key=value lines; blank lines and # comments skipped.
  void apply_file(const std::filesystem::path& file) {
    for (const std::string& raw : split(read_file(file), '\n')) {
      std::string line = trim(raw);
      if (line.empty() || line[0] == '#') continue;
      size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw InvalidInput("config lines must be key=value, got: " + line);
      apply_kv(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }

  using EnvProvider = std::function<const char*(const char*)>;

  void apply_env(const EnvProvider& getenv_fn = [](const char* name) {
    return std::getenv(name);
  }) {
    static const std::pair<const char*, const char*> kVars[] = {
        {"PGEN_BACKEND", "backend"},
        {"PGEN_ENDPOINT_URL", "endpoint_url"},
        {"PGEN_MODEL_NAME", "model_name"},
        {"PGEN_API_KEY_ENV", "api_key_env"},
        {"PGEN_MAX_RETRIES", "max_retries"},
        {"PGEN_RATE_LIMIT", "rate_limit"},
        {"PGEN_TIMEOUT_SECONDS", "timeout_seconds"},
        {"PGEN_TEMPERATURE", "temperature"},
        {"PGEN_TAXONOMY", "taxonomy"},
        {"PGEN_TABLES", "tables"},
        {"PGEN_OUTPUT_DIR", "output_dir"},
        {"PGEN_SEED", "seed"},
        {"PGEN_K", "k"},
        {"PGEN_THRESHOLD", "threshold"},
        {"PGEN_CONCURRENCY", "concurrency"},
    };
    for (const auto& [env_name, key] : kVars)
      if (const char* value = getenv_fn(env_name)) apply_kv(key, value);
  }
};

}  // namespace pgen
