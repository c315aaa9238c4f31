#pragma once

#include <string>
#include <vector>

#include "personagen/backend.hpp"
#include "personagen/mock_backend.hpp"

namespace pgen::test {

// Replays a fixed list of completions and keeps every request for
// inspection. Embeddings fall back to the deterministic mock hash.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies)
      : replies_(std::move(replies)) {
    cfg_.model_name = "scripted";
  }

  std::string complete(const ChatRequest& request) override {
    requests.push_back(request);
    if (next_ >= replies_.size())
      throw BackendUnavailable("scripted backend ran out of replies");
    return replies_[next_++];
  }

  std::vector<std::vector<double>> embed(
      const std::vector<std::string>& texts) override {
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(MockBackend::embed_one(t));
    return out;
  }

  const BackendConfig& config() const override { return cfg_; }

  size_t replies_consumed() const { return next_; }

  std::vector<ChatRequest> requests;

 private:
  BackendConfig cfg_;
  std::vector<std::string> replies_;
  size_t next_ = 0;
};

// Forwards to the deterministic mock while recording every request,
// for prompt-fidelity assertions over full pipelines.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(std::uint64_t seed = 0) : mock_(make_config(seed)) {}

  std::string complete(const ChatRequest& request) override {
    requests.push_back(request);
    return mock_.complete(request);
  }

  std::vector<std::vector<double>> embed(
      const std::vector<std::string>& texts) override {
    embedded.insert(embedded.end(), texts.begin(), texts.end());
    return mock_.embed(texts);
  }

  const BackendConfig& config() const override { return mock_.config(); }

  std::vector<ChatRequest> requests;
  std::vector<std::string> embedded;

 private:
  static BackendConfig make_config(std::uint64_t seed) {
    BackendConfig cfg;
    cfg.seed = seed;
    return cfg;
  }

  MockBackend mock_;
};

inline MockBackend make_mock(std::uint64_t seed = 0) {
  BackendConfig cfg;
  cfg.seed = seed;
  return MockBackend(cfg);
}

// Joined text of every message in a request, for containment checks.
inline std::string request_text(const ChatRequest& request) {
  std::string out;
  for (const ChatMessage& m : request.messages) {
    out += m.content;
    out += '\n';
  }
  return out;
}

}  // namespace pgen::test
