#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ecodse/design_space.hpp"
#include "ecodse/rng.hpp"

namespace ecodse {

/// Chat-completion client. complete() returns the assistant text for a
/// rendered prompt; implementations throw ExternalServiceError on failure.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& prompt, double temperature) = 0;
  virtual std::string name() const = 0;

  std::uint64_t calls() const { return calls_; }

 protected:
  std::uint64_t calls_ = 0;
};

/// Deterministic stand-in for a remote model. The uniform behavior emits
/// valid random configurations; the adversarial behavior cycles through
/// malformed, out-of-domain and truncated replies.
class MockClient : public LlmClient {
 public:
  enum class Behavior { UniformRandom, Adversarial, Scripted };

  MockClient(DesignSpace space, std::uint64_t seed, Behavior behavior = Behavior::UniformRandom);
  static MockClient scripted(DesignSpace space, std::vector<std::string> responses);

  std::string complete(const std::string& prompt, double temperature) override;
  std::string name() const override { return "mock"; }

 private:
  std::string uniform_response(int n);
  std::string adversarial_response(int n);

  DesignSpace space_;
  Rng rng_;
  Behavior behavior_;
  std::vector<std::string> script_;
  std::size_t script_pos_ = 0;
};

struct HttpClientConfig {
  std::string endpoint_url;  // e.g. https://host/v1/chat/completions
  std::string model;
  std::string token_env = "ECODSE_LLM_TOKEN";
  double timeout_s = 60.0;
  int max_retries = 2;
};

/// Wire client: POST {model, messages, temperature}, read
/// choices[0].message.content. The bearer token comes from the environment
/// variable named in the config and is required at construction.
class HttpChatClient : public LlmClient {
 public:
  explicit HttpChatClient(HttpClientConfig config);
  std::string complete(const std::string& prompt, double temperature) override;
  std::string name() const override { return "http:" + config_.model; }

 private:
  HttpClientConfig config_;
  std::string token_;
};

}  // namespace ecodse
