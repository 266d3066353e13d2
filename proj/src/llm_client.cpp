#include "ecodse/llm_client.hpp"

#include <cstdlib>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "ecodse/errors.hpp"

namespace ecodse {

using nlohmann::json;

namespace {

int requested_count(const std::string& prompt) {
  static const std::regex pattern(R"(exactly (\d+) solutions)");
  std::smatch m;
  if (std::regex_search(prompt, m, pattern)) return std::stoi(m[1]);
  return 1;
}

}  // namespace

MockClient::MockClient(DesignSpace space, std::uint64_t seed, Behavior behavior)
    : space_(std::move(space)), rng_(make_rng(seed_for(seed, "mock-llm"))), behavior_(behavior) {}

MockClient MockClient::scripted(DesignSpace space, std::vector<std::string> responses) {
  MockClient client(std::move(space), 0, Behavior::Scripted);
  client.script_ = std::move(responses);
  return client;
}

std::string MockClient::uniform_response(int n) {
  std::ostringstream os;
  os << "Here are the requested configurations.\n```\n";
  for (int i = 0; i < n; ++i) {
    const Configuration c = space_.random_config(rng_);
    os << '[';
    for (std::size_t g = 0; g < c.values.size(); ++g) {
      if (g) os << ", ";
      os << knob_value_to_string(c.values[g]);
    }
    os << "]\n";
  }
  os << "```\n";
  return os.str();
}

std::string MockClient::adversarial_response(int n) {
  // Cycle through failure shapes; every run sees several of them.
  const std::uint64_t mode = rng_() % 5;
  std::ostringstream os;
  switch (mode) {
    case 0:
      return "I considered the knobs carefully but prefer to describe them in prose only.";
    case 1: {
      os << "```\n";
      for (int i = 0; i < n; ++i) {
        os << '[';
        for (std::size_t g = 0; g < space_.knobs().size(); ++g) {
          if (g) os << ", ";
          os << -997.5 - static_cast<double>(rng_() % 100);  // far outside every domain
        }
        os << "]\n";
      }
      os << "```\n";
      return os.str();
    }
    case 2: {
      // Too few solutions and a ragged one.
      os << "```\n[";
      const auto& knobs = space_.knobs();
      for (std::size_t g = 0; g + 1 < knobs.size(); ++g) {
        if (g) os << ", ";
        os << knob_value_to_string(knobs[g].domain.front());
      }
      os << "]\n";
      os << "[not, even, values";
      os << "\n```\n";
      return os.str();
    }
    case 3: {
      // Valid but unfenced and duplicated.
      const Configuration c = space_.random_config(rng_);
      std::string line = "[";
      for (std::size_t g = 0; g < c.values.size(); ++g) {
        if (g) line += ", ";
        line += knob_value_to_string(c.values[g]);
      }
      line += "]";
      for (int i = 0; i < n; ++i) os << line << '\n';
      return os.str();
    }
    default:
      return uniform_response(std::max(1, n / 2));  // short batch
  }
}

std::string MockClient::complete(const std::string& prompt, double temperature) {
  (void)temperature;
  ++calls_;
  const int n = requested_count(prompt);
  switch (behavior_) {
    case Behavior::UniformRandom:
      return uniform_response(n);
    case Behavior::Adversarial:
      return adversarial_response(n);
    case Behavior::Scripted: {
      check(!script_.empty(), "scripted mock: no responses");
      const std::string& r = script_[std::min(script_pos_, script_.size() - 1)];
      ++script_pos_;
      return r;
    }
  }
  throw Error("mock client: unknown behavior");
}

HttpChatClient::HttpChatClient(HttpClientConfig config) : config_(std::move(config)) {
  check(!config_.endpoint_url.empty(), "http client: endpoint_url is required");
  check(!config_.model.empty(), "http client: model is required");
  const char* token = std::getenv(config_.token_env.c_str());
  if (token == nullptr || *token == '\0')
    throw ExternalServiceError("http client: auth token environment variable '" +
                               config_.token_env + "' is not set");
  token_ = token;
}

std::string HttpChatClient::complete(const std::string& prompt, double temperature) {
  ++calls_;
  // Split scheme://host[:port]/path.
  std::string url = config_.endpoint_url;
  std::string scheme_host = url;
  std::string path = "/";
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start != std::string::npos) {
    scheme_host = url.substr(0, path_start);
    path = url.substr(path_start);
  }

  json body;
  body["model"] = config_.model;
  body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = temperature;
  const std::string payload = body.dump();

  httplib::Client client(scheme_host);
  client.set_connection_timeout(static_cast<int>(config_.timeout_s));
  client.set_read_timeout(static_cast<int>(config_.timeout_s));
  httplib::Headers headers = {{"Authorization", "Bearer " + token_}};

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    try {
      json reply = json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      last_error = std::string("malformed completion body: ") + e.what();
    }
  }
  throw ExternalServiceError("http client: " + last_error);
}

}  // namespace ecodse
