#include "atomkg/chat.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace atomkg {

namespace {

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string prefix;  // path prefix without trailing slash, may be empty
};

ParsedUrl parse_base_url(const std::string& url) {
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw UsageError(
        "base URL must start with http:// (TLS is not supported — use a "
        "local gateway): " +
        url);
  }
  std::string rest = url.substr(scheme.size());
  ParsedUrl parsed;
  const std::size_t slash = rest.find('/');
  if (slash != std::string::npos) {
    parsed.prefix = rest.substr(slash);
    while (!parsed.prefix.empty() && parsed.prefix.back() == '/') {
      parsed.prefix.pop_back();
    }
    rest = rest.substr(0, slash);
  }
  const std::size_t colon = rest.find(':');
  if (colon != std::string::npos) {
    parsed.host = rest.substr(0, colon);
    try {
      parsed.port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw UsageError("bad port in base URL: " + url);
    }
  } else {
    parsed.host = rest;
  }
  if (parsed.host.empty()) throw UsageError("bad base URL: " + url);
  return parsed;
}

std::string bearer_key(const RemoteConfig& config) {
  return config.api_key.empty() ? api_key_from_environment() : config.api_key;
}

// POSTs `body` to {base_url}{endpoint} with retry/backoff per the config;
// returns the response body of the first 2xx answer.
std::string post_json(const RemoteConfig& config, const std::string& endpoint,
                      const std::string& body) {
  const ParsedUrl url = parse_base_url(config.base_url);
  httplib::Client client(url.host, url.port);
  const auto timeout =
      std::chrono::milliseconds(static_cast<long>(config.timeout_seconds * 1000));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  const std::string key = bearer_key(config);
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  const int attempts = std::max(1, config.max_attempts);
  int last_status = 0;
  std::string last_body;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(
          config.backoff_initial_ms << (attempt - 1)));
    }
    httplib::Result result = client.Post(url.prefix + endpoint, headers, body,
                                         "application/json");
    if (result && result->status >= 200 && result->status < 300) {
      return result->body;
    }
    if (result) {
      last_status = result->status;
      last_body = result->body;
    } else {
      last_status = 0;
      last_body = httplib::to_string(result.error());
    }
  }
  throw TransportError("request to " + config.base_url + endpoint +
                           " failed after " + std::to_string(attempts) +
                           " attempts (last status " +
                           std::to_string(last_status) + ")",
                       last_status, last_body);
}

}  // namespace

std::string api_key_from_environment() {
  const char* key = std::getenv("ATOMKG_API_KEY");
  return key ? key : "";
}

ChatClient::ChatClient(RemoteConfig config) : config_(std::move(config)) {}

std::string ChatClient::complete(const std::string& prompt) const {
  const nlohmann::json request = {
      {"model", config_.model},
      {"messages",
       nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
  };
  const std::string body =
      post_json(config_, "/chat/completions", request.dump());

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw TransportError("chat endpoint returned a non-JSON body", 200, body);
  }
  // Accept the common completions shape and two bare fallbacks.
  if (reply.contains("choices") && reply["choices"].is_array() &&
      !reply["choices"].empty()) {
    const nlohmann::json& first = reply["choices"][0];
    if (first.contains("message") && first["message"].contains("content")) {
      return first["message"]["content"].get<std::string>();
    }
    if (first.contains("text")) return first["text"].get<std::string>();
  }
  if (reply.contains("content") && reply["content"].is_string()) {
    return reply["content"].get<std::string>();
  }
  throw TransportError("chat endpoint reply carries no generated text", 200,
                       body);
}

EmbeddingClient::EmbeddingClient(RemoteConfig config)
    : config_(std::move(config)) {}

std::vector<double> EmbeddingClient::embed(const std::string& text) const {
  const nlohmann::json request = {
      {"model", config_.model},
      {"input", text},
  };
  const std::string body = post_json(config_, "/embeddings", request.dump());

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw TransportError("embeddings endpoint returned a non-JSON body", 200,
                         body);
  }
  const nlohmann::json* vector = nullptr;
  if (reply.contains("data") && reply["data"].is_array() &&
      !reply["data"].empty() && reply["data"][0].contains("embedding")) {
    vector = &reply["data"][0]["embedding"];
  } else if (reply.contains("embedding")) {
    vector = &reply["embedding"];
  }
  if (vector == nullptr || !vector->is_array()) {
    throw TransportError("embeddings endpoint reply carries no vector", 200,
                         body);
  }
  std::vector<double> out;
  out.reserve(vector->size());
  for (const nlohmann::json& v : *vector) out.push_back(v.get<double>());
  return out;
}

}  // namespace atomkg
