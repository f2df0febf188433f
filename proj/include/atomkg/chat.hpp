#pragma once

#include <string>
#include <vector>

#include "atomkg/errors.hpp"

namespace atomkg {

// Connection settings for the remote model endpoints.  `base_url` is an
// http:// URL, optionally with a path prefix (e.g. http://host:8080/v1);
// requests go to {base_url}/chat/completions and {base_url}/embeddings.
// TLS is deliberately out of scope — point the client at a local gateway
// when the upstream requires https.
struct RemoteConfig {
  std::string base_url;
  std::string model;
  std::string api_key;        // empty → taken from $ATOMKG_API_KEY
  double timeout_seconds = 30.0;
  int max_attempts = 3;       // per request, non-2xx and transport errors
  int backoff_initial_ms = 250;  // doubles after each failed attempt
};

// A request that kept failing after the configured retries, or a response
// body the client could not make sense of.
struct TransportError : Error {
  TransportError(const std::string& message, int status_code,
                 std::string response_body)
      : Error(message), status(status_code), body(std::move(response_body)) {}
  int status;        // 0 when the failure happened below HTTP
  std::string body;  // last response body, possibly empty
};

// Minimal chat-completions client: one user message, temperature 0, plain
// string reply.  Retries with exponential backoff per RemoteConfig.
class ChatClient {
 public:
  explicit ChatClient(RemoteConfig config);
  std::string complete(const std::string& prompt) const;
  const RemoteConfig& config() const { return config_; }

 private:
  RemoteConfig config_;
};

// Embeddings-endpoint client with the same transport behavior.
class EmbeddingClient {
 public:
  explicit EmbeddingClient(RemoteConfig config);
  std::vector<double> embed(const std::string& text) const;
  const RemoteConfig& config() const { return config_; }

 private:
  RemoteConfig config_;
};

// Reads $ATOMKG_API_KEY, empty string when unset.
std::string api_key_from_environment();

}  // namespace atomkg
