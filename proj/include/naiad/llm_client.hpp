#pragma once

// Capability-tagged text-completion boundary. Real HTTP clients and the mock
// both implement LlmClient.

#include <chrono>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "naiad/error.hpp"

namespace naiad {

enum class Capability { generator, judge, synthesizer };

inline const char* to_string(Capability c) {
  switch (c) {
    case Capability::generator: return "generator";
    case Capability::judge: return "judge";
    case Capability::synthesizer: return "synthesizer";
  }
  return "?";
}

struct DecodeParams {
  double temperature = 0.7;
  int max_tokens = 2048;
  std::uint64_t seed = 0;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string name() const = 0;
  virtual bool has(Capability c) const = 0;
  /// Throws TransportError on a transport-level failure.
  virtual std::string complete(std::string_view prompt, const DecodeParams& params) const = 0;
};

/// Mock whose output is a pure function of (prompt, params). No shared
/// mutable state, so it is safe to call concurrently.
class MockClient final : public LlmClient {
 public:
  using Responder = std::function<std::string(std::string_view prompt, const DecodeParams&)>;

  MockClient(std::string name, std::set<Capability> caps, Responder responder)
      : name_(std::move(name)), caps_(std::move(caps)), responder_(std::move(responder)) {}

  std::string name() const override { return name_; }
  bool has(Capability c) const override { return caps_.count(c) > 0; }
  std::string complete(std::string_view prompt, const DecodeParams& params) const override {
    return responder_(prompt, params);
  }

 private:
  std::string name_;
  std::set<Capability> caps_;
  Responder responder_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
};

/// Calls client.complete, retrying transport failures with exponential
/// backoff. After the last retry the error message carries the attempt log.
inline std::string complete_with_retry(const LlmClient& client, std::string_view prompt, const DecodeParams& params,
                                       const RetryPolicy& policy, std::vector<std::string>* log = nullptr) {
  auto backoff = policy.initial_backoff;
  std::string history;
  for (int attempt = 0;; ++attempt) {
    try {
      return client.complete(prompt, params);
    } catch (const TransportError& e) {
      const std::string line = "transport attempt " + std::to_string(attempt + 1) + ": " + e.what();
      if (log) log->push_back(line);
      history += (history.empty() ? "" : "; ") + line;
      if (attempt >= policy.max_retries) {
        throw TransportError(client.name() + " failed after " + std::to_string(attempt + 1) +
                             " attempts [" + history + "]");
      }
      if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
}

}  // namespace naiad
