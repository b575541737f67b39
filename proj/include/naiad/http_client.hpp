#pragma once

// OpenAI-compatible chat-completions client. Endpoint and key come from the
// environment only: NAIAD_API_BASE (default https://api.openai.com/v1) and
// NAIAD_API_KEY.

#include <cstdlib>
#include <optional>
#include <string>

#include <httplib.h>
// <resolv.h>, pulled in by httplib, defines _res as a macro, which breaks
// Eigen headers included later in the same translation unit.
#undef _res

#include "naiad/core.hpp"
#include "naiad/llm_client.hpp"

namespace naiad {

class HttpChatClient final : public LlmClient {
 public:
  HttpChatClient(std::string base_url, std::string api_key, std::string model,
                 std::chrono::seconds timeout = std::chrono::seconds(120))
      : base_(std::move(base_url)), key_(std::move(api_key)), model_(std::move(model)), timeout_(timeout) {
    if (model_.empty()) throw InvalidArgument("model name must be non-empty");
  }

  static HttpChatClient from_env(const std::string& model) {
    const char* base = std::getenv("NAIAD_API_BASE");
    const char* key = std::getenv("NAIAD_API_KEY");
    if (!key || !*key) throw InvalidArgument("NAIAD_API_KEY is not set (required for client '" + model + "')");
    return HttpChatClient(base && *base ? base : "https://api.openai.com/v1", key, model);
  }

  std::string name() const override { return model_; }
  bool has(Capability) const override { return true; }

  std::string complete(std::string_view prompt, const DecodeParams& params) const override {
    std::optional<httplib::Client> holder;
    try {
      holder.emplace(origin());
    } catch (const std::invalid_argument& e) {
      throw InvalidArgument("endpoint " + base_ + ": " + e.what());
    }
    httplib::Client& cli = *holder;
    if (!cli.is_valid()) throw InvalidArgument("invalid endpoint " + base_);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_bearer_token_auth(key_);
    const json body{{"model", model_},
                    {"messages", json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
                    {"temperature", params.temperature},
                    {"max_tokens", params.max_tokens},
                    {"seed", params.seed & 0x7fffffffffffffffULL}};
    auto res = cli.Post(path_prefix() + "/chat/completions", body.dump(), "application/json");
    if (!res) throw TransportError(model_ + ": " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500) {
      throw TransportError(model_ + ": HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
      throw Error(model_ + ": HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
    }
    try {
      const json j = json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw ParseError(model_ + ": unexpected completion payload: " + e.what());
    }
  }

 private:
  // httplib takes scheme://host:port only; a path in the base URL (a proxy
  // prefix, say) is prepended to the request path instead.
  std::size_t path_start() const {
    const std::size_t scheme = base_.find("://");
    return base_.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  }

  std::string origin() const { return base_.substr(0, path_start()); }

  std::string path_prefix() const {
    const std::size_t slash = path_start();
    if (slash == std::string::npos) return "";
    std::string p = base_.substr(slash);
    while (!p.empty() && p.back() == '/') p.pop_back();
    return p;
  }

  std::string base_;
  std::string key_;
  std::string model_;
  std::chrono::seconds timeout_;
};

}  // namespace naiad
