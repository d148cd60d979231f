#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sectra/headings.hpp"

namespace sectra {

inline constexpr const char* kDefaultAuthEnv = "SECTRA_API_TOKEN";

// Connection settings for one remote capability. The auth token is looked
// up from the named environment variable at request time; it never
// appears in configuration files or reports.
struct BackendConfig {
  std::string endpoint;                 // e.g. "http://127.0.0.1:8080"
  std::string auth_env = kDefaultAuthEnv;
  double timeout_seconds = 30.0;
  int max_retries = 3;
  int backoff_base_ms = 100;
  int max_in_flight = 4;

  void validate() const;
};

struct GenerationParams {
  std::size_t min_words = 50;
  std::size_t max_words = 300;
  int beams = 5;
  int no_repeat_ngram = 2;

  void validate() const;
};

// The instruction line prompt-style generation backends prepend to their
// prompt; with the default 300-word cap it reads "Summarize the following
// scientific paper no more than 300 words".
std::string generation_instruction(const GenerationParams& params);

// Five score descriptions (1-5, in order) per judged aspect.
struct JudgeCriteria {
  std::array<std::string, 5> informativeness;
  std::array<std::string, 5> coherence;
  std::array<std::string, 5> readability;
};

JudgeCriteria default_judge_criteria();

struct JudgeResult {
  int informativeness = 0;
  int coherence = 0;
  int readability = 0;
};

// Transient transport problems (connect/timeout/5xx) that survived every
// retry.
struct TransportError : std::runtime_error {
  explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// The server answered, but not in the agreed schema.
struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// The judge response did not contain three in-range scores.
struct JudgeParseError : std::runtime_error {
  JudgeParseError(const std::string& what, std::string raw)
      : std::runtime_error(what), raw_response(std::move(raw)) {}
  std::string raw_response;
};

// HTTP JSON client for the three capabilities. Shareable across threads;
// each request is independent, carries a client-generated X-Request-Id
// header that is stable across retries of the same request, and the number
// of in-flight requests never exceeds cfg.max_in_flight.
class BackendClient {
 public:
  struct Slots;  // bounded in-flight request gate

  explicit BackendClient(BackendConfig cfg);
  ~BackendClient();

  BackendClient(const BackendClient&) = delete;
  BackendClient& operator=(const BackendClient&) = delete;

  // POST /classify {text} -> {probs: [4]}; the vector must sum to 1 ± 1e-6.
  std::array<double, kNumLabels> classify(const std::string& text) const;

  // POST /generate {text, params} -> {text}; params pass through unchanged.
  std::string generate(const std::string& input_text, const GenerationParams& params) const;

  // POST /judge {prompt} -> {text}; the reply is parsed into three scores.
  JudgeResult judge(const std::string& prompt) const;

  const BackendConfig& config() const { return cfg_; }

 private:
  nlohmann::json post_json(const std::string& path, const nlohmann::json& body) const;

  BackendConfig cfg_;
  std::string request_id_prefix_;
  mutable std::atomic<std::uint64_t> request_seq_{0};

  std::unique_ptr<Slots> slots_;
};

// Assembles the judging prompt: task introduction naming the three
// aspects, the criteria blocks, the four evaluation steps, then the
// human-written summary followed by the generated one.
std::string build_judge_prompt(const JudgeCriteria& criteria, const std::string& human_abstract,
                               const std::string& generated);

// First three integer tokens of the response, validated to 1-5; exposed so
// the parse rules are testable without a server.
JudgeResult parse_judge_response(const std::string& response);

}  // namespace sectra
