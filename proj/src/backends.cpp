#include "sectra/backends.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

namespace sectra {

void BackendConfig::validate() const {
  if (endpoint.empty()) throw std::invalid_argument("backend: endpoint not configured");
  if (max_retries < 0) throw std::invalid_argument("backend: max_retries must be >= 0");
  if (max_in_flight < 1) throw std::invalid_argument("backend: max_in_flight must be >= 1");
  if (!(timeout_seconds > 0.0)) throw std::invalid_argument("backend: timeout must be positive");
  if (backoff_base_ms < 0) throw std::invalid_argument("backend: backoff base must be >= 0");
}

void GenerationParams::validate() const {
  if (min_words == 0 || min_words > max_words)
    throw std::invalid_argument("generation params: need 0 < min_words <= max_words");
}

std::string generation_instruction(const GenerationParams& params) {
  return "Summarize the following scientific paper no more than " +
         std::to_string(params.max_words) + " words";
}

JudgeCriteria default_judge_criteria() {
  JudgeCriteria c;
  c.informativeness = {
      "The summary includes very little or none of the key information from the human-written "
      "abstract.",
      "The summary includes some information but misses the key points from the human-written "
      "abstract.",
      "The summary includes around half of the key points from the human-written abstract but "
      "lacks critical details.",
      "The summary includes most of the key points from the human-written abstract, with only "
      "minor details missing.",
      "The summary includes almost all key points from the human-written abstract with strong "
      "detail and accuracy.",
  };
  c.coherence = {
      "The summary lacks coherence, with sentences that are disconnected and lack logical flow.",
      "The summary has limited coherence, with noticeable issues in logical flow or organization.",
      "The summary is generally coherent, though it contains minor breaks in flow or "
      "organization.",
      "The summary is mostly coherent, with clear logical flow and only occasional minor "
      "disruptions in structure or clarity.",
      "The summary is fully coherent, with seamless logical flow and structure, making it easy "
      "to understand.",
  };
  c.readability = {
      "The language is disjointed, with significant grammar or word usage errors, and difficult "
      "to read.",
      "The language contains noticeable grammar or word usage errors, but the overall meaning "
      "can still be read.",
      "The language flows generally smooth but contains a few grammatical or word usage errors, "
      "it remains readable.",
      "The language reads mostly smooth, with minor grammar or word usage errors, but overall "
      "reads well.",
      "The language flows very smooth, with no grammar or word usage errors, and is easy to "
      "read.",
  };
  return c;
}

namespace {

void append_criteria_block(std::ostringstream& os, const char* aspect,
                           const std::array<std::string, 5>& descriptions) {
  os << "- Criteria for " << aspect << ":\n";
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    os << (i + 1) << ". " << descriptions[i] << "\n";
  }
}

}  // namespace

std::string build_judge_prompt(const JudgeCriteria& criteria, const std::string& human_abstract,
                               const std::string& generated) {
  for (const auto* aspect : {&criteria.informativeness, &criteria.coherence,
                             &criteria.readability}) {
    for (const std::string& description : *aspect) {
      if (description.empty())
        throw std::invalid_argument("judge prompt: criteria descriptions must be non-empty");
    }
  }
  if (human_abstract.empty() || generated.empty())
    throw std::invalid_argument("judge prompt: both summaries must be non-empty");

  std::ostringstream os;
  os << "You will be given a generated summary and a Human-written summary for a scientific "
        "paper. Your task is to rate the generated summary on three aspects: informativeness, "
        "readability, coherence. The criteria for each aspect are as follows:\n\n";
  append_criteria_block(os, "informativeness", criteria.informativeness);
  os << "\n";
  append_criteria_block(os, "readability", criteria.readability);
  os << "\n";
  append_criteria_block(os, "coherence", criteria.coherence);
  os << "\nEvaluation Steps:\n"
        "1. Read the Human-written summary carefully and assess its key points, clarity, and "
        "logical flow as a reference.\n"
        "2. Read the generated summary and compare it to the Human-written summary.\n"
        "3. Assign a score for each aspect on a scale of 1 to 5, where 1 is the lowest and 5 is "
        "the highest based on the Evaluation Criteria.\n"
        "4. Your output should only be the score, without additional comments or explanations.\n"
        "\n";
  os << "Human-written summary:\n" << human_abstract << "\n\n";
  os << "Generated Summary:\n" << generated << "\n\n";
  os << "- Informativeness:\n- Coherence:\n- Readability:\n";
  return os.str();
}

JudgeResult parse_judge_response(const std::string& response) {
  std::vector<long> numbers;
  std::size_t i = 0;
  while (i < response.size() && numbers.size() < 3) {
    if (std::isdigit(static_cast<unsigned char>(response[i]))) {
      std::size_t start = i;
      while (i < response.size() && std::isdigit(static_cast<unsigned char>(response[i]))) ++i;
      numbers.push_back(std::stol(response.substr(start, i - start)));
    } else {
      ++i;
    }
  }
  if (numbers.size() < 3) {
    throw JudgeParseError("judge: expected three scores, found " +
                              std::to_string(numbers.size()),
                          response);
  }
  for (long n : numbers) {
    if (n < 1 || n > 5) {
      throw JudgeParseError("judge: score " + std::to_string(n) + " outside 1-5", response);
    }
  }
  return JudgeResult{static_cast<int>(numbers[0]), static_cast<int>(numbers[1]),
                     static_cast<int>(numbers[2])};
}

// Counting semaphore bounding in-flight requests. std::counting_semaphore
// wants a compile-time max, so a small mutex/condvar one is clearer.
struct BackendClient::Slots {
  explicit Slots(int count) : available(count) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mu);
      ++available;
    }
    cv.notify_one();
  }

  std::mutex mu;
  std::condition_variable cv;
  int available;
};

BackendClient::BackendClient(BackendConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::random_device rd;
  std::ostringstream os;
  os << std::hex << rd() << rd();
  request_id_prefix_ = os.str();
  slots_ = std::make_unique<Slots>(cfg_.max_in_flight);
}

BackendClient::~BackendClient() = default;

namespace {

struct SlotGuard {
  explicit SlotGuard(BackendClient::Slots& slots) : slots_(slots) { slots_.acquire(); }
  ~SlotGuard() { slots_.release(); }
  BackendClient::Slots& slots_;
};

std::chrono::milliseconds backoff_delay(int base_ms, int attempt) {
  // Exponential with jitter: base * 2^attempt, scaled by [1.0, 1.5).
  static thread_local std::mt19937_64 rng(
      std::random_device{}() ^
      static_cast<std::uint64_t>(std::hash<std::thread::id>{}(std::this_thread::get_id())));
  double exp = static_cast<double>(base_ms) * std::pow(2.0, std::min(attempt, 8));
  double jitter = 1.0 + 0.5 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  long ms = std::lround(std::min(exp * jitter, 10000.0));
  return std::chrono::milliseconds(ms);
}

}  // namespace

nlohmann::json BackendClient::post_json(const std::string& path,
                                        const nlohmann::json& body) const {
  SlotGuard guard(*slots_);

  std::string request_id =
      request_id_prefix_ + "-" + std::to_string(request_seq_.fetch_add(1) + 1);
  std::string payload = body.dump();

  httplib::Client client(cfg_.endpoint);
  auto timeout = std::chrono::microseconds(
      static_cast<long long>(cfg_.timeout_seconds * 1e6));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers{{"X-Request-Id", request_id}};
  if (!cfg_.auth_env.empty()) {
    if (const char* token = std::getenv(cfg_.auth_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  std::string last_failure;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff_delay(cfg_.backoff_base_ms, attempt - 1));

    httplib::Result res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_failure = httplib::to_string(res.error());
      continue;  // transport failure: retry
    }
    if (res->status >= 500) {
      last_failure = "server status " + std::to_string(res->status);
      continue;  // transient server failure: retry
    }
    if (res->status != 200) {
      throw ProtocolError("backend " + path + ": unexpected status " +
                          std::to_string(res->status));
    }
    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      throw ProtocolError("backend " + path + ": response is not a JSON object");
    }
    return parsed;
  }
  throw TransportError("backend " + path + ": " + last_failure + " after " +
                       std::to_string(cfg_.max_retries) + " retries");
}

std::array<double, kNumLabels> BackendClient::classify(const std::string& text) const {
  nlohmann::json response = post_json("/classify", nlohmann::json{{"text", text}});
  if (!response.contains("probs") || !response.at("probs").is_array() ||
      response.at("probs").size() != static_cast<std::size_t>(kNumLabels)) {
    throw ProtocolError("backend /classify: expected probs[" + std::to_string(kNumLabels) + "]");
  }
  std::array<double, kNumLabels> probs{};
  double sum = 0.0;
  for (int c = 0; c < kNumLabels; ++c) {
    const nlohmann::json& v = response.at("probs").at(c);
    if (!v.is_number()) throw ProtocolError("backend /classify: probs contains a non-number");
    probs[c] = v.get<double>();
    if (!std::isfinite(probs[c]) || probs[c] < 0.0)
      throw ProtocolError("backend /classify: invalid probability");
    sum += probs[c];
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw ProtocolError("backend /classify: probabilities sum to " + std::to_string(sum));
  return probs;
}

std::string BackendClient::generate(const std::string& input_text,
                                    const GenerationParams& params) const {
  if (input_text.empty()) throw std::invalid_argument("generate: empty input");
  params.validate();
  nlohmann::json body{
      {"text", input_text},
      {"params",
       {{"min_words", params.min_words},
        {"max_words", params.max_words},
        {"beams", params.beams},
        {"no_repeat_ngram", params.no_repeat_ngram}}},
  };
  nlohmann::json response = post_json("/generate", body);
  if (!response.contains("text") || !response.at("text").is_string())
    throw ProtocolError("backend /generate: expected {text}");
  return response.at("text").get<std::string>();
}

JudgeResult BackendClient::judge(const std::string& prompt) const {
  if (prompt.empty()) throw std::invalid_argument("judge: empty prompt");
  nlohmann::json response = post_json("/judge", nlohmann::json{{"prompt", prompt}});
  if (!response.contains("text") || !response.at("text").is_string())
    throw ProtocolError("backend /judge: expected {text}");
  return parse_judge_response(response.at("text").get<std::string>());
}

}  // namespace sectra
