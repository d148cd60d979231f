#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sectra/headings.hpp"

namespace sectra {

// Relative word-budget weights per structural section. Defaults follow the
// 30/25/30/15 split for Background/Method/Result/Conclusion.
struct SectionWeights {
  std::array<double, kNumLabels> values = {0.30, 0.25, 0.30, 0.15};

  double of(SectionLabel label) const { return values.at(static_cast<std::size_t>(label)); }

  // Weights must be non-negative and sum to 1 within 1e-9.
  void validate() const;
};

// Word budgets for the labels present in one document, in canonical label
// order. Absent labels carry budget 0.
struct SummaryPlan {
  std::vector<SectionLabel> labels;
  std::array<std::size_t, kNumLabels> budgets = {0, 0, 0, 0};
  std::size_t total_cap = 0;

  std::size_t budget_of(SectionLabel label) const {
    return budgets.at(static_cast<std::size_t>(label));
  }
  std::size_t total_budget() const;
};

// Distributes `total_cap` words over the present labels proportionally to
// their weights (renormalized over the present ones), flooring each share
// and giving the leftover to the earliest present label.
SummaryPlan plan(const std::vector<SectionLabel>& present, const SectionWeights& weights,
                 std::size_t total_cap);

// Emits leading sentences while the running word total stays within
// `budget_words`; if the first sentence alone exceeds the budget, emits its
// first `budget_words` words.
std::string extractive_fallback(const std::vector<std::string>& sentences,
                                std::size_t budget_words);

struct LabeledSection {
  SectionLabel label = SectionLabel::Unmapped;
  std::string title;
  std::vector<std::string> sentences;
};

enum class SummaryMode {
  DivideAndConquer,
  FullDocument,
  ExtractiveFallback,
};

const char* summary_mode_name(SummaryMode mode);

struct SectionSummary {
  SectionLabel label = SectionLabel::Unmapped;
  std::string text;
  std::size_t words = 0;
};

struct GeneratedSummary {
  std::string article_id;
  SummaryMode mode = SummaryMode::DivideAndConquer;
  std::vector<SectionSummary> sections;  // canonical label order
  std::string text;                      // in-order concatenation of section texts
  std::size_t total_words = 0;

  nlohmann::json to_json() const;
};

struct GenerationError : std::runtime_error {
  GenerationError(SectionLabel label_, const std::string& what)
      : std::runtime_error(what), label(label_) {}
  SectionLabel label;
};

// Produces the summary text for one structural section. Receives the
// section's sentences in document order and the word budget; the result is
// truncated to the budget by the caller.
using SectionGenerator = std::function<std::string(
    SectionLabel label, const std::vector<std::string>& sentences, std::size_t budget_words)>;

// Produces a whole-document summary from a marker-segmented input, capped
// at `max_words` by the caller.
using DocumentGenerator =
    std::function<std::string(const std::string& input, std::size_t max_words)>;

// Section-by-section generation: sections sharing a label are concatenated
// in document order and generated once per label in canonical order.
// Sections whose label is not in the plan are ignored. A generator failure
// surfaces as GenerationError carrying the section label.
GeneratedSummary summarize_divide(const std::vector<LabeledSection>& sections,
                                  const SectionGenerator& generate, const SummaryPlan& plan,
                                  SummaryMode mode = SummaryMode::DivideAndConquer);

// Single-shot generation over the marker-segmented full document.
GeneratedSummary summarize_full(const std::vector<LabeledSection>& sections,
                                const DocumentGenerator& generate, const SummaryPlan& plan);

// The marker-segmented input consumed by summarize_full, exposed for
// inspection: one "[BACKGROUND]\n<text>" block per label present, in
// canonical label order, joined by newlines; text within a block keeps
// document order.
std::string full_document_input(const std::vector<LabeledSection>& sections);

}  // namespace sectra
