#include "sectra/summarizer.hpp"

#include <algorithm>
#include <cmath>

#include "sectra/text.hpp"

namespace sectra {

void SectionWeights::validate() const {
  double sum = 0.0;
  for (double w : values) {
    if (!(w >= 0.0)) throw std::invalid_argument("section weights must be non-negative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("section weights must sum to 1");
}

std::size_t SummaryPlan::total_budget() const {
  std::size_t total = 0;
  for (std::size_t b : budgets) total += b;
  return total;
}

const char* summary_mode_name(SummaryMode mode) {
  switch (mode) {
    case SummaryMode::DivideAndConquer: return "divide_and_conquer";
    case SummaryMode::FullDocument: return "full_document";
    case SummaryMode::ExtractiveFallback: return "extractive_fallback";
  }
  return "divide_and_conquer";
}

SummaryPlan plan(const std::vector<SectionLabel>& present, const SectionWeights& weights,
                 std::size_t total_cap) {
  weights.validate();
  if (total_cap == 0) throw std::invalid_argument("plan: zero total cap");

  std::vector<SectionLabel> labels;
  for (SectionLabel label : kLabelOrder) {
    if (std::find(present.begin(), present.end(), label) != present.end()) labels.push_back(label);
  }
  if (labels.empty()) throw std::invalid_argument("plan: no present labels");

  double weight_sum = 0.0;
  for (SectionLabel label : labels) weight_sum += weights.of(label);
  if (weight_sum <= 0.0) throw std::invalid_argument("plan: present labels carry zero weight");

  SummaryPlan p;
  p.labels = labels;
  p.total_cap = total_cap;
  std::size_t assigned = 0;
  for (SectionLabel label : labels) {
    double share = static_cast<double>(total_cap) * weights.of(label) / weight_sum;
    // The nudge keeps shares that are exact integers (up to rounding noise
    // in the weight arithmetic) from flooring one word short.
    std::size_t budget = static_cast<std::size_t>(std::floor(share + 1e-9));
    p.budgets[static_cast<std::size_t>(label)] = budget;
    assigned += budget;
  }
  // Leftover words go to the earliest present label.
  p.budgets[static_cast<std::size_t>(labels.front())] += total_cap - assigned;
  return p;
}

std::string extractive_fallback(const std::vector<std::string>& sentences,
                                std::size_t budget_words) {
  if (budget_words == 0) throw std::invalid_argument("extractive_fallback: zero budget");
  if (sentences.empty()) return "";

  if (word_count(sentences.front()) > budget_words) {
    return truncate_words(sentences.front(), budget_words);
  }
  std::string out;
  std::size_t used = 0;
  for (const std::string& sentence : sentences) {
    std::size_t w = word_count(sentence);
    if (used + w > budget_words) break;
    if (!out.empty()) out += ' ';
    out += sentence;
    used += w;
  }
  return out;
}

namespace {

// Sentences of all sections carrying `label`, in document order.
std::vector<std::string> gather_label(const std::vector<LabeledSection>& sections,
                                      SectionLabel label) {
  std::vector<std::string> out;
  for (const LabeledSection& sec : sections) {
    if (sec.label != label) continue;
    out.insert(out.end(), sec.sentences.begin(), sec.sentences.end());
  }
  return out;
}

}  // namespace

GeneratedSummary summarize_divide(const std::vector<LabeledSection>& sections,
                                  const SectionGenerator& generate, const SummaryPlan& plan,
                                  SummaryMode mode) {
  if (!generate) throw std::invalid_argument("summarize_divide: no generator");

  GeneratedSummary summary;
  summary.mode = mode;
  for (SectionLabel label : plan.labels) {
    std::vector<std::string> sentences = gather_label(sections, label);
    if (sentences.empty()) {
      throw std::invalid_argument(std::string("summarize_divide: planned label ") +
                                  label_name(label) + " has no sections");
    }
    std::size_t budget = plan.budget_of(label);
    std::string text;
    try {
      text = generate(label, sentences, budget);
    } catch (const std::exception& e) {
      throw GenerationError(label, std::string("generation failed for ") + label_name(label) +
                                       ": " + e.what());
    }
    SectionSummary part;
    part.label = label;
    part.text = truncate_words(text, budget);
    part.words = word_count(part.text);
    if (!summary.text.empty() && !part.text.empty()) summary.text += ' ';
    summary.text += part.text;
    summary.sections.push_back(std::move(part));
  }
  summary.total_words = word_count(summary.text);
  return summary;
}

std::string full_document_input(const std::vector<LabeledSection>& sections) {
  std::vector<std::string> blocks;
  for (SectionLabel label : kLabelOrder) {
    std::vector<std::string> sentences = gather_label(sections, label);
    if (sentences.empty()) continue;
    std::string name = label_name(label);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    blocks.push_back('[' + name + "]\n" + join(sentences, " "));
  }
  return join(blocks, "\n");
}

GeneratedSummary summarize_full(const std::vector<LabeledSection>& sections,
                                const DocumentGenerator& generate, const SummaryPlan& plan) {
  if (!generate) throw std::invalid_argument("summarize_full: no generator");
  if (sections.empty()) throw std::invalid_argument("summarize_full: no sections");

  std::string input = full_document_input(sections);
  std::string text;
  try {
    text = generate(input, plan.total_cap);
  } catch (const std::exception& e) {
    throw GenerationError(SectionLabel::Unmapped,
                          std::string("full-document generation failed: ") + e.what());
  }
  GeneratedSummary summary;
  summary.mode = SummaryMode::FullDocument;
  summary.text = truncate_words(text, plan.total_cap);
  summary.total_words = word_count(summary.text);
  return summary;
}

nlohmann::json GeneratedSummary::to_json() const {
  nlohmann::json sections_json = nlohmann::json::array();
  for (const SectionSummary& part : sections) {
    sections_json.push_back({
        {"label", label_name(part.label)},
        {"text", part.text},
        {"words", part.words},
    });
  }
  return nlohmann::json{
      {"article_id", article_id},
      {"mode", summary_mode_name(mode)},
      {"sections", sections_json},
      {"text", text},
      {"total_words", total_words},
  };
}

}  // namespace sectra
