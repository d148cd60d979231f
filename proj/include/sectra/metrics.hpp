#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sectra/headings.hpp"
#include "sectra/summarizer.hpp"

namespace sectra {

// Lowercases and splits on any non-alphanumeric byte, dropping empties:
// "IL-18 levels" -> {il, 18, levels}. With `stem` a lightweight suffix
// stripper is applied per token (plural/-ed/-ing forms; it does not aim to
// match any reference stemmer).
std::vector<std::string> tokenize(std::string_view text, bool stem = false);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// N-gram overlap with clipped matches: each reference n-gram credits at
// most its own count. Empty candidate or reference yields zeros rather
// than dividing by zero.
RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n);

// Summary-level longest common subsequence: recall LCS/|reference|,
// precision LCS/|candidate|.
RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference);

struct MacroScores {
  std::vector<double> precision;  // per class, diagonal / column sum
  std::vector<double> recall;     // per class, diagonal / row sum
  double macro_p = 0.0;
  double macro_r = 0.0;
  double macro_f1 = 0.0;  // harmonic mean of macro_p and macro_r
  std::vector<std::size_t> zero_denominator_classes;
};

// Rows are true classes, columns predicted. Classes with a zero
// denominator contribute 0 to the corresponding mean and are flagged.
MacroScores macro_scores(const std::vector<std::vector<std::uint64_t>>& confusion);

// Zero if either vector has zero magnitude.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Maps texts into a shared vector space; implementations must be
// deterministic for a fixed fit corpus.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
};

// Local TF-IDF embedder over unigrams and bigrams, fit on a handful of
// documents (typically the sections of one paper). Vocabulary is sorted so
// the mapping never depends on input order; idf = ln((1+N)/(1+df)) + 1.
class TfIdfEmbedder : public Embedder {
 public:
  explicit TfIdfEmbedder(const std::vector<std::string>& fit_docs);
  std::vector<double> embed(const std::string& text) const override;
  std::size_t vocab_size() const { return vocab_.size(); }

 private:
  std::map<std::string, std::size_t> vocab_;
  std::vector<double> idf_;
};

struct LabeledSectionText {
  SectionLabel label = SectionLabel::Unmapped;
  std::string text;
};

// Nearest-section assignment by cosine similarity; ties resolve to the
// smaller canonical label (all-zero similarities land on the earliest
// label present, i.e. Background when it exists).
std::vector<SectionLabel> assign_sections(const std::vector<std::string>& summary_sentences,
                                          const std::vector<LabeledSectionText>& sections,
                                          const Embedder& embedder);

// Splits after '.', '!' or '?' followed by whitespace (or end of text);
// pieces shorter than two whitespace words merge into their neighbor.
std::vector<std::string> split_sentences(std::string_view text);

struct GemCrReport {
  double coverage = 0.0;     // weight of covered source sections / total weight
  double compression = 0.0;  // r = source words / summary words
  double norm = 0.0;         // Norm(r)
  double score = 0.0;        // coverage * norm
  std::string norm_name;     // which normalization produced `norm`
  std::vector<SectionLabel> source_labels;   // labels present in the source
  std::vector<SectionLabel> covered_labels;  // labels hit by summary sentences
  std::vector<std::string> sentences;        // summary sentences, in order
  std::vector<SectionLabel> sentence_labels; // assignment per sentence
};

// Normalization of the compression ratio onto (0, 1); must be monotone.
struct CompressionNorm {
  std::string name;
  double (*fn)(double r);
};

// Default: Norm(r) = r / (1 + r).
CompressionNorm default_compression_norm();

// Section-coverage score: assigns each summary sentence to its closest
// source section, then multiplies the weight-fraction of covered sections
// by the normalized source/summary compression ratio.
GemCrReport gem_cr(const std::string& summary_text,
                   const std::vector<LabeledSectionText>& sections,
                   const SectionWeights& weights, const Embedder& embedder,
                   const CompressionNorm& norm = default_compression_norm());

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap over resampled means; deterministic for a fixed
// seed. `level` is the two-sided coverage, e.g. 0.95.
ConfidenceInterval bootstrap_ci(const std::vector<double>& samples, double level = 0.95,
                                int resamples = 1000, std::uint64_t seed = 0);

struct HistogramBin {
  long lo = 0;  // inclusive, a multiple of the bin width
  long hi = 0;  // exclusive
  std::size_t count = 0;
};

std::vector<HistogramBin> length_histogram(const std::vector<std::size_t>& lengths,
                                           std::size_t bin_width);

}  // namespace sectra
