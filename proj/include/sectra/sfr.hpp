#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sectra/headings.hpp"

namespace sectra {

// One chapter of a paper as seen by the classifier.
struct Chapter {
  std::string title;                   // raw heading, canonicalized on use
  std::vector<std::string> sentences;  // body sentences in order
  std::string source_article;
};

enum class CompositionVariant {
  TitleOnly,
  ChapterText,
  TitlePlusChapterText,
  TitlePlusHeadTail,
};

const char* composition_variant_name(CompositionVariant variant);
CompositionVariant parse_composition_variant(std::string_view name);

// How a chapter becomes classifier input. TitlePlusHeadTail keeps
// k = round(percent/100 * n) sentences: the first ceil(k/2) and the last
// floor(k/2).
struct CompositionStrategy {
  CompositionVariant variant = CompositionVariant::TitlePlusHeadTail;
  int head_tail_percent = 50;     // only used by TitlePlusHeadTail
  std::size_t token_budget = 512; // whitespace tokens in the composed input
};

// Composes the classifier input for one chapter: canonicalized title (for
// title-bearing variants) followed by the selected sentences, truncated to
// the token budget. The title is always emitted in full, even when it
// exceeds the budget by itself.
std::string compose_input(const Chapter& chapter, const CompositionStrategy& strategy);

// FNV-1a 64-bit; fixed here so hashed features are stable across builds
// and serialized models stay valid.
std::uint64_t fnv1a64(std::string_view data);

// Sparse L2-normalized feature vector, sorted by feature index.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

// Hashed bag of n-grams over tokenize(text). feature_dim must be a power
// of two so bucketing reduces to a mask.
SparseVector featurize(std::string_view text, std::size_t feature_dim,
                       const std::vector<int>& ngram_orders);

struct SfrOptions {
  std::size_t feature_dim = std::size_t{1} << 18;
  std::vector<int> ngram_orders = {1, 2};
};

struct TrainOptions {
  double learning_rate = 0.1;
  int epochs = 20;
  std::size_t batch_size = 16;
  std::uint64_t seed = 42;
};

// Multinomial softmax regression over hashed features. Weights are stored
// row-major, one row of feature_dim per label in canonical order.
struct SfrModel {
  std::size_t feature_dim = 0;
  std::vector<int> ngram_orders;
  std::vector<double> weights;
  std::array<double, kNumLabels> bias{};

  // Training metadata, carried through serialization.
  int epochs = 0;
  double learning_rate = 0.0;
  std::uint64_t seed = 0;

  std::array<double, kNumLabels> logits(const SparseVector& features) const;
};

std::array<double, kNumLabels> softmax(const std::array<double, kNumLabels>& logits);

struct Prediction {
  SectionLabel label = SectionLabel::Background;
  std::array<double, kNumLabels> probs{};
};

// Argmax of softmax(logits); ties keep the earliest label. Non-finite
// logits raise std::domain_error.
Prediction predict_features(const SfrModel& model, const SparseVector& features);
Prediction predict(const SfrModel& model, std::string_view text);

// Mean negative log-likelihood; probabilities are clamped at `floor`
// before the log. Callers pass probability vectors that sum to 1.
double cross_entropy(const std::vector<std::array<double, kNumLabels>>& probs,
                     const std::vector<SectionLabel>& labels, double floor = 1e-12);

struct LabeledText {
  std::string text;
  SectionLabel label = SectionLabel::Background;
};

struct TrainResult {
  SfrModel model;
  double final_loss = 0.0;
  std::vector<double> epoch_losses;  // full-set loss after each epoch
  std::vector<std::string> warnings;
};

// Seeded mini-batch gradient descent on the cross-entropy loss. Zero
// epochs returns the zero-initialized model (final_loss is its loss on the
// data). Deterministic: same data and seed give bitwise-identical weights.
TrainResult train(const std::vector<LabeledText>& data, const SfrOptions& options,
                  const TrainOptions& train_options);

// Rows are true labels, columns predictions, canonical order both ways.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumLabels>, kNumLabels> counts{};

  std::uint64_t total() const;
  std::vector<std::vector<std::uint64_t>> rows() const;
};

ConfusionMatrix evaluate(const SfrModel& model, const std::vector<LabeledText>& data);

struct ModelFormatError : std::runtime_error {
  explicit ModelFormatError(const std::string& what) : std::runtime_error(what) {}
};

// Versioned JSON serialization; loading rejects unknown formats and
// versions, and weights round-trip exactly.
void save_model(const SfrModel& model, const std::string& path);
SfrModel load_model(const std::string& path);

}  // namespace sectra
