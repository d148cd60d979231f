#include "sectra/sfr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

#include <json.hpp>

#include "sectra/metrics.hpp"
#include "sectra/text.hpp"

namespace sectra {

const char* composition_variant_name(CompositionVariant variant) {
  switch (variant) {
    case CompositionVariant::TitleOnly: return "title_only";
    case CompositionVariant::ChapterText: return "chapter_text";
    case CompositionVariant::TitlePlusChapterText: return "title_plus_chapter_text";
    case CompositionVariant::TitlePlusHeadTail: return "title_plus_head_tail";
  }
  return "title_plus_head_tail";
}

CompositionVariant parse_composition_variant(std::string_view name) {
  if (name == "title_only") return CompositionVariant::TitleOnly;
  if (name == "chapter_text") return CompositionVariant::ChapterText;
  if (name == "title_plus_chapter_text") return CompositionVariant::TitlePlusChapterText;
  if (name == "title_plus_head_tail") return CompositionVariant::TitlePlusHeadTail;
  throw std::invalid_argument("unknown composition variant: " + std::string(name));
}

std::string compose_input(const Chapter& chapter, const CompositionStrategy& strategy) {
  if (strategy.token_budget == 0) throw std::invalid_argument("compose_input: zero token budget");

  bool uses_text = strategy.variant != CompositionVariant::TitleOnly;
  if (uses_text && chapter.sentences.empty())
    throw std::invalid_argument("compose_input: empty chapter with a text-using strategy");

  std::vector<const std::string*> picked;
  if (strategy.variant == CompositionVariant::ChapterText ||
      strategy.variant == CompositionVariant::TitlePlusChapterText) {
    for (const std::string& s : chapter.sentences) picked.push_back(&s);
  } else if (strategy.variant == CompositionVariant::TitlePlusHeadTail) {
    if (strategy.head_tail_percent <= 0 || strategy.head_tail_percent > 100)
      throw std::invalid_argument("compose_input: head/tail percent out of range");
    std::size_t n = chapter.sentences.size();
    std::size_t k = static_cast<std::size_t>(
        std::lround(static_cast<double>(strategy.head_tail_percent) / 100.0 *
                    static_cast<double>(n)));
    if (k >= n) {
      for (const std::string& s : chapter.sentences) picked.push_back(&s);
    } else {
      std::size_t head = (k + 1) / 2;
      std::size_t tail = k / 2;
      for (std::size_t i = 0; i < head; ++i) picked.push_back(&chapter.sentences[i]);
      for (std::size_t i = n - tail; i < n; ++i) picked.push_back(&chapter.sentences[i]);
    }
  }

  bool with_title = strategy.variant != CompositionVariant::ChapterText;
  std::string out;
  std::size_t used = 0;
  if (with_title) {
    out = canonicalize_heading(chapter.title);
    used = word_count(out);  // title may exceed the budget; it stays whole
  }
  for (const std::string* sentence : picked) {
    for (const std::string& word : split_words(*sentence)) {
      if (used >= strategy.token_budget) return out;
      if (!out.empty()) out += ' ';
      out += word;
      ++used;
    }
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

void check_feature_dim(std::size_t feature_dim) {
  if (feature_dim == 0 || (feature_dim & (feature_dim - 1)) != 0)
    throw std::invalid_argument("feature_dim must be a power of two");
}

}  // namespace

SparseVector featurize(std::string_view text, std::size_t feature_dim,
                       const std::vector<int>& ngram_orders) {
  check_feature_dim(feature_dim);
  std::vector<std::string> tokens = tokenize(text);

  std::unordered_map<std::uint32_t, double> acc;
  std::uint64_t mask = feature_dim - 1;
  for (int n : ngram_orders) {
    if (n < 1) throw std::invalid_argument("featurize: n-gram order must be >= 1");
    if (tokens.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int j = 1; j < n; ++j) {
        gram += '\x1f';
        gram += tokens[i + j];
      }
      ++acc[static_cast<std::uint32_t>(fnv1a64(gram) & mask)];
    }
  }

  SparseVector features(acc.begin(), acc.end());
  std::sort(features.begin(), features.end());
  double norm_sq = 0.0;
  for (const auto& [index, value] : features) norm_sq += value * value;
  if (norm_sq > 0.0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& [index, value] : features) value *= inv;
  }
  return features;
}

std::array<double, kNumLabels> SfrModel::logits(const SparseVector& features) const {
  std::array<double, kNumLabels> z = bias;
  for (const auto& [index, value] : features) {
    for (int c = 0; c < kNumLabels; ++c) {
      z[c] += weights[static_cast<std::size_t>(c) * feature_dim + index] * value;
    }
  }
  return z;
}

std::array<double, kNumLabels> softmax(const std::array<double, kNumLabels>& logits) {
  double max_z = *std::max_element(logits.begin(), logits.end());
  std::array<double, kNumLabels> p{};
  double sum = 0.0;
  for (int c = 0; c < kNumLabels; ++c) {
    p[c] = std::exp(logits[c] - max_z);
    sum += p[c];
  }
  for (int c = 0; c < kNumLabels; ++c) p[c] /= sum;
  return p;
}

Prediction predict_features(const SfrModel& model, const SparseVector& features) {
  std::array<double, kNumLabels> z = model.logits(features);
  for (double v : z) {
    if (!std::isfinite(v)) throw std::domain_error("predict: non-finite logits");
  }
  Prediction pred;
  pred.probs = softmax(z);
  int best = 0;
  for (int c = 1; c < kNumLabels; ++c) {
    if (pred.probs[c] > pred.probs[best]) best = c;  // ties keep the earliest
  }
  pred.label = static_cast<SectionLabel>(best);
  return pred;
}

Prediction predict(const SfrModel& model, std::string_view text) {
  return predict_features(model, featurize(text, model.feature_dim, model.ngram_orders));
}

double cross_entropy(const std::vector<std::array<double, kNumLabels>>& probs,
                     const std::vector<SectionLabel>& labels, double floor) {
  if (probs.empty()) throw std::invalid_argument("cross_entropy: empty batch");
  if (probs.size() != labels.size())
    throw std::invalid_argument("cross_entropy: probs and labels differ in length");

  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (labels[i] == SectionLabel::Unmapped)
      throw std::invalid_argument("cross_entropy: Unmapped is not a terminal label");
    double p = probs[i][static_cast<std::size_t>(labels[i])];
    total += -std::log(std::max(p, floor));
  }
  return total / static_cast<double>(probs.size());
}

namespace {

double full_loss(const SfrModel& model, const std::vector<SparseVector>& features,
                 const std::vector<SectionLabel>& labels) {
  std::vector<std::array<double, kNumLabels>> probs;
  probs.reserve(features.size());
  for (const SparseVector& f : features) probs.push_back(softmax(model.logits(f)));
  return cross_entropy(probs, labels);
}

}  // namespace

TrainResult train(const std::vector<LabeledText>& data, const SfrOptions& options,
                  const TrainOptions& train_options) {
  if (data.empty()) throw std::invalid_argument("train: empty training data");
  check_feature_dim(options.feature_dim);
  if (train_options.epochs < 0) throw std::invalid_argument("train: negative epochs");
  if (train_options.batch_size == 0) throw std::invalid_argument("train: zero batch size");
  if (!(train_options.learning_rate > 0.0))
    throw std::invalid_argument("train: learning rate must be positive");

  TrainResult result;
  SfrModel& model = result.model;
  model.feature_dim = options.feature_dim;
  model.ngram_orders = options.ngram_orders;
  model.weights.assign(static_cast<std::size_t>(kNumLabels) * options.feature_dim, 0.0);
  model.epochs = train_options.epochs;
  model.learning_rate = train_options.learning_rate;
  model.seed = train_options.seed;

  std::array<std::size_t, kNumLabels> label_counts{};
  std::vector<SparseVector> features;
  std::vector<SectionLabel> labels;
  features.reserve(data.size());
  labels.reserve(data.size());
  for (const LabeledText& example : data) {
    if (example.label == SectionLabel::Unmapped)
      throw std::invalid_argument("train: Unmapped is not a trainable label");
    features.push_back(featurize(example.text, options.feature_dim, options.ngram_orders));
    labels.push_back(example.label);
    ++label_counts[static_cast<std::size_t>(example.label)];
  }
  int distinct = 0;
  for (std::size_t c : label_counts) distinct += c > 0 ? 1 : 0;
  if (distinct < 2) {
    result.warnings.push_back("training data covers a single label; the model will degenerate");
  }

  std::mt19937_64 rng(train_options.seed);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < train_options.epochs; ++epoch) {
    // Hand-rolled Fisher-Yates: std::shuffle is implementation-defined.
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = rng() % i;
      std::swap(order[i - 1], order[j]);
    }

    for (std::size_t start = 0; start < order.size(); start += train_options.batch_size) {
      std::size_t end = std::min(order.size(), start + train_options.batch_size);
      double inv_batch = 1.0 / static_cast<double>(end - start);

      // Gradients accumulate against the weights as they stood at the top
      // of the batch; the loss gradient wrt logits is (p - y) / batch.
      std::unordered_map<std::uint32_t, std::array<double, kNumLabels>> grad;
      std::array<double, kNumLabels> grad_bias{};
      for (std::size_t b = start; b < end; ++b) {
        std::size_t i = order[b];
        std::array<double, kNumLabels> p = softmax(model.logits(features[i]));
        for (int c = 0; c < kNumLabels; ++c) {
          double g = (p[c] - (static_cast<int>(labels[i]) == c ? 1.0 : 0.0)) * inv_batch;
          grad_bias[c] += g;
          for (const auto& [index, value] : features[i]) {
            auto [it, inserted] = grad.try_emplace(index);
            it->second[c] += g * value;
          }
        }
      }
      for (const auto& [index, g] : grad) {
        for (int c = 0; c < kNumLabels; ++c) {
          model.weights[static_cast<std::size_t>(c) * model.feature_dim + index] -=
              train_options.learning_rate * g[c];
        }
      }
      for (int c = 0; c < kNumLabels; ++c)
        model.bias[c] -= train_options.learning_rate * grad_bias[c];
    }
    result.epoch_losses.push_back(full_loss(model, features, labels));
  }

  result.final_loss =
      result.epoch_losses.empty() ? full_loss(model, features, labels) : result.epoch_losses.back();
  return result;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (const auto& row : counts) {
    for (std::uint64_t v : row) sum += v;
  }
  return sum;
}

std::vector<std::vector<std::uint64_t>> ConfusionMatrix::rows() const {
  std::vector<std::vector<std::uint64_t>> out;
  out.reserve(kNumLabels);
  for (const auto& row : counts) out.emplace_back(row.begin(), row.end());
  return out;
}

ConfusionMatrix evaluate(const SfrModel& model, const std::vector<LabeledText>& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty evaluation data");
  ConfusionMatrix cm;
  for (const LabeledText& example : data) {
    if (example.label == SectionLabel::Unmapped)
      throw std::invalid_argument("evaluate: Unmapped is not a terminal label");
    Prediction pred = predict(model, example.text);
    ++cm.counts[static_cast<std::size_t>(example.label)][static_cast<std::size_t>(pred.label)];
  }
  return cm;
}

namespace {

constexpr const char* kModelFormat = "sectra-sfr-model";
constexpr int kModelVersion = 1;

}  // namespace

void save_model(const SfrModel& model, const std::string& path) {
  nlohmann::json j{
      {"format", kModelFormat},
      {"version", kModelVersion},
      {"feature_dim", model.feature_dim},
      {"ngram_orders", model.ngram_orders},
      {"bias", model.bias},
      {"weights", model.weights},
      {"metadata",
       {{"epochs", model.epochs},
        {"learning_rate", model.learning_rate},
        {"seed", model.seed}}},
  };
  std::ofstream out(path);
  if (!out) throw ModelFormatError("model: cannot write " + path);
  out << j.dump() << '\n';
  if (!out) throw ModelFormatError("model: write to " + path + " failed");
}

SfrModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("model: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object())
    throw ModelFormatError("model: " + path + " is not a JSON object");
  if (!j.contains("format") || j.at("format") != kModelFormat)
    throw ModelFormatError("model: " + path + " has an unknown format");
  if (!j.contains("version") || !j.at("version").is_number_integer() ||
      j.at("version").get<int>() != kModelVersion) {
    throw ModelFormatError("model: " + path + " has an unsupported version");
  }

  SfrModel model;
  try {
    model.feature_dim = j.at("feature_dim").get<std::size_t>();
    model.ngram_orders = j.at("ngram_orders").get<std::vector<int>>();
    model.bias = j.at("bias").get<std::array<double, kNumLabels>>();
    model.weights = j.at("weights").get<std::vector<double>>();
    const nlohmann::json& meta = j.at("metadata");
    model.epochs = meta.at("epochs").get<int>();
    model.learning_rate = meta.at("learning_rate").get<double>();
    model.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError("model: " + path + " is malformed: " + e.what());
  }
  check_feature_dim(model.feature_dim);
  if (model.weights.size() != static_cast<std::size_t>(kNumLabels) * model.feature_dim)
    throw ModelFormatError("model: " + path + " has a weight matrix of the wrong shape");
  return model;
}

}  // namespace sectra
