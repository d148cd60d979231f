#include "sectra/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "sectra/text.hpp"

namespace sectra {

namespace {

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_vowel);
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Small plural / -ed / -ing stripper. Deliberately simple; only used when
// the stemming flag is on.
std::string stem_token(std::string t) {
  if (t.size() > 4 && ends_with(t, "sses")) {
    t.resize(t.size() - 2);
  } else if (t.size() > 3 && ends_with(t, "ies")) {
    t.resize(t.size() - 2);  // studies -> studi
  } else if (t.size() > 3 && !ends_with(t, "ss") && ends_with(t, "s")) {
    t.resize(t.size() - 1);
  }
  if (t.size() > 5 && ends_with(t, "ing") && has_vowel(std::string_view(t).substr(0, t.size() - 3))) {
    t.resize(t.size() - 3);
  } else if (t.size() > 4 && ends_with(t, "ed") && has_vowel(std::string_view(t).substr(0, t.size() - 2))) {
    t.resize(t.size() - 2);
  }
  return t;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, bool stem) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
    } else if (!current.empty()) {
      tokens.push_back(stem ? stem_token(std::move(current)) : std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(stem ? stem_token(std::move(current)) : std::move(current));
  return tokens;
}

namespace {

RougeScore with_f1(double precision, double recall) {
  RougeScore s;
  s.precision = precision;
  s.recall = recall;
  s.f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return s;
}

std::unordered_map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                          int n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n: order must be >= 1");
  auto cand = ngram_counts(candidate, n);
  auto ref = ngram_counts(reference, n);
  std::size_t cand_total =
      candidate.size() >= static_cast<std::size_t>(n) ? candidate.size() - n + 1 : 0;
  std::size_t ref_total =
      reference.size() >= static_cast<std::size_t>(n) ? reference.size() - n + 1 : 0;

  std::size_t clipped = 0;
  for (const auto& [gram, ref_count] : ref) {
    auto it = cand.find(gram);
    if (it != cand.end()) clipped += std::min(ref_count, it->second);
  }
  double p = cand_total ? static_cast<double>(clipped) / static_cast<double>(cand_total) : 0.0;
  double r = ref_total ? static_cast<double>(clipped) / static_cast<double>(ref_total) : 0.0;
  return with_f1(p, r);
}

RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference) {
  if (candidate.empty() || reference.empty()) return with_f1(0.0, 0.0);

  // Two-row LCS table.
  std::vector<std::size_t> prev(reference.size() + 1, 0);
  std::vector<std::size_t> cur(reference.size() + 1, 0);
  for (std::size_t i = 1; i <= candidate.size(); ++i) {
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      if (candidate[i - 1] == reference[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  double lcs = static_cast<double>(prev[reference.size()]);
  return with_f1(lcs / static_cast<double>(candidate.size()),
                 lcs / static_cast<double>(reference.size()));
}

MacroScores macro_scores(const std::vector<std::vector<std::uint64_t>>& confusion) {
  std::size_t k = confusion.size();
  if (k == 0) throw std::invalid_argument("macro_scores: empty confusion matrix");
  std::uint64_t total = 0;
  for (const auto& row : confusion) {
    if (row.size() != k) throw std::invalid_argument("macro_scores: matrix is not square");
    for (std::uint64_t v : row) total += v;
  }
  if (total == 0) throw std::invalid_argument("macro_scores: all-zero confusion matrix");

  MacroScores out;
  out.precision.resize(k, 0.0);
  out.recall.resize(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    std::uint64_t col = 0;
    std::uint64_t row = 0;
    for (std::size_t i = 0; i < k; ++i) {
      col += confusion[i][c];
      row += confusion[c][i];
    }
    bool flagged = false;
    if (col > 0) {
      out.precision[c] = static_cast<double>(confusion[c][c]) / static_cast<double>(col);
    } else {
      flagged = true;
    }
    if (row > 0) {
      out.recall[c] = static_cast<double>(confusion[c][c]) / static_cast<double>(row);
    } else {
      flagged = true;
    }
    if (flagged) out.zero_denominator_classes.push_back(c);
    out.macro_p += out.precision[c];
    out.macro_r += out.recall[c];
  }
  out.macro_p /= static_cast<double>(k);
  out.macro_r /= static_cast<double>(k);
  out.macro_f1 = (out.macro_p + out.macro_r) > 0.0
                     ? 2.0 * out.macro_p * out.macro_r / (out.macro_p + out.macro_r)
                     : 0.0;
  return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

void collect_grams(const std::vector<std::string>& tokens, std::vector<std::string>* grams) {
  for (const std::string& t : tokens) grams->push_back(t);
  for (std::size_t i = 0; i + 2 <= tokens.size(); ++i) {
    grams->push_back(tokens[i] + '\x1f' + tokens[i + 1]);
  }
}

}  // namespace

TfIdfEmbedder::TfIdfEmbedder(const std::vector<std::string>& fit_docs) {
  std::map<std::string, std::size_t> df;
  for (const std::string& doc : fit_docs) {
    std::vector<std::string> grams;
    collect_grams(tokenize(doc), &grams);
    std::set<std::string> uniq(grams.begin(), grams.end());
    for (const std::string& g : uniq) ++df[g];
  }
  std::size_t index = 0;
  idf_.reserve(df.size());
  double n_docs = static_cast<double>(fit_docs.size());
  for (const auto& [gram, doc_freq] : df) {
    vocab_.emplace(gram, index++);
    idf_.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(doc_freq))) + 1.0);
  }
}

std::vector<double> TfIdfEmbedder::embed(const std::string& text) const {
  std::vector<double> v(vocab_.size(), 0.0);
  std::vector<std::string> grams;
  collect_grams(tokenize(text), &grams);
  for (const std::string& g : grams) {
    auto it = vocab_.find(g);
    if (it != vocab_.end()) v[it->second] += 1.0;
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= idf_[i];
  return v;
}

std::vector<SectionLabel> assign_sections(const std::vector<std::string>& summary_sentences,
                                          const std::vector<LabeledSectionText>& sections,
                                          const Embedder& embedder) {
  if (sections.empty()) throw std::invalid_argument("assign_sections: no sections");
  std::vector<std::vector<double>> section_vecs;
  section_vecs.reserve(sections.size());
  for (const LabeledSectionText& sec : sections) section_vecs.push_back(embedder.embed(sec.text));

  std::vector<SectionLabel> out;
  out.reserve(summary_sentences.size());
  for (const std::string& sentence : summary_sentences) {
    std::vector<double> v = embedder.embed(sentence);
    double best_sim = -1.0;
    SectionLabel best = SectionLabel::Unmapped;
    for (std::size_t i = 0; i < sections.size(); ++i) {
      double sim = cosine_similarity(v, section_vecs[i]);
      if (sim > best_sim ||
          (sim == best_sim && static_cast<int>(sections[i].label) < static_cast<int>(best))) {
        best_sim = sim;
        best = sections[i].label;
      }
    }
    out.push_back(best);
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> pieces;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    bool boundary = (c == '.' || c == '!' || c == '?') &&
                    (i + 1 >= text.size() ||
                     std::isspace(static_cast<unsigned char>(text[i + 1])));
    if (boundary) {
      std::string piece = trim(text.substr(start, i + 1 - start));
      if (!piece.empty()) pieces.push_back(piece);
      start = i + 1;
    }
  }
  std::string tail = trim(text.substr(start));
  if (!tail.empty()) pieces.push_back(tail);

  // Enforce a minimum of two words per sentence: short fragments (e.g. the
  // "Dr." in "Dr. Smith") merge into the following piece, and a short final
  // piece folds backwards.
  std::vector<std::string> out;
  for (std::string& piece : pieces) {
    if (!out.empty() && word_count(out.back()) < 2) {
      out.back() += ' ';
      out.back() += piece;
    } else {
      out.push_back(std::move(piece));
    }
  }
  if (out.size() >= 2 && word_count(out.back()) < 2) {
    std::string last = std::move(out.back());
    out.pop_back();
    out.back() += ' ';
    out.back() += last;
  }
  return out;
}

CompressionNorm default_compression_norm() {
  return CompressionNorm{"r_over_1_plus_r", [](double r) { return r / (1.0 + r); }};
}

GemCrReport gem_cr(const std::string& summary_text,
                   const std::vector<LabeledSectionText>& sections,
                   const SectionWeights& weights, const Embedder& embedder,
                   const CompressionNorm& norm) {
  if (sections.empty()) throw std::invalid_argument("gem_cr: no source sections");
  if (norm.fn == nullptr || norm.name.empty())
    throw std::invalid_argument("gem_cr: invalid compression norm");

  GemCrReport report;
  report.norm_name = norm.name;
  report.sentences = split_sentences(summary_text);

  std::size_t summary_words = word_count(summary_text);
  if (summary_words == 0 || report.sentences.empty())
    throw std::invalid_argument("gem_cr: empty summary");

  report.sentence_labels = assign_sections(report.sentences, sections, embedder);

  std::set<SectionLabel> source_set;
  std::size_t source_words = 0;
  for (const LabeledSectionText& sec : sections) {
    source_set.insert(sec.label);
    source_words += word_count(sec.text);
  }
  std::set<SectionLabel> covered_set(report.sentence_labels.begin(),
                                     report.sentence_labels.end());

  double denom = 0.0;
  double num = 0.0;
  for (SectionLabel label : kLabelOrder) {
    if (!source_set.count(label)) continue;
    report.source_labels.push_back(label);
    denom += weights.of(label);
    if (covered_set.count(label)) {
      report.covered_labels.push_back(label);
      num += weights.of(label);
    }
  }
  report.coverage = denom > 0.0 ? num / denom : 0.0;
  report.compression =
      static_cast<double>(source_words) / static_cast<double>(summary_words);
  report.norm = norm.fn(report.compression);
  report.score = report.coverage * report.norm;
  return report;
}

ConfidenceInterval bootstrap_ci(const std::vector<double>& samples, double level, int resamples,
                                std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("bootstrap_ci: no samples");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap_ci: level must be in (0, 1)");
  if (resamples < 1) throw std::invalid_argument("bootstrap_ci: resamples must be >= 1");

  std::mt19937_64 rng(seed);
  std::size_t n = samples.size();
  std::vector<double> means;
  means.reserve(resamples);
  for (int r = 0; r < resamples; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      // Index drawn directly from the engine: uniform_int_distribution is
      // implementation-defined, and the slight modulo bias is irrelevant
      // at these sizes.
      sum += samples[rng() % n];
    }
    means.push_back(sum / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());

  auto quantile = [&](double q) {
    double h = q * static_cast<double>(means.size() - 1);
    std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= means.size()) return means.back();
    return means[i] + (h - static_cast<double>(i)) * (means[i + 1] - means[i]);
  };
  double alpha = (1.0 - level) / 2.0;
  return ConfidenceInterval{quantile(alpha), quantile(1.0 - alpha)};
}

std::vector<HistogramBin> length_histogram(const std::vector<std::size_t>& lengths,
                                           std::size_t bin_width) {
  if (bin_width == 0) throw std::invalid_argument("length_histogram: zero bin width");
  if (lengths.empty()) return {};
  std::size_t lo = *std::min_element(lengths.begin(), lengths.end());
  std::size_t hi = *std::max_element(lengths.begin(), lengths.end());
  std::size_t first_bin = lo / bin_width;
  std::size_t last_bin = hi / bin_width;

  std::vector<HistogramBin> bins;
  bins.reserve(last_bin - first_bin + 1);
  for (std::size_t b = first_bin; b <= last_bin; ++b) {
    HistogramBin bin;
    bin.lo = static_cast<long>(b * bin_width);
    bin.hi = static_cast<long>((b + 1) * bin_width);
    bins.push_back(bin);
  }
  for (std::size_t len : lengths) ++bins[len / bin_width - first_bin].count;
  return bins;
}

}  // namespace sectra
