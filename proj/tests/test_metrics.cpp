#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sectra/metrics.hpp"
#include "sectra/summarizer.hpp"
#include "sectra/text.hpp"

using namespace sectra;

namespace {

std::vector<std::string> toks(std::initializer_list<const char*> words) {
  return std::vector<std::string>(words.begin(), words.end());
}

// Brute-force clipped n-gram overlap, independent of the implementation.
RougeScore oracle_rouge_n(const std::vector<std::string>& cand,
                          const std::vector<std::string>& ref, int n) {
  auto grams = [&](const std::vector<std::string>& t) {
    std::map<std::vector<std::string>, int> m;
    for (std::size_t i = 0; i + n <= t.size(); ++i)
      ++m[std::vector<std::string>(t.begin() + i, t.begin() + i + n)];
    return m;
  };
  auto c = grams(cand), r = grams(ref);
  int match = 0, c_total = 0, r_total = 0;
  for (auto& [g, k] : c) c_total += k;
  for (auto& [g, k] : r) r_total += k;
  for (auto& [g, k] : r) {
    auto it = c.find(g);
    if (it != c.end()) match += std::min(k, it->second);
  }
  RougeScore s;
  s.precision = c_total ? double(match) / c_total : 0.0;
  s.recall = r_total ? double(match) / r_total : 0.0;
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

std::size_t oracle_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> dp(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      dp[i][j] = a[i - 1] == b[j - 1] ? dp[i - 1][j - 1] + 1 : std::max(dp[i - 1][j], dp[i][j - 1]);
  return dp[a.size()][b.size()];
}

std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len,
                                       int vocab) {
  std::size_t len = rng() % (max_len + 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < len; ++i) out.push_back("w" + std::to_string(rng() % vocab));
  return out;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("IL-18 levels") == toks({"il", "18", "levels"}));
  CHECK(tokenize("  The cat. ") == toks({"the", "cat"}));
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("...!?") == std::vector<std::string>{});
}

TEST_CASE("tokenize with stemming strips simple suffixes") {
  auto t = tokenize("cats running studied", true);
  REQUIRE(t.size() == 3);
  CHECK(t[0] == "cat");
  CHECK(t[1] == "runn");
  CHECK(t[2] == "studi");
}

TEST_CASE("rouge_n worked bigram fixture") {
  auto cand = tokenize("the cat on the mat");
  auto ref = tokenize("the cat sat on the mat");
  RougeScore s = rouge_n(cand, ref, 2);
  CHECK(s.precision == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(s.recall == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(s.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("rouge_n identities and degenerate inputs") {
  auto x = toks({"a", "b", "a", "c"});
  for (int n = 1; n <= 3; ++n) {
    RougeScore s = rouge_n(x, x, n);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
  }
  RougeScore disjoint = rouge_n(toks({"a", "b"}), toks({"c", "d"}), 1);
  CHECK(disjoint.f1 == 0.0);
  RougeScore empty = rouge_n({}, x, 1);
  CHECK(empty.precision == 0.0);
  CHECK(empty.recall == 0.0);
  CHECK(empty.f1 == 0.0);
  // n longer than both sequences: no n-grams on either side.
  RougeScore shorter = rouge_n(toks({"a"}), toks({"b"}), 2);
  CHECK(shorter.f1 == 0.0);
  CHECK_THROWS_AS(rouge_n(x, x, 0), std::invalid_argument);
}

TEST_CASE("rouge_n swap symmetry and oracle agreement") {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 200; ++iter) {
    auto a = random_tokens(rng, 30, 6);
    auto b = random_tokens(rng, 30, 6);
    int n = 1 + int(rng() % 3);
    RougeScore ab = rouge_n(a, b, n);
    RougeScore ba = rouge_n(b, a, n);
    CHECK(ab.precision == ba.recall);
    CHECK(ab.recall == ba.precision);
    CHECK(ab.f1 == ba.f1);
    RougeScore oracle = oracle_rouge_n(a, b, n);
    CHECK(ab.precision == oracle.precision);
    CHECK(ab.recall == oracle.recall);
    CHECK(ab.f1 == oracle.f1);
  }
}

TEST_CASE("rouge_l worked fixture and oracle agreement") {
  auto ref = toks({"a", "b", "c", "d"});
  auto cand = toks({"a", "c", "d"});
  RougeScore s = rouge_l(cand, ref);
  CHECK(s.precision == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s.recall == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(s.f1 == doctest::Approx(6.0 / 7.0).epsilon(1e-9));

  CHECK(rouge_l({}, ref).f1 == 0.0);
  CHECK(rouge_l(cand, {}).f1 == 0.0);

  std::mt19937_64 rng(12);
  for (int iter = 0; iter < 200; ++iter) {
    auto a = random_tokens(rng, 30, 5);
    auto b = random_tokens(rng, 30, 5);
    RougeScore got = rouge_l(a, b);
    std::size_t lcs = oracle_lcs(a, b);
    CHECK(lcs <= std::min(a.size(), b.size()));
    if (!a.empty() && !b.empty()) {
      CHECK(got.precision == double(lcs) / a.size());
      CHECK(got.recall == double(lcs) / b.size());
    }
  }
}

TEST_CASE("macro_scores on the two-class worked fixture") {
  MacroScores m = macro_scores({{1, 1}, {0, 1}});
  REQUIRE(m.precision.size() == 2);
  CHECK(m.precision[0] == doctest::Approx(1.0));
  CHECK(m.precision[1] == doctest::Approx(0.5));
  CHECK(m.recall[0] == doctest::Approx(0.5));
  CHECK(m.recall[1] == doctest::Approx(1.0));
  CHECK(m.macro_p == doctest::Approx(0.75));
  CHECK(m.macro_r == doctest::Approx(0.75));
  CHECK(m.macro_f1 == doctest::Approx(0.75));
  CHECK(m.zero_denominator_classes.empty());
}

TEST_CASE("macro_f1 is the harmonic mean of the macro means") {
  // Both classes have per-class F1 = 2/3, so their mean is 2/3; the
  // harmonic mean of Macro_P = Macro_R = 0.75 is 0.75 instead.
  MacroScores m = macro_scores({{2, 0}, {2, 2}});
  double per_class_f1_mean =
      0.5 * (2.0 * m.precision[0] * m.recall[0] / (m.precision[0] + m.recall[0]) +
             2.0 * m.precision[1] * m.recall[1] / (m.precision[1] + m.recall[1]));
  double harmonic = 2.0 * m.macro_p * m.macro_r / (m.macro_p + m.macro_r);
  CHECK(m.macro_f1 == doctest::Approx(harmonic).epsilon(1e-12));
  CHECK(std::fabs(m.macro_f1 - per_class_f1_mean) > 1e-3);
}

TEST_CASE("macro_scores flags zero-denominator classes") {
  // Class 1 never predicted (zero column); class 2 never true (zero row).
  MacroScores m = macro_scores({{3, 0, 1}, {2, 0, 0}, {0, 0, 0}});
  CHECK(m.precision[1] == 0.0);
  CHECK(m.recall[2] == 0.0);
  CHECK(m.zero_denominator_classes == std::vector<std::size_t>{1, 2});

  CHECK_THROWS_AS(macro_scores({}), std::invalid_argument);
  CHECK_THROWS_AS(macro_scores({{0, 0}, {0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(macro_scores({{1, 2}, {3}}), std::invalid_argument);
}

TEST_CASE("macro_scores invariant under consistent permutation") {
  std::vector<std::vector<std::uint64_t>> cm = {{5, 1, 0, 2}, {0, 7, 1, 1},
                                                {2, 0, 6, 0}, {1, 1, 1, 4}};
  std::vector<std::size_t> perm = {2, 0, 3, 1};
  std::vector<std::vector<std::uint64_t>> pm(4, std::vector<std::uint64_t>(4));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) pm[i][j] = cm[perm[i]][perm[j]];
  MacroScores a = macro_scores(cm);
  MacroScores b = macro_scores(pm);
  CHECK(a.macro_p == doctest::Approx(b.macro_p).epsilon(1e-12));
  CHECK(a.macro_r == doctest::Approx(b.macro_r).epsilon(1e-12));
  CHECK(a.macro_f1 == doctest::Approx(b.macro_f1).epsilon(1e-12));
}

TEST_CASE("cosine_similarity basics") {
  CHECK(cosine_similarity({1, 0}, {0, 1}) == 0.0);
  CHECK(cosine_similarity({1, 2}, {2, 4}) == doctest::Approx(1.0));
  CHECK(cosine_similarity({0, 0}, {1, 1}) == 0.0);
  CHECK_THROWS_AS(cosine_similarity({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("tfidf embedder is order-independent and scores shared terms") {
  std::vector<std::string> docs = {"alpha beta gamma", "delta beta epsilon"};
  std::vector<std::string> docs_swapped = {"delta beta epsilon", "alpha beta gamma"};
  TfIdfEmbedder e1(docs);
  TfIdfEmbedder e2(docs_swapped);
  CHECK(e1.vocab_size() == e2.vocab_size());
  CHECK(e1.embed("alpha beta") == e2.embed("alpha beta"));

  // "beta" appears in both docs, so its idf is lower than "alpha"'s.
  // ln((1+2)/(1+2)) + 1 = 1 versus ln((1+2)/(1+1)) + 1.
  std::vector<double> v = e1.embed("alpha beta");
  double alpha_w = *std::max_element(v.begin(), v.end());
  CHECK(alpha_w == doctest::Approx(std::log(1.5) + 1.0));
}

TEST_CASE("assign_sections prefers lexical overlap and breaks ties canonically") {
  std::vector<LabeledSectionText> sections = {
      {SectionLabel::Background, "the study context and prior findings on corrosion"},
      {SectionLabel::Method, "electrode preparation employed plasma cleaning steps"},
      {SectionLabel::Result, "corrosion rates dropped sharply for treated samples"},
  };
  std::vector<std::string> fit;
  for (auto& s : sections) fit.push_back(s.text);
  TfIdfEmbedder embedder(fit);

  auto labels = assign_sections({"electrode preparation employed plasma cleaning steps",
                                 "zzz qqq unrelated words"},
                                sections, embedder);
  REQUIRE(labels.size() == 2);
  CHECK(labels[0] == SectionLabel::Method);
  // All-zero similarity: earliest canonical label among sections.
  CHECK(labels[1] == SectionLabel::Background);

  CHECK_THROWS_AS(assign_sections({"x"}, {}, embedder), std::invalid_argument);
  CHECK(assign_sections({}, sections, embedder).empty());
}

TEST_CASE("assign_sections weighs overlap counts, not just presence") {
  std::vector<LabeledSectionText> sections = {
      {SectionLabel::Background, "context alpha prior literature review"},
      {SectionLabel::Result, "measured gain throughput latency alpha"},
  };
  TfIdfEmbedder embedder({sections[0].text, sections[1].text});
  // Shares three terms with Result, one with Background.
  auto labels = assign_sections({"measured gain throughput alpha"}, sections, embedder);
  REQUIRE(labels.size() == 1);
  CHECK(labels[0] == SectionLabel::Result);
}

TEST_CASE("split_sentences merges short fragments") {
  auto s = split_sentences("Dr. Smith measured twice. The second run failed!");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == "Dr. Smith measured twice.");
  CHECK(s[1] == "The second run failed!");

  auto tail = split_sentences("The probe worked well. Done.");
  REQUIRE(tail.size() == 1);
  CHECK(tail[0] == "The probe worked well. Done.");

  CHECK(split_sentences("").empty());
  auto no_boundary = split_sentences("no terminal punctuation here");
  REQUIRE(no_boundary.size() == 1);

  // "3.14" has no whitespace after '.', so it is not a boundary.
  auto decimal = split_sentences("The value 3.14 was used. It held up?");
  REQUIRE(decimal.size() == 2);
  CHECK(decimal[0] == "The value 3.14 was used.");
}

TEST_CASE("gem_cr full-coverage fixture scores coverage times norm") {
  // Four sections, 750 words each (3000 total); summary of 200 words copied
  // from all four sections in turn -> coverage 1, r = 15, Norm = 15/16.
  std::vector<LabeledSectionText> sections;
  std::vector<std::string> fit;
  const char* stems[4] = {"context", "procedure", "finding", "closing"};
  for (int c = 0; c < 4; ++c) {
    std::string text;
    for (int w = 0; w < 750; ++w) {
      if (w) text += ' ';
      text += stems[c] + std::to_string(w % 40);
    }
    sections.push_back({static_cast<SectionLabel>(c), text});
    fit.push_back(text);
  }
  TfIdfEmbedder embedder(fit);

  std::string summary;
  for (int c = 0; c < 4; ++c) {
    for (int w = 0; w < 50; ++w) {
      if (!summary.empty()) summary += ' ';
      summary += stems[c] + std::to_string(w % 40);
    }
    summary += '.';
  }
  REQUIRE(word_count(summary) == 200);

  GemCrReport r = gem_cr(summary, sections, SectionWeights{}, embedder);
  CHECK(r.coverage == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.compression == doctest::Approx(15.0).epsilon(1e-9));
  CHECK(r.norm == doctest::Approx(0.9375).epsilon(1e-9));
  CHECK(r.score == doctest::Approx(0.9375).epsilon(1e-9));
  CHECK(r.norm_name == "r_over_1_plus_r");
  CHECK(r.source_labels.size() == 4);
  CHECK(r.covered_labels.size() == 4);
  CHECK(r.sentence_labels.size() == r.sentences.size());
}

TEST_CASE("gem_cr coverage drops by the missing label's weight") {
  std::vector<LabeledSectionText> sections = {
      {SectionLabel::Background, "context history alpha beta gamma delta"},
      {SectionLabel::Method, "procedure steps epsilon zeta eta theta"},
      {SectionLabel::Result, "finding numbers iota kappa lambda mu"},
      {SectionLabel::Conclusion, "closing remarks nu xi omicron pi"},
  };
  std::vector<std::string> fit;
  for (auto& s : sections) fit.push_back(s.text);
  TfIdfEmbedder embedder(fit);

  GemCrReport r = gem_cr(
      "context history alpha beta. procedure steps epsilon zeta. finding numbers iota kappa.",
      sections, SectionWeights{}, embedder);
  CHECK(r.coverage == doctest::Approx(0.85).epsilon(1e-9));  // 0.30+0.25+0.30
  CHECK(r.covered_labels.size() == 3);
  CHECK(r.score == doctest::Approx(r.coverage * r.norm).epsilon(1e-12));
}

TEST_CASE("gem_cr input validation") {
  std::vector<LabeledSectionText> sections = {{SectionLabel::Background, "alpha beta gamma"}};
  TfIdfEmbedder embedder({"alpha beta gamma"});
  CHECK_THROWS_AS(gem_cr("", sections, SectionWeights{}, embedder), std::invalid_argument);
  CHECK_THROWS_AS(gem_cr("alpha beta", {}, SectionWeights{}, embedder), std::invalid_argument);
  CompressionNorm broken{"", nullptr};
  CHECK_THROWS_AS(gem_cr("alpha beta", sections, SectionWeights{}, embedder, broken),
                  std::invalid_argument);
}

TEST_CASE("gem_cr stays within [0,1] on fuzzed inputs") {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 60; ++iter) {
    std::size_t n_sections = 1 + rng() % 4;
    std::vector<LabeledSectionText> sections;
    std::vector<std::string> fit;
    for (std::size_t s = 0; s < n_sections; ++s) {
      std::string text;
      std::size_t words = 2 + rng() % 40;
      for (std::size_t w = 0; w < words; ++w) {
        if (w) text += ' ';
        text += "tok" + std::to_string(rng() % 25);
      }
      sections.push_back({static_cast<SectionLabel>(rng() % 4), text});
      fit.push_back(text);
    }
    TfIdfEmbedder embedder(fit);
    std::string summary;
    std::size_t words = 2 + rng() % 30;
    for (std::size_t w = 0; w < words; ++w) {
      if (w) summary += ' ';
      summary += "tok" + std::to_string(rng() % 25);
    }
    summary += '.';
    GemCrReport r = gem_cr(summary, sections, SectionWeights{}, embedder);
    CHECK(r.score >= 0.0);
    CHECK(r.score <= 1.0);
    CHECK(r.coverage >= 0.0);
    CHECK(r.coverage <= 1.0);
    CHECK(r.norm > 0.0);
    CHECK(r.norm < 1.0);
  }
}

TEST_CASE("default norm is strictly increasing in r") {
  CompressionNorm norm = default_compression_norm();
  double prev = -1.0;
  for (double r = 0.25; r <= 64.0; r *= 2.0) {
    double v = norm.fn(r);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("bootstrap_ci is deterministic, brackets the mean, degenerates cleanly") {
  std::vector<double> samples = {0.2, 0.4, 0.9, 0.1, 0.5, 0.35, 0.6};
  ConfidenceInterval a = bootstrap_ci(samples, 0.95, 1000, 7);
  ConfidenceInterval b = bootstrap_ci(samples, 0.95, 1000, 7);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= double(samples.size());
  CHECK(a.lo <= mean);
  CHECK(a.hi >= mean);
  CHECK(a.lo <= a.hi);

  ConfidenceInterval c = bootstrap_ci({0.7, 0.7, 0.7}, 0.95, 200, 3);
  CHECK(c.lo == doctest::Approx(0.7));
  CHECK(c.hi == doctest::Approx(0.7));

  CHECK_THROWS_AS(bootstrap_ci({}, 0.95, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_ci(samples, 1.5, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_ci(samples, 0.95, 0, 0), std::invalid_argument);
}

TEST_CASE("length_histogram bins cover min to max") {
  auto bins = length_histogram({200, 210, 220}, 50);
  REQUIRE(bins.size() == 1);
  CHECK(bins[0].lo == 200);
  CHECK(bins[0].hi == 250);
  CHECK(bins[0].count == 3);

  CHECK(length_histogram({}, 25).empty());
  CHECK_THROWS_AS(length_histogram({1, 2}, 0), std::invalid_argument);

  auto spread = length_histogram({10, 60, 110, 111}, 50);
  REQUIRE(spread.size() == 3);
  std::size_t total = 0;
  for (auto& b : spread) total += b.count;
  CHECK(total == 4);
}
