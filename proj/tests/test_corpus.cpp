#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sectra/corpus.hpp"
#include "sectra/headings.hpp"
#include "sectra/metrics.hpp"

using namespace sectra;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = std::string("/tmp/sectra_corpus_") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

PaperRecord sample_record() {
  PaperRecord r;
  r.article_id = "A1";
  r.abstract_sentences = {"We probe charge transport.", "Contacts dominate the losses."};
  r.section_names = {"1. Introduction", "2. Methods", "3. Results", "4. Conclusion"};
  r.sections = {
      {"Charge transport in thin films matters.", "Earlier reports disagreed."},
      {"We fabricated devices with shadow masks.", "Currents were measured at room temperature."},
      {"Resistance fell with annealing time.", "Contacts dominate the losses."},
      {"Annealing is the key processing step."},
  };
  return r;
}

std::vector<SectionLabel> four_labels() {
  return {SectionLabel::Background, SectionLabel::Method, SectionLabel::Result,
          SectionLabel::Conclusion};
}

}  // namespace

TEST_CASE("parse_record_line handles good and bad lines") {
  PaperRecord r = sample_record();
  IngestItem ok = parse_record_line(record_to_jsonl_line(r), 3);
  REQUIRE(ok.ok());
  CHECK(ok.line_number == 3);
  CHECK(*ok.record == r);

  CHECK(parse_record_line("", 1).error == "empty line");
  CHECK(parse_record_line("   ", 1).error == "empty line");
  CHECK(parse_record_line("{not json", 1).error == "invalid JSON");
  CHECK(parse_record_line("[1,2]", 1).error == "line is not a JSON object");
  CHECK(parse_record_line(R"({"abstract_text":[]})", 1).error ==
        "missing or non-string 'article_id'");
  CHECK(parse_record_line(R"({"article_id":7})", 1).error ==
        "missing or non-string 'article_id'");
  CHECK(parse_record_line(R"({"article_id":""})", 1).error == "empty 'article_id'");
  CHECK(parse_record_line(R"({"article_id":"x"})", 1).error == "missing key 'abstract_text'");
  CHECK(parse_record_line(R"({"article_id":"x","abstract_text":[1]})", 1).error ==
        "'abstract_text' contains a non-string");
  CHECK(parse_record_line(
            R"({"article_id":"x","abstract_text":["a b."],"section_names":["s"],"sections":[["t u."],["v w."]]})",
            1)
            .error == "section_names and sections have different lengths (1 vs 2)");
  CHECK(parse_record_line(
            R"({"article_id":"x","abstract_text":["a b."],"section_names":["s"],"sections":["flat"]})",
            1)
            .error == "'sections' contains a non-array");
}

TEST_CASE("read_jsonl collects per-line errors and keeps good records") {
  PaperRecord r = sample_record();
  std::string path = write_temp("mixed.jsonl", record_to_jsonl_line(r) + "\n" +
                                                   "{broken\n" +
                                                   record_to_jsonl_line(r) + "\n");
  std::vector<IngestError> errors;
  std::vector<PaperRecord> records = read_jsonl(path, &errors);
  CHECK(records.size() == 2);
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].line_number == 2);
  CHECK(errors[0].message == "invalid JSON");
  std::remove(path.c_str());

  CHECK_THROWS_AS(read_jsonl("/nonexistent/corpus.jsonl"), CorpusError);
}

TEST_CASE("record round-trips through its JSONL form") {
  PaperRecord r = sample_record();
  IngestItem item = parse_record_line(record_to_jsonl_line(r), 1);
  REQUIRE(item.ok());
  CHECK(*item.record == r);
}

TEST_CASE("filter accepts the well-formed record") {
  FilterVerdict v = filter_for_summarization(sample_record(), four_labels(),
                                             FilterConstraints{1500, 5, 300, four_labels()});
  CHECK(v.accepted);
  CHECK(!v.reason.has_value());
}

TEST_CASE("filter rejects in a fixed order with reasons") {
  PaperRecord r = sample_record();
  FilterConstraints c{1500, 5, 300, four_labels()};

  SUBCASE("missing label comes first") {
    auto labels = four_labels();
    labels[3] = SectionLabel::Unmapped;  // Conclusion no longer present
    FilterVerdict v = filter_for_summarization(r, labels, c);
    CHECK(!v.accepted);
    CHECK(*v.reason == RejectReason::MissingLabel);
    CHECK(v.detail == "missing: Conclusion");
  }
  SUBCASE("over-long section") {
    std::string lots;
    for (int i = 0; i < 1501; ++i) lots += "w ";
    r.sections[1] = {lots};
    FilterVerdict v = filter_for_summarization(r, four_labels(), c);
    CHECK(*v.reason == RejectReason::SectionTooLong);
    CHECK(v.detail.find("section 1") != std::string::npos);
    CHECK(v.detail.find("2. Methods") != std::string::npos);
    CHECK(v.detail.find("1501") != std::string::npos);
  }
  SUBCASE("abstract too short") {
    r.abstract_sentences = {"Too short."};
    FilterVerdict v = filter_for_summarization(r, four_labels(), c);
    CHECK(*v.reason == RejectReason::AbstractTooShort);
    CHECK(v.detail == "abstract has 2 words");
  }
  SUBCASE("abstract too long") {
    std::string lots;
    for (int i = 0; i < 301; ++i) lots += "w ";
    r.abstract_sentences = {lots};
    FilterVerdict v = filter_for_summarization(r, four_labels(), c);
    CHECK(*v.reason == RejectReason::AbstractTooLong);
  }
  SUBCASE("label check wins over abstract check") {
    r.abstract_sentences = {"Too short."};
    auto labels = four_labels();
    labels[0] = SectionLabel::Unmapped;
    FilterVerdict v = filter_for_summarization(r, labels, c);
    CHECK(*v.reason == RejectReason::MissingLabel);
    CHECK(v.detail == "missing: Background");
  }
  SUBCASE("misaligned labels are a caller bug") {
    CHECK_THROWS_AS(filter_for_summarization(r, {SectionLabel::Background}, c),
                    std::invalid_argument);
  }
}

TEST_CASE("reject reasons have stable names") {
  CHECK(std::string(reject_reason_name(RejectReason::MissingLabel)) == "missing_label");
  CHECK(std::string(reject_reason_name(RejectReason::SectionTooLong)) == "section_too_long");
  CHECK(std::string(reject_reason_name(RejectReason::AbstractTooShort)) == "abstract_too_short");
  CHECK(std::string(reject_reason_name(RejectReason::AbstractTooLong)) == "abstract_too_long");
}

TEST_CASE("corpus_stats totals, means and label buckets") {
  PaperRecord r = sample_record();
  std::vector<SectionLabel> labels = four_labels();
  CorpusStats stats = corpus_stats({r}, {labels});

  CHECK(stats.documents == 1);
  CHECK(stats.abstract_sentences == 2);
  CHECK(stats.abstract_words == 8);
  CHECK(stats.body_sentences == 7);
  CHECK(stats.per_label[0].chapters == 1);
  CHECK(stats.per_label[0].sentences == 2);
  CHECK(*stats.mean_abstract_words() == doctest::Approx(8.0));
  CHECK(*stats.mean_body_sentences() == doctest::Approx(7.0));
  CHECK(*stats.mean_chapter_sentences(SectionLabel::Conclusion) == doctest::Approx(1.0));

  SUBCASE("unmapped sections count toward totals only") {
    labels[2] = SectionLabel::Unmapped;
    CorpusStats s2 = corpus_stats({r}, {labels});
    CHECK(s2.body_sentences == stats.body_sentences);
    CHECK(s2.per_label[2].chapters == 0);
    CHECK(!s2.mean_chapter_words(SectionLabel::Result).has_value());
  }

  SUBCASE("merge equals stats of the concatenation") {
    CorpusStats two = corpus_stats({r, r}, {labels, labels});
    CorpusStats merged = stats;
    merged.merge(stats);
    CHECK(merged.documents == two.documents);
    CHECK(merged.body_words == two.body_words);
    CHECK(merged.per_label[1].words == two.per_label[1].words);
    CHECK(merged.to_json() == two.to_json());
  }

  SUBCASE("empty stats serialize means as null") {
    CorpusStats empty;
    nlohmann::json j = empty.to_json();
    CHECK(j.at("mean_body_words").is_null());
    CHECK(j.at("per_label").at("Method").at("mean_words").is_null());
  }

  SUBCASE("alignment is checked") {
    CHECK_THROWS_AS(corpus_stats({r}, {}), std::invalid_argument);
    CHECK_THROWS_AS(corpus_stats({r}, {{SectionLabel::Background}}), std::invalid_argument);
  }
}

TEST_CASE("position_similarity bins the best-matching body positions") {
  PaperRecord r;
  r.article_id = "P1";
  r.abstract_sentences = {"alpha beta gamma", "omega psi chi"};
  r.section_names = {"one", "two"};
  r.sections = {
      {"alpha beta gamma delta", "unrelated filler sentence here"},
      {"more filler content", "omega psi chi rho"},
  };
  std::vector<std::string> fit;
  for (auto& sec : r.sections)
    for (auto& s : sec) fit.push_back(s);
  TfIdfEmbedder embedder(fit);

  PositionHistogram hist = position_similarity(r, embedder, 10);
  CHECK(hist.bins == 10);
  CHECK(hist.total() == 2);
  REQUIRE(hist.positions.size() == 2);
  // First abstract sentence matches body sentence 0 of 4 -> position 0;
  // second matches the last body sentence -> position 1 (clamped to bin 9).
  CHECK(hist.positions[0] == doctest::Approx(0.0));
  CHECK(hist.positions[1] == doctest::Approx(1.0));
  CHECK(hist.counts[0] == 1);
  CHECK(hist.counts[9] == 1);

  SUBCASE("degenerate inputs throw") {
    PaperRecord bad = r;
    bad.abstract_sentences.clear();
    CHECK_THROWS_AS(position_similarity(bad, embedder, 10), std::invalid_argument);
    PaperRecord nobody = r;
    nobody.sections = {{}, {}};
    CHECK_THROWS_AS(position_similarity(nobody, embedder, 10), std::invalid_argument);
    CHECK_THROWS_AS(position_similarity(r, embedder, 0), std::invalid_argument);
  }

  SUBCASE("single body sentence lands at position zero") {
    PaperRecord one = r;
    one.section_names = {"only"};
    one.sections = {{"alpha beta gamma delta"}};
    PositionHistogram h = position_similarity(one, embedder, 4);
    CHECK(h.positions == std::vector<double>{0.0, 0.0});
    CHECK(h.counts[0] == 2);
  }
}
