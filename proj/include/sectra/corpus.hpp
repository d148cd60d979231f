#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sectra/headings.hpp"
#include "sectra/metrics.hpp"

namespace sectra {

struct CorpusError : std::runtime_error {
  explicit CorpusError(const std::string& what) : std::runtime_error(what) {}
};

// One full-text paper: pre-split abstract and body sentences, with
// section_names[i] naming sections[i].
struct PaperRecord {
  std::string article_id;
  std::vector<std::string> abstract_sentences;
  std::vector<std::string> section_names;
  std::vector<std::vector<std::string>> sections;

  bool operator==(const PaperRecord&) const = default;
};

struct IngestError {
  std::size_t line_number = 0;
  std::string message;
};

struct IngestItem {
  std::size_t line_number = 0;
  std::optional<PaperRecord> record;  // set on success
  std::string error;                  // set when the line failed parse or schema

  bool ok() const { return record.has_value(); }
};

// Streaming JSONL reader: one record per line, malformed lines surface as
// per-line errors instead of aborting the stream.
class JsonlReader {
 public:
  explicit JsonlReader(const std::string& path);

  // nullopt at end of stream.
  std::optional<IngestItem> next();

 private:
  std::ifstream in_;
  std::string path_;
  std::size_t line_number_ = 0;
};

// Parses one JSONL line; exposed so callers can ingest from memory.
IngestItem parse_record_line(const std::string& line, std::size_t line_number);

// Reads a whole file, collecting per-line errors into `errors` when given.
std::vector<PaperRecord> read_jsonl(const std::string& path,
                                    std::vector<IngestError>* errors = nullptr);

nlohmann::json record_to_json(const PaperRecord& record);
std::string record_to_jsonl_line(const PaperRecord& record);

struct FilterConstraints {
  std::size_t max_section_words = 1500;
  std::size_t min_abstract_words = 50;
  std::size_t max_abstract_words = 300;
  std::vector<SectionLabel> required_labels = {SectionLabel::Background, SectionLabel::Method,
                                               SectionLabel::Result, SectionLabel::Conclusion};
};

enum class RejectReason {
  MissingLabel,
  SectionTooLong,
  AbstractTooShort,
  AbstractTooLong,
};

const char* reject_reason_name(RejectReason reason);

struct FilterVerdict {
  bool accepted = true;
  std::optional<RejectReason> reason;
  std::string detail;
};

// Checks run in a fixed order (labels, then section length, then abstract
// range) so the same record always fails for the same reason. `labels` is
// the per-section label vector aligned with record.sections.
FilterVerdict filter_for_summarization(const PaperRecord& record,
                                       const std::vector<SectionLabel>& labels,
                                       const FilterConstraints& constraints = {});

struct LabelStats {
  std::uint64_t chapters = 0;
  std::uint64_t words = 0;
  std::uint64_t sentences = 0;
};

// Aggregate counts with totals retained, so stats of a concatenation equal
// the merge of per-part stats exactly. Means are undefined (nullopt) when
// the denominator is empty -- never NaN.
struct CorpusStats {
  std::uint64_t documents = 0;
  std::uint64_t body_words = 0;
  std::uint64_t body_sentences = 0;
  std::uint64_t abstract_words = 0;
  std::uint64_t abstract_sentences = 0;
  std::array<LabelStats, kNumLabels> per_label{};

  void merge(const CorpusStats& other);

  std::optional<double> mean_body_words() const;
  std::optional<double> mean_body_sentences() const;
  std::optional<double> mean_abstract_words() const;
  std::optional<double> mean_abstract_sentences() const;
  std::optional<double> mean_chapter_words(SectionLabel label) const;
  std::optional<double> mean_chapter_sentences(SectionLabel label) const;

  nlohmann::json to_json() const;
};

// Per-label chapter statistics use `labels[i][j]` for record i's section j;
// Unmapped sections count toward document totals but no label bucket.
CorpusStats corpus_stats(const std::vector<PaperRecord>& records,
                         const std::vector<std::vector<SectionLabel>>& labels);

struct PositionHistogram {
  std::size_t bins = 0;
  std::vector<std::size_t> counts;   // per bin over [0, 1]
  std::vector<double> positions;     // one relative position per abstract sentence

  std::size_t total() const;
};

// For each abstract sentence, finds the most similar body sentence (cosine
// over the embedder; ties keep the earliest) and bins its relative position
// in the body.
PositionHistogram position_similarity(const PaperRecord& record, const Embedder& embedder,
                                      std::size_t bins = 10);

}  // namespace sectra
