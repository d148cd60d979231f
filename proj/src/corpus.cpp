#include "sectra/corpus.hpp"

#include <algorithm>
#include <cmath>

#include "sectra/text.hpp"

namespace sectra {

namespace {

std::optional<std::string> string_array(const nlohmann::json& j, const char* key,
                                        std::vector<std::string>* out) {
  if (!j.contains(key)) return std::string("missing key '") + key + "'";
  const nlohmann::json& arr = j.at(key);
  if (!arr.is_array()) return std::string("'") + key + "' is not an array";
  for (const nlohmann::json& item : arr) {
    if (!item.is_string()) return std::string("'") + key + "' contains a non-string";
    out->push_back(item.get<std::string>());
  }
  return std::nullopt;
}

}  // namespace

IngestItem parse_record_line(const std::string& line, std::size_t line_number) {
  IngestItem item;
  item.line_number = line_number;

  if (trim(line).empty()) {
    item.error = "empty line";
    return item;
  }
  nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    item.error = "invalid JSON";
    return item;
  }
  if (!j.is_object()) {
    item.error = "line is not a JSON object";
    return item;
  }

  PaperRecord record;
  if (!j.contains("article_id") || !j.at("article_id").is_string()) {
    item.error = "missing or non-string 'article_id'";
    return item;
  }
  record.article_id = j.at("article_id").get<std::string>();
  if (record.article_id.empty()) {
    item.error = "empty 'article_id'";
    return item;
  }

  if (auto err = string_array(j, "abstract_text", &record.abstract_sentences)) {
    item.error = *err;
    return item;
  }
  if (auto err = string_array(j, "section_names", &record.section_names)) {
    item.error = *err;
    return item;
  }

  if (!j.contains("sections") || !j.at("sections").is_array()) {
    item.error = "missing or non-array 'sections'";
    return item;
  }
  for (const nlohmann::json& sec : j.at("sections")) {
    if (!sec.is_array()) {
      item.error = "'sections' contains a non-array";
      return item;
    }
    std::vector<std::string> sentences;
    for (const nlohmann::json& s : sec) {
      if (!s.is_string()) {
        item.error = "'sections' contains a non-string sentence";
        return item;
      }
      sentences.push_back(s.get<std::string>());
    }
    record.sections.push_back(std::move(sentences));
  }

  if (record.section_names.size() != record.sections.size()) {
    item.error = "section_names and sections have different lengths (" +
                 std::to_string(record.section_names.size()) + " vs " +
                 std::to_string(record.sections.size()) + ")";
    return item;
  }
  item.record = std::move(record);
  return item;
}

JsonlReader::JsonlReader(const std::string& path) : in_(path), path_(path) {
  if (!in_) throw CorpusError("corpus: cannot open " + path);
}

std::optional<IngestItem> JsonlReader::next() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  return parse_record_line(line, ++line_number_);
}

std::vector<PaperRecord> read_jsonl(const std::string& path, std::vector<IngestError>* errors) {
  JsonlReader reader(path);
  std::vector<PaperRecord> records;
  while (std::optional<IngestItem> item = reader.next()) {
    if (item->ok()) {
      records.push_back(std::move(*item->record));
    } else if (errors) {
      errors->push_back(IngestError{item->line_number, item->error});
    }
  }
  return records;
}

nlohmann::json record_to_json(const PaperRecord& record) {
  return nlohmann::json{
      {"article_id", record.article_id},
      {"abstract_text", record.abstract_sentences},
      {"section_names", record.section_names},
      {"sections", record.sections},
  };
}

std::string record_to_jsonl_line(const PaperRecord& record) {
  return record_to_json(record).dump();
}

const char* reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::MissingLabel: return "missing_label";
    case RejectReason::SectionTooLong: return "section_too_long";
    case RejectReason::AbstractTooShort: return "abstract_too_short";
    case RejectReason::AbstractTooLong: return "abstract_too_long";
  }
  return "missing_label";
}

FilterVerdict filter_for_summarization(const PaperRecord& record,
                                       const std::vector<SectionLabel>& labels,
                                       const FilterConstraints& constraints) {
  if (labels.size() != record.sections.size())
    throw std::invalid_argument("filter: labels are not aligned with sections");

  auto reject = [](RejectReason reason, std::string detail) {
    FilterVerdict v;
    v.accepted = false;
    v.reason = reason;
    v.detail = std::move(detail);
    return v;
  };

  for (SectionLabel required : constraints.required_labels) {
    if (std::find(labels.begin(), labels.end(), required) == labels.end()) {
      return reject(RejectReason::MissingLabel,
                    std::string("missing: ") + label_name(required));
    }
  }

  for (std::size_t i = 0; i < record.sections.size(); ++i) {
    std::size_t words = 0;
    for (const std::string& sentence : record.sections[i]) words += word_count(sentence);
    if (words > constraints.max_section_words) {
      return reject(RejectReason::SectionTooLong,
                    "section " + std::to_string(i) + " ('" + record.section_names[i] + "') has " +
                        std::to_string(words) + " words");
    }
  }

  std::size_t abstract_words = 0;
  for (const std::string& sentence : record.abstract_sentences)
    abstract_words += word_count(sentence);
  if (abstract_words < constraints.min_abstract_words) {
    return reject(RejectReason::AbstractTooShort,
                  "abstract has " + std::to_string(abstract_words) + " words");
  }
  if (abstract_words > constraints.max_abstract_words) {
    return reject(RejectReason::AbstractTooLong,
                  "abstract has " + std::to_string(abstract_words) + " words");
  }
  return FilterVerdict{};
}

void CorpusStats::merge(const CorpusStats& other) {
  documents += other.documents;
  body_words += other.body_words;
  body_sentences += other.body_sentences;
  abstract_words += other.abstract_words;
  abstract_sentences += other.abstract_sentences;
  for (int i = 0; i < kNumLabels; ++i) {
    per_label[i].chapters += other.per_label[i].chapters;
    per_label[i].words += other.per_label[i].words;
    per_label[i].sentences += other.per_label[i].sentences;
  }
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t denom) {
  if (denom == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(denom);
}

nlohmann::json optional_json(std::optional<double> v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

std::optional<double> CorpusStats::mean_body_words() const { return ratio(body_words, documents); }
std::optional<double> CorpusStats::mean_body_sentences() const {
  return ratio(body_sentences, documents);
}
std::optional<double> CorpusStats::mean_abstract_words() const {
  return ratio(abstract_words, documents);
}
std::optional<double> CorpusStats::mean_abstract_sentences() const {
  return ratio(abstract_sentences, documents);
}
std::optional<double> CorpusStats::mean_chapter_words(SectionLabel label) const {
  const LabelStats& s = per_label[static_cast<std::size_t>(label)];
  return ratio(s.words, s.chapters);
}
std::optional<double> CorpusStats::mean_chapter_sentences(SectionLabel label) const {
  const LabelStats& s = per_label[static_cast<std::size_t>(label)];
  return ratio(s.sentences, s.chapters);
}

nlohmann::json CorpusStats::to_json() const {
  nlohmann::json labels = nlohmann::json::object();
  for (SectionLabel label : kLabelOrder) {
    const LabelStats& s = per_label[static_cast<std::size_t>(label)];
    labels[label_name(label)] = {
        {"chapters", s.chapters},
        {"words", s.words},
        {"sentences", s.sentences},
        {"mean_words", optional_json(mean_chapter_words(label))},
        {"mean_sentences", optional_json(mean_chapter_sentences(label))},
    };
  }
  return nlohmann::json{
      {"documents", documents},
      {"body_words", body_words},
      {"body_sentences", body_sentences},
      {"abstract_words", abstract_words},
      {"abstract_sentences", abstract_sentences},
      {"mean_body_words", optional_json(mean_body_words())},
      {"mean_body_sentences", optional_json(mean_body_sentences())},
      {"mean_abstract_words", optional_json(mean_abstract_words())},
      {"mean_abstract_sentences", optional_json(mean_abstract_sentences())},
      {"per_label", labels},
  };
}

CorpusStats corpus_stats(const std::vector<PaperRecord>& records,
                         const std::vector<std::vector<SectionLabel>>& labels) {
  if (records.size() != labels.size())
    throw std::invalid_argument("corpus_stats: labels are not aligned with records");

  CorpusStats stats;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PaperRecord& record = records[i];
    if (labels[i].size() != record.sections.size())
      throw std::invalid_argument("corpus_stats: labels are not aligned with sections of " +
                                  record.article_id);
    ++stats.documents;
    for (const std::string& sentence : record.abstract_sentences) {
      ++stats.abstract_sentences;
      stats.abstract_words += word_count(sentence);
    }
    for (std::size_t s = 0; s < record.sections.size(); ++s) {
      std::uint64_t words = 0;
      for (const std::string& sentence : record.sections[s]) words += word_count(sentence);
      std::uint64_t sentences = record.sections[s].size();
      stats.body_words += words;
      stats.body_sentences += sentences;
      if (labels[i][s] == SectionLabel::Unmapped) continue;
      LabelStats& bucket = stats.per_label[static_cast<std::size_t>(labels[i][s])];
      ++bucket.chapters;
      bucket.words += words;
      bucket.sentences += sentences;
    }
  }
  return stats;
}

std::size_t PositionHistogram::total() const {
  std::size_t sum = 0;
  for (std::size_t c : counts) sum += c;
  return sum;
}

PositionHistogram position_similarity(const PaperRecord& record, const Embedder& embedder,
                                      std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("position_similarity: zero bins");
  if (record.abstract_sentences.empty())
    throw std::invalid_argument("position_similarity: empty abstract in " + record.article_id);

  std::vector<const std::string*> body;
  for (const std::vector<std::string>& section : record.sections) {
    for (const std::string& sentence : section) body.push_back(&sentence);
  }
  if (body.empty())
    throw std::invalid_argument("position_similarity: empty body in " + record.article_id);

  std::vector<std::vector<double>> body_vecs;
  body_vecs.reserve(body.size());
  for (const std::string* sentence : body) body_vecs.push_back(embedder.embed(*sentence));

  PositionHistogram hist;
  hist.bins = bins;
  hist.counts.assign(bins, 0);
  for (const std::string& sentence : record.abstract_sentences) {
    std::vector<double> v = embedder.embed(sentence);
    double best = -1.0;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < body_vecs.size(); ++i) {
      double sim = cosine_similarity(v, body_vecs[i]);
      if (sim > best) {  // strict: ties keep the earliest body sentence
        best = sim;
        best_idx = i;
      }
    }
    double pos = body.size() == 1
                     ? 0.0
                     : static_cast<double>(best_idx) / static_cast<double>(body.size() - 1);
    hist.positions.push_back(pos);
    std::size_t bin = std::min(static_cast<std::size_t>(pos * static_cast<double>(bins)), bins - 1);
    ++hist.counts[bin];
  }
  return hist;
}

}  // namespace sectra
