#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sectra/backends.hpp"
#include "sectra/corpus.hpp"
#include "sectra/headings.hpp"
#include "sectra/metrics.hpp"
#include "sectra/sfr.hpp"
#include "sectra/summarizer.hpp"

namespace sectra {

inline constexpr const char* kToolName = "sectra";
inline constexpr const char* kToolVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A stage failure that names the stage and the offending article.
struct PipelineError : std::runtime_error {
  PipelineError(std::string stage_, std::string article_id_, const std::string& what)
      : std::runtime_error(what), stage(std::move(stage_)), article_id(std::move(article_id_)) {}
  std::string stage;
  std::string article_id;
};

struct SfrConfig {
  SfrOptions options;
  TrainOptions train;
  std::string model_path;  // optional pre-trained model for classification
};

struct MetricsConfig {
  bool stemming = false;
  std::string norm = "r_over_1_plus_r";
  int bootstrap_resamples = 1000;
  double ci_level = 0.95;
};

// The single source of truth for a run. Serializes to JSON; the snapshot
// form omits execution-only fields (output directory, job count) so a
// report's config snapshot can be re-fed to reproduce the run bit-for-bit.
struct PipelineConfig {
  std::string corpus_path;
  std::string heading_map_path;
  CompositionStrategy composition;
  SfrConfig sfr;
  std::optional<BackendConfig> classify_backend;
  std::optional<BackendConfig> generate_backend;
  std::optional<BackendConfig> judge_backend;
  SectionWeights weights;
  std::size_t total_cap = 300;
  FilterConstraints filter;
  GenerationParams generation;
  MetricsConfig metrics;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  int jobs = 1;

  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json(bool snapshot = false) const;

  // Checks invariants and that referenced paths exist; throws ConfigError.
  void validate() const;
};

PipelineConfig load_config(const std::string& path);

// How each section's label was decided.
struct SectionDecision {
  std::string section_name;
  SectionLabel label = SectionLabel::Unmapped;
  std::string source;  // "map" | "model" | "backend" | "unmapped"
};

struct LabeledDoc {
  std::vector<SectionLabel> labels;
  std::vector<SectionDecision> decisions;
};

// Map lookup first, then the local model, then the classify backend;
// sections that every stage misses stay Unmapped.
LabeledDoc label_document(const PaperRecord& record, const HeadingMap& map,
                          const SfrModel* model, const BackendClient* classify_client,
                          const CompositionStrategy& strategy);

// Chapters with map-resolvable labels, composed per the strategy -- the
// corpus-derived training set for the local classifier.
std::vector<LabeledText> composed_training_set(const std::vector<PaperRecord>& records,
                                               const HeadingMap& map,
                                               const CompositionStrategy& strategy);

// Heading-map coverage over a corpus.
nlohmann::json normalize_report(const std::vector<PaperRecord>& records, const HeadingMap& map);

struct RunReport {
  nlohmann::json report;   // deterministic: config snapshot, outcomes, aggregates
  nlohmann::json timings;  // wall clock per stage; never part of determinism claims
  std::string csv;         // flat per-document metrics
  nlohmann::json summaries;
  nlohmann::json stats;
  nlohmann::json normalize;
};

// Full pipeline: ingest -> classify -> filter -> summarize -> evaluate.
// With no backends configured every stage is a pure function of config and
// corpus. When `write_files` is set, emits report.json, report.csv,
// summaries.json, stats.json, normalize.json and timings.json under
// cfg.out_dir. On a stage failure, flushes everything completed so far and
// rethrows as PipelineError.
RunReport run_pipeline(const PipelineConfig& cfg, bool write_files = true);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace sectra
