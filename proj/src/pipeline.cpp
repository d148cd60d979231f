#include "sectra/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sectra/parallel.hpp"
#include "sectra/text.hpp"

namespace sectra {

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: field '") + key + "' has the wrong type");
  }
}

BackendConfig backend_from_json(const nlohmann::json& j, const char* which) {
  if (!j.is_object()) throw ConfigError(std::string("config: backends.") + which +
                                        " must be an object");
  BackendConfig cfg;
  cfg.endpoint = get_or<std::string>(j, "endpoint", "");
  cfg.auth_env = get_or<std::string>(j, "auth_env", kDefaultAuthEnv);
  cfg.timeout_seconds = get_or<double>(j, "timeout_seconds", cfg.timeout_seconds);
  cfg.max_retries = get_or<int>(j, "max_retries", cfg.max_retries);
  cfg.backoff_base_ms = get_or<int>(j, "backoff_base_ms", cfg.backoff_base_ms);
  cfg.max_in_flight = get_or<int>(j, "max_in_flight", cfg.max_in_flight);
  return cfg;
}

nlohmann::json backend_to_json(const std::optional<BackendConfig>& cfg) {
  if (!cfg) return nullptr;
  return nlohmann::json{
      {"endpoint", cfg->endpoint},
      {"auth_env", cfg->auth_env},
      {"timeout_seconds", cfg->timeout_seconds},
      {"max_retries", cfg->max_retries},
      {"backoff_base_ms", cfg->backoff_base_ms},
      {"max_in_flight", cfg->max_in_flight},
  };
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: root must be a JSON object");
  PipelineConfig cfg;
  cfg.corpus_path = get_or<std::string>(j, "corpus", "");
  cfg.heading_map_path = get_or<std::string>(j, "heading_map", "");

  if (j.contains("composition")) {
    const nlohmann::json& c = j.at("composition");
    try {
      cfg.composition.variant = parse_composition_variant(
          get_or<std::string>(c, "variant", composition_variant_name(cfg.composition.variant)));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.composition.head_tail_percent =
        get_or<int>(c, "head_tail_percent", cfg.composition.head_tail_percent);
    cfg.composition.token_budget =
        get_or<std::size_t>(c, "token_budget", cfg.composition.token_budget);
  }

  if (j.contains("sfr")) {
    const nlohmann::json& s = j.at("sfr");
    cfg.sfr.options.feature_dim = get_or<std::size_t>(s, "feature_dim", cfg.sfr.options.feature_dim);
    cfg.sfr.options.ngram_orders =
        get_or<std::vector<int>>(s, "ngram_orders", cfg.sfr.options.ngram_orders);
    cfg.sfr.train.learning_rate = get_or<double>(s, "learning_rate", cfg.sfr.train.learning_rate);
    cfg.sfr.train.epochs = get_or<int>(s, "epochs", cfg.sfr.train.epochs);
    cfg.sfr.train.batch_size = get_or<std::size_t>(s, "batch_size", cfg.sfr.train.batch_size);
    cfg.sfr.model_path = get_or<std::string>(s, "model_path", "");
  }

  if (j.contains("backends") && !j.at("backends").is_null()) {
    const nlohmann::json& b = j.at("backends");
    if (!b.is_object()) throw ConfigError("config: 'backends' must be an object");
    if (b.contains("classify") && !b.at("classify").is_null())
      cfg.classify_backend = backend_from_json(b.at("classify"), "classify");
    if (b.contains("generate") && !b.at("generate").is_null())
      cfg.generate_backend = backend_from_json(b.at("generate"), "generate");
    if (b.contains("judge") && !b.at("judge").is_null())
      cfg.judge_backend = backend_from_json(b.at("judge"), "judge");
  }

  if (j.contains("weights")) {
    const nlohmann::json& w = j.at("weights");
    if (!w.is_object()) throw ConfigError("config: 'weights' must be an object");
    for (SectionLabel label : kLabelOrder) {
      cfg.weights.values[static_cast<std::size_t>(label)] =
          get_or<double>(w, label_name(label), cfg.weights.of(label));
    }
  }
  cfg.total_cap = get_or<std::size_t>(j, "total_cap", cfg.total_cap);

  if (j.contains("filter")) {
    const nlohmann::json& f = j.at("filter");
    cfg.filter.max_section_words =
        get_or<std::size_t>(f, "max_section_words", cfg.filter.max_section_words);
    cfg.filter.min_abstract_words =
        get_or<std::size_t>(f, "min_abstract_words", cfg.filter.min_abstract_words);
    cfg.filter.max_abstract_words =
        get_or<std::size_t>(f, "max_abstract_words", cfg.filter.max_abstract_words);
  }

  if (j.contains("generation")) {
    const nlohmann::json& g = j.at("generation");
    cfg.generation.min_words = get_or<std::size_t>(g, "min_words", cfg.generation.min_words);
    cfg.generation.max_words = get_or<std::size_t>(g, "max_words", cfg.generation.max_words);
    cfg.generation.beams = get_or<int>(g, "beams", cfg.generation.beams);
    cfg.generation.no_repeat_ngram =
        get_or<int>(g, "no_repeat_ngram", cfg.generation.no_repeat_ngram);
  }

  if (j.contains("metrics")) {
    const nlohmann::json& m = j.at("metrics");
    cfg.metrics.stemming = get_or<bool>(m, "stemming", cfg.metrics.stemming);
    cfg.metrics.norm = get_or<std::string>(m, "norm", cfg.metrics.norm);
    cfg.metrics.bootstrap_resamples =
        get_or<int>(m, "bootstrap_resamples", cfg.metrics.bootstrap_resamples);
    cfg.metrics.ci_level = get_or<double>(m, "ci_level", cfg.metrics.ci_level);
  }

  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
  cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir);
  cfg.jobs = get_or<int>(j, "jobs", cfg.jobs);
  return cfg;
}

nlohmann::json PipelineConfig::to_json(bool snapshot) const {
  nlohmann::json weights_json = nlohmann::json::object();
  for (SectionLabel label : kLabelOrder) {
    weights_json[label_name(label)] = weights.of(label);
  }
  nlohmann::json j{
      {"corpus", corpus_path},
      {"heading_map", heading_map_path},
      {"composition",
       {{"variant", composition_variant_name(composition.variant)},
        {"head_tail_percent", composition.head_tail_percent},
        {"token_budget", composition.token_budget}}},
      {"sfr",
       {{"feature_dim", sfr.options.feature_dim},
        {"ngram_orders", sfr.options.ngram_orders},
        {"learning_rate", sfr.train.learning_rate},
        {"epochs", sfr.train.epochs},
        {"batch_size", sfr.train.batch_size},
        {"model_path", sfr.model_path}}},
      {"backends",
       {{"classify", backend_to_json(classify_backend)},
        {"generate", backend_to_json(generate_backend)},
        {"judge", backend_to_json(judge_backend)}}},
      {"weights", weights_json},
      {"total_cap", total_cap},
      {"filter",
       {{"max_section_words", filter.max_section_words},
        {"min_abstract_words", filter.min_abstract_words},
        {"max_abstract_words", filter.max_abstract_words}}},
      {"generation",
       {{"min_words", generation.min_words},
        {"max_words", generation.max_words},
        {"beams", generation.beams},
        {"no_repeat_ngram", generation.no_repeat_ngram}}},
      {"metrics",
       {{"stemming", metrics.stemming},
        {"norm", metrics.norm},
        {"bootstrap_resamples", metrics.bootstrap_resamples},
        {"ci_level", metrics.ci_level}}},
      {"seed", seed},
  };
  if (!snapshot) {
    // Execution-only fields: where output lands and how many workers run
    // never change what is computed, so the snapshot leaves them out.
    j["out_dir"] = out_dir;
    j["jobs"] = jobs;
  }
  return j;
}

void PipelineConfig::validate() const {
  namespace fs = std::filesystem;
  if (corpus_path.empty()) throw ConfigError("config: 'corpus' is required");
  if (!fs::exists(corpus_path)) throw ConfigError("config: corpus not found: " + corpus_path);
  if (heading_map_path.empty()) throw ConfigError("config: 'heading_map' is required");
  if (!fs::exists(heading_map_path))
    throw ConfigError("config: heading map not found: " + heading_map_path);
  if (!sfr.model_path.empty() && !fs::exists(sfr.model_path))
    throw ConfigError("config: model not found: " + sfr.model_path);

  try {
    weights.validate();
    generation.validate();
    if (classify_backend) classify_backend->validate();
    if (generate_backend) generate_backend->validate();
    if (judge_backend) judge_backend->validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  if (total_cap == 0) throw ConfigError("config: total_cap must be positive");
  if (composition.token_budget == 0) throw ConfigError("config: token_budget must be positive");
  if (composition.head_tail_percent <= 0 || composition.head_tail_percent > 100)
    throw ConfigError("config: head_tail_percent must be in (0, 100]");
  if (sfr.options.feature_dim == 0 ||
      (sfr.options.feature_dim & (sfr.options.feature_dim - 1)) != 0)
    throw ConfigError("config: feature_dim must be a power of two");
  if (metrics.norm != default_compression_norm().name)
    throw ConfigError("config: unknown norm '" + metrics.norm + "' (expected '" +
                      default_compression_norm().name + "')");
  if (metrics.bootstrap_resamples < 1)
    throw ConfigError("config: bootstrap_resamples must be >= 1");
  if (!(metrics.ci_level > 0.0 && metrics.ci_level < 1.0))
    throw ConfigError("config: ci_level must be in (0, 1)");
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("config: " + path + " is not valid JSON");
  return PipelineConfig::from_json(j);
}

namespace {

// Composes the classifier input for a section; sections without body text
// degrade to title-only composition instead of failing the document.
std::string compose_for_section(const std::string& name,
                                const std::vector<std::string>& sentences,
                                const CompositionStrategy& strategy) {
  Chapter chapter;
  chapter.title = name;
  chapter.sentences = sentences;
  CompositionStrategy effective = strategy;
  if (sentences.empty()) effective.variant = CompositionVariant::TitleOnly;
  return compose_input(chapter, effective);
}

}  // namespace

LabeledDoc label_document(const PaperRecord& record, const HeadingMap& map, const SfrModel* model,
                          const BackendClient* classify_client,
                          const CompositionStrategy& strategy) {
  LabeledDoc out;
  out.labels.reserve(record.sections.size());
  out.decisions.reserve(record.sections.size());
  for (std::size_t i = 0; i < record.sections.size(); ++i) {
    const std::string& name = record.section_names[i];
    SectionDecision decision;
    decision.section_name = name;
    decision.label = map_heading(canonicalize_heading(name), map);
    decision.source = "map";
    if (decision.label == SectionLabel::Unmapped) {
      if (model != nullptr) {
        decision.label = predict(*model, compose_for_section(name, record.sections[i], strategy)).label;
        decision.source = "model";
      } else if (classify_client != nullptr) {
        std::array<double, kNumLabels> probs =
            classify_client->classify(compose_for_section(name, record.sections[i], strategy));
        int best = 0;
        for (int c = 1; c < kNumLabels; ++c) {
          if (probs[c] > probs[best]) best = c;
        }
        decision.label = static_cast<SectionLabel>(best);
        decision.source = "backend";
      } else {
        decision.source = "unmapped";
      }
    }
    out.labels.push_back(decision.label);
    out.decisions.push_back(std::move(decision));
  }
  return out;
}

std::vector<LabeledText> composed_training_set(const std::vector<PaperRecord>& records,
                                               const HeadingMap& map,
                                               const CompositionStrategy& strategy) {
  std::vector<LabeledText> out;
  for (const PaperRecord& record : records) {
    for (std::size_t i = 0; i < record.sections.size(); ++i) {
      SectionLabel label = map_heading(canonicalize_heading(record.section_names[i]), map);
      if (label == SectionLabel::Unmapped) continue;
      LabeledText example;
      example.text = compose_for_section(record.section_names[i], record.sections[i], strategy);
      example.label = label;
      out.push_back(std::move(example));
    }
  }
  return out;
}

nlohmann::json normalize_report(const std::vector<PaperRecord>& records, const HeadingMap& map) {
  std::size_t total = 0;
  std::size_t mapped = 0;
  std::map<std::string, std::size_t> unmapped;
  for (const PaperRecord& record : records) {
    for (const std::string& name : record.section_names) {
      ++total;
      std::string canonical = canonicalize_heading(name);
      if (map_heading(canonical, map) != SectionLabel::Unmapped) {
        ++mapped;
      } else {
        ++unmapped[canonical];
      }
    }
  }
  nlohmann::json unmapped_json = nlohmann::json::array();
  for (const auto& [heading, count] : unmapped) {
    unmapped_json.push_back({{"heading", heading}, {"count", count}});
  }
  nlohmann::json j{
      {"total_sections", total},
      {"mapped", mapped},
      {"unmapped", unmapped_json},
  };
  j["coverage"] = total == 0 ? nlohmann::json(nullptr)
                             : nlohmann::json(static_cast<double>(mapped) /
                                              static_cast<double>(total));
  return j;
}

void write_text_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

namespace {

constexpr std::size_t kHistogramBinWidth = 25;

enum class DocStatus { Unprocessed, Evaluated, Rejected, Failed };

struct DocSlot {
  DocStatus status = DocStatus::Unprocessed;
  nlohmann::json entry;        // bucket-specific report entry
  nlohmann::json summary_json; // evaluated only
  std::string csv_row;         // evaluated only
  std::size_t summary_words = 0;
  std::array<double, 11> metrics{};  // p/r/f1 for rouge-1/2/L, then gem coverage+score
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

nlohmann::json rouge_json(const RougeScore& s) {
  return nlohmann::json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

nlohmann::json label_names_json(const std::vector<SectionLabel>& labels) {
  nlohmann::json out = nlohmann::json::array();
  for (SectionLabel label : labels) out.push_back(label_name(label));
  return out;
}

struct StageTimer {
  using clock = std::chrono::steady_clock;

  void record(const char* stage, clock::time_point start) {
    double seconds = std::chrono::duration<double>(clock::now() - start).count();
    stages.push_back({{"stage", stage}, {"seconds", seconds}});
  }
  nlohmann::json stages = nlohmann::json::array();
};

nlohmann::json aggregate_metric(std::vector<double> samples, const MetricsConfig& metrics,
                                std::uint64_t seed, const std::string& name) {
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  ConfidenceInterval ci = bootstrap_ci(samples, metrics.ci_level, metrics.bootstrap_resamples,
                                       seed ^ fnv1a64(name));
  return nlohmann::json{{"mean", mean}, {"ci", {ci.lo, ci.hi}}};
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& cfg, bool write_files) {
  using clock = std::chrono::steady_clock;
  cfg.validate();

  StageTimer timer;
  RunReport run;

  // -- load ---------------------------------------------------------------
  clock::time_point t0 = clock::now();
  HeadingMap heading_map = load_heading_map(cfg.heading_map_path);
  std::optional<SfrModel> model;
  if (!cfg.sfr.model_path.empty()) model = load_model(cfg.sfr.model_path);
  std::optional<BackendClient> classify_client;
  if (cfg.classify_backend) classify_client.emplace(*cfg.classify_backend);
  std::optional<BackendClient> generate_client;
  if (cfg.generate_backend) generate_client.emplace(*cfg.generate_backend);
  timer.record("load", t0);

  // -- ingest ---------------------------------------------------------------
  t0 = clock::now();
  std::vector<IngestError> ingest_errors;
  std::vector<PaperRecord> records = read_jsonl(cfg.corpus_path, &ingest_errors);
  timer.record("ingest", t0);

  // -- per-document work ----------------------------------------------------
  t0 = clock::now();
  std::vector<DocSlot> slots(records.size());
  std::vector<std::vector<SectionLabel>> doc_labels(records.size());

  auto process_doc = [&](std::size_t i) {
    const PaperRecord& record = records[i];
    DocSlot& slot = slots[i];
    std::string stage = "classify";
    try {
      LabeledDoc labeled =
          label_document(record, heading_map, model ? &*model : nullptr,
                         classify_client ? &*classify_client : nullptr, cfg.composition);
      doc_labels[i] = labeled.labels;

      nlohmann::json decisions = nlohmann::json::array();
      for (const SectionDecision& d : labeled.decisions) {
        decisions.push_back({{"section", d.section_name},
                             {"label", label_name(d.label)},
                             {"source", d.source}});
      }

      stage = "filter";
      FilterVerdict verdict = filter_for_summarization(record, labeled.labels, cfg.filter);
      if (!verdict.accepted) {
        slot.status = DocStatus::Rejected;
        slot.entry = nlohmann::json{{"article_id", record.article_id},
                                    {"reason", reject_reason_name(*verdict.reason)},
                                    {"detail", verdict.detail}};
        return;
      }

      stage = "summarize";
      std::vector<LabeledSection> sections;
      std::vector<LabeledSectionText> section_texts;
      std::vector<std::string> fit_docs;
      std::vector<SectionLabel> present;
      for (std::size_t s = 0; s < record.sections.size(); ++s) {
        if (labeled.labels[s] == SectionLabel::Unmapped) continue;
        LabeledSection sec;
        sec.label = labeled.labels[s];
        sec.title = record.section_names[s];
        sec.sentences = record.sections[s];
        sections.push_back(sec);
        std::string text = join(record.sections[s], " ");
        section_texts.push_back(LabeledSectionText{labeled.labels[s], text});
        fit_docs.push_back(std::move(text));
        present.push_back(labeled.labels[s]);
      }
      SummaryPlan doc_plan = plan(present, cfg.weights, cfg.total_cap);

      SectionGenerator generator;
      SummaryMode mode;
      if (generate_client) {
        mode = SummaryMode::DivideAndConquer;
        generator = [&](SectionLabel label, const std::vector<std::string>& sentences,
                        std::size_t budget) -> std::string {
          (void)label;
          if (budget == 0) return "";
          GenerationParams params = cfg.generation;
          params.max_words = budget;
          params.min_words = std::min(params.min_words, budget);
          return generate_client->generate(join(sentences, " "), params);
        };
      } else {
        mode = SummaryMode::ExtractiveFallback;
        generator = [](SectionLabel label, const std::vector<std::string>& sentences,
                       std::size_t budget) -> std::string {
          (void)label;
          if (budget == 0) return "";
          return extractive_fallback(sentences, budget);
        };
      }
      GeneratedSummary summary = summarize_divide(sections, generator, doc_plan, mode);
      summary.article_id = record.article_id;

      stage = "evaluate";
      std::string gold = join(record.abstract_sentences, " ");
      std::vector<std::string> cand = tokenize(summary.text, cfg.metrics.stemming);
      std::vector<std::string> ref = tokenize(gold, cfg.metrics.stemming);
      RougeScore r1 = rouge_n(cand, ref, 1);
      RougeScore r2 = rouge_n(cand, ref, 2);
      RougeScore rl = rouge_l(cand, ref);

      TfIdfEmbedder embedder(fit_docs);
      GemCrReport gem = gem_cr(summary.text, section_texts, cfg.weights, embedder);

      slot.status = DocStatus::Evaluated;
      slot.summary_json = summary.to_json();
      slot.summary_words = summary.total_words;
      slot.metrics = {r1.precision, r1.recall, r1.f1,  r2.precision, r2.recall, r2.f1,
                      rl.precision, rl.recall, rl.f1,  gem.coverage, gem.score};

      nlohmann::json metrics_json{
          {"rouge1", rouge_json(r1)},
          {"rouge2", rouge_json(r2)},
          {"rougeL", rouge_json(rl)},
          {"gem_cr",
           {{"coverage", gem.coverage},
            {"compression", gem.compression},
            {"norm", gem.norm},
            {"norm_name", gem.norm_name},
            {"score", gem.score},
            {"source_labels", label_names_json(gem.source_labels)},
            {"covered_labels", label_names_json(gem.covered_labels)}}},
      };
      slot.entry = nlohmann::json{{"article_id", record.article_id},
                                  {"sections", decisions},
                                  {"summary", slot.summary_json},
                                  {"metrics", metrics_json}};

      slot.csv_row = record.article_id + ',' + std::to_string(summary.total_words);
      for (double v : slot.metrics) slot.csv_row += ',' + format_double(v);
    } catch (const std::exception& e) {
      slot.status = DocStatus::Failed;
      slot.entry = nlohmann::json{{"article_id", record.article_id},
                                  {"stage", stage},
                                  {"error", e.what()}};
      throw PipelineError(stage, record.article_id,
                          "stage " + stage + " failed for " + record.article_id + ": " + e.what());
    }
  };

  std::optional<PipelineError> failure;
  try {
    parallel_for(records.size(), cfg.jobs, process_doc);
  } catch (const PipelineError& e) {
    failure = e;
  }
  timer.record("process", t0);

  // -- aggregate --------------------------------------------------------
  t0 = clock::now();
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].article_id < records[b].article_id;
  });

  nlohmann::json documents = nlohmann::json::array();
  nlohmann::json rejected = nlohmann::json::array();
  nlohmann::json failed = nlohmann::json::array();
  nlohmann::json summaries = nlohmann::json::array();
  std::vector<std::string> csv_rows;
  std::vector<std::vector<double>> metric_samples(11);
  std::vector<std::size_t> word_lengths;
  std::vector<std::vector<SectionLabel>> stats_labels;
  std::vector<PaperRecord> stats_records;

  for (std::size_t idx : order) {
    const DocSlot& slot = slots[idx];
    switch (slot.status) {
      case DocStatus::Unprocessed:
        break;  // aborted before this document started
      case DocStatus::Evaluated:
        documents.push_back(slot.entry);
        summaries.push_back(slot.summary_json);
        csv_rows.push_back(slot.csv_row);
        for (std::size_t m = 0; m < slot.metrics.size(); ++m)
          metric_samples[m].push_back(slot.metrics[m]);
        word_lengths.push_back(slot.summary_words);
        stats_records.push_back(records[idx]);
        stats_labels.push_back(doc_labels[idx]);
        break;
      case DocStatus::Rejected:
        rejected.push_back(slot.entry);
        stats_records.push_back(records[idx]);
        stats_labels.push_back(doc_labels[idx]);
        break;
      case DocStatus::Failed:
        failed.push_back(slot.entry);
        break;
    }
  }

  nlohmann::json aggregate{{"evaluated_documents", documents.size()},
                           {"ci_level", cfg.metrics.ci_level}};
  if (!documents.empty()) {
    static const char* kMetricNames[11] = {
        "rouge1_precision", "rouge1_recall", "rouge1_f1", "rouge2_precision", "rouge2_recall",
        "rouge2_f1",        "rougeL_precision", "rougeL_recall", "rougeL_f1",
        "gem_cr_coverage",  "gem_cr_score"};
    for (std::size_t m = 0; m < metric_samples.size(); ++m) {
      aggregate[kMetricNames[m]] =
          aggregate_metric(metric_samples[m], cfg.metrics, cfg.seed, kMetricNames[m]);
    }
    nlohmann::json hist = nlohmann::json::array();
    for (const HistogramBin& bin : length_histogram(word_lengths, kHistogramBinWidth)) {
      hist.push_back({{"lo", bin.lo}, {"hi", bin.hi}, {"count", bin.count}});
    }
    double mean_words = 0.0;
    for (std::size_t w : word_lengths) mean_words += static_cast<double>(w);
    mean_words /= static_cast<double>(word_lengths.size());
    aggregate["summary_words"] = {{"mean", mean_words},
                                  {"bin_width", kHistogramBinWidth},
                                  {"histogram", hist}};
  }

  nlohmann::json ingest_json = nlohmann::json::array();
  for (const IngestError& err : ingest_errors) {
    ingest_json.push_back({{"line", err.line_number}, {"error", err.message}});
  }

  run.report = nlohmann::json{
      {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
      {"config", cfg.to_json(/*snapshot=*/true)},
      {"ingest_errors", ingest_json},
      {"documents", documents},
      {"rejected", rejected},
      {"failed", failed},
      {"aggregate", aggregate},
  };
  run.summaries = summaries;
  run.stats = corpus_stats(stats_records, stats_labels).to_json();
  run.normalize = normalize_report(records, heading_map);

  std::string csv =
      "article_id,total_words,rouge1_precision,rouge1_recall,rouge1_f1,rouge2_precision,"
      "rouge2_recall,rouge2_f1,rougeL_precision,rougeL_recall,rougeL_f1,gem_cr_coverage,"
      "gem_cr_score\n";
  for (const std::string& row : csv_rows) csv += row + '\n';
  run.csv = csv;
  timer.record("aggregate", t0);

  // -- write ---------------------------------------------------------------
  if (write_files) {
    t0 = clock::now();
    namespace fs = std::filesystem;
    fs::path out(cfg.out_dir);
    write_text_file((out / "report.json").string(), run.report.dump(2) + "\n");
    write_text_file((out / "report.csv").string(), run.csv);
    write_text_file((out / "summaries.json").string(), run.summaries.dump(2) + "\n");
    write_text_file((out / "stats.json").string(), run.stats.dump(2) + "\n");
    write_text_file((out / "normalize.json").string(), run.normalize.dump(2) + "\n");
    timer.record("write", t0);
    run.timings = nlohmann::json{{"stages", timer.stages}};
    write_text_file((out / "timings.json").string(), run.timings.dump(2) + "\n");
  } else {
    run.timings = nlohmann::json{{"stages", timer.stages}};
  }

  if (failure) throw *failure;
  return run;
}

}  // namespace sectra
