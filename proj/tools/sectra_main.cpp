#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sectra/backends.hpp"
#include "sectra/corpus.hpp"
#include "sectra/headings.hpp"
#include "sectra/metrics.hpp"
#include "sectra/parallel.hpp"
#include "sectra/pipeline.hpp"
#include "sectra/sfr.hpp"
#include "sectra/text.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "pipeline config (JSON)")->required();
  cmd->add_option("--seed", args->seed, "override the config seed");
  cmd->add_option("--out", args->out, "override the output directory");
  cmd->add_option("--jobs", args->jobs, "document-level parallelism");
}

sectra::PipelineConfig resolve_config(const CommonArgs& args) {
  sectra::PipelineConfig cfg = sectra::load_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.out) cfg.out_dir = *args.out;
  if (args.jobs) cfg.jobs = *args.jobs;
  cfg.validate();
  return cfg;
}

void write_json(const sectra::PipelineConfig& cfg, const std::string& name, const json& j) {
  std::string path = (fs::path(cfg.out_dir) / name).string();
  sectra::write_text_file(path, j.dump(2) + "\n");
  std::cout << "wrote " << path << "\n";
}

int cmd_ingest(const CommonArgs& args) {
  sectra::PipelineConfig cfg = resolve_config(args);
  sectra::HeadingMap map = sectra::load_heading_map(cfg.heading_map_path);
  std::vector<sectra::IngestError> errors;
  std::vector<sectra::PaperRecord> records = sectra::read_jsonl(cfg.corpus_path, &errors);

  std::vector<std::vector<sectra::SectionLabel>> labels;
  labels.reserve(records.size());
  for (const sectra::PaperRecord& record : records) {
    std::vector<sectra::SectionLabel> doc;
    doc.reserve(record.section_names.size());
    for (const std::string& name : record.section_names) {
      doc.push_back(sectra::map_heading(sectra::canonicalize_heading(name), map));
    }
    labels.push_back(std::move(doc));
  }

  json errors_json = json::array();
  for (const sectra::IngestError& err : errors) {
    errors_json.push_back({{"line", err.line_number}, {"error", err.message}});
  }
  json out{{"stats", sectra::corpus_stats(records, labels).to_json()},
           {"ingest_errors", errors_json}};
  write_json(cfg, "stats.json", out);
  std::cout << "ingested " << records.size() << " records, " << errors.size() << " bad lines\n";
  return 0;
}

int cmd_normalize(const CommonArgs& args) {
  sectra::PipelineConfig cfg = resolve_config(args);
  sectra::HeadingMap map = sectra::load_heading_map(cfg.heading_map_path);
  std::vector<sectra::PaperRecord> records = sectra::read_jsonl(cfg.corpus_path);
  json report = sectra::normalize_report(records, map);
  write_json(cfg, "normalize.json", report);
  std::size_t total = report.at("total_sections").get<std::size_t>();
  std::size_t mapped = report.at("mapped").get<std::size_t>();
  std::printf("mapped %zu/%zu (%.1f%%)\n", mapped, total,
              total ? 100.0 * static_cast<double>(mapped) / static_cast<double>(total) : 0.0);
  return 0;
}

std::string model_path_for(const sectra::PipelineConfig& cfg) {
  if (!cfg.sfr.model_path.empty()) return cfg.sfr.model_path;
  return (fs::path(cfg.out_dir) / "sfr_model.json").string();
}

int cmd_sfr_train(const CommonArgs& args) {
  sectra::PipelineConfig cfg = resolve_config(args);
  sectra::HeadingMap map = sectra::load_heading_map(cfg.heading_map_path);
  std::vector<sectra::PaperRecord> records = sectra::read_jsonl(cfg.corpus_path);
  std::vector<sectra::LabeledText> data =
      sectra::composed_training_set(records, map, cfg.composition);
  if (data.empty()) {
    std::cerr << "sfr-train: no mappable sections in the corpus\n";
    return 2;
  }

  sectra::TrainOptions train_options = cfg.sfr.train;
  train_options.seed = cfg.seed;
  sectra::TrainResult result = sectra::train(data, cfg.sfr.options, train_options);

  std::string model_path = (fs::path(cfg.out_dir) / "sfr_model.json").string();
  sectra::save_model(result.model, model_path);

  json report{{"examples", data.size()},
              {"final_loss", result.final_loss},
              {"epoch_losses", result.epoch_losses},
              {"warnings", result.warnings},
              {"model_path", model_path}};
  write_json(cfg, "sfr_train.json", report);
  std::printf("trained on %zu chapters, final loss %.6f\n", data.size(), result.final_loss);
  for (const std::string& warning : result.warnings) std::cout << "warning: " << warning << "\n";
  return 0;
}

int cmd_sfr_eval(const CommonArgs& args) {
  sectra::PipelineConfig cfg = resolve_config(args);
  sectra::SfrModel model = sectra::load_model(model_path_for(cfg));
  sectra::HeadingMap map = sectra::load_heading_map(cfg.heading_map_path);
  std::vector<sectra::PaperRecord> records = sectra::read_jsonl(cfg.corpus_path);
  std::vector<sectra::LabeledText> data =
      sectra::composed_training_set(records, map, cfg.composition);
  if (data.empty()) {
    std::cerr << "sfr-eval: no mappable sections in the corpus\n";
    return 2;
  }

  sectra::ConfusionMatrix cm = sectra::evaluate(model, data);
  sectra::MacroScores macro = sectra::macro_scores(cm.rows());

  json confusion = json::array();
  for (const auto& row : cm.rows()) confusion.push_back(row);
  json per_class = json::object();
  for (sectra::SectionLabel label : sectra::kLabelOrder) {
    std::size_t c = static_cast<std::size_t>(label);
    per_class[sectra::label_name(label)] = {{"precision", macro.precision[c]},
                                            {"recall", macro.recall[c]}};
  }
  json report{{"examples", data.size()},
              {"confusion", confusion},
              {"per_class", per_class},
              {"macro_precision", macro.macro_p},
              {"macro_recall", macro.macro_r},
              {"macro_f1", macro.macro_f1},
              {"zero_denominator_classes", macro.zero_denominator_classes}};
  write_json(cfg, "sfr_eval.json", report);
  std::printf("macro P %.4f / R %.4f / F1 %.4f over %zu chapters\n", macro.macro_p, macro.macro_r,
              macro.macro_f1, data.size());
  return 0;
}

int cmd_classify(const CommonArgs& args) {
  sectra::PipelineConfig cfg = resolve_config(args);
  sectra::HeadingMap map = sectra::load_heading_map(cfg.heading_map_path);
  std::vector<sectra::PaperRecord> records = sectra::read_jsonl(cfg.corpus_path);

  std::optional<sectra::SfrModel> model;
  if (!cfg.sfr.model_path.empty()) model = sectra::load_model(cfg.sfr.model_path);
  std::optional<sectra::BackendClient> client;
  if (cfg.classify_backend) client.emplace(*cfg.classify_backend);

  std::vector<json> rows(records.size());
  sectra::parallel_for(records.size(), cfg.jobs, [&](std::size_t i) {
    sectra::LabeledDoc labeled =
        sectra::label_document(records[i], map, model ? &*model : nullptr,
                               client ? &*client : nullptr, cfg.composition);
    json sections = json::array();
    for (const sectra::SectionDecision& d : labeled.decisions) {
      sections.push_back({{"section", d.section_name},
                          {"label", sectra::label_name(d.label)},
                          {"source", d.source}});
    }
    rows[i] = json{{"article_id", records[i].article_id}, {"sections", sections}};
  });

  std::sort(rows.begin(), rows.end(), [](const json& a, const json& b) {
    return a.at("article_id").get<std::string>() < b.at("article_id").get<std::string>();
  });
  write_json(cfg, "labels.json", json(rows));
  std::cout << "classified " << records.size() << " documents\n";
  return 0;
}

int cmd_summarize(const CommonArgs& args) {
  sectra::PipelineConfig cfg = resolve_config(args);
  sectra::RunReport run = sectra::run_pipeline(cfg, /*write_files=*/false);
  write_json(cfg, "summaries.json", run.summaries);
  std::cout << "summarized " << run.summaries.size() << " documents ("
            << run.report.at("rejected").size() << " rejected)\n";
  return 0;
}

int cmd_evaluate(const CommonArgs& args) {
  sectra::PipelineConfig cfg = resolve_config(args);
  sectra::RunReport run = sectra::run_pipeline(cfg, /*write_files=*/false);
  write_json(cfg, "report.json", run.report);
  sectra::write_text_file((fs::path(cfg.out_dir) / "report.csv").string(), run.csv);
  std::cout << "evaluated " << run.report.at("aggregate").at("evaluated_documents")
            << " documents\n";
  return 0;
}

int cmd_judge(const CommonArgs& args) {
  sectra::PipelineConfig cfg = resolve_config(args);
  if (!cfg.judge_backend) {
    std::cerr << "judge: no judge backend configured\n";
    return 1;
  }
  sectra::RunReport run = sectra::run_pipeline(cfg, /*write_files=*/false);
  sectra::BackendClient client(*cfg.judge_backend);
  sectra::JudgeCriteria criteria = sectra::default_judge_criteria();

  // Gold abstracts for the judged summaries.
  std::vector<sectra::PaperRecord> records = sectra::read_jsonl(cfg.corpus_path);
  std::map<std::string, std::string> golds;
  for (const sectra::PaperRecord& record : records) {
    golds[record.article_id] = sectra::join(record.abstract_sentences, " ");
  }

  std::vector<json> rows(run.summaries.size());
  sectra::parallel_for(run.summaries.size(), cfg.jobs, [&](std::size_t i) {
    const json& summary = run.summaries.at(i);
    std::string article_id = summary.at("article_id").get<std::string>();
    std::string prompt = sectra::build_judge_prompt(criteria, golds.at(article_id),
                                                    summary.at("text").get<std::string>());
    sectra::JudgeResult scores = client.judge(prompt);
    rows[i] = json{{"article_id", article_id},
                   {"informativeness", scores.informativeness},
                   {"coherence", scores.coherence},
                   {"readability", scores.readability}};
  });

  double info = 0.0, coher = 0.0, read = 0.0;
  for (const json& row : rows) {
    info += row.at("informativeness").get<int>();
    coher += row.at("coherence").get<int>();
    read += row.at("readability").get<int>();
  }
  double n = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  json report{{"documents", rows},
              {"mean",
               {{"informativeness", info / n},
                {"coherence", coher / n},
                {"readability", read / n}}}};
  write_json(cfg, "judge.json", report);
  std::cout << "judged " << rows.size() << " summaries\n";
  return 0;
}

int cmd_run(const CommonArgs& args) {
  sectra::PipelineConfig cfg = resolve_config(args);
  sectra::RunReport run = sectra::run_pipeline(cfg, /*write_files=*/true);
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "report.json").string() << "\n";
  std::cout << "evaluated " << run.report.at("aggregate").at("evaluated_documents")
            << " documents, " << run.report.at("rejected").size() << " rejected\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structure-aware scientific paper summarization pipeline"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    int (*fn)(const CommonArgs&);
    CommonArgs args;
  };
  Sub subs[] = {
      {"ingest", "validate the corpus and emit stats.json", cmd_ingest, {}},
      {"normalize", "heading-map coverage report", cmd_normalize, {}},
      {"sfr-train", "train the local section classifier", cmd_sfr_train, {}},
      {"sfr-eval", "confusion matrix and macro scores", cmd_sfr_eval, {}},
      {"classify", "label every section of every document", cmd_classify, {}},
      {"summarize", "generate section-guided summaries", cmd_summarize, {}},
      {"evaluate", "score summaries against gold abstracts", cmd_evaluate, {}},
      {"judge", "LLM-judge harness over a judge backend", cmd_judge, {}},
      {"run", "all stages end to end", cmd_run, {}},
  };
  for (Sub& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    add_common(cmd, &sub.args);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    for (Sub& sub : subs) {
      if (app.get_subcommand(sub.name)->parsed()) return sub.fn(sub.args);
    }
    std::cerr << "no subcommand\n";
    return 1;
  } catch (const sectra::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
