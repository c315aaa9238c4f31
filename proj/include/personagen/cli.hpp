#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "personagen/config.hpp"
#include "personagen/evaluation.hpp"
#include "personagen/http_backend.hpp"
#include "personagen/mock_backend.hpp"
#include "personagen/persona.hpp"
#include "personagen/taxonomy.hpp"

namespace pgen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPipeline = 1;
inline constexpr int kExitUsage = 2;

inline std::unique_ptr<Backend> make_backend(const AppConfig& cfg) {
  BackendConfig bc = cfg.backend;
  bc.seed = cfg.seed;
  if (cfg.backend_kind == "mock")
    return std::make_unique<MockBackend>(std::move(bc));
  return std::make_unique<HttpBackend>(std::move(bc));
}

inline DemographicTables load_tables(const AppConfig& cfg) {
  return cfg.tables_file.empty() ? DemographicTables::bundled()
                                 : DemographicTables::from_csv(cfg.tables_file);
}

inline std::string iso_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
#if defined(_WIN32)
  gmtime_s(&tm, &now);
#else
  gmtime_r(&now, &tm);
#endif
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::vector<std::pair<std::string, PersonaProfile>> load_personas(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw InvalidInput("persona directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (entry.path().extension() != ".json") continue;
    if (name == "manifest.json" || name.find(".partial.") != std::string::npos)
      continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, PersonaProfile>> out;
  for (const auto& f : files)
    out.emplace_back(f.filename().string(), PersonaProfile::load(f));
  if (out.empty())
    throw InvalidInput("no persona files in " + dir.string());
  return out;
}

inline AnchorSet parse_anchor_arg(const std::string& arg) {
  if (arg.empty()) return {};
  std::string text = trim(arg);
  if (!text.empty() && text[0] == '{') {
    try {
      return AnchorSet::from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("bad inline anchor JSON: ") + e.what());
    }
  }
  return AnchorSet::from_json(parse_json_file(arg));
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int cmd_build_taxonomy(const AppConfig& cfg, const std::string& qa_file,
                              const std::string& out_file,
                              const std::string& report_file) {
  std::vector<QARecord> records = load_qa_records(qa_file);
  std::unique_ptr<Backend> backend = make_backend(cfg);
  LlmNodeValidator validator(*backend);
  BuildOptions options;
  options.threshold = cfg.threshold;
  options.concurrency = static_cast<size_t>(cfg.concurrency);
  BuildResult result = build_taxonomy(records, *backend, validator, options);
  result.tree.save(out_file);
  std::cout << result.report.to_json().dump(2) << "\n";
  if (!report_file.empty()) write_json_file(report_file, result.report.to_json());
  return kExitOk;
}

inline int cmd_generate(const AppConfig& cfg, int n, const std::string& anchors_arg) {
  if (n < 0) throw InvalidInput("--n must be non-negative");
  if (cfg.taxonomy_file.empty())
    throw InvalidInput("generate needs --taxonomy (or config/env equivalent)");
  AttributeTree tree = AttributeTree::load(cfg.taxonomy_file);
  DemographicTables tables = load_tables(cfg);
  std::unique_ptr<Backend> backend = make_backend(cfg);
  AnchorSet anchors = parse_anchor_arg(anchors_arg);

  std::filesystem::create_directories(cfg.output_dir);
  ojson files = ojson::array();
  int failures = 0;
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "persona_%03d.json", i);
    std::filesystem::path out = std::filesystem::path(cfg.output_dir) / name;
    Rng rng(cfg.seed + static_cast<std::uint64_t>(i));
    try {
      GenerateOutcome outcome =
          generate_profile(anchors, cfg.k, tree, tables, *backend, rng);
      for (const std::string& w : outcome.warnings)
        std::cerr << name << ": warning: " << w << "\n";
      if (outcome.taxonomy_exhausted)
        std::cerr << name << ": warning: taxonomy exhausted at "
                  << outcome.profile.attribute_count() << " attributes\n";
      outcome.profile.save(out);
      files.push_back(name);
    } catch (const PersonaGenerationError& e) {
      ++failures;
      std::string partial_name = std::string(name);
      partial_name.replace(partial_name.find(".json"), 5, ".partial.json");
      e.partial().save(std::filesystem::path(cfg.output_dir) / partial_name);
      std::cerr << name << ": generation failed: " << e.what()
                << " (partial saved as " << partial_name << ")\n";
    }
  }
  ojson manifest;
  manifest["command"] = "generate";
  manifest["n"] = n;
  manifest["k"] = cfg.k;
  manifest["seed"] = cfg.seed;
  manifest["files"] = std::move(files);
  manifest["failures"] = failures;
  manifest["generated_at"] = iso_timestamp();
  write_json_file(std::filesystem::path(cfg.output_dir) / "manifest.json",
                  manifest);
  return n > 0 && failures == n ? kExitPipeline : kExitOk;
}

inline int cmd_enrich(const AppConfig& cfg, const std::string& sketches_file) {
  if (cfg.taxonomy_file.empty())
    throw InvalidInput("enrich needs --taxonomy (or config/env equivalent)");
  AttributeTree tree = AttributeTree::load(cfg.taxonomy_file);
  DemographicTables tables = load_tables(cfg);
  std::unique_ptr<Backend> backend = make_backend(cfg);

  std::vector<std::string> sketches;
  for (const std::string& raw : split(read_file(sketches_file), '\n')) {
    std::string line = trim(raw);
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      if (j.is_string())
        sketches.push_back(j.get<std::string>());
      else if (j.is_object() && j.contains("sketch"))
        sketches.push_back(j.at("sketch").get<std::string>());
      else
        sketches.push_back(line);
    } catch (const json::exception&) {
      sketches.push_back(line);
    }
  }

  std::filesystem::create_directories(cfg.output_dir);
  ojson files = ojson::array();
  int failures = 0;
  for (size_t i = 0; i < sketches.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "enriched_%03d.json", static_cast<int>(i));
    Rng rng(cfg.seed + static_cast<std::uint64_t>(i));
    try {
      GenerateOutcome outcome =
          enrich(sketches[i], cfg.k, tree, tables, *backend, rng);
      for (const std::string& w : outcome.warnings)
        std::cerr << name << ": warning: " << w << "\n";
      outcome.profile.save(std::filesystem::path(cfg.output_dir) / name);
      files.push_back(name);
    } catch (const PersonaGenerationError& e) {
      ++failures;
      std::string partial_name = std::string(name);
      partial_name.replace(partial_name.find(".json"), 5, ".partial.json");
      e.partial().save(std::filesystem::path(cfg.output_dir) / partial_name);
      std::cerr << name << ": enrichment failed: " << e.what() << "\n";
    } catch (const Error& e) {
      ++failures;
      std::cerr << name << ": enrichment failed: " << e.what() << "\n";
    }
  }
  ojson manifest;
  manifest["command"] = "enrich";
  manifest["n"] = sketches.size();
  manifest["k"] = cfg.k;
  manifest["seed"] = cfg.seed;
  manifest["files"] = std::move(files);
  manifest["failures"] = failures;
  manifest["generated_at"] = iso_timestamp();
  write_json_file(std::filesystem::path(cfg.output_dir) / "manifest.json",
                  manifest);
  return !sketches.empty() && failures == static_cast<int>(sketches.size())
             ? kExitPipeline
             : kExitOk;
}

inline int cmd_survey(const AppConfig& cfg, const std::string& personas_dir,
                      const std::string& questions_file,
                      const std::string& out_file) {
  auto personas = load_personas(personas_dir);
  std::vector<PersonaProfile> profiles;
  profiles.reserve(personas.size());
  for (auto& [name, p] : personas) profiles.push_back(std::move(p));
  std::vector<SurveyQuestion> questions = SurveyQuestion::load(questions_file);
  if (questions.empty()) throw InvalidInput("survey question file is empty");
  std::unique_ptr<Backend> backend = make_backend(cfg);

  ojson out = ojson::array();
  for (const SurveyQuestion& q : questions)
    out.push_back(run_survey(profiles, q, *backend, cfg.concurrency).to_json());
  write_json_file(out_file, out);
  return kExitOk;
}

inline int cmd_evaluate(const std::string& sim_file, const std::string& truth_file,
                        const std::string& out_file) {
  json sim = parse_json_file(sim_file);
  if (!sim.is_array()) throw InvalidInput("--sim must hold a JSON histogram list");
  auto truth = load_truth_csv(truth_file);

  ojson out = ojson::array();
  for (const json& item : sim) {
    ResponseHistogram h = ResponseHistogram::from_json(item);
    auto it = truth.find(h.question_id);
    if (it == truth.end())
      throw InvalidInput("no ground truth for question " + h.question_id);
    ResponseHistogram t =
        truth_histogram(h.question_id, it->second, h.scale_min, h.scale_max);
    ojson entry;
    entry["question_id"] = h.question_id;
    entry["metrics"] = distance_report(h, t).to_json();
    ojson sim_counts = ojson::object(), truth_counts = ojson::object();
    for (const auto& [o, c] : h.counts) sim_counts[std::to_string(o)] = c;
    for (const auto& [o, c] : t.counts) truth_counts[std::to_string(o)] = c;
    entry["sim_counts"] = std::move(sim_counts);
    entry["truth_counts"] = std::move(truth_counts);
    out.push_back(std::move(entry));
  }
  if (out_file.empty())
    std::cout << out.dump(2) << "\n";
  else
    write_json_file(out_file, out);
  return kExitOk;
}

inline int cmd_judge(const AppConfig& cfg, const std::string& personas_dir,
                     const std::string& questions_file, const std::string& rubric_flag,
                     const std::string& out_file) {
  auto personas = load_personas(personas_dir);
  json questions = parse_json_file(questions_file);
  if (!questions.is_array() || questions.empty())
    throw InvalidInput("judge question file must hold a non-empty JSON list");
  std::unique_ptr<Backend> backend = make_backend(cfg);

  ojson results = ojson::array();
  std::map<std::string, std::pair<double, long>> sums;
  int judge_failures = 0;
  for (const auto& [name, profile] : personas) {
    for (const json& q : questions) {
      std::string qid = q.at("id").get<std::string>();
      std::string text = q.at("text").get<std::string>();
      std::string rubric_name =
          !rubric_flag.empty() ? rubric_flag : q.value("rubric", "standard");
      Rubric rubric = rubric_name == "creative" ? Rubric::kCreative
                                                : Rubric::kStandard;
      std::string response = respond_personalized(profile, text, *backend);
      try {
        PersonalizationScores scores =
            judge_response(profile, text, response, *backend, rubric);
        ojson entry;
        entry["persona"] = name;
        entry["question_id"] = qid;
        entry["rubric"] = rubric_name;
        entry["scores"] = scores.to_json()["scores"];
        entry["rationale"] = scores.to_json()["rationale"];
        results.push_back(std::move(entry));
        for (const auto& [key, value] : scores.scores) {
          sums[key].first += value;
          sums[key].second += 1;
        }
      } catch (const JudgeFailure& e) {
        ++judge_failures;
        std::cerr << name << " / " << qid << ": judge failure: " << e.what()
                  << "\n";
      }
    }
  }
  ojson aggregate = ojson::object();
  for (const auto& [key, acc] : sums)
    aggregate[key] = acc.first / static_cast<double>(acc.second);
  ojson out;
  out["results"] = std::move(results);
  out["aggregate_mean"] = std::move(aggregate);
  out["judge_failures"] = judge_failures;
  if (out_file.empty())
    std::cout << out.dump(2) << "\n";
  else
    write_json_file(out_file, out);
  return judge_failures > 0 ? kExitPipeline : kExitOk;
}

inline int cmd_report(const std::string& in_file, const std::string& out_file) {
  json in = parse_json_file(in_file);
  std::string csv;
  if (in.is_array() && !in.empty() && in[0].contains("metrics")) {
    csv = "question_id,ks,wasserstein,js,mean_diff\n";
    for (const json& row : in) {
      const json& m = row.at("metrics");
      csv += row.at("question_id").get<std::string>() + "," +
             std::to_string(m.at("ks").get<double>()) + "," +
             std::to_string(m.at("wasserstein").get<double>()) + "," +
             std::to_string(m.at("js").get<double>()) + "," +
             std::to_string(m.at("mean_diff").get<double>()) + "\n";
    }
  } else if (in.is_array() && !in.empty() && in[0].contains("counts")) {
    csv = "question_id,option,count\n";
    for (const json& row : in)
      for (const auto& [option, count] : row.at("counts").items())
        csv += row.at("question_id").get<std::string>() + "," + option + "," +
               std::to_string(count.get<long long>()) + "\n";
  } else if (in.is_object() && in.contains("results")) {
    csv = "persona,question_id,rubric,metric,score\n";
    for (const json& row : in.at("results"))
      for (const auto& [key, value] : row.at("scores").items())
        csv += row.at("persona").get<std::string>() + "," +
               row.at("question_id").get<std::string>() + "," +
               row.at("rubric").get<std::string>() + "," + key + "," +
               std::to_string(value.get<int>()) + "\n";
  } else {
    throw InvalidInput("unrecognized report shape in " + in_file);
  }
  if (out_file.empty())
    std::cout << csv;
  else
    write_file(out_file, csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Argument wiring
// ---------------------------------------------------------------------------

namespace detail {

struct FlagSet {
  std::optional<std::string> config_file;
  std::optional<std::string> backend;
  std::optional<std::string> endpoint;
  std::optional<std::string> model;
  std::optional<std::string> taxonomy;
  std::optional<std::string> tables;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> k;
  std::optional<double> threshold;
  std::optional<int> concurrency;
};

inline void add_common_flags(CLI::App* cmd, FlagSet& flags) {
  cmd->add_option("--config", flags.config_file,
                  "key=value config file (layered under env and flags)");
  cmd->add_option("--backend", flags.backend, "backend implementation")
      ->check(CLI::IsMember({"mock", "http"}));
  cmd->add_option("--endpoint", flags.endpoint, "chat-completions endpoint URL");
  cmd->add_option("--model", flags.model, "model name sent to the backend");
  cmd->add_option("--seed", flags.seed, "master random seed");
  cmd->add_option("--concurrency", flags.concurrency, "worker count");
}

inline AppConfig resolve(const FlagSet& flags,
                         const AppConfig::EnvProvider& env) {
  AppConfig cfg;
  if (flags.config_file) cfg.apply_file(*flags.config_file);
  cfg.apply_env(env);
  if (flags.backend) cfg.backend_kind = *flags.backend;
  if (flags.endpoint) cfg.backend.endpoint_url = *flags.endpoint;
  if (flags.model) cfg.backend.model_name = *flags.model;
  if (flags.taxonomy) cfg.taxonomy_file = *flags.taxonomy;
  if (flags.tables) cfg.tables_file = *flags.tables;
  if (flags.output_dir) cfg.output_dir = *flags.output_dir;
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.k) cfg.k = *flags.k;
  if (flags.threshold) cfg.threshold = *flags.threshold;
  if (flags.concurrency) cfg.concurrency = *flags.concurrency;
  cfg.validate();
  return cfg;
}

}  // namespace detail

inline int run(int argc, const char* const* argv,
               const AppConfig::EnvProvider& env = [](const char* name) {
                 return std::getenv(name);
               }) {
  CLI::App app{"synthetic persona pipeline: taxonomy mining, progressive "
               "profile generation, and population evaluation"};
  app.require_subcommand(1);

  detail::FlagSet flags;

  auto* build = app.add_subcommand("build-taxonomy",
                                   "mine an attribute taxonomy from QA records");
  std::string qa_file, taxonomy_out, report_file;
  build->add_option("--qa", qa_file, "QA records (JSONL)")->required();
  build->add_option("--out", taxonomy_out, "taxonomy output file")->required();
  build->add_option("--threshold", flags.threshold,
                    "sibling-merge cosine threshold");
  build->add_option("--report", report_file, "also write the build report here");
  detail::add_common_flags(build, flags);

  auto* generate = app.add_subcommand("generate", "generate persona profiles");
  int gen_n = 1;
  std::string anchors_arg;
  generate->add_option("--taxonomy", flags.taxonomy, "taxonomy file")->required();
  generate->add_option("--n", gen_n, "number of personas");
  generate->add_option("--k", flags.k, "attribute depth budget");
  generate->add_option("--anchors", anchors_arg,
                       "anchor constraints (inline JSON or a file path)");
  generate->add_option("--tables", flags.tables, "demographic tables CSV");
  generate->add_option("--out-dir", flags.output_dir, "output directory");
  detail::add_common_flags(generate, flags);

  auto* enrich_cmd = app.add_subcommand("enrich",
                                        "expand persona sketches into profiles");
  std::string sketches_file;
  enrich_cmd->add_option("--sketches", sketches_file, "sketches (JSONL)")
      ->required();
  enrich_cmd->add_option("--taxonomy", flags.taxonomy, "taxonomy file")
      ->required();
  enrich_cmd->add_option("--k", flags.k, "attribute depth budget");
  enrich_cmd->add_option("--tables", flags.tables, "demographic tables CSV");
  enrich_cmd->add_option("--out-dir", flags.output_dir, "output directory");
  detail::add_common_flags(enrich_cmd, flags);

  auto* survey = app.add_subcommand("survey", "run a Likert survey over personas");
  std::string personas_dir, questions_file, survey_out;
  survey->add_option("--personas", personas_dir, "persona directory")->required();
  survey->add_option("--questions", questions_file, "survey questions (JSON)")
      ->required();
  survey->add_option("--out", survey_out, "histogram output file")->required();
  detail::add_common_flags(survey, flags);

  auto* evaluate = app.add_subcommand(
      "evaluate", "compare simulated histograms against ground truth");
  std::string sim_file, truth_file, eval_out;
  evaluate->add_option("--sim", sim_file, "simulated histograms (JSON)")
      ->required();
  evaluate->add_option("--truth", truth_file,
                       "ground truth CSV (question_id,option,count)")
      ->required();
  evaluate->add_option("--out", eval_out, "report output file (default stdout)");
  detail::add_common_flags(evaluate, flags);

  auto* judge = app.add_subcommand("judge",
                                   "score personalized responses with a rubric");
  std::string judge_personas, judge_questions, rubric_flag, judge_out;
  judge->add_option("--personas", judge_personas, "persona directory")->required();
  judge->add_option("--questions", judge_questions,
                    "personalization questions (JSON)")
      ->required();
  judge->add_option("--rubric", rubric_flag, "force one rubric for all questions")
      ->check(CLI::IsMember({"standard", "creative"}));
  judge->add_option("--out", judge_out, "report output file (default stdout)");
  detail::add_common_flags(judge, flags);

  auto* report = app.add_subcommand("report",
                                    "render plot-ready CSV from a report JSON");
  std::string report_in, report_out;
  report->add_option("--in", report_in, "report JSON file")->required();
  report->add_option("--out", report_out, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (report->parsed()) return cmd_report(report_in, report_out);
    AppConfig cfg = detail::resolve(flags, env);
    if (build->parsed())
      return cmd_build_taxonomy(cfg, qa_file, taxonomy_out, report_file);
    if (generate->parsed()) return cmd_generate(cfg, gen_n, anchors_arg);
    if (enrich_cmd->parsed()) return cmd_enrich(cfg, sketches_file);
    if (survey->parsed())
      return cmd_survey(cfg, personas_dir, questions_file, survey_out);
    if (evaluate->parsed()) return cmd_evaluate(sim_file, truth_file, eval_out);
    if (judge->parsed())
      return cmd_judge(cfg, judge_personas, judge_questions, rubric_flag,
                       judge_out);
    std::cerr << app.help() << "\n";
    return kExitUsage;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitPipeline;
  }
}

}  // namespace pgen::cli
