#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "personagen/cli.hpp"

using namespace pgen;
namespace fs = std::filesystem;

namespace {

// Runs the CLI in-process with injected env and captured streams.
int run_cli(std::vector<std::string> args,
            const std::map<std::string, std::string>& env = {},
            std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "personagen");
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());

  std::stringstream captured_out, captured_err;
  std::streambuf* old_out = std::cout.rdbuf(captured_out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(captured_err.rdbuf());
  int code = cli::run(static_cast<int>(argv.size()), argv.data(),
                      [&env](const char* name) -> const char* {
                        auto it = env.find(name);
                        return it == env.end() ? nullptr : it->second.c_str();
                      });
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  if (out) *out = captured_out.str();
  if (err) *err = captured_err.str();
  return code;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream(file) << text;
}

const fs::path kData = fs::path(PGEN_DATA_DIR);

}  // namespace

TEST_CASE("config layering") {
  AppConfig cfg;
  CHECK(cfg.backend_kind == "mock");
  CHECK(cfg.k == 200);
  CHECK(cfg.threshold == 0.70);
  CHECK(cfg.concurrency == 4);
  CHECK(cfg.output_dir == "out");

  SUBCASE("apply_kv handles every key and rejects the rest") {
    cfg.apply_kv("k", "50");
    cfg.apply_kv("seed", "9");
    cfg.apply_kv("threshold", "0.8");
    cfg.apply_kv("backend", "http");
    cfg.apply_kv("endpoint_url", "http://localhost:1");
    cfg.apply_kv("model_name", "m");
    cfg.apply_kv("api_key_env", "MY_KEY");
    cfg.apply_kv("max_retries", "2");
    cfg.apply_kv("rate_limit", "5.5");
    cfg.apply_kv("timeout_seconds", "30");
    cfg.apply_kv("temperature", "0.3");
    cfg.apply_kv("taxonomy", "t.json");
    cfg.apply_kv("tables", "d.csv");
    cfg.apply_kv("output_dir", "elsewhere");
    cfg.apply_kv("concurrency", "2");
    CHECK(cfg.k == 50);
    CHECK(cfg.seed == 9);
    CHECK(cfg.backend.model_name == "m");
    CHECK(cfg.backend.rate_limit == 5.5);
    CHECK_THROWS_AS(cfg.apply_kv("mystery", "1"), InvalidInput);
    CHECK_THROWS_AS(cfg.apply_kv("k", "many"), InvalidInput);
  }

  SUBCASE("file then env then flags, later layers winning") {
    fs::path dir = fresh_dir("pgen_cli_cfg");
    fs::path file = dir / "pgen.conf";
    write_text(file, "# comment\n\nk = 10\nseed=4\noutput_dir = from_file\n");
    cfg.apply_file(file);
    CHECK(cfg.k == 10);
    CHECK(cfg.seed == 4);
    CHECK(cfg.output_dir == "from_file");

    std::map<std::string, std::string> env = {{"PGEN_K", "20"},
                                              {"PGEN_THRESHOLD", "0.9"}};
    cfg.apply_env([&env](const char* name) -> const char* {
      auto it = env.find(name);
      return it == env.end() ? nullptr : it->second.c_str();
    });
    CHECK(cfg.k == 20);       // env overrides file
    CHECK(cfg.seed == 4);     // untouched by env
    CHECK(cfg.threshold == 0.9);

    write_text(file, "just a line\n");
    AppConfig other;
    CHECK_THROWS_AS(other.apply_file(file), InvalidInput);
  }

  SUBCASE("validate guards the ranges") {
    cfg.backend_kind = "carrier pigeon";
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg.backend_kind = "mock";
    cfg.k = -1;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg.k = 0;
    cfg.threshold = 0.0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg.threshold = 0.5;
    cfg.concurrency = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  }
}

TEST_CASE("cli usage errors") {
  std::string out, err;
  CHECK(run_cli({}, {}, &out, &err) == 2);
  CHECK(run_cli({"frobnicate"}, {}, &out, &err) == 2);
  CHECK(run_cli({"--help"}, {}, &out, &err) == 0);
  CHECK(out.find("build-taxonomy") != std::string::npos);

  // missing required options
  CHECK(run_cli({"generate"}, {}, &out, &err) == 2);
  CHECK(run_cli({"survey", "--personas", "x"}, {}, &out, &err) == 2);

  // well-formed flags, bad inputs
  fs::path dir = fresh_dir("pgen_cli_usage");
  CHECK(run_cli({"build-taxonomy", "--qa", (dir / "absent.jsonl").string(),
                 "--out", (dir / "t.json").string()},
                {}, &out, &err) == 2);
  CHECK(err.find("file not found") != std::string::npos);

  CHECK(run_cli({"build-taxonomy", "--qa",
                 (kData / "qa_records_50.jsonl").string(), "--out",
                 (dir / "t.json").string(), "--threshold", "0"},
                {}, &out, &err) == 2);
  CHECK(err.find("threshold") != std::string::npos);

  fs::path bad_conf = dir / "bad.conf";
  write_text(bad_conf, "mystery = 1\n");
  CHECK(run_cli({"generate", "--taxonomy", "t.json", "--config",
                 bad_conf.string()},
                {}, &out, &err) == 2);
  CHECK(err.find("unknown config key") != std::string::npos);

  CHECK(run_cli({"generate", "--taxonomy", (dir / "absent.json").string()},
                {}, &out, &err) == 2);
}

TEST_CASE("flag overrides env overrides config file") {
  fs::path dir = fresh_dir("pgen_cli_layers");
  fs::path conf = dir / "pgen.conf";
  write_text(conf, "k = 16\n");

  // A taxonomy to generate against.
  std::string out, err;
  fs::path tax = dir / "tax.json";
  REQUIRE(run_cli({"build-taxonomy", "--qa",
                   (kData / "qa_records_50.jsonl").string(), "--out",
                   tax.string()},
                  {}, &out, &err) == 0);

  auto manifest_k = [&](std::vector<std::string> extra,
                        std::map<std::string, std::string> env) {
    fs::path out_dir = fresh_dir("pgen_cli_layers_out");
    std::vector<std::string> args = {"generate",  "--taxonomy", tax.string(),
                                     "--n",       "1",          "--out-dir",
                                     out_dir.string(), "--config", conf.string()};
    for (std::string& e : extra) args.push_back(std::move(e));
    REQUIRE(run_cli(args, env, &out, &err) == 0);
    return parse_json_file(out_dir / "manifest.json").at("k").get<int>();
  };

  CHECK(manifest_k({}, {}) == 16);                          // file layer
  CHECK(manifest_k({}, {{"PGEN_K", "18"}}) == 18);          // env beats file
  CHECK(manifest_k({"--k", "20"}, {{"PGEN_K", "18"}}) == 20);  // flag beats env
}

TEST_CASE("cli pipeline end to end") {
  fs::path dir = fresh_dir("pgen_cli_e2e");
  std::string out, err;

  // --- build-taxonomy ------------------------------------------------------
  fs::path tax = dir / "taxonomy.json";
  fs::path report = dir / "report.json";
  REQUIRE(run_cli({"build-taxonomy", "--qa",
                   (kData / "qa_records_50.jsonl").string(), "--out",
                   tax.string(), "--report", report.string(), "--seed", "7"},
                  {}, &out, &err) == 0);
  REQUIRE(fs::exists(tax));
  REQUIRE(fs::exists(report));
  json rep = parse_json_file(report);
  CHECK(rep["records_total"] == 50);
  CHECK(rep["final_nodes"] == 79);
  CHECK(rep["final_paths"] == 41);
  CHECK(json::parse(out)["final_nodes"] == 79);  // also printed to stdout
  AttributeTree tree = AttributeTree::load(tax);
  CHECK(tree.roots().size() == 12);

  // --- generate ------------------------------------------------------------
  fs::path personas = dir / "personas";
  REQUIRE(run_cli({"generate", "--taxonomy", tax.string(), "--n", "2", "--k",
                   "20", "--seed", "3", "--out-dir", personas.string()},
                  {}, &out, &err) == 0);
  json manifest = parse_json_file(personas / "manifest.json");
  CHECK(manifest["command"] == "generate");
  CHECK(manifest["n"] == 2);
  CHECK(manifest["k"] == 20);
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["failures"] == 0);
  REQUIRE(manifest["files"] ==
          json::array({"persona_000.json", "persona_001.json"}));
  CHECK(manifest.contains("generated_at"));
  for (const std::string name : {"persona_000.json", "persona_001.json"}) {
    PersonaProfile p = PersonaProfile::load(personas / name);
    CHECK(p.attribute_count() == 20);
    CHECK(!p.narrative.empty());
    CHECK_NOTHROW(verify_anchors(p));
  }
  // distinct seeds per persona -> distinct profiles
  CHECK(PersonaProfile::load(personas / "persona_000.json").to_json().dump() !=
        PersonaProfile::load(personas / "persona_001.json").to_json().dump());

  SUBCASE("n=0 still writes an empty manifest") {
    fs::path none = dir / "none";
    REQUIRE(run_cli({"generate", "--taxonomy", tax.string(), "--n", "0",
                     "--out-dir", none.string()},
                    {}, &out, &err) == 0);
    json m = parse_json_file(none / "manifest.json");
    CHECK(m["n"] == 0);
    CHECK(m["files"].empty());
  }

  SUBCASE("inline anchors reach every output") {
    fs::path anchored = dir / "anchored";
    REQUIRE(run_cli({"generate", "--taxonomy", tax.string(), "--n", "1", "--k",
                     "15", "--out-dir", anchored.string(), "--anchors",
                     R"({"age": 34, "city": "Toronto"})"},
                    {}, &out, &err) == 0);
    PersonaProfile p = PersonaProfile::load(anchored / "persona_000.json");
    CHECK(p.anchors.age_info.age == 34);
    CHECK(p.anchors.location.city == "Toronto");
    CHECK(p.anchor_input.get("age") == "34");
  }

  SUBCASE("enrich expands jsonl sketches in all three spellings") {
    fs::path sketches = dir / "sketches.jsonl";
    write_text(sketches,
               "\"A 34-year-old nurse living in Toronto, Canada.\"\n"
               "{\"sketch\": \"A 68-year-old retired teacher in Osaka who "
               "plays chess.\"}\n"
               "A young engineer in Berlin, Germany, who loves hiking.\n");
    fs::path enriched = dir / "enriched";
    REQUIRE(run_cli({"enrich", "--sketches", sketches.string(), "--taxonomy",
                     tax.string(), "--k", "16", "--out-dir", enriched.string()},
                    {}, &out, &err) == 0);
    json m = parse_json_file(enriched / "manifest.json");
    CHECK(m["command"] == "enrich");
    CHECK(m["n"] == 3);
    CHECK(m["failures"] == 0);
    PersonaProfile first = PersonaProfile::load(enriched / "enriched_000.json");
    CHECK(first.anchors.age_info.age == 34);
    CHECK(first.anchors.career_info.status == "nurse");
    CHECK(first.anchor_input.bio ==
          "A 34-year-old nurse living in Toronto, Canada.");
    PersonaProfile second = PersonaProfile::load(enriched / "enriched_001.json");
    CHECK(second.anchors.age_info.age == 68);
    CHECK(second.anchors.location.city == "Osaka");
  }

  // --- survey ---------------------------------------------------------------
  fs::path hist_file = dir / "histograms.json";
  REQUIRE(run_cli({"survey", "--personas", personas.string(), "--questions",
                   (kData / "wvs_questions.json").string(), "--out",
                   hist_file.string()},
                  {}, &out, &err) == 0);
  json hists = parse_json_file(hist_file);
  REQUIRE(hists.is_array());
  REQUIRE(hists.size() >= 6);
  for (const json& h : hists) {
    ResponseHistogram rh = ResponseHistogram::from_json(h);
    CHECK(rh.total + rh.rejects == 2);
  }
  CHECK(hists[0]["question_id"] == "Q45");

  // --- evaluate --------------------------------------------------------------
  fs::path eval_file = dir / "eval.json";
  REQUIRE(run_cli({"evaluate", "--sim", hist_file.string(), "--truth",
                   (kData / "truth_histograms.csv").string(), "--out",
                   eval_file.string()},
                  {}, &out, &err) == 0);
  json eval = parse_json_file(eval_file);
  REQUIRE(eval.is_array());
  CHECK(eval.size() == hists.size());
  for (const json& row : eval) {
    const json& m = row.at("metrics");
    CHECK(m.at("ks").get<double>() >= 0.0);
    CHECK(m.at("ks").get<double>() <= 1.0);
    CHECK(m.at("wasserstein").get<double>() >= 0.0);
    CHECK(m.at("js").get<double>() <= std::log(2.0) + 1e-12);
    CHECK(row.contains("sim_counts"));
    CHECK(row.contains("truth_counts"));
  }

  // evaluating a question with no truth row fails cleanly
  json orphan = json::array({hists[0]});
  orphan[0]["question_id"] = "Q999";
  fs::path orphan_file = dir / "orphan.json";
  write_text(orphan_file, orphan.dump());
  CHECK(run_cli({"evaluate", "--sim", orphan_file.string(), "--truth",
                 (kData / "truth_histograms.csv").string()},
                {}, &out, &err) == 2);
  CHECK(err.find("Q999") != std::string::npos);

  // --- judge ------------------------------------------------------------------
  fs::path judge_file = dir / "judge.json";
  REQUIRE(run_cli({"judge", "--personas", personas.string(), "--questions",
                   (kData / "personalization_questions.json").string(), "--out",
                   judge_file.string()},
                  {}, &out, &err) == 0);
  json judged = parse_json_file(judge_file);
  CHECK(judged["judge_failures"] == 0);
  REQUIRE(judged["results"].size() == 2 * 12);
  CHECK(judged["aggregate_mean"].size() == 10);  // union of both rubrics
  int creative_rows = 0;
  for (const json& row : judged["results"]) {
    int expected = row["rubric"] == "creative" ? 5 : 10;
    creative_rows += row["rubric"] == "creative" ? 1 : 0;
    CHECK(static_cast<int>(row["scores"].size()) == expected);
    for (const auto& [key, value] : row["scores"].items()) {
      CHECK(value.get<int>() >= 1);
      CHECK(value.get<int>() <= 5);
    }
  }
  CHECK(creative_rows == 2 * 2);  // q11/q12 for each persona

  SUBCASE("a rubric flag overrides the per-question rubric") {
    fs::path forced = dir / "judge_creative.json";
    REQUIRE(run_cli({"judge", "--personas", personas.string(), "--questions",
                     (kData / "personalization_questions.json").string(),
                     "--rubric", "creative", "--out", forced.string()},
                    {}, &out, &err) == 0);
    json j = parse_json_file(forced);
    CHECK(j["aggregate_mean"].size() == 5);
    for (const json& row : j["results"]) CHECK(row["rubric"] == "creative");
  }

  // --- report -------------------------------------------------------------------
  fs::path eval_csv = dir / "eval.csv";
  REQUIRE(run_cli({"report", "--in", eval_file.string(), "--out",
                   eval_csv.string()},
                  {}, &out, &err) == 0);
  std::string csv = read_file(eval_csv);
  CHECK(csv.rfind("question_id,ks,wasserstein,js,mean_diff\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + int(eval.size()));

  REQUIRE(run_cli({"report", "--in", hist_file.string()}, {}, &out, &err) == 0);
  CHECK(out.rfind("question_id,option,count\n", 0) == 0);

  REQUIRE(run_cli({"report", "--in", judge_file.string()}, {}, &out, &err) == 0);
  CHECK(out.rfind("persona,question_id,rubric,metric,score\n", 0) == 0);
  CHECK(out.find("persona_000.json,q01,standard,PF,") != std::string::npos);

  fs::path not_a_report = dir / "scalar.json";
  write_text(not_a_report, "42\n");
  CHECK(run_cli({"report", "--in", not_a_report.string()}, {}, &out, &err) == 2);
}
