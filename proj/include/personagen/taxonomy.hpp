#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "personagen/attribute_tree.hpp"
#include "personagen/backend.hpp"
#include "personagen/json_util.hpp"
#include "personagen/parallel.hpp"
#include "personagen/prompts.hpp"
#include "personagen/text.hpp"

namespace pgen {

enum class Personalizability { kNon, kPartial, kFull };

inline std::string to_string(Personalizability p) {
  switch (p) {
    case Personalizability::kNon: return "Non-personalizable";
    case Personalizability::kPartial: return "Partially Personalizable";
    case Personalizability::kFull: return "Personalizable";
  }
  return "Non-personalizable";
}

// Accepts the bare "No" spelling seen in upstream record dumps.
inline std::optional<Personalizability> parse_personalizability(
    std::string_view raw) {
  std::string s = to_lower(trim(raw));
  if (s == "no" || s == "non-personalizable" || s == "non personalizable")
    return Personalizability::kNon;
  if (s == "partially personalizable" || s == "partially-personalizable")
    return Personalizability::kPartial;
  if (s == "personalizable" || s == "yes") return Personalizability::kFull;
  return std::nullopt;
}

struct QARecord {
  std::string question;
  std::string original_answer;
  std::string category;
  std::optional<Personalizability> personalizability;
  std::string reason;

  void validate() const {
    if (trim(question).empty()) throw InvalidInput("QA record with empty question");
    if (personalizability && trim(reason).empty())
      throw InvalidInput("classified QA record must carry a reason");
  }

  ojson to_json() const {
    ojson j;
    j["question"] = question;
    j["original_answer"] = original_answer;
    if (personalizability) {
      ojson tags;
      tags["category"] = category;
      tags["is_personalizable"] = {
          {"reason", reason},
          {"is_personalizable", to_string(*personalizability)}};
      j["tags"] = std::move(tags);
    }
    return j;
  }

  static QARecord from_json(const json& j) {
    QARecord r;
    r.question = j.at("question").get<std::string>();
    r.original_answer = j.value("original_answer", "");
    if (j.contains("tags")) {
      const json& tags = j.at("tags");
      r.category = tags.value("category", "");
      if (tags.contains("is_personalizable")) {
        const json& ip = tags.at("is_personalizable");
        r.reason = ip.value("reason", "");
        std::string label = ip.value("is_personalizable", "");
        auto parsed = parse_personalizability(label);
        if (!parsed)
          throw InvalidInput("unknown personalizability label: " + label);
        r.personalizability = parsed;
      }
    }
    r.validate();
    return r;
  }
};

inline std::vector<QARecord> load_qa_records(const std::filesystem::path& file) {
  std::vector<QARecord> out;
  std::istringstream in(read_file(file));
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw InvalidInput("invalid JSON on line " + std::to_string(line_no) +
                         " of " + file.string());
    out.push_back(QARecord::from_json(j));
  }
  return out;
}

inline void save_qa_records(const std::filesystem::path& file,
                            const std::vector<QARecord>& records) {
  std::string body;
  for (const QARecord& r : records) body += r.to_json().dump() + "\n";
  write_file(file, body);
}

// ---------------------------------------------------------------------------
// Classification and extraction
// ---------------------------------------------------------------------------

inline QARecord classify_qa(const std::string& question, const std::string& answer,
                            Backend& backend) {
  if (trim(question).empty()) throw InvalidInput("empty question");
  if (trim(answer).empty()) throw InvalidInput("empty answer");
  JsonShape shape{{{"category", ValueKind::kString},
                   {"is_personalizable", ValueKind::kString},
                   {"reason", ValueKind::kString}}};
  json reply = complete_json(
      backend, ChatRequest::user(prompts::classification_prompt(question, answer)),
      shape);
  QARecord r;
  r.question = question;
  r.original_answer = answer;
  r.category = reply.at("category").get<std::string>();
  std::string label = reply.at("is_personalizable").get<std::string>();
  auto parsed = parse_personalizability(label);
  if (!parsed)
    throw SchemaViolation("classifier emitted an unknown label: " + label,
                          reply.dump());
  r.personalizability = parsed;
  r.reason = reply.at("reason").get<std::string>();
  r.validate();
  return r;
}

struct ExtractionResult {
  std::vector<AttributePath> paths;
  bool skipped = false;   // record was Non-personalizable
  int malformed = 0;      // reply paths that violated AttributePath invariants
};

inline ExtractionResult extract_paths(const QARecord& record,
                                      const std::vector<std::string>& roots,
                                      Backend& backend) {
  if (!record.personalizability)
    throw InvalidInput("extract_paths needs a classified record");
  ExtractionResult result;
  if (*record.personalizability == Personalizability::kNon) {
    result.skipped = true;
    return result;
  }
  JsonShape shape{{{"paths", ValueKind::kStringList}}};
  json reply = complete_json(
      backend,
      ChatRequest::user(prompts::extraction_prompt(record.question,
                                                   record.original_answer, roots)),
      shape);
  for (const auto& item : reply.at("paths")) {
    try {
      result.paths.push_back(AttributePath::parse(item.get<std::string>()));
    } catch (const InvalidInput&) {
      ++result.malformed;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Node validation
// ---------------------------------------------------------------------------

// Predicate bundle used by the filtering phases. Results are memoized so
// each distinct path/segment costs at most one backend round trip; instances
// are not thread-safe (filtering is single-threaded by design).
class NodeValidator {
 public:
  virtual ~NodeValidator() = default;

  bool is_personal(const AttributePath& path) {
    std::string key = path.key();
    auto it = personal_.find(key);
    if (it != personal_.end()) return it->second;
    bool v = do_is_personal(path);
    personal_.emplace(std::move(key), v);
    return v;
  }

  bool is_general_category(const std::string& segment) {
    std::string key = to_lower(segment);
    auto it = general_.find(key);
    if (it != general_.end()) return it->second;
    bool v = do_is_general_category(segment);
    general_.emplace(std::move(key), v);
    return v;
  }

  // A replacement label that itself passes is_general_category, or nothing.
  std::optional<std::string> can_rewrite(const std::string& segment) {
    std::string key = to_lower(segment);
    auto it = rewrite_.find(key);
    if (it == rewrite_.end()) {
      std::optional<std::string> v = do_can_rewrite(segment);
      it = rewrite_.emplace(std::move(key), std::move(v)).first;
    }
    if (it->second && !is_general_category(*it->second)) return std::nullopt;
    return it->second;
  }

 protected:
  virtual bool do_is_personal(const AttributePath& path) = 0;
  virtual bool do_is_general_category(const std::string& segment) = 0;
  virtual std::optional<std::string> do_can_rewrite(const std::string& segment) = 0;

 private:
  std::map<std::string, bool> personal_;
  std::map<std::string, bool> general_;
  std::map<std::string, std::optional<std::string>> rewrite_;
};

// Deterministic offline rules: digit-bearing or overlong segments are too
// specific, a short blocklist marks impersonal topics, no rewrites.
class RuleNodeValidator : public NodeValidator {
 protected:
  bool do_is_personal(const AttributePath& path) override {
    static const std::vector<std::string> kImpersonal = {
        "weather", "world news", "current events", "general knowledge"};
    std::string key = path.key();
    for (const std::string& w : kImpersonal)
      if (key.find(w) != std::string::npos) return false;
    return true;
  }

  bool do_is_general_category(const std::string& segment) override {
    return !contains_digit(segment) && segment.size() <= 48;
  }

  std::optional<std::string> do_can_rewrite(const std::string&) override {
    return std::nullopt;
  }
};

// LLM-backed predicates using the validation prompt boxes.
class LlmNodeValidator : public NodeValidator {
 public:
  explicit LlmNodeValidator(Backend& backend) : backend_(backend) {}

 protected:
  bool do_is_personal(const AttributePath& path) override {
    JsonShape shape{{{"answer", ValueKind::kString}}};
    json reply = complete_json(
        backend_, ChatRequest::user(prompts::personal_path_prompt(path.joined())),
        shape);
    return to_lower(reply.at("answer").get<std::string>()) == "personal";
  }

  bool do_is_general_category(const std::string& segment) override {
    JsonShape shape{{{"valid", ValueKind::kString}}};
    json reply = complete_json(
        backend_, ChatRequest::user(prompts::check_node_prompt(segment)), shape);
    return to_lower(reply.at("valid").get<std::string>()) == "true";
  }

  std::optional<std::string> do_can_rewrite(const std::string& segment) override {
    JsonShape shape{{{"rewrite", ValueKind::kString}}};
    json reply = complete_json(
        backend_, ChatRequest::user(prompts::rewrite_prompt(segment)), shape);
    std::string r = trim(reply.at("rewrite").get<std::string>());
    if (r.empty()) return std::nullopt;
    return r;
  }

 private:
  Backend& backend_;
};

// ---------------------------------------------------------------------------
// Filtering
// ---------------------------------------------------------------------------

struct FilterReport {
  int input_paths = 0;
  int dropped_no_template = 0;
  int truncated = 0;
  int rewritten = 0;
  int bare_root_fallback = 0;
  int dropped_invalid = 0;
  int duplicates_removed = 0;
  int output_paths = 0;

  ojson to_json() const {
    return ojson{{"input_paths", input_paths},
                 {"dropped_no_template", dropped_no_template},
                 {"truncated", truncated},
                 {"rewritten", rewritten},
                 {"bare_root_fallback", bare_root_fallback},
                 {"dropped_invalid", dropped_invalid},
                 {"duplicates_removed", duplicates_removed},
                 {"output_paths", output_paths}};
  }
};

// Two-phase validation of one path: root template alignment, then bottom-up
// truncation with a single rewrite attempt per node and a bare-root
// fallback. Returns the surviving (possibly shortened or relabeled) path.
inline std::optional<AttributePath> filter_path(AttributePath path,
                                                NodeValidator& validator,
                                                const EmbedFn& embed,
                                                double threshold,
                                                FilterReport* report = nullptr) {
  const std::vector<std::string>& templates = root_categories();

  bool is_template = false;
  for (const std::string& t : templates)
    if (to_lower(t) == to_lower(path.segments[0])) {
      path.segments[0] = t;
      is_template = true;
      break;
    }
  if (!is_template) {
    std::vector<std::string> texts = templates;
    texts.push_back(path.segments[0]);
    std::vector<std::vector<double>> embs = embed(texts);
    const std::string* match = nullptr;
    double best = threshold;
    for (size_t i = 0; i < templates.size(); ++i) {
      double sim = cosine(embs[i], embs.back());
      if (sim > best) {
        best = sim;
        match = &templates[i];
      }
    }
    if (!match) {
      if (report) ++report->dropped_no_template;
      return std::nullopt;
    }
    path.segments[0] = *match;
  }

  size_t original_len = path.segments.size();
  while (path.segments.size() > 1) {
    const std::string& leaf = path.segments.back();
    if (validator.is_general_category(leaf) && validator.is_personal(path)) {
      if (report && path.segments.size() < original_len) ++report->truncated;
      return path;
    }
    if (std::optional<std::string> replacement = validator.can_rewrite(leaf)) {
      AttributePath candidate = path;
      candidate.segments.back() = *replacement;
      if (validator.is_personal(candidate)) {
        if (report) ++report->rewritten;
        return candidate;
      }
    }
    path.segments.pop_back();
  }

  if (validator.is_general_category(path.segments[0])) {
    if (report) ++report->bare_root_fallback;
    return path;
  }
  if (report) ++report->dropped_invalid;
  return std::nullopt;
}

inline std::vector<AttributePath> filter_paths(
    const std::vector<AttributePath>& paths, NodeValidator& validator,
    const EmbedFn& embed, double threshold = kDefaultMergeThreshold,
    FilterReport* report = nullptr) {
  std::vector<AttributePath> kept;
  std::map<std::string, bool> seen;
  for (const AttributePath& p : paths) {
    if (report) ++report->input_paths;
    std::optional<AttributePath> filtered =
        filter_path(p, validator, embed, threshold, report);
    if (!filtered) continue;
    if (seen.emplace(filtered->key(), true).second) {
      kept.push_back(std::move(*filtered));
    } else if (report) {
      ++report->duplicates_removed;
    }
  }
  if (report) report->output_paths = static_cast<int>(kept.size());
  return kept;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

struct BuildOptions {
  double threshold = kDefaultMergeThreshold;
  bool include_partial = true;  // feed Partially Personalizable records onward
  int concurrency = 4;
};

struct BuildReport {
  int records_total = 0;
  int records_preclassified = 0;
  int records_classified = 0;
  int records_failed = 0;
  int records_skipped = 0;
  int paths_extracted = 0;
  int paths_malformed = 0;
  FilterReport first_filter;
  int nodes_before_merge = 0;
  int nodes_after_merge = 0;
  FilterReport second_filter;
  int final_nodes = 0;
  int final_paths = 0;

  ojson to_json() const {
    ojson j;
    j["records_total"] = records_total;
    j["records_preclassified"] = records_preclassified;
    j["records_classified"] = records_classified;
    j["records_failed"] = records_failed;
    j["records_skipped"] = records_skipped;
    j["paths_extracted"] = paths_extracted;
    j["paths_malformed"] = paths_malformed;
    j["first_filter"] = first_filter.to_json();
    j["nodes_before_merge"] = nodes_before_merge;
    j["nodes_after_merge"] = nodes_after_merge;
    j["second_filter"] = second_filter.to_json();
    j["final_nodes"] = final_nodes;
    j["final_paths"] = final_paths;
    return j;
  }
};

struct BuildResult {
  AttributeTree tree;
  BuildReport report;
};

// Extract -> Filter -> Tree+Merge -> Filter -> Format. Per-record schema
// failures are counted and skipped; only backend exhaustion aborts the run.
inline BuildResult build_taxonomy(const std::vector<QARecord>& records,
                                  Backend& backend, NodeValidator& validator,
                                  const BuildOptions& options = {}) {
  if (!(options.threshold > 0.0))
    throw InvalidInput("merge threshold must be positive");
  BuildResult out;
  BuildReport& report = out.report;
  report.records_total = static_cast<int>(records.size());

  struct RecordOutcome {
    ExtractionResult extraction;
    bool failed = false;
  };
  std::vector<RecordOutcome> outcomes(records.size());
  const std::vector<std::string>& roots = root_categories();

  parallel_for(records.size(), options.concurrency, [&](size_t i) {
    RecordOutcome& slot = outcomes[i];
    try {
      QARecord record = records[i];
      if (!record.personalizability)
        record = classify_qa(record.question, record.original_answer, backend);
      bool feed = *record.personalizability == Personalizability::kFull ||
                  (*record.personalizability == Personalizability::kPartial &&
                   options.include_partial);
      if (feed)
        slot.extraction = extract_paths(record, roots, backend);
      else
        slot.extraction.skipped = true;
    } catch (const SchemaViolation&) {
      slot.failed = true;
    } catch (const InvalidInput&) {
      slot.failed = true;
    }
  });

  std::vector<AttributePath> raw_paths;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    const RecordOutcome& slot = outcomes[i];
    if (slot.failed) {
      ++report.records_failed;
      continue;
    }
    if (records[i].personalizability)
      ++report.records_preclassified;
    else
      ++report.records_classified;
    if (slot.extraction.skipped) {
      ++report.records_skipped;
      continue;
    }
    report.paths_malformed += slot.extraction.malformed;
    for (const AttributePath& p : slot.extraction.paths) raw_paths.push_back(p);
  }
  report.paths_extracted = static_cast<int>(raw_paths.size());

  EmbedFn embed = embedder(backend);
  std::vector<AttributePath> kept =
      filter_paths(raw_paths, validator, embed, options.threshold,
                   &report.first_filter);

  AttributeTree tree = paths_to_tree(kept);
  report.nodes_before_merge = static_cast<int>(tree.node_count());
  tree = merge_tree(tree, embed, options.threshold);
  report.nodes_after_merge = static_cast<int>(tree.node_count());

  // Surviving paths are re-inserted with their terminal multiplicity so
  // source_count mass carries through the rebuild; paths that collide after
  // truncation fold into one chain (counted as duplicates) with counts summed.
  AttributeTree final_tree;
  std::map<std::string, bool> seen;
  for (const auto& [path, count] : tree.enumerate_weighted()) {
    ++report.second_filter.input_paths;
    std::optional<AttributePath> filtered = filter_path(
        path, validator, embed, options.threshold, &report.second_filter);
    if (!filtered) continue;
    if (seen.emplace(filtered->key(), true).second) {
      ++report.second_filter.output_paths;
      ++report.final_paths;
    } else {
      ++report.second_filter.duplicates_removed;
    }
    final_tree.insert_path(*filtered, count);
  }
  report.final_nodes = static_cast<int>(final_tree.node_count());
  out.tree = std::move(final_tree);
  return out;
}

}  // namespace pgen
