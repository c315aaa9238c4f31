#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "personagen/backend.hpp"
#include "personagen/error.hpp"
#include "personagen/json_util.hpp"
#include "personagen/parallel.hpp"
#include "personagen/persona.hpp"
#include "personagen/prompts.hpp"
#include "personagen/text.hpp"

namespace pgen {

struct SurveyQuestion {
  std::string id;
  std::string prompt;
  int scale_min = 1;
  int scale_max = 5;

  void validate() const {
    if (trim(id).empty()) throw InvalidInput("survey question id is empty");
    if (trim(prompt).empty())
      throw InvalidInput("survey question prompt is empty: " + id);
    if (scale_min >= scale_max)
      throw InvalidInput("survey scale must satisfy min < max: " + id);
  }

  static std::vector<SurveyQuestion> load(const std::filesystem::path& file) {
    json j = parse_json_file(file);
    if (!j.is_array()) throw InvalidInput("survey file must hold a JSON list");
    std::vector<SurveyQuestion> out;
    for (const json& q : j) {
      SurveyQuestion sq{q.at("id").get<std::string>(),
                        q.at("prompt").get<std::string>(),
                        q.at("scale_min").get<int>(), q.at("scale_max").get<int>()};
      sq.validate();
      out.push_back(std::move(sq));
    }
    return out;
  }
};

struct ResponseHistogram {
  std::string question_id;
  int scale_min = 1;
  int scale_max = 5;
  std::map<int, long long> counts;
  long long total = 0;
  long long rejects = 0;

  void validate() const {
    long long sum = 0;
    for (const auto& [option, count] : counts) {
      if (option < scale_min || option > scale_max)
        throw InvalidInput("histogram option " + std::to_string(option) +
                           " outside scale for " + question_id);
      if (count < 0) throw InvalidInput("negative histogram count");
      sum += count;
    }
    if (sum != total) throw InvalidInput("histogram total does not match counts");
  }

  void add(int option) {
    if (option < scale_min || option > scale_max)
      throw InvalidInput("option outside scale");
    ++counts[option];
    ++total;
  }

  // Proportion per option across the full scale, in scale order.
  std::vector<double> normalized() const {
    if (total <= 0) throw EmptyHistogram("histogram for " + question_id +
                                         " holds no responses");
    std::vector<double> p(static_cast<size_t>(scale_max - scale_min + 1), 0.0);
    for (const auto& [option, count] : counts)
      p[static_cast<size_t>(option - scale_min)] =
          static_cast<double>(count) / static_cast<double>(total);
    return p;
  }

  double mean() const {
    if (total <= 0) throw EmptyHistogram("histogram for " + question_id +
                                         " holds no responses");
    double sum = 0.0;
    for (const auto& [option, count] : counts)
      sum += static_cast<double>(option) * static_cast<double>(count);
    return sum / static_cast<double>(total);
  }

  ojson to_json() const {
    ojson j;
    j["question_id"] = question_id;
    j["scale_min"] = scale_min;
    j["scale_max"] = scale_max;
    ojson c = ojson::object();
    for (const auto& [option, count] : counts) c[std::to_string(option)] = count;
    j["counts"] = std::move(c);
    j["total"] = total;
    j["rejects"] = rejects;
    return j;
  }

  static ResponseHistogram from_json(const json& j) {
    ResponseHistogram h;
    h.question_id = j.at("question_id").get<std::string>();
    h.scale_min = j.at("scale_min").get<int>();
    h.scale_max = j.at("scale_max").get<int>();
    for (const auto& [key, value] : j.at("counts").items())
      h.counts[std::stoi(key)] = value.get<long long>();
    h.total = j.at("total").get<long long>();
    h.rejects = j.value("rejects", 0LL);
    h.validate();
    return h;
  }
};

struct DistanceReport {
  double ks = 0.0;
  double wasserstein = 0.0;
  double js = 0.0;
  double mean_diff = 0.0;

  ojson to_json() const {
    return ojson{{"ks", ks},
                 {"wasserstein", wasserstein},
                 {"js", js},
                 {"mean_diff", mean_diff}};
  }
};

// ---------------------------------------------------------------------------
// Survey
// ---------------------------------------------------------------------------

namespace detail {

// Strict integer read: the whole trimmed reply must be one integer
// (a single trailing period is tolerated).
inline std::optional<int> parse_survey_answer(const std::string& reply) {
  std::string s = trim(reply);
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s.empty()) return std::nullopt;
  size_t i = s[0] == '-' || s[0] == '+' ? 1 : 0;
  if (i == s.size()) return std::nullopt;
  for (size_t j = i; j < s.size(); ++j)
    if (!std::isdigit(static_cast<unsigned char>(s[j]))) return std::nullopt;
  try {
    return std::stoi(s);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

// One simulated response per persona: the narrative plus the question prompt.
// An invalid or out-of-range answer gets one structured retry, then counts
// as a reject and stays out of the histogram.
inline ResponseHistogram run_survey(const std::vector<PersonaProfile>& personas,
                                    const SurveyQuestion& q, Backend& backend,
                                    int concurrency = 1) {
  q.validate();
  if (personas.empty()) throw InvalidInput("no personas to survey");

  std::vector<std::optional<int>> answers(personas.size());
  parallel_for(personas.size(), static_cast<size_t>(std::max(1, concurrency)),
               [&](size_t i) {
    ChatRequest request =
        ChatRequest::user(personas[i].narrative + "\n\n" + q.prompt);
    for (int attempt = 0; attempt < 2; ++attempt) {
      std::string reply = backend.complete(request);
      std::optional<int> value = detail::parse_survey_answer(reply);
      if (value && *value >= q.scale_min && *value <= q.scale_max) {
        answers[i] = value;
        return;
      }
      request.messages.push_back({Role::kAssistant, reply});
      request.messages.push_back(
          {Role::kUser, "Your previous reply was not a valid option. Reply "
                        "with ONLY a single integer between " +
                            std::to_string(q.scale_min) + " and " +
                            std::to_string(q.scale_max) + "."});
    }
  });

  ResponseHistogram h;
  h.question_id = q.id;
  h.scale_min = q.scale_min;
  h.scale_max = q.scale_max;
  for (const std::optional<int>& a : answers) {
    if (a)
      h.add(*a);
    else
      ++h.rejects;
  }
  if (h.total == 0)
    throw EmptyHistogram("every simulated response for " + q.id +
                         " was rejected");
  return h;
}

// ---------------------------------------------------------------------------
// Distributional distances
// ---------------------------------------------------------------------------

namespace detail {

inline std::pair<std::vector<double>, std::vector<double>> aligned(
    const ResponseHistogram& p, const ResponseHistogram& q) {
  if (p.scale_min != q.scale_min || p.scale_max != q.scale_max)
    throw InvalidInput("histograms use different scales: " + p.question_id +
                       " vs " + q.question_id);
  return {p.normalized(), q.normalized()};
}

}  // namespace detail

inline double ks_statistic(const ResponseHistogram& p, const ResponseHistogram& q) {
  auto [a, b] = detail::aligned(p, q);
  double cum_a = 0.0, cum_b = 0.0, sup = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    cum_a += a[i];
    cum_b += b[i];
    sup = std::max(sup, std::abs(cum_a - cum_b));
  }
  return sup;
}

inline double wasserstein(const ResponseHistogram& p, const ResponseHistogram& q) {
  auto [a, b] = detail::aligned(p, q);
  double cum_a = 0.0, cum_b = 0.0, sum = 0.0;
  for (size_t i = 0; i + 1 < a.size(); ++i) {
    cum_a += a[i];
    cum_b += b[i];
    sum += std::abs(cum_a - cum_b);  // unit gap between consecutive options
  }
  return sum;
}

inline double js_divergence(const ResponseHistogram& p, const ResponseHistogram& q) {
  auto [a, b] = detail::aligned(p, q);
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double m = 0.5 * (a[i] + b[i]);
    if (a[i] > 0.0) sum += 0.5 * a[i] * std::log(a[i] / m);
    if (b[i] > 0.0) sum += 0.5 * b[i] * std::log(b[i] / m);
  }
  return sum;
}

inline double mean_abs_diff(const ResponseHistogram& p, const ResponseHistogram& q) {
  detail::aligned(p, q);  // scale + emptiness gate
  return std::abs(p.mean() - q.mean());
}

inline DistanceReport distance_report(const ResponseHistogram& sim,
                                      const ResponseHistogram& truth) {
  return DistanceReport{ks_statistic(sim, truth), wasserstein(sim, truth),
                        js_divergence(sim, truth), mean_abs_diff(sim, truth)};
}

// Ground truth as `question_id,option,count` rows.
inline std::map<std::string, std::map<int, long long>> load_truth_csv(
    const std::filesystem::path& file) {
  std::map<std::string, std::map<int, long long>> out;
  std::string text = read_file(file);
  bool first = true;
  for (const std::string& raw : split(text, '\n')) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (first && line.rfind("question_id", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 3)
      throw InvalidInput("truth CSV rows need question_id,option,count: " + line);
    try {
      out[trim(cells[0])][std::stoi(trim(cells[1]))] += std::stoll(trim(cells[2]));
    } catch (const std::exception&) {
      throw InvalidInput("bad number in truth CSV row: " + line);
    }
  }
  return out;
}

inline ResponseHistogram truth_histogram(const std::string& question_id,
                                         const std::map<int, long long>& counts,
                                         int scale_min, int scale_max) {
  ResponseHistogram h;
  h.question_id = question_id;
  h.scale_min = scale_min;
  h.scale_max = scale_max;
  for (const auto& [option, count] : counts) {
    if (count < 0) throw InvalidInput("negative truth count for " + question_id);
    if (option < scale_min || option > scale_max)
      throw InvalidInput("truth option outside scale for " + question_id);
    h.counts[option] = count;
    h.total += count;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Personalization responder and judge
// ---------------------------------------------------------------------------

inline std::string respond_personalized(const PersonaProfile& profile,
                                        const std::string& request,
                                        Backend& backend) {
  if (trim(request).empty()) throw InvalidInput("empty personalization request");
  return backend.complete(ChatRequest::system_user(
      std::string(prompts::kResponderSystem),
      prompts::responder_user(profile.narrative, request)));
}

enum class Rubric { kStandard, kCreative };

struct PersonalizationScores {
  std::map<std::string, int> scores;          // short rubric codes
  std::map<std::string, std::string> rationale;

  ojson to_json() const {
    ojson j;
    ojson s = ojson::object();
    for (const auto& [k, v] : scores) s[k] = v;
    ojson r = ojson::object();
    for (const auto& [k, v] : rationale) r[k] = v;
    j["scores"] = std::move(s);
    j["rationale"] = std::move(r);
    return j;
  }
};

namespace detail {

// Reply keys are the rubric's long labels; scores carry the short codes.
inline const std::vector<std::pair<std::string, std::string>>& rubric_keys(
    Rubric rubric) {
  static const std::vector<std::pair<std::string, std::string>> kStandard = {
      {"personalization_fit", "PF"},
      {"attribute_coverage", "AC"},
      {"depth_specificity", "DS"},
      {"justification", "JU"},
      {"actionability", "ACT"},
      {"effort_reduction", "ER"},
      {"novelty_with_relevance", "NR"},
      {"diversity_of_suggestions", "DV"},
      {"goal_progress_alignment", "GP"},
      {"engagement_motivation_potential", "EM"}};
  static const std::vector<std::pair<std::string, std::string>> kCreative = {
      {"personalization_fit", "PF"},
      {"attribute_coverage", "AC"},
      {"depth_specificity", "DS"},
      {"novelty_with_relevance", "NR"},
      {"engagement_motivation_potential", "EM"}};
  return rubric == Rubric::kStandard ? kStandard : kCreative;
}

}  // namespace detail

inline PersonalizationScores judge_response(const PersonaProfile& profile,
                                            const std::string& request,
                                            const std::string& response,
                                            Backend& backend, Rubric rubric) {
  if (trim(request).empty()) throw InvalidInput("empty request for judging");
  if (trim(response).empty()) throw InvalidInput("empty response for judging");

  std::string prompt =
      rubric == Rubric::kStandard
          ? prompts::judge_prompt_standard(profile.narrative, request, response)
          : prompts::judge_prompt_creative(profile.narrative, request, response);
  JsonShape shape{{{"rationale", ValueKind::kObject},
                   {"scores", ValueKind::kObject}}};
  json reply;
  try {
    reply = complete_json(backend, ChatRequest::user(prompt), shape);
  } catch (const SchemaViolation& e) {
    throw JudgeFailure(std::string("judge reply rejected: ") + e.what(),
                       e.raw_reply());
  }

  const auto& keys = detail::rubric_keys(rubric);
  const json& scores = reply.at("scores");
  const json& rationale = reply.at("rationale");
  if (scores.size() != keys.size())
    throw JudgeFailure("judge returned " + std::to_string(scores.size()) +
                           " scores, expected " + std::to_string(keys.size()),
                       reply.dump());
  PersonalizationScores out;
  for (const auto& [long_key, short_key] : keys) {
    if (!scores.contains(long_key) || !scores.at(long_key).is_number_integer())
      throw JudgeFailure("judge score missing or non-integer: " + long_key,
                         reply.dump());
    int v = scores.at(long_key).get<int>();
    if (v < 1 || v > 5)
      throw JudgeFailure("judge score out of [1,5] for " + long_key + ": " +
                             std::to_string(v),
                         reply.dump());
    out.scores[short_key] = v;
    if (rationale.contains(long_key) && rationale.at(long_key).is_string())
      out.rationale[short_key] = rationale.at(long_key).get<std::string>();
  }
  return out;
}

}  // namespace pgen
