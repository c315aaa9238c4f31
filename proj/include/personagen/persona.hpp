#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "personagen/attribute_tree.hpp"
#include "personagen/backend.hpp"
#include "personagen/demographics.hpp"
#include "personagen/error.hpp"
#include "personagen/json_util.hpp"
#include "personagen/prompts.hpp"
#include "personagen/rng.hpp"
#include "personagen/similarity.hpp"
#include "personagen/text.hpp"

namespace pgen {

inline constexpr int kDefaultDepth = 200;
// Leaf-field weight of the core block when counting attributes toward k.
inline constexpr int kCoreAttributeCount = 14;

// The fixed core sections of a persona, shaped exactly like the user-profile
// JSON exchanged with the model.
struct CoreAnchors {
  struct AgeInfo {
    int age = 0;
    std::string age_group;
  } age_info;
  std::string gender;
  struct Location {
    std::string country;
    std::string city;
  } location;
  struct CareerInfo {
    std::string status;
  } career_info;
  struct PersonalValues {
    std::string values_orientation;
  } personal_values;
  struct LifeAttitude {
    std::string attitude;
    std::string attitude_details;
    std::string coping_mechanism;
  } life_attitude;
  struct PersonalStory {
    std::string personal_story;
    std::vector<std::string> key_life_events;
  } personal_story;
  struct Interests {
    std::vector<std::string> interests;
  } interests;

  void validate() const {
    if (age_info.age < 13 || age_info.age > 100)
      throw InvalidInput("age must be in [13, 100], got " +
                         std::to_string(age_info.age));
    if (personal_story.key_life_events.empty() ||
        personal_story.key_life_events.size() > 3)
      throw InvalidInput("key_life_events must hold 1 to 3 stories");
    if (interests.interests.size() < 2)
      throw InvalidInput("interests must hold at least 2 items");
    for (const std::string* s :
         {&age_info.age_group, &gender, &location.country, &location.city,
          &career_info.status, &personal_values.values_orientation,
          &life_attitude.attitude, &life_attitude.attitude_details,
          &life_attitude.coping_mechanism, &personal_story.personal_story})
      if (trim(*s).empty()) throw InvalidInput("core anchor section left empty");
  }

  // Every core value as text, in section order.
  std::vector<std::string> leaf_values() const {
    std::vector<std::string> out = {std::to_string(age_info.age),
                                    age_info.age_group,
                                    gender,
                                    location.country,
                                    location.city,
                                    career_info.status,
                                    personal_values.values_orientation,
                                    life_attitude.attitude,
                                    life_attitude.attitude_details,
                                    life_attitude.coping_mechanism,
                                    personal_story.personal_story};
    for (const std::string& e : personal_story.key_life_events) out.push_back(e);
    for (const std::string& i : interests.interests) out.push_back(i);
    return out;
  }

  ojson to_json() const {
    ojson j;
    j["age_info"] = {{"age", age_info.age}, {"age_group", age_info.age_group}};
    j["gender"] = gender;
    j["location"] = {{"country", location.country}, {"city", location.city}};
    j["career_info"] = {{"status", career_info.status}};
    j["personal_values"] = {{"values_orientation", personal_values.values_orientation}};
    j["life_attitude"] = {{"attitude", life_attitude.attitude},
                          {"attitude_details", life_attitude.attitude_details},
                          {"coping_mechanism", life_attitude.coping_mechanism}};
    j["personal_story"] = {{"personal_story", personal_story.personal_story},
                           {"key_life_events", personal_story.key_life_events}};
    j["interests"] = {{"interests", interests.interests}};
    return j;
  }

  static CoreAnchors from_json(const json& j) {
    CoreAnchors a;
    a.age_info.age = j.at("age_info").at("age").get<int>();
    a.age_info.age_group = j.at("age_info").at("age_group").get<std::string>();
    a.gender = j.at("gender").get<std::string>();
    a.location.country = j.at("location").at("country").get<std::string>();
    a.location.city = j.at("location").at("city").get<std::string>();
    a.career_info.status = j.at("career_info").at("status").get<std::string>();
    a.personal_values.values_orientation =
        j.at("personal_values").at("values_orientation").get<std::string>();
    a.life_attitude.attitude = j.at("life_attitude").at("attitude").get<std::string>();
    a.life_attitude.attitude_details =
        j.at("life_attitude").at("attitude_details").get<std::string>();
    a.life_attitude.coping_mechanism =
        j.at("life_attitude").at("coping_mechanism").get<std::string>();
    a.personal_story.personal_story =
        j.at("personal_story").at("personal_story").get<std::string>();
    a.personal_story.key_life_events =
        j.at("personal_story").at("key_life_events").get<std::vector<std::string>>();
    a.interests.interests =
        j.at("interests").at("interests").get<std::vector<std::string>>();
    return a;
  }
};

// User-supplied partial constraints. Field keys are flat and fixed; a free
// bio rides along and is injected into every generation prompt.
struct AnchorSet {
  std::map<std::string, std::string> fields;
  std::vector<std::string> key_life_events;
  std::vector<std::string> interests;
  std::string bio;

  static const std::set<std::string>& allowed_keys() {
    static const std::set<std::string> kKeys = {
        "age",    "age_group",          "gender",
        "country", "city",              "occupation",
        "values_orientation", "attitude", "attitude_details",
        "coping_mechanism",   "personal_story"};
    return kKeys;
  }

  bool empty() const {
    return fields.empty() && key_life_events.empty() && interests.empty() &&
           bio.empty();
  }

  bool has(const std::string& key) const { return fields.count(key) > 0; }

  const std::string& get(const std::string& key) const { return fields.at(key); }

  void set(const std::string& key, std::string value) {
    if (!allowed_keys().count(key))
      throw InvalidInput("unknown anchor key: " + key);
    if (trim(value).empty()) throw InvalidInput("blank anchor value for " + key);
    fields[key] = std::move(value);
  }

  static AnchorSet from_json(const json& j) {
    AnchorSet a;
    if (!j.is_object()) throw InvalidInput("anchor JSON must be an object");
    for (const auto& [key, value] : j.items()) {
      if (key == "bio") {
        a.bio = value.get<std::string>();
      } else if (key == "key_life_events") {
        a.key_life_events = value.get<std::vector<std::string>>();
        if (a.key_life_events.empty() || a.key_life_events.size() > 3)
          throw InvalidInput("anchored key_life_events must hold 1 to 3 items");
      } else if (key == "interests") {
        a.interests = value.get<std::vector<std::string>>();
        if (a.interests.size() < 2)
          throw InvalidInput("anchored interests must hold at least 2 items");
      } else if (value.is_number_integer()) {
        a.set(key, std::to_string(value.get<long long>()));
      } else if (value.is_string()) {
        a.set(key, value.get<std::string>());
      } else {
        throw InvalidInput("anchor value for " + key +
                           " must be a string or integer");
      }
    }
    return a;
  }

  ojson to_json() const {
    ojson j = ojson::object();
    for (const auto& [k, v] : fields) j[k] = v;
    if (!key_life_events.empty()) j["key_life_events"] = key_life_events;
    if (!interests.empty()) j["interests"] = interests;
    if (!bio.empty()) j["bio"] = bio;
    return j;
  }
};

struct ProfileEntry {
  AttributePath path;
  std::string value;
};

struct LogRecord {
  int order = 0;
  Stratum stratum = Stratum::kNear;
  AttributePath path;
  bool skipped = false;  // fill failed after retries; path is off-limits
};

struct PersonaProfile {
  CoreAnchors anchors;
  std::vector<ProfileEntry> entries;
  std::string narrative;
  int depth_budget = kDefaultDepth;
  AnchorSet anchor_input;
  std::vector<LogRecord> generation_log;

  int attribute_count() const {
    return kCoreAttributeCount + static_cast<int>(entries.size());
  }

  // Prompt-facing context: anchors, bio, and every prior entry with its
  // path rendered as joined text.
  ojson context_json() const {
    ojson j = anchors.to_json();
    if (!anchor_input.bio.empty()) j["bio"] = anchor_input.bio;
    ojson list = ojson::array();
    for (const ProfileEntry& e : entries)
      list.push_back({{"path", e.path.joined()}, {"value", e.value}});
    j["entries"] = std::move(list);
    return j;
  }

  ojson to_json() const {
    ojson j = anchors.to_json();
    ojson list = ojson::array();
    for (const ProfileEntry& e : entries)
      list.push_back({{"path", e.path.segments}, {"value", e.value}});
    j["entries"] = std::move(list);
    j["narrative"] = narrative;
    j["depth_budget"] = depth_budget;
    ojson log = ojson::array();
    for (const LogRecord& r : generation_log) {
      ojson item;
      item["order"] = r.order;
      item["stratum"] = std::string(stratum_name(r.stratum));
      item["path"] = r.path.joined();
      item["skipped"] = r.skipped;
      log.push_back(std::move(item));
    }
    j["generation_log"] = std::move(log);
    j["anchor_input"] = anchor_input.to_json();
    return j;
  }

  static PersonaProfile from_json(const json& j) {
    PersonaProfile p;
    p.anchors = CoreAnchors::from_json(j);
    for (const json& e : j.value("entries", json::array()))
      p.entries.push_back(
          {AttributePath(e.at("path").get<std::vector<std::string>>()),
           e.at("value").get<std::string>()});
    p.narrative = j.value("narrative", "");
    p.depth_budget = j.value("depth_budget", kDefaultDepth);
    for (const json& r : j.value("generation_log", json::array())) {
      LogRecord rec;
      rec.order = r.at("order").get<int>();
      std::string s = r.at("stratum").get<std::string>();
      rec.stratum = s == "near"     ? Stratum::kNear
                    : s == "middle" ? Stratum::kMiddle
                                    : Stratum::kFar;
      rec.path = AttributePath::parse(r.at("path").get<std::string>());
      rec.skipped = r.value("skipped", false);
      p.generation_log.push_back(std::move(rec));
    }
    if (j.contains("anchor_input"))
      p.anchor_input = AnchorSet::from_json(j.at("anchor_input"));
    return p;
  }

  void save(const std::filesystem::path& file) const {
    write_json_file(file, to_json());
  }

  static PersonaProfile load(const std::filesystem::path& file) {
    return from_json(parse_json_file(file));
  }
};

class PersonaGenerationError : public Error {
 public:
  PersonaGenerationError(const std::string& what, PersonaProfile partial)
      : Error(what), partial_(std::move(partial)) {}
  const PersonaProfile& partial() const { return partial_; }

 private:
  PersonaProfile partial_;
};

// ---------------------------------------------------------------------------
// Core instantiation
// ---------------------------------------------------------------------------

namespace detail {

inline void warn(std::vector<std::string>* warnings, std::string message) {
  if (warnings) warnings->push_back(std::move(message));
}

inline bool table_has_value(const DemographicTables& tables,
                            const std::string& table, const std::string& value,
                            bool substring = false) {
  if (!tables.has(table)) return false;
  for (const auto& row : tables.table(table)) {
    if (row.value == value) return true;
    if (substring && row.value.find(value) != std::string::npos) return true;
  }
  return false;
}

}  // namespace detail

// Weighted draws for age, gender, location, and occupation; anchored values
// pass through untouched (with a warning when outside the table domain).
inline CoreAnchors sample_core_demographics(const DemographicTables& tables,
                                            const AnchorSet& anchors, Rng& rng,
                                            std::vector<std::string>* warnings = nullptr) {
  tables.validate();
  CoreAnchors core;

  std::string bracket;
  if (anchors.has("age")) {
    try {
      core.age_info.age = std::stoi(anchors.get("age"));
    } catch (const std::exception&) {
      throw InvalidInput("anchored age is not an integer: " + anchors.get("age"));
    }
    if (core.age_info.age < 13 || core.age_info.age > 100)
      throw InvalidInput("anchored age outside [13, 100]");
    bracket = bracket_for_age(tables, core.age_info.age);
  } else {
    bracket = tables.draw("age_group", rng);
    int lo = 0;
    int hi = 0;
    parse_age_bracket(bracket, lo, hi);
    core.age_info.age = rng.int_in(lo, hi);
  }
  core.age_info.age_group =
      anchors.has("age_group") ? anchors.get("age_group") : bracket;
  if (anchors.has("age_group") && anchors.get("age_group") != bracket)
    detail::warn(warnings, "anchored age_group '" + anchors.get("age_group") +
                               "' differs from bracket '" + bracket +
                               "'; keeping anchor verbatim");

  if (anchors.has("gender")) {
    core.gender = anchors.get("gender");
    if (!detail::table_has_value(tables, "gender", core.gender))
      detail::warn(warnings, "anchored gender '" + core.gender +
                                 "' not in table domain; keeping verbatim");
  } else {
    core.gender = tables.draw("gender", rng);
  }

  std::string loc = tables.draw("location", rng);
  size_t bar = loc.find('|');
  if (bar == std::string::npos)
    throw InvalidInput("location rows must be 'Country|City', got " + loc);
  core.location.country = loc.substr(0, bar);
  core.location.city = loc.substr(bar + 1);
  if (anchors.has("city")) {
    core.location.city = anchors.get("city");
    bool found = false;
    for (const auto& row : tables.table("location")) {
      size_t b = row.value.find('|');
      if (b != std::string::npos && row.value.substr(b + 1) == core.location.city) {
        if (!anchors.has("country")) core.location.country = row.value.substr(0, b);
        found = true;
        break;
      }
    }
    if (!found)
      detail::warn(warnings, "anchored city '" + core.location.city +
                                 "' not in table domain; keeping verbatim");
  }
  if (anchors.has("country")) {
    core.location.country = anchors.get("country");
    if (!detail::table_has_value(tables, "location",
                                 core.location.country + "|", true))
      detail::warn(warnings, "anchored country '" + core.location.country +
                                 "' not in table domain; keeping verbatim");
  }

  if (anchors.has("occupation")) {
    core.career_info.status = anchors.get("occupation");
    std::string table = tables.has("occupation." + bracket)
                            ? "occupation." + bracket
                            : "occupation";
    if (!detail::table_has_value(tables, table, core.career_info.status))
      detail::warn(warnings, "anchored occupation '" + core.career_info.status +
                                 "' not in table domain; keeping verbatim");
  } else {
    std::string table = tables.has("occupation." + bracket)
                            ? "occupation." + bracket
                            : "occupation";
    core.career_info.status = tables.draw(table, rng);
  }
  return core;
}

// Four-prompt chain: values -> attitude -> stories -> interests, each step
// conditioned on everything before it. Anchored sections skip their call.
inline void derive_core_narrative(CoreAnchors& core, const AnchorSet& anchors,
                                  Backend& backend, Rng& rng) {
  static const std::vector<std::string> kValueTypes = {"positive", "negative",
                                                       "neutral"};
  const std::string& value_type = kValueTypes[rng.index(kValueTypes.size())];
  std::string value_type_upper = value_type;
  for (char& c : value_type_upper)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  std::string age = std::to_string(core.age_info.age);

  if (anchors.has("values_orientation")) {
    core.personal_values.values_orientation = anchors.get("values_orientation");
  } else {
    JsonShape shape{{{"values_orientation", ValueKind::kString}}};
    json reply = complete_json(
        backend,
        ChatRequest::user(prompts::values_prompt(age, core.gender,
                                                 core.career_info.status,
                                                 core.location.city,
                                                 core.location.country,
                                                 value_type_upper)),
        shape);
    core.personal_values.values_orientation =
        reply.at("values_orientation").get<std::string>();
  }

  bool attitude_anchored = anchors.has("attitude") &&
                           anchors.has("attitude_details") &&
                           anchors.has("coping_mechanism");
  if (!attitude_anchored) {
    JsonShape shape{{{"attitude", ValueKind::kString},
                     {"attitude_details", ValueKind::kString},
                     {"coping_mechanism", ValueKind::kString}}};
    json reply = complete_json(
        backend,
        ChatRequest::user(prompts::attitude_prompt(
            age, core.gender, core.career_info.status, core.location.city,
            core.location.country, core.personal_values.values_orientation)),
        shape);
    core.life_attitude.attitude = reply.at("attitude").get<std::string>();
    core.life_attitude.attitude_details =
        reply.at("attitude_details").get<std::string>();
    core.life_attitude.coping_mechanism =
        reply.at("coping_mechanism").get<std::string>();
  }
  if (anchors.has("attitude")) core.life_attitude.attitude = anchors.get("attitude");
  if (anchors.has("attitude_details"))
    core.life_attitude.attitude_details = anchors.get("attitude_details");
  if (anchors.has("coping_mechanism"))
    core.life_attitude.coping_mechanism = anchors.get("coping_mechanism");

  int num_stories = 1 + static_cast<int>(rng.index(3));
  if (anchors.has("personal_story") || !anchors.key_life_events.empty()) {
    if (!anchors.key_life_events.empty())
      core.personal_story.key_life_events = anchors.key_life_events;
    core.personal_story.personal_story =
        anchors.has("personal_story") ? anchors.get("personal_story")
                                      : core.personal_story.key_life_events.front();
    if (core.personal_story.key_life_events.empty())
      core.personal_story.key_life_events = {core.personal_story.personal_story};
  } else {
    JsonShape shape{{{"personal_stories", ValueKind::kStringList}}};
    json reply = complete_json(
        backend,
        ChatRequest::user(prompts::stories_prompt(
            num_stories, age, core.gender, core.career_info.status,
            core.location.city, core.location.country,
            core.personal_values.values_orientation, core.life_attitude.attitude,
            value_type)),
        shape);
    std::vector<std::string> stories =
        reply.at("personal_stories").get<std::vector<std::string>>();
    if (stories.empty())
      throw SchemaViolation("story chain returned no stories", reply.dump());
    if (stories.size() > 3) stories.resize(3);
    core.personal_story.personal_story = stories.front();
    core.personal_story.key_life_events = std::move(stories);
  }

  if (!anchors.interests.empty()) {
    core.interests.interests = anchors.interests;
  } else {
    std::string story_text = core.personal_story.personal_story;
    for (size_t i = 1; i < core.personal_story.key_life_events.size(); ++i)
      story_text += " " + core.personal_story.key_life_events[i];
    JsonShape shape{{{"interests", ValueKind::kStringList}}};
    json reply = complete_json(
        backend, ChatRequest::user(prompts::interests_prompt(story_text)), shape);
    core.interests.interests =
        reply.at("interests").get<std::vector<std::string>>();
    if (core.interests.interests.size() < 2)
      throw SchemaViolation("interests chain returned fewer than 2 items",
                            reply.dump());
  }
  core.validate();
}

// ---------------------------------------------------------------------------
// Selector
// ---------------------------------------------------------------------------

struct Selection {
  AttributePath path;
  Stratum stratum = Stratum::kNear;
};

// Stochastic breadth-first pick: a stratum at the 5:3:2 rate (falling back
// to the nearer adjacent stratum when the drawn one has no eligible node),
// then a frontier node weighted by the sparsity prior 1/(1+v) where v is
// the visit count of the node's branch anchor (its ancestor directly below
// the root category). Visit bookkeeping is derived from the profile itself:
// every logged selection counts one visit for each node on its chain.
inline Selection select_next_attribute(const AttributeTree& tree,
                                       const PersonaProfile& profile,
                                       const Strata& strata, Rng& rng) {
  std::set<std::string> used;
  std::unordered_map<AttributeTree::NodeId, int> visits;
  for (const LogRecord& r : profile.generation_log) {
    used.insert(r.path.key());
    if (r.skipped) continue;
    if (auto id = tree.find(r.path)) {
      AttributeTree::NodeId cur = *id;
      while (cur != AttributeTree::kSuperRoot) {
        ++visits[cur];
        cur = tree.node(cur).parent;
      }
    }
  }
  // Entries may predate the log (anchored resume files); count them too.
  for (const ProfileEntry& e : profile.entries) {
    if (used.count(e.path.key())) continue;
    used.insert(e.path.key());
    if (auto id = tree.find(e.path)) {
      AttributeTree::NodeId cur = *id;
      while (cur != AttributeTree::kSuperRoot) {
        ++visits[cur];
        cur = tree.node(cur).parent;
      }
    }
  }

  std::set<std::string> selected;
  for (const ProfileEntry& e : profile.entries) selected.insert(e.path.key());
  for (const LogRecord& r : profile.generation_log)
    if (!r.skipped) selected.insert(r.path.key());

  auto eligible = [&](const ScoredCandidate& c,
                      AttributeTree::NodeId& out_id) -> bool {
    if (used.count(c.path.key())) return false;
    auto id = tree.find(c.path);
    if (!id) return false;
    AttributeTree::NodeId parent = tree.node(*id).parent;
    bool parent_is_root = tree.node(parent).parent == AttributeTree::kSuperRoot &&
                          parent != AttributeTree::kSuperRoot;
    if (!parent_is_root && !selected.count(tree.path_of(parent).key()))
      return false;
    out_id = *id;
    return true;
  };

  auto branch_anchor = [&](AttributeTree::NodeId id) {
    AttributeTree::NodeId cur = id;
    AttributeTree::NodeId prev = id;
    while (tree.node(cur).parent != AttributeTree::kSuperRoot) {
      prev = cur;
      cur = tree.node(cur).parent;
    }
    return prev;  // node directly below the root category
  };

  Stratum drawn = draw_stratum(rng);
  static constexpr std::array<std::array<Stratum, 3>, 3> kFallback = {{
      {Stratum::kNear, Stratum::kMiddle, Stratum::kFar},
      {Stratum::kMiddle, Stratum::kNear, Stratum::kFar},
      {Stratum::kFar, Stratum::kMiddle, Stratum::kNear},
  }};
  for (Stratum s : kFallback[static_cast<size_t>(drawn)]) {
    const std::vector<ScoredCandidate>& pool =
        s == Stratum::kNear     ? strata.near
        : s == Stratum::kMiddle ? strata.middle
                                : strata.far;
    std::vector<const ScoredCandidate*> frontier;
    std::vector<double> weights;
    for (const ScoredCandidate& c : pool) {
      AttributeTree::NodeId id = AttributeTree::kSuperRoot;
      if (!eligible(c, id)) continue;
      frontier.push_back(&c);
      auto it = visits.find(branch_anchor(id));
      int v = it == visits.end() ? 0 : it->second;
      weights.push_back(1.0 / (1.0 + static_cast<double>(v)));
    }
    if (frontier.empty()) continue;
    return Selection{frontier[rng.weighted(weights)]->path, s};
  }
  throw TaxonomyExhausted("no unexplored taxonomy path is reachable");
}

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

inline std::string fill_attribute(const AttributePath& path,
                                  const PersonaProfile& profile, Backend& backend) {
  JsonShape shape{{{"value", ValueKind::kString}}};
  json reply = complete_json(
      backend,
      ChatRequest::user(prompts::fill_prompt(path.joined(),
                                             profile.context_json().dump(2))),
      shape);
  std::string value = trim(reply.at("value").get<std::string>());
  if (value.empty())
    throw SchemaViolation("attribute value came back empty", reply.dump());
  return value;
}

inline void narrate(PersonaProfile& profile, Backend& backend,
                    std::vector<std::string>* warnings = nullptr) {
  JsonShape shape{{{"narrative", ValueKind::kString}}};
  try {
    json reply = complete_json(
        backend,
        ChatRequest::user(prompts::narrate_prompt(profile.context_json().dump(2))),
        shape);
    profile.narrative = reply.at("narrative").get<std::string>();
  } catch (const SchemaViolation&) {
    profile.narrative.clear();
    detail::warn(warnings, "narrative generation failed; narrative left empty");
  }
}

// Equality scan proving S is contained in P unchanged.
inline void verify_anchors(const PersonaProfile& profile) {
  const AnchorSet& a = profile.anchor_input;
  const CoreAnchors& c = profile.anchors;
  auto check = [](const std::string& key, const std::string& want,
                  const std::string& got) {
    if (want != got)
      throw PersonaGenerationError("anchor '" + key + "' was not preserved: '" +
                                       want + "' became '" + got + "'",
                                   PersonaProfile{});
  };
  for (const auto& [key, want] : a.fields) {
    if (key == "age") check(key, want, std::to_string(c.age_info.age));
    if (key == "age_group") check(key, want, c.age_info.age_group);
    if (key == "gender") check(key, want, c.gender);
    if (key == "country") check(key, want, c.location.country);
    if (key == "city") check(key, want, c.location.city);
    if (key == "occupation") check(key, want, c.career_info.status);
    if (key == "values_orientation")
      check(key, want, c.personal_values.values_orientation);
    if (key == "attitude") check(key, want, c.life_attitude.attitude);
    if (key == "attitude_details")
      check(key, want, c.life_attitude.attitude_details);
    if (key == "coping_mechanism")
      check(key, want, c.life_attitude.coping_mechanism);
    if (key == "personal_story")
      check(key, want, c.personal_story.personal_story);
  }
  if (!a.key_life_events.empty() &&
      a.key_life_events != c.personal_story.key_life_events)
    throw PersonaGenerationError("anchored key_life_events were not preserved",
                                 PersonaProfile{});
  if (!a.interests.empty() && a.interests != c.interests.interests)
    throw PersonaGenerationError("anchored interests were not preserved",
                                 PersonaProfile{});
}

struct GenerateOutcome {
  PersonaProfile profile;
  bool taxonomy_exhausted = false;
  int fill_failures = 0;
  std::vector<std::string> warnings;
};

// Core instantiation, then the selector/generator loop until the attribute
// count reaches k (or the taxonomy runs out), then narrative summarization.
inline GenerateOutcome generate_profile(const AnchorSet& anchors, int k,
                                        const AttributeTree& tree,
                                        const DemographicTables& tables,
                                        Backend& backend, Rng& rng) {
  if (k < 0) throw InvalidInput("depth budget k must be non-negative");
  GenerateOutcome out;
  PersonaProfile& profile = out.profile;
  profile.anchor_input = anchors;
  profile.depth_budget = k;

  try {
    profile.anchors =
        sample_core_demographics(tables, anchors, rng, &out.warnings);
    derive_core_narrative(profile.anchors, anchors, backend, rng);
  } catch (const SchemaViolation& e) {
    throw PersonaGenerationError(
        std::string("core narrative chain failed: ") + e.what(), profile);
  }

  std::vector<AttributePath> candidates;
  for (auto id : tree.attribute_ids()) candidates.push_back(tree.path_of(id));
  Strata strata;
  if (!candidates.empty() && profile.attribute_count() < k)
    strata = stratify(
        score_candidates(candidates, profile.anchors.leaf_values(), embedder(backend)));

  int order = 0;
  while (profile.attribute_count() < k) {
    Selection selection;
    try {
      selection = select_next_attribute(tree, profile, strata, rng);
    } catch (const TaxonomyExhausted&) {
      out.taxonomy_exhausted = true;
      break;
    }
    LogRecord record;
    record.order = ++order;
    record.stratum = selection.stratum;
    record.path = selection.path;
    try {
      std::string value = fill_attribute(selection.path, profile, backend);
      profile.entries.push_back({selection.path, std::move(value)});
    } catch (const SchemaViolation&) {
      record.skipped = true;
      ++out.fill_failures;
    }
    profile.generation_log.push_back(std::move(record));
  }

  narrate(profile, backend, &out.warnings);
  try {
    verify_anchors(profile);
  } catch (const PersonaGenerationError& e) {
    throw PersonaGenerationError(e.what(), profile);
  }
  return out;
}

// Anchor extraction from a free-text sketch, then full generation.
inline GenerateOutcome enrich(const std::string& sketch, int k,
                              const AttributeTree& tree,
                              const DemographicTables& tables, Backend& backend,
                              Rng& rng) {
  if (trim(sketch).empty()) throw InvalidInput("empty persona sketch");
  JsonShape shape{{{"age", ValueKind::kString, false},
                   {"gender", ValueKind::kString, false},
                   {"country", ValueKind::kString, false},
                   {"city", ValueKind::kString, false},
                   {"occupation", ValueKind::kString, false}}};
  json reply = complete_json(
      backend, ChatRequest::user(prompts::enrich_extraction_prompt(sketch)), shape);
  AnchorSet anchors;
  anchors.bio = sketch;
  for (const char* key : {"age", "gender", "country", "city", "occupation"}) {
    std::string value = trim(reply.value(key, ""));
    if (!value.empty()) anchors.set(key, value);
  }
  return generate_profile(anchors, k, tree, tables, backend, rng);
}

}  // namespace pgen
