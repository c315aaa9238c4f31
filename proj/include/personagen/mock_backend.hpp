#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "personagen/backend.hpp"
#include "personagen/json_util.hpp"
#include "personagen/text.hpp"

namespace pgen {

// Offline stand-in for the chat/embedding service. Every reply is a pure
// function of (config seed, full message list), computed via FNV-1a rather
// than std::hash or distribution adapters, so transcripts are byte-stable
// across platforms and thread schedules. Embeddings ignore the seed: they
// hash tokens into a fixed 256-bucket frequency vector, which makes texts
// with disjoint token sets exactly orthogonal and shared tokens raise
// cosine similarity.
class MockBackend final : public Backend {
 public:
  static constexpr std::size_t kEmbeddingDim = 256;

  explicit MockBackend(BackendConfig cfg)
      : cfg_(std::move(cfg)), limiter_(cfg_.rate_limit) {
    cfg_.validate();
    seed_ = cfg_.seed.value_or(0);
  }

  const BackendConfig& config() const override { return cfg_; }

  std::string complete(const ChatRequest& request) override {
    request.validate();
    limiter_.acquire();
    std::string text;
    for (const ChatMessage& m : request.messages) {
      text += m.content;
      text += '\n';
    }
    std::uint64_t h = fnv1a64(seed_);
    for (const ChatMessage& m : request.messages) {
      h = fnv1a64(role_name(m.role), h);
      h = fnv1a64(m.content, h);
    }
    return route(text, h);
  }

  std::vector<std::vector<double>> embed(
      const std::vector<std::string>& texts) override {
    limiter_.acquire();
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(embed_one(t));
    return out;
  }

  static std::vector<double> embed_one(const std::string& text) {
    std::vector<double> v(kEmbeddingDim, 0.0);
    std::vector<std::string> tokens = tokenize(text);
    if (tokens.empty()) {
      v[fnv1a64(text) % kEmbeddingDim] = 1.0;
      return v;
    }
    for (std::string& tok : tokens) {
      tok = fold_plural(std::move(tok));
      v[fnv1a64(tok) % kEmbeddingDim] += 1.0;
    }
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
  }

 private:
  static bool has(std::string_view text, std::string_view marker) {
    return text.find(marker) != std::string_view::npos;
  }

  // Text after the first `after`, cut at the next `before` (or the end).
  static std::string between(std::string_view text, std::string_view after,
                             std::string_view before) {
    size_t a = text.find(after);
    if (a == std::string_view::npos) return "";
    a += after.size();
    size_t b = before.empty() ? std::string_view::npos : text.find(before, a);
    return trim(text.substr(a, b == std::string_view::npos ? b : b - a));
  }

  static const std::string& pick(std::uint64_t h,
                                 const std::vector<std::string>& options) {
    return options[h % options.size()];
  }

  // Occasionally wraps JSON in prose so callers must exercise extraction.
  static std::string emit_json(const ojson& j, std::uint64_t h) {
    std::string body = j.dump();
    if (h % 3 == 0)
      return "Sure! Here is the JSON you asked for:\n" + body +
             "\nHope this helps.";
    return body;
  }

  std::string route(const std::string& text, std::uint64_t h) const {
    if (has(text, "RESPONSE-Quality Evaluator")) return answer_judge(text, h);
    if (has(text, "generate a personalized response tailored"))
      return answer_responder(text, h);
    if (has(text, "You can only respond with")) return answer_survey(text, h);
    if (has(text, "# DEFINITION")) return answer_classification(text, h);
    if (has(text, "# ATTRIBUTE PATH EXTRACTION")) return answer_extraction(text, h);
    if (has(text, "# SKETCH FACT EXTRACTION")) return answer_sketch(text, h);
    if (has(text, "# PROFILE NARRATIVE")) return answer_narrate(text, h);
    if (has(text, "# ATTRIBUTE VALUE GENERATION")) return answer_fill(text, h);
    if (has(text, "Determine if this attribute path describes"))
      return answer_personal_path(text, h);
    if (has(text, "Determine if this segment represents"))
      return answer_check_node(text, h);
    if (has(text, "Rewrite it into a general category label")) {
      ojson j;
      j["rewrite"] = "";
      return emit_json(j, h);
    }
    if (has(text, "concise personal stories for a person"))
      return answer_stories(text, h);
    if (has(text, "infer two to three hobbies")) return answer_interests(text, h);
    if (has(text, "life attitude based on the following information"))
      return answer_attitude(text, h);
    if (has(text, "core values and belief system based on:"))
      return answer_values(text, h);
    return "mock:" + to_hex(h);
  }

  // --- QA classification -------------------------------------------------

  static bool has_personal_pronoun(const std::string& s) {
    static const std::vector<std::string> kPronouns = {
        "i", "me", "my", "mine", "myself", "we", "our", "us"};
    for (const std::string& tok : tokenize(s))
      for (const std::string& p : kPronouns)
        if (tok == p) return true;
    return false;
  }

  std::string answer_classification(const std::string& text, std::uint64_t h) const {
    std::string question = between(text, "# QUESTION\n", "\n\n# ANSWER");
    std::string answer = between(text, "# ANSWER\n", "\n\nCRITICAL");
    static const std::vector<std::string> kCategories = {
        "advice", "factual", "planning", "recommendation", "opinion"};
    ojson j;
    j["category"] = pick(fnv1a64(question), kCategories);
    if (has_personal_pronoun(question)) {
      j["is_personalizable"] = "Personalizable";
      j["reason"] =
          "The question is asked about the user's own situation, so profile "
          "attributes directly change the best answer.";
    } else if (has_personal_pronoun(answer)) {
      j["is_personalizable"] = "Partially Personalizable";
      j["reason"] =
          "The question is generic but the answer leans on personal context, "
          "so a profile could refine parts of it.";
    } else {
      j["is_personalizable"] = "Non-personalizable";
      j["reason"] =
          "The answer is a fixed fact that does not vary with who is asking.";
    }
    return emit_json(j, h);
  }

  // --- Attribute path extraction ------------------------------------------

  struct KeywordPath {
    std::string_view keyword;
    std::string_view path;
  };

  static const std::vector<KeywordPath>& keyword_paths() {
    static const std::vector<KeywordPath> kTable = {
        {"vegan", "Hobbies, Interests, and Lifestyle -> Food Preference -> Vegan"},
        {"vegetarian",
         "Hobbies, Interests, and Lifestyle -> Food Preferences -> Vegetarian"},
        {"guitar", "Hobbies, Interests, and Lifestyle -> Music -> Guitar"},
        {"piano", "Hobbies, Interests, and Lifestyle -> Music Taste -> Piano"},
        {"hiking",
         "Hobbies, Interests, and Lifestyle -> Outdoor Activities -> Hiking"},
        {"camping",
         "Hobbies, Interests, and Lifestyle -> Outdoor Activity -> Camping"},
        {"chess", "Hobbies, Interests, and Lifestyle -> Games -> Chess"},
        {"board game",
         "Hobbies, Interests, and Lifestyle -> Games -> Board Games"},
        {"pokemon",
         "Hobbies, Interests, and Lifestyle -> Games -> Pokemon Red 1998"},
        {"cooking",
         "Hobbies, Interests, and Lifestyle -> Cooking Style -> Home Cooking"},
        {"baking", "Hobbies, Interests, and Lifestyle -> Cooking Style -> Baking"},
        {"yoga", "Physical and Health Characteristics -> Fitness Habit -> Yoga"},
        {"jog", "Physical and Health Characteristics -> Fitness Habits -> Jogging"},
        {"gym",
         "Physical and Health Characteristics -> Fitness Habits -> Gym Training"},
        {"allerg",
         "Physical and Health Characteristics -> Dietary Restrictions -> Nut "
         "Allergy"},
        {"insomnia",
         "Physical and Health Characteristics -> Sleep Pattern -> Night Owl"},
        {"nurse", "Career and Work Identity -> Occupation -> Nursing"},
        {"teacher", "Career and Work Identity -> Occupations -> Teaching"},
        {"engineer", "Career and Work Identity -> Occupation -> Engineering"},
        {"startup", "Career and Work Identity -> Work Environment -> Startup"},
        {"remote", "Career and Work Identity -> Work Style -> Remote Work"},
        {"budget", "Demographic Information -> Income Level -> 50000 USD"},
        {"salary", "Demographic Information -> Income Level -> 50000 USD"},
        {"married", "Demographic Information -> Marital Status -> Married"},
        {"kids",
         "Relationships and Social Networks -> Family Composition -> Two "
         "Children"},
        {"children",
         "Relationships and Social Networks -> Family Composition -> Two "
         "Children"},
        {"friend",
         "Relationships and Social Networks -> Friendship Circle -> Close Knit"},
        {"universit", "Education and Learning -> Education Level -> University"},
        {"college", "Education and Learning -> Education Level -> University"},
        {"spanish", "Education and Learning -> Language Skills -> Spanish"},
        {"french", "Education and Learning -> Language Skill -> French"},
        {"podcast",
         "Media Consumption and Engagement -> Podcast Preferences -> True Crime"},
        {"movie",
         "Media Consumption and Engagement -> Film Preference -> Science "
         "Fiction"},
        {"film",
         "Media Consumption and Engagement -> Film Preference -> Science "
         "Fiction"},
        {"netflix",
         "Media Consumption and Engagement -> Film Preferences -> Documentaries"},
        {"faith",
         "Core Values, Beliefs, and Philosophy -> Religious Beliefs -> "
         "Practicing Member"},
        {"church",
         "Core Values, Beliefs, and Philosophy -> Religious Beliefs -> "
         "Practicing Member"},
        {"climate",
         "Core Values, Beliefs, and Philosophy -> Environmental Values -> "
         "Sustainability"},
        {"anxiety",
         "Psychological and Cognitive Aspects -> Stress Response -> Avoidant "
         "Coping"},
        {"stress",
         "Psychological and Cognitive Aspects -> Stress Response -> Avoidant "
         "Coping"},
        {"introvert",
         "Psychological and Cognitive Aspects -> Personality Type -> "
         "Introverted"},
        {"immigra",
         "Cultural and Social Context -> Cultural Background -> Immigrant "
         "Family"},
        {"festival",
         "Cultural and Social Context -> Cultural Traditions -> Local Festivals"},
        {"morning", "Lifestyle and Daily Routine -> Daily Schedule -> Early Riser"},
        {"commute",
         "Lifestyle and Daily Routine -> Commute Pattern -> Public Transit"},
        {"empath", "Emotional and Relational Skills -> Empathy Level"},
        {"conflict",
         "Emotional and Relational Skills -> Conflict Resolution Style -> "
         "Mediation"},
        {"sneaker", "Brand -> Shoes -> Retro Runner 88"},
        {"shoes", "Brand -> Shoes -> Retro Runner 88"},
    };
    return kTable;
  }

  std::string answer_extraction(const std::string& text, std::uint64_t h) const {
    std::string question = between(text, "# QUESTION\n", "\n\n# ANSWER");
    std::string answer = between(text, "# ANSWER\n", "\n\nCRITICAL");
    std::string hay = to_lower(question + " " + answer);
    std::vector<std::string> paths;
    for (const KeywordPath& kp : keyword_paths()) {
      if (paths.size() >= 3) break;
      if (hay.find(kp.keyword) == std::string::npos) continue;
      std::string p(kp.path);
      bool dup = false;
      for (const std::string& seen : paths) dup = dup || seen == p;
      if (!dup) paths.push_back(std::move(p));
    }
    if (paths.empty()) {
      static const std::vector<std::string> kGenericMid = {
          "General Preferences", "Personal Background", "Daily Habits",
          "Notable Experiences", "Practical Skills"};
      static const std::vector<std::string> kGenericLeaf = {
          "Everyday Routine", "Occasional Activity", "Long-term Pattern"};
      std::uint64_t hq = fnv1a64(hay);
      const std::vector<std::string>& roots = root_categories_ref();
      std::string p = roots[hq % roots.size()] + " -> " + pick(hq >> 8, kGenericMid);
      if ((hq >> 16) % 2 == 0) p += " -> " + pick(hq >> 24, kGenericLeaf);
      paths.push_back(std::move(p));
    }
    ojson j;
    j["paths"] = paths;
    return emit_json(j, h);
  }

  // Mirrors the library's fixed category list without including the tree
  // header (the mock stays self-contained below the backend layer).
  static const std::vector<std::string>& root_categories_ref() {
    static const std::vector<std::string> kRoots = {
        "Demographic Information",
        "Physical and Health Characteristics",
        "Psychological and Cognitive Aspects",
        "Cultural and Social Context",
        "Relationships and Social Networks",
        "Career and Work Identity",
        "Education and Learning",
        "Hobbies, Interests, and Lifestyle",
        "Lifestyle and Daily Routine",
        "Core Values, Beliefs, and Philosophy",
        "Emotional and Relational Skills",
        "Media Consumption and Engagement",
    };
    return kRoots;
  }

  // --- Node validation ----------------------------------------------------

  std::string answer_personal_path(const std::string& text, std::uint64_t h) const {
    std::string path = to_lower(between(text, "Attribute path: ", "\n"));
    static const std::vector<std::string> kImpersonal = {
        "weather", "world news", "current events", "general knowledge"};
    bool personal = true;
    for (const std::string& w : kImpersonal)
      if (path.find(w) != std::string::npos) personal = false;
    ojson j;
    j["answer"] = personal ? "PERSONAL" : "NOT PERSONAL";
    return emit_json(j, h);
  }

  std::string answer_check_node(const std::string& text, std::uint64_t h) const {
    std::string segment = between(text, "Segment: ", "\n");
    bool valid = !contains_digit(segment) && segment.size() <= 48;
    ojson j;
    j["valid"] = valid ? "true" : "false";
    return emit_json(j, h);
  }

  // --- Core narrative chain -------------------------------------------------

  std::string answer_values(const std::string& text, std::uint64_t h) const {
    static const std::vector<std::string> kValues = {
        "personal achievement through disciplined effort",
        "curiosity and independent thinking",
        "loyalty to family above institutions",
        "material security and careful planning",
        "creative self-expression over convention",
        "skepticism toward authority and received wisdom",
        "comfort in predictable routines",
        "status earned through public recognition",
        "quiet pragmatism about what can be changed",
        "novelty seeking and calculated risk",
    };
    ojson j;
    j["values_orientation"] = pick(fnv1a64("values", h), kValues);
    return emit_json(j, h);
  }

  std::string answer_attitude(const std::string& text, std::uint64_t h) const {
    static const std::vector<std::string> kAttitude = {
        "Takes each day as it comes.",
        "Believes sustained effort eventually pays off.",
        "Expects little and avoids disappointment.",
        "Treats life as a series of projects.",
        "Finds meaning in small daily routines.",
        "Keeps score and plays to win.",
        "Stays curious about almost everything.",
        "Guards personal time fiercely.",
    };
    static const std::vector<std::string> kDetails = {
        "Plans the week in advance but leaves evenings unscripted, reviewing "
        "what worked every Sunday night.",
        "Rarely complains at work and channels frustration into long walks "
        "and detailed to-do lists instead.",
        "Says yes to new invitations first and sorts out the schedule "
        "conflicts afterwards without much worry.",
        "Keeps a written journal of past decisions to avoid repeating old "
        "mistakes in new situations.",
        "Prefers fixing problems quietly over discussing them, which "
        "colleagues sometimes read as distance.",
        "Checks the news once in the morning and then ignores it to protect "
        "concentration for the day.",
    };
    static const std::vector<std::string> kCoping = {
        "Runs until the problem feels smaller.",
        "Talks it through with one trusted person.",
        "Breaks problems into small written lists.",
        "Sleeps on it before reacting.",
        "Retreats into practical chores.",
        "Defuses stress with dry humor.",
    };
    ojson j;
    j["attitude"] = pick(fnv1a64("attitude", h), kAttitude);
    j["attitude_details"] = pick(fnv1a64("details", h), kDetails);
    j["coping_mechanism"] = pick(fnv1a64("coping", h), kCoping);
    return emit_json(j, h);
  }

  std::string answer_stories(const std::string& text, std::uint64_t h) const {
    int num = 1;
    std::string n = between(text, "Generate ", " concise personal stories");
    if (!n.empty()) num = std::max(1, std::min(3, std::atoi(n.c_str())));
    std::string occupation = between(text, "Occupation: ", "\n");
    std::string city = between(text, "Location: ", ",");
    static const std::vector<std::string> kTemplates = {
        "Years of working as %OCC% in %CITY% ended abruptly when the employer "
        "folded; three months of uncertainty followed before a smaller rival "
        "offered a contract with worse pay but far more autonomy.",
        "A flooded apartment in %CITY% destroyed most possessions one spring; "
        "the insurance dispute dragged on for a year and changed how money "
        "and paperwork were handled ever after.",
        "An overheard conversation on a commute in %CITY% led to an "
        "unexpected side job; what began as weekend help for a stranger "
        "became a second income and a close professional contact.",
        "A serious dispute with a sibling over inherited property went "
        "unspoken for two years; a chance meeting at a funeral in %CITY% "
        "forced a conversation that settled it without lawyers.",
        "Failing a professional certification on the first attempt while "
        "working as %OCC% meant studying nights for a year; the retake "
        "passed, but the routine of early mornings never went away.",
    };
    std::vector<std::string> stories;
    for (int i = 0; i < num; ++i) {
      std::string s = pick(fnv1a64("story" + std::to_string(i), h), kTemplates);
      replace_all(s, "%OCC%", occupation.empty() ? "a contractor" : occupation);
      replace_all(s, "%CITY%", city.empty() ? "the city" : city);
      stories.push_back(std::move(s));
    }
    ojson j;
    j["personal_stories"] = stories;
    return emit_json(j, h);
  }

  std::string answer_interests(const std::string& text, std::uint64_t h) const {
    static const std::vector<std::string> kInterests = {
        "urban sketching outdoors",     "long trail running",
        "collecting vintage vinyl",     "container balcony gardening",
        "weekend lake fishing",         "amateur telescope astronomy",
        "salsa dance classes",          "home espresso brewing",
        "long-distance cycling trips",  "competitive strategy board games",
    };
    std::uint64_t a = fnv1a64("interest-a", h) % kInterests.size();
    std::uint64_t b = fnv1a64("interest-b", h) % kInterests.size();
    if (b == a) b = (a + 1) % kInterests.size();
    ojson j;
    j["interests"] = std::vector<std::string>{kInterests[a], kInterests[b]};
    return emit_json(j, h);
  }

  // --- Structured fill, narrative, sketch extraction ------------------------

  std::string answer_fill(const std::string& text, std::uint64_t h) const {
    std::string path = between(text, "Attribute path: ", "\n");
    std::string leaf = path;
    size_t arrow = path.rfind(" -> ");
    if (arrow != std::string::npos) leaf = path.substr(arrow + 4);
    static const std::vector<std::string> kTemplates = {
        "Strong preference for %LEAF%",
        "Occasional interest in %LEAF%",
        "Deeply committed to %LEAF%",
        "Avoids %LEAF% whenever possible",
        "Weekly routine built around %LEAF%",
        "Self-taught in %LEAF%",
        "Picked up %LEAF% from a close friend",
        "Considers %LEAF% a private matter",
    };
    std::string v = pick(fnv1a64("fill", h), kTemplates);
    replace_all(v, "%LEAF%", leaf);
    ojson j;
    j["value"] = v;
    return emit_json(j, h);
  }

  std::string answer_narrate(const std::string& text, std::uint64_t h) const {
    std::string raw = between(text, "Profile:\n", "\n\nCRITICAL");
    nlohmann::json p = nlohmann::json::parse(raw, nullptr, false);
    if (p.is_discarded()) p = nlohmann::json::object();
    auto s = [&p](const char* a, const char* b) -> std::string {
      if (!p.contains(a) || !p[a].contains(b)) return "unknown";
      const auto& v = p[a][b];
      if (v.is_number_integer()) return std::to_string(v.get<long long>());
      return v.is_string() ? v.get<std::string>() : "unknown";
    };
    auto list = [&p](const char* a, const char* b) {
      std::string out;
      if (p.contains(a) && p[a].contains(b) && p[a][b].is_array())
        for (const auto& e : p[a][b]) {
          if (!out.empty()) out += "; ";
          if (e.is_string()) out += e.get<std::string>();
        }
      return out;
    };
    std::string narrative = "This is a " + s("age_info", "age") + "-year-old " +
                            p.value("gender", "person") + " (" +
                            s("age_info", "age_group") + ") living in " +
                            s("location", "city") + ", " + s("location", "country") +
                            ", working as " + s("career_info", "status") +
                            ". Core values: " +
                            s("personal_values", "values_orientation") +
                            ". Life attitude: " + s("life_attitude", "attitude") +
                            " " + s("life_attitude", "attitude_details") +
                            " Copes by the following: " +
                            s("life_attitude", "coping_mechanism") +
                            " Personal story: " +
                            s("personal_story", "personal_story") +
                            " Key life events: " +
                            list("personal_story", "key_life_events") +
                            ". Interests: " + list("interests", "interests") + ".";
    if (p.contains("entries") && p["entries"].is_array() && !p["entries"].empty()) {
      narrative += " Additional attributes: ";
      bool first = true;
      for (const auto& e : p["entries"]) {
        if (!first) narrative += "; ";
        first = false;
        narrative += e.value("value", "");
      }
      narrative += ".";
    }
    ojson j;
    j["narrative"] = narrative;
    return emit_json(j, h);
  }

  std::string answer_sketch(const std::string& text, std::uint64_t h) const {
    std::string sketch = between(text, "Sketch: ", "\n\nCRITICAL");
    std::string low = to_lower(sketch);
    ojson j;
    j["age"] = "";
    j["gender"] = "";
    j["country"] = "";
    j["city"] = "";
    j["occupation"] = "";

    size_t yo = low.find("year-old");
    if (yo == std::string::npos) yo = low.find("year old");
    if (yo != std::string::npos) {
      size_t end = yo;
      while (end > 0 && !std::isdigit(static_cast<unsigned char>(low[end - 1])))
        --end;
      size_t begin = end;
      while (begin > 0 && std::isdigit(static_cast<unsigned char>(low[begin - 1])))
        --begin;
      if (begin < end) j["age"] = sketch.substr(begin, end - begin);
    }

    static const std::vector<std::pair<std::string, std::string>> kGenders = {
        {"female", "female"}, {"woman", "female"}, {"male", "male"},
        {"man", "male"},      {"non-binary", "non-binary"}};
    for (const auto& [word, norm] : kGenders) {
      for (const std::string& tok : tokenize(low))
        if (tok == word || (word == "non-binary" && tok == "binary")) {
          j["gender"] = norm;
          break;
        }
      if (!j["gender"].get<std::string>().empty()) break;
    }

    static const std::vector<std::string> kOccupations = {
        "nurse",   "teacher", "engineer", "developer", "doctor",
        "chef",    "lawyer",  "student",  "artist",    "farmer",
        "manager", "accountant"};
    for (const std::string& occ : kOccupations)
      if (low.find(occ) != std::string::npos) {
        j["occupation"] = occ;
        break;
      }

    static const std::vector<std::string> kCountries = {
        "USA",   "Germany",   "Kenya", "Japan",    "Australia", "Argentina",
        "India", "Brazil",    "UK",    "Vietnam",  "Canada",    "Nigeria"};
    for (const std::string& c : kCountries)
      if (low.find(to_lower(c)) != std::string::npos) {
        j["country"] = c;
        break;
      }

    size_t in_pos = sketch.find(" in ");
    if (in_pos != std::string::npos) {
      size_t start = in_pos + 4;
      std::string city;
      size_t i = start;
      while (i < sketch.size()) {
        if (!std::isupper(static_cast<unsigned char>(sketch[i]))) break;
        size_t end = i;
        while (end < sketch.size() &&
               (std::isalpha(static_cast<unsigned char>(sketch[end]))))
          ++end;
        if (!city.empty()) city += " ";
        city += sketch.substr(i, end - i);
        if (end + 1 < sketch.size() && sketch[end] == ' ' &&
            std::isupper(static_cast<unsigned char>(sketch[end + 1])))
          i = end + 1;
        else
          break;
      }
      bool is_country = false;
      for (const std::string& c : kCountries) is_country = is_country || city == c;
      if (!city.empty() && !is_country) j["city"] = city;
    }
    return emit_json(j, h);
  }

  // --- Survey, responder, judge ---------------------------------------------

  std::string answer_survey(const std::string& text, std::uint64_t h) const {
    size_t q = text.rfind("Question:");
    std::string question = q == std::string::npos ? text : text.substr(q);
    int span = 2;
    for (size_t i = 0; i < question.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(question[i]))) continue;
      size_t end = i;
      while (end < question.size() &&
             std::isdigit(static_cast<unsigned char>(question[end])))
        ++end;
      int v = std::atoi(question.substr(i, end - i).c_str());
      if (v >= 2 && v <= 10 && v > span) span = v;
      i = end;
    }
    return std::to_string(1 + static_cast<int>(h % static_cast<std::uint64_t>(span)));
  }

  std::string answer_responder(const std::string& text, std::uint64_t h) const {
    std::string request = between(text, "; user request: ", "\n");
    std::string profile = between(text, "User profile: ", "; user request: ");
    std::string snippet = profile.substr(0, std::min<size_t>(profile.size(), 90));
    return "Here is a plan tailored to this user. Request: " + request +
           " Grounded in the profile (" + snippet +
           "...), the steps below reference their background, stated "
           "interests, and constraints. Reference code " +
           to_hex(h).substr(0, 8) + ".";
  }

  std::string answer_judge(const std::string& text, std::uint64_t h) const {
    bool standard = has(text, "\"justification\": <1-5>");
    static const std::vector<std::string> kStandardKeys = {
        "personalization_fit",      "attribute_coverage",
        "depth_specificity",        "justification",
        "actionability",            "effort_reduction",
        "novelty_with_relevance",   "diversity_of_suggestions",
        "goal_progress_alignment",  "engagement_motivation_potential"};
    static const std::vector<std::string> kCreativeKeys = {
        "personalization_fit", "attribute_coverage", "depth_specificity",
        "novelty_with_relevance", "engagement_motivation_potential"};
    const std::vector<std::string>& keys = standard ? kStandardKeys : kCreativeKeys;
    ojson rationale = ojson::object();
    ojson scores = ojson::object();
    for (const std::string& k : keys) {
      std::uint64_t hk = fnv1a64(k, h);
      scores[k] = 1 + static_cast<int>(hk % 5);
      rationale[k] = "Deterministic rubric assessment of " + k +
                     " against the profile and response as provided.";
    }
    ojson j;
    j["rationale"] = std::move(rationale);
    j["scores"] = std::move(scores);
    return emit_json(j, h);
  }

  static void replace_all(std::string& s, std::string_view what,
                          std::string_view with) {
    for (size_t pos = 0; (pos = s.find(what, pos)) != std::string::npos;
         pos += with.size())
      s.replace(pos, what.size(), with);
  }

  BackendConfig cfg_;
  std::uint64_t seed_ = 0;
  RateLimiter limiter_;
};

}  // namespace pgen
