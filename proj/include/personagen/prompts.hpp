#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pgen::prompts {

// ---------------------------------------------------------------------------
// QA classification
// ---------------------------------------------------------------------------

inline constexpr std::string_view kClassificationInstruction =
    R"(# INSTRUCTION
Your task is to:
1) check if response for given user question could be personalizable or not (assume we know about user's demographic, interest, background, relationships, etc,.), or partially personalizable based on DEFINITION of Personalizable.
2) explain the reason for above decision.

# DEFINITION
Personalizable: it's possible to use personal information to provide a better (more valuable and meaningful) answer, which is more relevant, more feasible, or more emotionally attacked to the user.)";

inline std::string classification_prompt(const std::string& question,
                                         const std::string& answer) {
  std::string p(kClassificationInstruction);
  p += "\n\n# QUESTION\n" + question;
  p += "\n\n# ANSWER\n" + answer;
  p +=
      "\n\nCRITICAL: You must format your response EXACTLY as a valid JSON "
      "object with this structure:\n"
      "{\n"
      "    \"category\": \"<topic category of the question>\",\n"
      "    \"is_personalizable\": \"<Personalizable | Partially Personalizable "
      "| Non-personalizable>\",\n"
      "    \"reason\": \"<one sentence explaining the decision>\"\n"
      "}\n\n"
      "DO NOT include any text before or after the JSON. The response must be "
      "parseable by json.loads().";
  return p;
}

// ---------------------------------------------------------------------------
// Attribute path extraction
// ---------------------------------------------------------------------------

inline std::string extraction_prompt(const std::string& question,
                                     const std::string& answer,
                                     const std::vector<std::string>& roots) {
  std::string p =
      "# ATTRIBUTE PATH EXTRACTION\n"
      "From the question-answer pair below, extract the user attributes it "
      "reveals as hierarchical paths. Each path starts at one of the root "
      "categories, refines it level by level, and has at most 4 levels "
      "including the root. Use ' -> ' between levels. Extract up to 3 paths; "
      "extract nothing if the pair reveals no personal attribute.\n\n"
      "Root categories:\n";
  for (const std::string& r : roots) p += "- " + r + "\n";
  p += "\n# QUESTION\n" + question;
  p += "\n\n# ANSWER\n" + answer;
  p +=
      "\n\nCRITICAL: You must format your response EXACTLY as a valid JSON "
      "object with this structure:\n"
      "{\n"
      "    \"paths\": [\"Root -> Category -> Leaf\", \"...\"]\n"
      "}\n\n"
      "DO NOT include any text before or after the JSON. The response must be "
      "parseable by json.loads().";
  return p;
}

// ---------------------------------------------------------------------------
// Node validation predicates
// ---------------------------------------------------------------------------

inline constexpr std::string_view kPersonalPathInstruction =
    R"(Determine if this attribute path describes an individual's characteristics.
Consider it PERSONAL if it's about:
1. Demographics and identity:
- Gender, age, family status
- Cultural background
- Personal identity aspects
2. Individual characteristics:
- Skills and capabilities
- Preferences and interests
- Experiences and background
- Communication and learning styles
- Decision-making patterns
3. Personal context:
- Family composition
- Professional background
- Educational history
Consider it NOT PERSONAL only if it's about:
1. External systems or organizations
2. Historical or cultural events
3. General facts or concepts that don't vary by individual)";

inline std::string personal_path_prompt(const std::string& joined_path) {
  std::string p(kPersonalPathInstruction);
  p += "\n\nAttribute path: " + joined_path;
  p +=
      "\n\nReply EXACTLY as a valid JSON object: "
      "{\"answer\": \"PERSONAL\"} or {\"answer\": \"NOT PERSONAL\"}. "
      "DO NOT include any text before or after the JSON.";
  return p;
}

inline constexpr std::string_view kCheckNodeInstruction =
    R"(Determine if this segment represents a general category or aspect rather than a specific instance.
Consider it VALID (true) if it describes:
1. A general category or classification (e.g., 'Role', 'Type', 'Level', 'Category')
2. A broad aspect or dimension (e.g., 'Style', 'Pattern', 'Approach')
3. A general capability or trait (e.g., 'Skills', 'Knowledge', 'Experience')
4. A characteristic or attribute (e.g., 'Status', 'Background', 'Identity')
5. An area or domain
Consider it INVALID (false) if it is:
1. A specific instance or example (e.g., 'Python', 'Manager', 'Sales')
2. A concrete value or measurement (e.g., '5 years', 'Level 3')
3. A specific organization or location (e.g., 'Google', 'New York')
4. A proper noun or named entity)";

inline std::string check_node_prompt(const std::string& segment) {
  std::string p(kCheckNodeInstruction);
  p += "\n\nSegment: " + segment;
  p +=
      "\n\nReply EXACTLY as a valid JSON object: "
      "{\"valid\": \"true\"} or {\"valid\": \"false\"}. "
      "DO NOT include any text before or after the JSON.";
  return p;
}

inline constexpr std::string_view kCheckPathInstruction =
    R"(1. User-Centric Focus:
- Must describe personal characteristics/attributes
- Remove business/marketing terms
- Remove metrics/objectives/adjective
2. Check each level:
- Must be general category (no specific instances, behaviors, or values)
- Must logically refine parent level
3. Attributes must be highly general, enabling GPT to generate rich content for that attribute)";

inline std::string rewrite_prompt(const std::string& segment) {
  std::string p =
      "A taxonomy segment failed validation. Rewrite it into a general "
      "category label that satisfies these requirements, or reply with an "
      "empty string if no faithful rewrite exists.\n\n";
  p += std::string(kCheckPathInstruction);
  p += "\n\nSegment: " + segment;
  p +=
      "\n\nReply EXACTLY as a valid JSON object: "
      "{\"rewrite\": \"<new label or empty string>\"}. "
      "DO NOT include any text before or after the JSON.";
  return p;
}

// ---------------------------------------------------------------------------
// Core narrative chain
// ---------------------------------------------------------------------------

inline std::string values_prompt(const std::string& age, const std::string& gender,
                                 const std::string& occupation,
                                 const std::string& city, const std::string& country,
                                 const std::string& value_type_upper) {
  std::string p =
      "Generate a concise description of a person's core values and belief "
      "system based on:\n";
  p += "Age: " + age + ", Gender: " + gender + ", Occupation: " + occupation +
       ", Location: " + city + ", " + country + "\n\n";
  p += "IMPORTANT: This person has a " + value_type_upper +
       " value system. Their values may be entirely consistent with their "
       "personal background or may conflict with it. Avoid introducing "
       "unnecessary contrasts or contradictions in their beliefs. Try to avoid "
       "being related to the community as much as possible.Avoid using words "
       "with similar meanings to ‘balance’ and ‘balance’.\n\n";
  p +=
      "Please generate a short phrase that clearly captures the essence of "
      "this person's core values and beliefs without adding conflicting ideas "
      "or turnarounds.\n\n"
      "CRITICAL: You must format your response EXACTLY as a valid JSON object "
      "with this structure:\n"
      "{\n"
      "    \"values_orientation\": \"short phrase describing their values\"\n"
      "}\n\n"
      "DO NOT include any text before or after the JSON. The response must be "
      "parseable by json.loads().";
  return p;
}

inline std::string attitude_prompt(const std::string& age, const std::string& gender,
                                   const std::string& occupation,
                                   const std::string& city, const std::string& country,
                                   const std::string& values_orientation) {
  std::string p =
      "Generate specific attributes about a person's life attitude based on "
      "the following information:\n\n";
  p += "Age: " + age + "\n";
  p += "Gender: " + gender + "\n";
  p += "Occupation: " + occupation + "\n";
  p += "Location: " + city + ", " + country + "\n";
  p += "Core Values: " + values_orientation + "\n\n";
  p +=
      "IMPORTANT: This person's attitude toward life can be positive, neutral, "
      "or negative. In a negative state, they may hold a pessimistic, cynical, "
      "or even nihilistic view of life. Avoid involving concepts such as "
      "community or balance.\n\n"
      "I need you to generate ONLY the following specific attributes, each "
      "expressed as a single sentence:\n\n"
      "1. attitude: A single, concise sentence (5-10 words) describing their "
      "overall life attitude\n"
      "2. attitude_details: A single sentence (15-20 words) explaining how "
      "this attitude manifests in their daily life\n"
      "3. coping_mechanism: A single sentence (5-10 words) describing how they "
      "deal with challenges\n\n"
      "CRITICAL: You must format your response EXACTLY as a valid JSON object "
      "with this structure:\n"
      "{\"attitude\": \"single sentence\", \"attitude_details\": \"single "
      "sentence\", \"coping_mechanism\": \"single sentence\"}\n\n"
      "DO NOT include any text before or after the JSON. The response must be "
      "parseable by json.loads().";
  return p;
}

inline std::string stories_prompt(int num_stories, const std::string& age,
                                  const std::string& gender,
                                  const std::string& occupation,
                                  const std::string& city, const std::string& country,
                                  const std::string& values_orientation,
                                  const std::string& attitude,
                                  const std::string& attitude_category) {
  std::string n = std::to_string(num_stories);
  std::string p = "Generate " + n +
                  " concise personal stories for a person with the following "
                  "characteristics:\n\n";
  p += "Age: " + age + "\n";
  p += "Gender: " + gender + "\n";
  p += "Occupation: " + occupation + "\n";
  p += "Location: " + city + ", " + country + "\n";
  p += "Core Values: " + values_orientation + "\n";
  p += "Life Attitude: " + attitude + " (" + attitude_category + ")\n\n";
  p +=
      "IMPORTANT: The story can be positive, negative, or a mix of both. "
      "Please do not avoid including life experiences that may be "
      "controversial or have negative consequences. The narration should be as "
      "specific as possible, objective, and free from any subjective comments "
      "or value judgments. The stories that unfold should be closely related "
      "to their country and region, reflecting events that could genuinely "
      "happen to the people there. This could be a random event unrelated to "
      "the background, or a significant turning point in their life. Please "
      "avoid including anything related to community building.\n\n";
  p += "Please provide " + n + " brief personal stories (each 150-200 words).\n\n";
  p +=
      "CRITICAL: You must format your response EXACTLY as a valid JSON object "
      "with this structure:\n"
      "{\"personal_stories\": [\"story 1\", \"story 2\", ...]}\n\n"
      "DO NOT include any text before or after the JSON. The response must be "
      "parseable by json.loads().";
  return p;
}

inline std::string interests_prompt(const std::string& story_text) {
  std::string p =
      "Based on the following personal story and key life events, infer two "
      "to three hobbies or interests this person might use to relax. These "
      "activities can be positive or negative and may include "
      "non-traditional, controversial, or unexpected ones, such as various "
      "sports, traveling, or even smoking, drinking, or using marijuana. "
      "Please make inferences about the person's possible interests based on "
      "the story, rather than simply extracting them directly from the "
      "story.\n\n"
      "Interests/Hobbies Inference\n";
  p += "Personal Story: " + story_text + "\n\n";
  p +=
      "IMPORTANT: Avoid including anything related to community-building "
      "activities.\n\n"
      "Please extract 2 hobbies or interests with 3-4 words each based on "
      "these reflections and format your response as a JSON object:\n\n"
      "{\n"
      "    \"interests\": [\"interest1\", \"interest2\"]\n"
      "}\n\n"
      "DO NOT include any text before or after the JSON. The response must be "
      "parseable by json.loads().";
  return p;
}

// ---------------------------------------------------------------------------
// Structured attribute fill and narrative summary
// ---------------------------------------------------------------------------

inline std::string fill_prompt(const std::string& joined_path,
                               const std::string& profile_json) {
  std::string p =
      "# ATTRIBUTE VALUE GENERATION\n"
      "You are extending a synthetic user profile one attribute at a time. "
      "Given the full profile generated so far and the next attribute path, "
      "produce a concrete, specific value for that attribute. The value must "
      "be consistent with everything already in the profile and must add new "
      "information rather than repeating it.\n\n";
  p += "Profile so far:\n" + profile_json + "\n\n";
  p += "Attribute path: " + joined_path + "\n\n";
  p +=
      "CRITICAL: You must format your response EXACTLY as a valid JSON object "
      "with this structure:\n"
      "{\n"
      "    \"value\": \"<concrete value, one short phrase or sentence>\"\n"
      "}\n\n"
      "DO NOT include any text before or after the JSON. The response must be "
      "parseable by json.loads().";
  return p;
}

inline std::string narrate_prompt(const std::string& profile_json) {
  std::string p =
      "# PROFILE NARRATIVE\n"
      "Summarize the following user profile as a flowing first-person-free "
      "narrative of a single individual. Cover every core section (age, "
      "gender, location, occupation, values, life attitude, personal story, "
      "interests) and weave in the structured attributes; do not invent facts "
      "that are not in the profile.\n\n";
  p += "Profile:\n" + profile_json + "\n\n";
  p +=
      "CRITICAL: You must format your response EXACTLY as a valid JSON object "
      "with this structure:\n"
      "{\n"
      "    \"narrative\": \"<the narrative text>\"\n"
      "}\n\n"
      "DO NOT include any text before or after the JSON. The response must be "
      "parseable by json.loads().";
  return p;
}

inline std::string enrich_extraction_prompt(const std::string& sketch) {
  std::string p =
      "# SKETCH FACT EXTRACTION\n"
      "Extract the demographic facts explicitly stated in this persona "
      "sketch. Use an empty string for anything the sketch does not state; do "
      "not guess.\n\n";
  p += "Sketch: " + sketch + "\n\n";
  p +=
      "CRITICAL: You must format your response EXACTLY as a valid JSON object "
      "with this structure:\n"
      "{\n"
      "    \"age\": \"<number or empty>\",\n"
      "    \"gender\": \"<or empty>\",\n"
      "    \"country\": \"<or empty>\",\n"
      "    \"city\": \"<or empty>\",\n"
      "    \"occupation\": \"<or empty>\"\n"
      "}\n\n"
      "DO NOT include any text before or after the JSON. The response must be "
      "parseable by json.loads().";
  return p;
}

// ---------------------------------------------------------------------------
// Personalization responder and judge
// ---------------------------------------------------------------------------

inline constexpr std::string_view kResponderSystem =
    "Given the following user profile and request, generate a personalized "
    "response tailored to the user's background and attributes.";

inline std::string responder_user(const std::string& user_persona,
                                  const std::string& request) {
  return "User profile: " + user_persona + "; user request: " + request;
}

inline std::string judge_prompt_standard(const std::string& profile_text,
                                         const std::string& question,
                                         const std::string& answer) {
  std::string p =
      "You are the “RESPONSE-Quality Evaluator,” a neutral expert "
      "asked to grade how well an LLM response satisfies a user’s "
      "personalization needs.\n\n"
      "--- INPUT ---\n\n"
      "[1] USER PROFILE\n";
  p += "Profile text: " + profile_text + "\n\n";
  p += "[2] Original REQUEST of the user:\n" + question + "\n\n";
  p += "[3] CANDIDATE RESPONSE produced by the system:\n" + answer + "\n\n";
  p +=
      "--- EVALUATION RUBRIC ---\n\n"
      "Score each aspect from 1 (very poor) to 5 (excellent) using the "
      "definitions below.\n\n"
      "A. Personalization-Fit: Is the advice clearly tailored rather than "
      "generic? Wording, tone and content of a better advice should feel "
      "\"made-for-me.\"\n"
      "B. Attribute Coverage: Measure of the number of distinct, relevant "
      "profile attributes the response uses correctly. An average response "
      "should incorporate about 3 attributes.\n"
      "C. Depth & Specificity: Granularity of insight, nuance, and concrete "
      "details. Responses lacking depth or overgeneralizing should be "
      "penalized.\n"
      "D. Justification / Grounding: The response explains why each "
      "suggestion fits (e.g. \"…because you travel with two kids under "
      "10…\").\n"
      "E. Actionability & Outcome Focus: Are there clear steps, decision "
      "criteria, or metrics of success, so that user could follow the advice "
      "and act immediately?\n"
      "F. Effort / Cognitive-Load Reduction: The response pre-filters, ranks, "
      "or summarizes options so the user does less work.\n"
      "G. Novelty-with-Relevance: Assess the creativity and novelty of the "
      "response, including introducing new, unexpected ideas that still "
      "aligns with the profile.\n"
      "H. Diversity of Suggestions: Assess whether the advice presents "
      "multiple viable paths, strategies, or option types rather than "
      "offering only a single point solution.\n"
      "I. Goal-Progress Alignment: Advice is explicitly tied to the "
      "user’s stated longer-term goals and shows how each step advances "
      "them.\n"
      "J. Engagement / Motivation Potential: Tone, framing, and content "
      "likely energize this user to follow through or explore further.\n"
      "Be a critical evaluator.\n\n"
      "Be a critical evaluator. A score of 5 is rare and reflects exceptional "
      "quality. Most responses will receive 2s or 3s. Use 1s when criteria "
      "are clearly unmet. Consider what a top-tier expert-level personalized "
      "response would look like.\n\n"
      "--- OUTPUT FORMAT (JSON) ---\n\n"
      "{\n"
      "  \"rationale\": {\n"
      "    \"personalization_fit\": \"<2-3 sentence explanation>\",\n"
      "    \"attribute_coverage\": \"<explanation>\",\n"
      "    \"depth_specificity\": \"<explanation>\",\n"
      "    \"justification\": \"<explanation>\",\n"
      "    \"actionability\": \"<explanation>\",\n"
      "    \"effort_reduction\": \"<explanation>\",\n"
      "    \"novelty_with_relevance\": \"<explanation>\",\n"
      "    \"diversity_of_suggestions\": \"<explanation>\",\n"
      "    \"goal_progress_alignment\": \"<explanation>\",\n"
      "    \"engagement_motivation_potential\": \"<explanation>\"\n"
      "  }\n"
      "  \"scores\": {\n"
      "    \"personalization_fit\": <1-5>,\n"
      "    \"attribute_coverage\": <1-5>,\n"
      "    \"depth_specificity\": <1-5>,\n"
      "    \"justification\": <1-5>,\n"
      "    \"actionability\": <1-5>,\n"
      "    \"effort_reduction\": <1-5>,\n"
      "    \"novelty_with_relevance\": <1-5>,\n"
      "    \"diversity_of_suggestions\": <1-5>,\n"
      "    \"goal_progress_alignment\": <1-5>,\n"
      "    \"engagement_motivation_potential\": <1-5>\n"
      "  },\n"
      "}";
  return p;
}

inline std::string judge_prompt_creative(const std::string& profile_text,
                                         const std::string& question,
                                         const std::string& answer) {
  std::string p =
      "You are the “RESPONSE-Quality Evaluator,” a neutral expert "
      "asked to grade how well an LLM response satisfies a user’s "
      "personalization needs.\n\n"
      "--- INPUT ---\n\n"
      "[1] USER PROFILE\n";
  p += "Profile text: " + profile_text + "\n\n";
  p += "[2] Original REQUEST of the user:\n" + question + "\n\n";
  p += "[3] CANDIDATE RESPONSE produced by the system:\n" + answer + "\n\n";
  p +=
      "--- EVALUATION RUBRIC ---\n\n"
      "Score each aspect from 1 (very poor) to 5 (excellent) using the "
      "definitions below.\n"
      "A. Personalization-Fit: Is the response clearly tailored rather than "
      "generic? Wording, tone and content of a better response should feel "
      "\"made-for-me.\"\n"
      "B. Attribute Coverage: Measure of the number of distinct, relevant "
      "profile attributes the response uses correctly. An average response "
      "should incorporate about 3 attributes.\n"
      "C. Depth & Specificity: Granularity of insight, nuance, and concrete "
      "details. Responses lacking depth or overgeneralizing should be "
      "penalized.\n"
      "D. Novelty-with-Relevance: Assess the creativity and novelty of the "
      "response, including introducing new, unexpected ideas that still "
      "aligns with the profile.\n"
      "E. Engagement / Motivation Potential: Tone, framing, and content "
      "likely energize this user to follow through or explore further.\n"
      "Be a critical evaluator.\n"
      "Assume that a score of 5 is rare and should be reserved only for "
      "exceptional responses that exceed expectations.\n"
      "Most average responses should receive 2s or 3s. Do not hesitate to "
      "assign 1s if criteria are clearly unmet.\n"
      "Consider what a truly excellent, personalized, expert-level response "
      "would look like for each criterion, and grade accordingly.\n\n"
      "--- OUTPUT FORMAT (JSON) ---\n\n"
      "{\n"
      "  \"rationale\": {\n"
      "    \"personalization_fit\": \"<2-3 sentence explanation>\",\n"
      "    \"attribute_coverage\": \"<explanation>\",\n"
      "    \"depth_specificity\": \"<explanation>\",\n"
      "    \"novelty_with_relevance\": \"<explanation>\",\n"
      "    \"engagement_motivation_potential\": \"<explanation>\"\n"
      "  }\n"
      "  \"scores\": {\n"
      "    \"personalization_fit\": <1-5>,\n"
      "    \"attribute_coverage\": <1-5>,\n"
      "    \"depth_specificity\": <1-5>,\n"
      "    \"novelty_with_relevance\": <1-5>,\n"
      "    \"engagement_motivation_potential\": <1-5>\n"
      "  },\n"
      "}";
  return p;
}

}  // namespace pgen::prompts
