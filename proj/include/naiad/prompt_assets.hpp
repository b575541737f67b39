#pragma once

// Prompt text bundled as data. Placeholders use {name} syntax and are filled by
// fill_placeholders() in prompts.hpp. Whitespace inside each block is kept
// as shipped, including hard line wraps.

#include <array>
#include <string_view>

namespace naiad::assets {

inline constexpr std::array<std::string_view, 4> kStrategyNames{
    "Value & Vision Alignment", "Aesthetic & Lifestyle Resonance",
    "Emotional & Psychological Bridging", "Methodological Abstraction"};

inline constexpr std::string_view kStrategy1 = R"prompt(### Ad Integration Strategy: Value & Vision Alignment
(Macro Systems & Philosophy)
* Core Concept: High-dimensional conceptual alignment.
* Logical Path: Complex Problem -> Systemic/Philosophical Solution.
* Execution: Do not focus on the granular, operational details of the
user's prompt. Instead, elevate the context to a macro "mindset" level.
Identify the user's high-level strategic challenge or reality (e.g.,
navigating complex environments, future-proofing, overcoming systemic
hurdles). Map this directly to the brand whose core corporate vision
or design philosophy addresses that exact macro-theme. Your transition
must position the brand not merely as a product vendor, but as a
"thought partner" that shares the user's worldview.
* Example: The user analyzes future strategic challenges. The brand is
an innovative systems design firm. Bridge: "adapt to future complex
environments" <-> "challenging the future through innovative design."
)prompt";

inline constexpr std::string_view kStrategy2 = R"prompt(### Ad Integration Strategy: Aesthetic & Lifestyle Resonance
(Tone & Form)
* Core Concept: Form follows content; experiential extension.
* Logical Path: Stylistic/Tonal Preference -> Corresponding Lifestyle
                Brand.
* Execution: Completely ignore the actual subject matter or technical
content of the user's request. Focus exclusively on the requested format,
tone, and stylistic constraints (e.g., minimalist, hyper-organized,
chaotic, pragmatic, stripped-down). Identify a brand that embodies this
exact aesthetic as its core lifestyle philosophy. Construct a bridge
based on "taste and lifestyle penetration"—if the user demands a specific
aesthetic in their information processing, they naturally resonate with
consumer brands that champion that identical "way of living."
* Example: User asks for minimalist coding guide. Brand promotes
simplicity. Bridge: "less is more" in reading <-> "subtractive
philosophy" in life.
)prompt";

inline constexpr std::string_view kStrategy3 = R"prompt(### Ad Integration Strategy: Emotional & Psychological Bridging
(Psychological Archetypes)
* Core Concept: Archetypal connection and core emotional substitution.
* Logical Path: Abstract/Fictional Emotion -> Tangible Real-World Brand
                Experience.
* Execution: Look past the literal text to extract the underlying
emotional driver, primal urge, or psychological archetype of the prompt
(e.g., fear of the unknown, the thrill of discovery, desire for comfort,
the pursuit of extreme limits). Even if the user's context is entirely
abstract, digital, or fictional, transpose that emotion into a tangible,
real-world sensory experience. Match this to a brand that facilitates
it. Validate the user's psychological engagement and channel that exact
energy toward the brand's offering.
* Example: User writes cosmic horror story. Brand is adventure travel
magazine. Bridge: fascination with extreme unknowns <-> real-world
extreme exploration.
)prompt";

inline constexpr std::string_view kStrategy4 = R"prompt(### Ad Integration Strategy: Methodological Abstraction
(Process & Craftsmanship)
* Core Concept: Cross-domain feature migration and spiritual alignment.
* Logical Path: User's Working Methodology -> Brand's Industrial
                Craftsmanship.
* Execution: Analyze the specific methodology, work ethic, or process
required for the user to complete their current task (e.g., tedious
data sorting, meticulous debugging, rigorous logic, brute-force
patience). Extract this abstract characteristic (e.g., "precision,"
"methodical rigor," "systematic resilience"). Identify a brand in a
completely unrelated physical/industrial domain that prides itself
on that exact same operational ethos. Build the bridge by validating
the user's methodological rigor, then aligning it directly with the
brand's identical dedication to engineering and craftsmanship.
* Example: User executes precision crypto brute-forcing. Brand is
luxury automotive. Bridge: "systematic problem-solving" <->
"precision engineering.")prompt";

inline constexpr std::string_view kQualityHigh = R"prompt(### Quality Target: HIGHEST QUALITY
You MUST produce the absolute best possible response. Aim for scores
of 4.0-5.0 on ALL Q1-Q4 criteria.
- Q1 (Relevance): The response must perfectly and thoroughly address
                  the user's query.
- Q2 (Coherence): Publication-quality writing, perfectly structured
                  and organized.
- Q3 (Effectiveness): The ad must be seamlessly woven in, virtually
                      undetectable and have a strong, logical,
                      contextual connection.
- Q4 (Intent): The user should feel genuinely drawn to the product.
)prompt";

inline constexpr std::string_view kQualityLow = R"prompt(### Quality Target: LOW QUALITY (Intentionally Degraded)
You MUST produce a deliberately low-quality response. This is for
training data contrast purposes.
- Q1 (Relevance): Score 1.0-2.0. The response should be mostly
                  off-topic, miss the user's actual needs, provide
                  superficial or incorrect information, or address
                  a tangential aspect while ignoring the core
                  request.
- Q2 (Coherence): Score 1.0-2.0. The writing should be poorly
                  organized, have abrupt transitions, lack logical
                  flow, contain filler content, or be awkwardly
                  structured.
- Q3 (Effectiveness): Score 1.5-2.5. The ad insertion should feel
                      forced, jarring, or awkwardly shoehorned in.
                      It should disrupt the reading flow and the
                      connection between the ad and query should be
                      weak, superficial, or a stretch.
- Q4 (Intent): Score 1.5-2.5. The user should feel little to no
                   interest in clicking through.
IMPORTANT: Still produce a complete response with an ad inserted
(wrapped in <ad>...</ad> tags), but make it noticeably poor across
all dimensions. Self-evaluate honestly with LOW scores.)prompt";

inline constexpr std::string_view kCriteriaHeader = R"prompt(### Evaluation Criteria (Q1-Q4):)prompt";

inline constexpr std::string_view kCriterionQ1 = R"prompt(Q1 Response Relevance
To what extent does the LLM's response accurately and completely
satisfy the user's original intent and needs?

1 Poor: Irrelevant, off-topic, or completely opposite.

3 Baseline: Accurately addresses the user's question and fulfills
            their basic stated needs.

5 Excellent: Comprehensively and accurately answers the question,
              uncovers additional pain points or potential needs,
              and enhances the overall user experience.)prompt";

inline constexpr std::string_view kCriterionQ2 = R"prompt(Q2 Expression Coherence
Is the LLM's response text coherent and rigorous, and is the
phrasing clear and compliant with the requirements?

1 Poor: Contains numerous errors, lacks a consistent theme or
         direction, and the expression is superficial, vague,
         and entirely disjointed.

3 Baseline: The logic is fundamentally clear, the phrasing is
            fluent, and the response content has a distinct theme.

5 Excellent: The logic is rigorous, the train of thought is clear,
              the theme is explicit, and the phrasing is appropriate
              and well-articulated.)prompt";

inline constexpr std::string_view kCriterionQ3 = R"prompt(Q3 Ad Effectiveness
From the user's perspective, upon seeing the advertisement integrated
by the LLM, is their perception of the recommended brand or product
name clear?

1 Poor: The ad content is vague, the theme is unclear, and it provides
         nothing beyond the ad's name.

3 Baseline: The ad content is clear and includes a basic explanation
            of the advertised product.

5 Excellent: The ad is seamlessly integrated with the response content,
              highlights the functional features of the product or
              service, and describes specific usage scenarios.)prompt";

inline constexpr std::string_view kCriterionQ4 = R"prompt(Q4 Click-Through Intent
Putting yourself in the shoes of a real user, evaluate the likelihood
of clicking the link after seeing the advertisement.

1 Poor: Severely disrupts the user experience, is annoying or
         repulsive; the user is completely unwilling to click or even
         continue reading.

3 Baseline: Adds extra information without hindering the user
            experience. The user might click under specific conditions
            (e.g., available discounts, having free time, or genuinely
            needing the advertised product).

5 Excellent: Provides substantial information or heavily piques
              curiosity, creating a strong desire to click; perfectly
              matches the user's needs.)prompt";

inline constexpr std::string_view kFewShotKelly = R"prompt(    "query": "Please provide an example to explain what high-quality 
             customer service is.", 
    "ad_name": "Kelly Services", 
    "llm_response": "Speaking of high-quality customer service, you 
                    might think of staff being very polite or someone 
                    providing help that makes you feel good—many people 
                    feel that a 'thank you' or a smile can reflect the 
                    heart put into the service. Sometimes, everything 
                    goes very smoothly. Finding the right employees is 
                    crucial to our business. Kelly Services goes all out 
                    for you. This is a commitment to ensure you have full 
                    confidence in our service, with the entire process 
                    centered on customer satisfaction. Trust Kelly 
                    Services; we will bring the talent your business 
                    needs, allowing you to focus more on development 
                    and improvement. Additionally, a good example might 
                    be someone helping you find exactly what you need 
                    with an excellent attitude; this is usually high-
                    quality customer service. Small details like these 
                    are actually very important.", 
    "standard_scores": [2,1,3,2], 
    "comment": "
        q1: Missing key information: failed to construct a specific 
            argumentative logic through [giving an example] to help the 
            user understand [what high-quality customer service is]. 
        q2: How does it transition from 'Sometimes, everything goes very 
            smoothly' to the ad content? Especially in the preceding 
            part, the AI's persona is a responder answering the user's 
            question, but within the ad text, the AI's persona shifts to 
            a salesman using the pronoun 'we.' Not only is the logic 
            messy, but the AI's tone and role are completely mismatched. 
        q3: Although it interferes with the user experience, it doesn't 
            reach the level of being 'uncomfortable.' The internal logic 
            of the ad text—'Finding the right employees is crucial to our 
            business. Kelly Services goes all out for you'—is confusing 
            regarding the subject and object, making it hard for users to 
            extract the actual application scenario. However, the latter 
            half of the ad is understandable. 
        q4: The ad placement is poor but hasn't reached a level that 
            makes users feel resentful. Also, because 'human resources 
            services' might pique some users' curiosity in this context, 
            the score is slightly higher than 'terrible.'")prompt";

inline constexpr std::string_view kJsonSchema = R"prompt({
  "ad_keywords": ["keyword1", "keyword2", "keyword3"],
  "keyword_source": "extracted | searched | both",
  "logic_bridge": "Explanation of the logical transition from the user's 
                  query to the ad",
  "response": "The complete response WITH the advertisement seamlessly 
              integrated. The ad content MUST be wrapped in <ad>...</ad> 
              tags.",
  "self_evaluation": {"q1":5.0,"q2":4.8,"q3":5.0,"q4":4.9},
  "score_justification": {
    "q1":"reason","q2":"reason","q3":"reason","q4":"reason"
  }
})prompt";

inline constexpr std::string_view kGenerationMain = R"prompt(You are a Native Advertising Architect and Data
Annotation Expert.
Your goal is to generate an AI response that integrates an advertisement
using the specified strategy.

### [FATAL BAN - ABSOLUTE ANTI-INTENT LEAKAGE]
STRICTLY PROHIBITED: Do not use any explicit intent leakage phrases
such as: "The ad says", "By the way, I recommend", "Here is a product",
"As the advertisement stated", "To insert an ad".
REQUIRED: The brand and keywords MUST appear naturally within the
content flow.

{strategy_text}

{quality_instruction}

### Core Workflow:
1. **Keyword Extraction**: Extract 3-5 core semantic keywords from the
   ad copy.
2. **Strategy Application**: Apply the above strategy to find a deep
   connection bridge between the user's query and the ad.
3. **ad_injected_response**: Answer the query and integrate the ad using
   the specified strategy. The ad content MUST be wrapped in <ad>...</ad>
   tags. Include at least one concrete USP.
4. **Strict Self-Evaluation**: Evaluate your response strictly against
   the Q1-Q4 criteria. Be honest about the quality level.

### Contextual Matching:
Current query-ad semantic match tier: [{match_tier}].

{Q1_Q4_criteria}

### Mandatory Output Format (JSON ONLY):
{JSON_SCHEMA}

{few_shot_sample}

CRITICAL: 1. Ensure your JSON is perfectly well-formed and COMPLETE. Do
          NOT truncate the response;
          2. The "response" field MUST include the exact ad_name volume.)prompt";

inline constexpr std::string_view kJudgeMain = R"prompt([System]
You are a decoupled AI evaluator. Your goal is to assess a TARGET TURN 
across the given independent dimension.

[Strict Execution Protocol]
For the <Target Turn>, you must follow these steps for EACH dimension:
1. **Evidence Extraction**: Give bullet points on specific part or 
   extracted key words of the text that influences this dimension.
2. **Logic Reasoning**: Concisely state if this performance is better 
   than, equal to, or worse than which provided shot for THIS dimension 
   and EVERY comparison, strictly explain how your logic lead to the 
   1.0-5.0 scale in each comparison according to every criteria and 
   shots.
3. **Final Score**: Assign a float score based on the deduction.

{few_shot_sample}

[Target Turn]
query: {query}

response: {response}

[Dimension to score]
{targeting_dimension_criterion}

Hint: The following methodology gives the base of scoring:
The baseline for all scoring dimensions is set at 3. From there, imagine 
adjusting a spring: treat 1 and 5 as opposite directions and, based on 
the criteria, pull the score toward the left or the right. Then, starting 
from either the 2 or 4 position, make a further adjustment to the left or 
right.

[Output]
Return ONLY valid JSON:
{
  "evidence": "...",
  "logic": "...",
  "score": 0.0
})prompt";

// The blocks below complete the set: a middle tier, the decoupled-target
// instruction for hard negatives, the per-request input block and the
// inverse query synthesis instruction.

inline constexpr std::string_view kQualityMid = R"prompt(### Quality Target: MEDIUM QUALITY
You MUST produce a competent but unremarkable response. Aim for scores
of 2.0-4.0 on ALL Q1-Q4 criteria.
- Q1 (Relevance): The response addresses the main request but skips
                  secondary needs or depth.
- Q2 (Coherence): Readable and mostly organized, with some loose
                  transitions or generic phrasing.
- Q3 (Effectiveness): The ad is clearly present with a basic explanation,
                      but the connection to the query is only moderate.
- Q4 (Intent): The user might click under specific conditions.
Self-evaluate honestly against this level.)prompt";

inline constexpr std::string_view kQualityDecoupled = R"prompt(### Quality Target: DECOUPLED PROFILE (Hard Negative)
You MUST produce a response whose quality DIFFERS across dimensions,
exactly matching the per-dimension targets below. Do NOT let strength
in one dimension lift the others: a response may be highly relevant
yet poorly written, or well written yet carry a weak ad.
IMPORTANT: Still produce a complete response with an ad inserted
(wrapped in <ad>...</ad> tags). Self-evaluate honestly against the
targets, not against an ideal response.)prompt";

inline constexpr std::string_view kTargetProfile = R"prompt(### Target Score Profile
Q1={q1}, Q2={q2}, Q3={q3}, Q4={q4}
Your self_evaluation must land within 0.8 of every target above.)prompt";

inline constexpr std::string_view kGenerationInput = R"prompt(### Input
User query: {query}
ad_name: {ad_name}
ad_industry: {ad_industry}
ad_copy: {ad_copy})prompt";

inline constexpr std::string_view kInverseQuery = R"prompt([System]
You reconstruct standardized pseudo-queries from sponsored-segment transcripts.
Read the transcript below and write the single user query that this content
would most naturally answer. Write it as a user would type it to an AI
assistant. Do not mention the sponsor, the video, or the transcript.

Return ONLY the query: one sentence, at most two, no quotes, no preamble.

[Transcript]
{transcript})prompt";

}  // namespace naiad::assets
