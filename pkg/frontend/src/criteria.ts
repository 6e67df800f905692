// The nine scoring criteria shown as tooltips next to each score input.
// Names and descriptions stay byte-identical to the service side.

export interface Criterion {
  key: string;
  name: string;
  description: string;
}

export const CRITERIA: readonly Criterion[] = [
  { key: "C1", name: "Readability", description: "Clear, easily understandable language." },
  { key: "C2", name: "Relevance", description: "Directly related to the specific code." },
  {
    key: "C3",
    name: "Explanation Clarity",
    description: "Clear elucidation of the issues identified.",
  },
  {
    key: "C4",
    name: "Problem Identification",
    description: "Accurate pinpointing and articulation of bugs.",
  },
  {
    key: "C5",
    name: "Actionability",
    description: "Practical advice for addressing identified issues.",
  },
  {
    key: "C6",
    name: "Completeness",
    description: "Coverage of all issues in the code for comprehensive review.",
  },
  {
    key: "C7",
    name: "Specificity",
    description: "Focus on specific code issues, avoiding generic statements.",
  },
  {
    key: "C8",
    name: "Contextual Adequacy",
    description: "Comments pointing out exact issue locations.",
  },
  {
    key: "C9",
    name: "Brevity",
    description: "Conciseness, conveying essential information without verbosity.",
  },
];

export const CRITERION_KEYS: readonly string[] = CRITERIA.map((c) => c.key);

export const SCORE_MIN = 1;
export const SCORE_MAX = 10;
