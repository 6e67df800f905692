// Client-side pre-validation mirroring the service's submission rules.
// Submit stays disabled until every field passes; the service remains
// the source of truth and its 422 errors are surfaced per field.

import { CRITERION_KEYS, SCORE_MAX, SCORE_MIN } from "./criteria.js";
import type { DraftState } from "./draft.js";
import { rankingComplete, ranksFromTieGroups } from "./ranking.js";

export interface SubmissionPayload {
  quality?: Record<string, number>;
  category?: string;
  tone?: string;
  context?: string;
  scores?: Record<string, Record<string, number>>;
  ranking?: Record<string, number>;
}

function qualityErrors(scores: Record<string, number>, prefix: string): Record<string, string> {
  const errors: Record<string, string> = {};
  for (const key of CRITERION_KEYS) {
    const value = scores[key];
    if (value === undefined) {
      errors[`${prefix}${key}`] = `${key} is not scored yet`;
    } else if (!Number.isFinite(value) || value < SCORE_MIN || value > SCORE_MAX) {
      errors[`${prefix}${key}`] = `${key} must be between ${SCORE_MIN} and ${SCORE_MAX}`;
    }
  }
  return errors;
}

/** Field -> message for everything still blocking submission. */
export function validateDraft(draft: DraftState, labels: readonly string[]): Record<string, string> {
  const errors: Record<string, string> = {};
  if (draft.kind === "benchmark_audit") {
    Object.assign(errors, qualityErrors(draft.quality, ""));
    if (!draft.category) errors["category"] = "pick a category";
    if (!draft.tone) errors["tone"] = "pick a tone";
    if (!draft.context) errors["context"] = "pick a context label";
    return errors;
  }
  for (const label of labels) {
    Object.assign(errors, qualityErrors(draft.scoresByLabel[label] ?? {}, `${label}.`));
  }
  if (!rankingComplete(draft.tieGroups, labels)) {
    errors["ranking"] = "place every comment on the rank board";
  }
  return errors;
}

export function canSubmit(draft: DraftState, labels: readonly string[]): boolean {
  return Object.keys(validateDraft(draft, labels)).length === 0;
}

/** Serialize a valid draft into the service submission payload. */
export function toPayload(draft: DraftState, labels: readonly string[]): SubmissionPayload {
  const errors = validateDraft(draft, labels);
  if (Object.keys(errors).length > 0) {
    throw new Error(`draft is not submittable: ${Object.keys(errors).join(", ")}`);
  }
  if (draft.kind === "benchmark_audit") {
    return {
      quality: { ...draft.quality },
      category: draft.category!,
      tone: draft.tone!,
      context: draft.context!,
    };
  }
  const scores: Record<string, Record<string, number>> = {};
  for (const label of labels) {
    scores[label] = { ...draft.scoresByLabel[label] };
  }
  return { scores, ranking: ranksFromTieGroups(draft.tieGroups) };
}
