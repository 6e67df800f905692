export { CRITERIA, CRITERION_KEYS, SCORE_MAX, SCORE_MIN } from "./criteria.js";
export type { Criterion } from "./criteria.js";
export {
  moveToGroup,
  rankingComplete,
  ranksFromTieGroups,
  splitOut,
} from "./ranking.js";
export type { TieGroups } from "./ranking.js";
export { clearDraft, emptyDraft, loadDraft, saveDraft } from "./draft.js";
export type { DraftState, KeyValueStore } from "./draft.js";
export { canSubmit, toPayload, validateDraft } from "./validation.js";
export type { SubmissionPayload } from "./validation.js";
export { ApiError, SessionClient } from "./api.js";
export type { CaseView, CommentView, FetchLike, SessionHandle } from "./api.js";
export { CaseTimer } from "./timer.js";
