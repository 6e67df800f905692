// Local draft persistence: unsubmitted work survives a page reload.
// Storage is injectable so tests run without a browser.

import type { TieGroups } from "./ranking.js";

export interface DraftState {
  caseId: string;
  kind: "benchmark_audit" | "model_comparison";
  // benchmark_audit
  quality: Record<string, number>;
  category: string | null;
  tone: string | null;
  context: string | null;
  // model_comparison
  scoresByLabel: Record<string, Record<string, number>>;
  tieGroups: TieGroups;
}

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export function emptyDraft(
  caseId: string,
  kind: DraftState["kind"],
): DraftState {
  return {
    caseId,
    kind,
    quality: {},
    category: null,
    tone: null,
    context: null,
    scoresByLabel: {},
    tieGroups: [],
  };
}

function draftKey(sessionId: string, caseId: string): string {
  return `crceval-draft:${sessionId}:${caseId}`;
}

export function saveDraft(store: KeyValueStore, sessionId: string, draft: DraftState): void {
  store.setItem(draftKey(sessionId, draft.caseId), JSON.stringify(draft));
}

export function loadDraft(
  store: KeyValueStore,
  sessionId: string,
  caseId: string,
): DraftState | null {
  const raw = store.getItem(draftKey(sessionId, caseId));
  if (raw === null) return null;
  try {
    const parsed = JSON.parse(raw) as DraftState;
    return parsed.caseId === caseId ? parsed : null;
  } catch {
    return null; // corrupted draft: start fresh rather than crash
  }
}

export function clearDraft(store: KeyValueStore, sessionId: string, caseId: string): void {
  store.removeItem(draftKey(sessionId, caseId));
}
