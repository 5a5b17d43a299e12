// UI session state machine. A plain reducer keeps every transition
// testable without a DOM; main.ts re-renders from the returned state.

import type { HistoryEvent, ModelStats, RenderGraph, View } from "./types";

export type Phase = "idle" | "generating" | "ready" | "refining" | "failed";

export interface UiSessionState {
  phase: Phase;
  sessionId: string | null;
  view: View;
  graph: RenderGraph | null;
  stats: ModelStats | null;
  history: HistoryEvent[];
  lastError: string | null;
}

// Provider settings live in this object and nowhere else: never written
// to localStorage, sessionStorage, cookies, or the server.
export interface Settings {
  baseUrl: string;
  modelName: string;
  apiKey: string;
}

export function initialState(): UiSessionState {
  return {
    phase: "idle",
    sessionId: null,
    view: "bpmn", // default presentation; Petri net is the toggle
    graph: null,
    stats: null,
    history: [],
    lastError: null,
  };
}

export type UiEvent =
  | { type: "generate-started" }
  | { type: "generate-succeeded"; sessionId: string; stats: ModelStats }
  | { type: "generate-failed"; message: string }
  | { type: "refine-started" }
  | { type: "refine-succeeded"; stats: ModelStats }
  | { type: "refine-failed"; message: string }
  | { type: "graph-loaded"; graph: RenderGraph }
  | { type: "history-loaded"; events: HistoryEvent[] }
  | { type: "view-changed"; view: View }
  | { type: "error-cleared" };

export function reduce(state: UiSessionState,
                       event: UiEvent): UiSessionState {
  switch (event.type) {
    case "generate-started":
      return { ...initialState(), view: state.view, phase: "generating" };
    case "generate-succeeded":
      return {
        ...state,
        phase: "ready",
        sessionId: event.sessionId,
        stats: event.stats,
        lastError: null,
      };
    case "generate-failed":
      return { ...state, phase: "failed", lastError: event.message };
    case "refine-started":
      if (state.phase !== "ready") return state;
      return { ...state, phase: "refining", lastError: null };
    case "refine-succeeded":
      return { ...state, phase: "ready", stats: event.stats,
               lastError: null };
    case "refine-failed":
      // the service keeps the previous model, so the session stays usable
      return { ...state, phase: "ready", lastError: event.message };
    case "graph-loaded":
      return { ...state, graph: event.graph };
    case "history-loaded":
      return { ...state, history: event.events };
    case "view-changed":
      return { ...state, view: event.view };
    case "error-cleared":
      return { ...state, lastError: null };
  }
}

// Gating predicates the DOM layer binds to control enabled/disabled state.

export function canSubmitDescription(state: UiSessionState): boolean {
  return state.phase === "idle" || state.phase === "failed"
    || state.phase === "ready";
}

export function canSubmitFeedback(state: UiSessionState): boolean {
  return state.phase === "ready" && state.sessionId !== null;
}

export function exportsEnabled(state: UiSessionState): boolean {
  return state.phase === "ready" && state.sessionId !== null;
}

export function isBusy(state: UiSessionState): boolean {
  return state.phase === "generating" || state.phase === "refining";
}
