// DOM wiring: one mountApp() builds the whole interface inside a root
// element and returns handles the tests drive directly. All state
// changes flow through the reducer in state.ts; render() projects the
// current state onto the DOM.

import { ApiError, PowlgenClient } from "./api";
import { renderSvg } from "./diagram";
import { layout } from "./layout";
import {
  canSubmitDescription,
  canSubmitFeedback,
  exportsEnabled,
  initialState,
  isBusy,
  reduce,
  type Settings,
  type UiEvent,
  type UiSessionState,
} from "./state";
import { EXPORT_FORMATS, type ExportFormat, type View } from "./types";

export interface App {
  root: HTMLElement;
  state(): UiSessionState;
  settings: Settings;
  generate(): Promise<void>;
  refine(): Promise<void>;
  setView(view: View): Promise<void>;
  retry(): Promise<void>;
  downloadExport(format: ExportFormat): Promise<Uint8Array>;
}

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K, className = "", text = ""): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function labeled(labelText: string, input: HTMLElement): HTMLElement {
  const wrap = el("label", "field");
  wrap.append(el("span", "field-name", labelText), input);
  return wrap;
}

export function mountApp(root: HTMLElement,
                         defaults: Partial<Settings> = {}): App {
  // held in memory only; nothing here ever touches browser storage
  const settings: Settings = {
    baseUrl: defaults.baseUrl ?? "",
    modelName: defaults.modelName ?? "",
    apiKey: defaults.apiKey ?? "",
  };

  let state = initialState();
  let lastAction: (() => Promise<void>) | null = null;

  const client = () => new PowlgenClient(settings.baseUrl);

  // --- settings panel -----------------------------------------------
  const baseUrlInput = el("input");
  baseUrlInput.value = settings.baseUrl;
  const modelInput = el("input");
  modelInput.value = settings.modelName;
  const keyInput = el("input");
  keyInput.type = "password";
  baseUrlInput.addEventListener("input", () => {
    settings.baseUrl = baseUrlInput.value;
  });
  modelInput.addEventListener("input", () => {
    settings.modelName = modelInput.value;
  });
  keyInput.addEventListener("input", () => {
    settings.apiKey = keyInput.value;
  });
  const settingsPanel = el("details", "settings");
  settingsPanel.append(el("summary", "", "Provider settings"));
  settingsPanel.append(
    labeled("Service URL", baseUrlInput),
    labeled("Model name", modelInput),
    labeled("API key", keyInput),
    el("p", "hint",
       "Values stay in this page's memory and are never stored. The " +
       "service reads its provider credentials from its own configuration."),
  );

  // --- describe form ------------------------------------------------
  const descriptionInput = el("textarea", "description");
  descriptionInput.placeholder =
    "Describe the process, e.g. 'After the order is placed, ...'";
  const generateButton = el("button", "primary", "Generate model");
  generateButton.type = "button";

  // --- status + error banner ----------------------------------------
  const phaseBadge = el("span", "phase-badge", "idle");
  const statsLine = el("span", "stats-line");
  const errorText = el("span", "error-text");
  const retryButton = el("button", "", "Retry");
  retryButton.type = "button";
  const errorBanner = el("div", "error-banner");
  errorBanner.append(errorText, retryButton);
  errorBanner.hidden = true;

  // --- diagram pane --------------------------------------------------
  const bpmnToggle = el("button", "view-toggle", "BPMN");
  bpmnToggle.type = "button";
  const pnToggle = el("button", "view-toggle", "Petri net");
  pnToggle.type = "button";
  const diagramHost = el("div", "diagram-host");
  const diagramPane = el("section", "diagram-pane");
  const toggleRow = el("div", "toggle-row");
  toggleRow.append(bpmnToggle, pnToggle);
  diagramPane.append(toggleRow, diagramHost);

  // --- feedback form --------------------------------------------------
  const feedbackInput = el("input", "feedback");
  feedbackInput.placeholder = "Feedback, e.g. 'Allow skipping the reward.'";
  const feedbackButton = el("button", "primary", "Refine");
  feedbackButton.type = "button";

  // --- history + exports ----------------------------------------------
  const historyList = el("ul", "history");
  const exportButtons = new Map<ExportFormat, HTMLAnchorElement>();
  const exportBar = el("div", "export-bar");
  for (const format of EXPORT_FORMATS) {
    const anchor = document.createElement("a");
    anchor.className = "export-button";
    anchor.textContent = format;
    anchor.setAttribute("download", "");
    exportButtons.set(format, anchor);
    exportBar.append(anchor);
  }

  root.replaceChildren();
  const title = el("h1", "", "powlgen");
  const statusRow = el("div", "status-row");
  statusRow.append(phaseBadge, statsLine);
  const describeRow = el("div", "describe-row");
  describeRow.append(descriptionInput, generateButton);
  const feedbackRow = el("div", "feedback-row");
  feedbackRow.append(feedbackInput, feedbackButton);
  root.append(title, settingsPanel, describeRow, statusRow, errorBanner,
              diagramPane, feedbackRow, exportBar, historyList);

  function dispatch(event: UiEvent): void {
    state = reduce(state, event);
    render();
  }

  function render(): void {
    phaseBadge.textContent = state.phase;
    phaseBadge.dataset.phase = state.phase;
    statsLine.textContent = state.stats
      ? `${state.stats.activity_count} activities, ` +
        `${state.stats.operator_count} operators, depth ${state.stats.depth}`
      : "";
    errorBanner.hidden = state.lastError === null;
    errorText.textContent = state.lastError ?? "";
    generateButton.disabled = !canSubmitDescription(state) || isBusy(state);
    feedbackButton.disabled = !canSubmitFeedback(state);
    feedbackInput.disabled = !canSubmitFeedback(state);
    bpmnToggle.classList.toggle("active", state.view === "bpmn");
    pnToggle.classList.toggle("active", state.view === "pn");

    const enabled = exportsEnabled(state);
    for (const [format, anchor] of exportButtons) {
      anchor.classList.toggle("disabled", !enabled);
      if (enabled && state.sessionId) {
        anchor.setAttribute(
          "href", client().exportUrl(state.sessionId, format));
      } else {
        anchor.removeAttribute("href");
      }
    }

    diagramHost.innerHTML = state.graph
      ? renderSvg(layout(state.graph))
      : "";

    historyList.replaceChildren(...state.history.map((event) => {
      const item = el("li", `event event-${event.kind}`);
      const when = event.timestamp.replace("T", " ").slice(0, 19);
      item.textContent =
        `${when} - ${event.kind} (${event.attempts} attempt(s))` +
        (event.detail ? `: ${event.detail}` : "");
      return item;
    }));
  }

  function describeError(err: unknown): string {
    if (err instanceof ApiError) return err.describe();
    return String(err);
  }

  async function loadSessionViews(sessionId: string): Promise<void> {
    const graph = await client().fetchRenderGraph(sessionId, state.view);
    dispatch({ type: "graph-loaded", graph });
    const history = await client().fetchHistory(sessionId);
    dispatch({ type: "history-loaded", events: history.events });
  }

  async function generate(): Promise<void> {
    const description = descriptionInput.value.trim();
    if (!description || isBusy(state)) return;
    lastAction = generate;
    dispatch({ type: "generate-started" });
    try {
      const summary = await client().createSession(description);
      dispatch({ type: "generate-succeeded",
                 sessionId: summary.session_id, stats: summary.stats });
      await loadSessionViews(summary.session_id);
    } catch (err) {
      dispatch({ type: "generate-failed", message: describeError(err) });
    }
  }

  async function refine(): Promise<void> {
    const feedback = feedbackInput.value.trim();
    const sessionId = state.sessionId;
    if (!feedback || !sessionId || !canSubmitFeedback(state)) return;
    lastAction = refine;
    dispatch({ type: "refine-started" });
    try {
      const summary = await client().sendFeedback(sessionId, feedback);
      dispatch({ type: "refine-succeeded", stats: summary.stats });
      feedbackInput.value = "";
      await loadSessionViews(sessionId);
    } catch (err) {
      dispatch({ type: "refine-failed", message: describeError(err) });
      // a failed round still lands in the history
      await loadSessionViews(sessionId).catch(() => undefined);
    }
  }

  async function setView(view: View): Promise<void> {
    dispatch({ type: "view-changed", view });
    if (state.sessionId && state.phase === "ready") {
      const graph = await client().fetchRenderGraph(state.sessionId, view);
      dispatch({ type: "graph-loaded", graph });
    }
  }

  async function retry(): Promise<void> {
    dispatch({ type: "error-cleared" });
    if (lastAction) await lastAction();
  }

  async function downloadExport(format: ExportFormat): Promise<Uint8Array> {
    if (!state.sessionId || !exportsEnabled(state)) {
      throw new Error("no exportable model yet");
    }
    return client().fetchExport(state.sessionId, format);
  }

  generateButton.addEventListener("click", () => void generate());
  feedbackButton.addEventListener("click", () => void refine());
  bpmnToggle.addEventListener("click", () => void setView("bpmn"));
  pnToggle.addEventListener("click", () => void setView("pn"));
  retryButton.addEventListener("click", () => void retry());

  render();

  return {
    root,
    state: () => state,
    settings,
    generate,
    refine,
    setView,
    retry,
    downloadExport,
  };
}
