// DOM wiring: mount the rendered view, delegate events, poll for plan
// updates every 2 seconds.

import { ApiClient } from "./api.js";
import { renderApp, escapeHtml } from "./render.js";
import { POLL_INTERVAL_MS, Store } from "./store.js";

export function mountApp(root: HTMLElement, baseUrl = ""): Store {
  const store = new Store(new ApiClient(baseUrl));

  const draw = () => {
    const input = root.querySelector<HTMLInputElement>("#message-input");
    const draft = input?.value ?? "";
    root.innerHTML = renderApp(store.getState());
    const restored = root.querySelector<HTMLInputElement>("#message-input");
    if (restored && draft) restored.value = draft;
  };

  store.subscribe(draw);
  draw();
  void store.loadSessions();

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.id === "new-session-btn") {
      void store.createSession();
    } else if (target.id === "send-btn") {
      const input = root.querySelector<HTMLInputElement>("#message-input");
      const text = input?.value.trim();
      if (text) {
        if (input) input.value = "";
        void store.sendMessage(text);
      }
    } else if (target.id === "retry-send") {
      void store.retryLastMessage();
    } else if (target.id === "advance-btn") {
      const provider = root.querySelector<HTMLInputElement>("#report-provider")?.value ?? "";
      const intervention = root.querySelector<HTMLInputElement>("#report-intervention")?.value ?? "";
      const result = root.querySelector<HTMLInputElement>("#report-result")?.value ?? "";
      const reports = provider || intervention || result ? [{ provider, intervention, result }] : [];
      void store.advanceVisit(reports);
    } else if (target.id === "questionnaire-btn") {
      void store.loadQuestionnaire();
    } else if (target.classList.contains("chip")) {
      const docId = target.dataset["docId"];
      if (docId) void showGuidelinePopover(store, root, docId, target);
    } else if (target.classList.contains("session-row")) {
      const sessionId = target.dataset["sessionId"];
      if (sessionId) void store.openSession(sessionId);
    } else {
      const popover = root.querySelector<HTMLElement>("#popover");
      if (popover) popover.hidden = true;
    }
  });

  root.addEventListener("keydown", (event) => {
    const keyboard = event as KeyboardEvent;
    const target = event.target as HTMLElement;
    if (keyboard.key === "Enter" && target.id === "message-input") {
      const input = target as HTMLInputElement;
      const text = input.value.trim();
      if (text) {
        input.value = "";
        void store.sendMessage(text);
      }
    }
  });

  window.setInterval(() => {
    void store.pollPlan().catch(() => undefined);
  }, POLL_INTERVAL_MS);

  return store;
}

async function showGuidelinePopover(store: Store, root: HTMLElement, docId: string, anchor: HTMLElement): Promise<void> {
  const popover = root.querySelector<HTMLElement>("#popover");
  if (!popover) return;
  try {
    const info = await store.resolveCitation(docId);
    popover.innerHTML = `<strong>${escapeHtml(info.title)}</strong><br><small>${escapeHtml(
      info.corpus,
    )} / ${escapeHtml(info.doc_id)}</small><p>${escapeHtml(info.abstract)}</p>`;
  } catch {
    popover.innerHTML = `<p>Could not load guideline ${escapeHtml(docId)}.</p>`;
  }
  const rect = anchor.getBoundingClientRect();
  popover.style.left = `${rect.left}px`;
  popover.style.top = `${rect.bottom + 4}px`;
  popover.hidden = false;
}
