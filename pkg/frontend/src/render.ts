// Pure rendering: ViewState in, HTML string out. Keeping this a pure
// function makes "the UI is a projection of server state" directly
// testable: identical server data renders identical markup.

import { ActionItem, Plan } from "./api.js";
import { ViewState, displayTranscript, visitTimeline } from "./store.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const PLAN_SECTIONS: [keyof Plan, string][] = [
  ["in_visit_investigations", "In-visit investigations"],
  ["ordered_investigations", "Ordered investigations"],
  ["recommendations_or_actions", "Interventions and recommendations"],
];

function renderChips(citations: string[]): string {
  return citations
    .map(
      (docId) =>
        `<button class="chip" data-doc-id="${escapeHtml(docId)}" title="show guideline abstract">${escapeHtml(docId)}</button>`,
    )
    .join("");
}

function renderPlanItem(item: ActionItem): string {
  return `<li>${escapeHtml(item.item)} ${renderChips(item.citations)}</li>`;
}

export function renderPlanPanel(plan: Plan | null): string {
  if (!plan) {
    return `<div class="plan-panel"><p class="placeholder">No management plan yet; it appears here once the planner finishes.</p></div>`;
  }
  const sections = PLAN_SECTIONS.map(([key, title]) => {
    const items = plan[key] as ActionItem[];
    const body = items.length
      ? `<ol>${items.map(renderPlanItem).join("")}</ol>`
      : `<p class="placeholder">(none)</p>`;
    return `<section><h3>${title}</h3>${body}</section>`;
  });
  return `<div class="plan-panel">${sections.join("")}</div>`;
}

export function renderTimeline(state: ViewState): string {
  const entries = visitTimeline(state)
    .map(
      (entry) =>
        `<span class="visit-badge${entry.current ? " current" : ""}">Visit ${entry.visit} (${entry.messages})</span>`,
    )
    .join("");
  return `<div class="timeline">${entries}</div>`;
}

export function renderTranscript(state: ViewState): string {
  const rows = displayTranscript(state).map((message) => {
    if (message.role === "system_report") {
      return `<div class="msg system-card">${escapeHtml(message.content)}</div>`;
    }
    return `<div class="msg ${message.role}"><span class="who">${message.role}</span>${escapeHtml(
      message.content,
    )}</div>`;
  });
  if (state.sending) rows.push(`<div class="msg doctor typing">...</div>`);
  return `<div class="transcript">${rows.join("")}</div>`;
}

export function renderQuestionnaire(state: ViewState): string {
  const questionnaire = state.active?.questionnaire;
  if (!questionnaire) return "";
  const ddx = questionnaire.differential.map((d) => `<li>${escapeHtml(d)}</li>`).join("");
  const guidelines = Object.entries(questionnaire.selected_guidelines)
    .map(([corpus, ids]) => `<dt>${escapeHtml(corpus)}</dt><dd>${ids.map(escapeHtml).join(", ") || "(none)"}</dd>`)
    .join("");
  const freeText = (
    [
      ["Deviations", questionnaire.deviations],
      ["Alternatives", questionnaire.alternatives],
      ["Competing priorities", questionnaire.competing_priorities],
      ["Cost / effectiveness / side effects", questionnaire.cost_effectiveness_side_effects],
      ["Prognosis", questionnaire.prognosis],
      ["Escalation and follow-up", questionnaire.escalation_followup],
    ] as const
  )
    .map(([title, body]) => `<dt>${title}</dt><dd>${escapeHtml(body)}</dd>`)
    .join("");
  return `<div class="questionnaire"><h3>Post-visit questionnaire</h3><ol>${ddx}</ol><dl>${guidelines}</dl><dl>${freeText}</dl></div>`;
}

export function renderSessionList(state: ViewState): string {
  const rows = state.sessions
    .map((session) => {
      const selected = state.active?.sessionId === session.session_id ? " selected" : "";
      const label = Object.keys(session.scenario).length
        ? escapeHtml(JSON.stringify(session.scenario))
        : session.session_id;
      return `<li class="session-row${selected}" data-session-id="${session.session_id}">${label} <em>v${session.visit_number} ${session.status}</em></li>`;
    })
    .join("");
  return `<ul class="session-list">${rows}</ul>`;
}

export function renderComposer(state: ViewState): string {
  const active = state.active;
  if (!active) return "";
  const inputDisabled = active.status !== "active_visit" || state.sending;
  const atLastVisit = active.status === "completed";
  const error = state.lastError
    ? `<div class="error">${escapeHtml(state.lastError)}${
        state.retryText ? ` <button id="retry-send">retry</button>` : ""
      }</div>`
    : "";
  const statusNote =
    active.status === "between_visits"
      ? `<p class="note">Visit ended. Enter any reports and start the next visit.</p>`
      : atLastVisit
        ? `<p class="note">All visits completed.</p>`
        : "";
  return `
    ${error}${statusNote}
    <div class="composer">
      <input id="message-input" placeholder="Message the doctor" ${inputDisabled ? "disabled" : ""} />
      <button id="send-btn" ${inputDisabled ? "disabled" : ""}>Send</button>
    </div>
    <details class="advance-form">
      <summary>Advance to next visit</summary>
      <div class="report-entry">
        <input id="report-provider" placeholder="provider (e.g. lab)" />
        <input id="report-intervention" placeholder="intervention (e.g. blood panel)" />
        <input id="report-result" placeholder="result" />
      </div>
      <button id="advance-btn">Start next visit</button>
    </details>`;
}

export function renderApp(state: ViewState): string {
  const active = state.active;
  const main = active
    ? `
      <header>
        <h2>Consultation ${active.sessionId}</h2>
        ${renderTimeline(state)}
        <span class="status">${active.status}${active.visitCloseable ? " (closeable)" : ""}</span>
      </header>
      ${renderTranscript(state)}
      ${renderComposer(state)}
      <aside>
        <h3>Management plan</h3>
        ${renderPlanPanel(active.plan)}
        <button id="questionnaire-btn">Load questionnaire</button>
        ${renderQuestionnaire(state)}
      </aside>`
    : `<p class="placeholder">Create or select a session.</p>`;
  return `
    <nav>
      <button id="new-session-btn">New session</button>
      ${renderSessionList(state)}
    </nav>
    <main>${main}</main>
    <div id="popover" hidden></div>`;
}
