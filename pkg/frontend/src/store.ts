// View state and the actions that mutate it. The state is a pure
// projection of server responses plus one transient optimistic echo, so
// reloading a session reproduces the identical view.

import {
  ApiClient,
  ApiError,
  GuidelineInfo,
  Message,
  Plan,
  Questionnaire,
  Report,
  SessionState,
  SessionSummary,
} from "./api.js";

export interface ActiveSessionView {
  sessionId: string;
  scenario: Record<string, unknown>;
  status: SessionState["status"];
  visitNumber: number;
  visitCloseable: boolean;
  differential: SessionState["differential"];
  transcript: Message[];
  plan: Plan | null;
  planTimestamp: number;
  questionnaire: Questionnaire | null;
}

export interface ViewState {
  sessions: SessionSummary[];
  active: ActiveSessionView | null;
  /** Optimistic patient message shown until the server transcript includes it. */
  pendingMessage: string | null;
  sending: boolean;
  lastError: string | null;
  /** The message to retry after a network failure. */
  retryText: string | null;
}

export const POLL_INTERVAL_MS = 2000;

type Listener = (state: ViewState) => void;

export class Store {
  private state: ViewState = {
    sessions: [],
    active: null,
    pendingMessage: null,
    sending: false,
    lastError: null,
    retryText: null,
  };
  private listeners: Listener[] = [];
  private guidelineCache = new Map<string, GuidelineInfo>();

  constructor(private api: ApiClient) {}

  getState(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  private patchActive(patch: Partial<ActiveSessionView>): void {
    if (!this.state.active) return;
    this.update({ active: { ...this.state.active, ...patch } });
  }

  // -- session list -----------------------------------------------------------

  async loadSessions(): Promise<void> {
    const { sessions } = await this.api.listSessions();
    this.update({ sessions });
  }

  async createSession(scenario: Record<string, unknown> = {}): Promise<string> {
    const created = await this.api.createSession(scenario);
    await this.loadSessions();
    await this.openSession(created.session_id);
    return created.session_id;
  }

  // -- active session ----------------------------------------------------------

  async openSession(sessionId: string): Promise<void> {
    const [state, transcript, plan] = await Promise.all([
      this.api.getState(sessionId),
      this.api.getTranscript(sessionId),
      this.api.getPlan(sessionId),
    ]);
    this.update({
      active: {
        sessionId,
        scenario: state.scenario,
        status: state.status,
        visitNumber: state.visit_number,
        visitCloseable: state.visit_closeable,
        differential: state.differential,
        transcript: transcript.messages,
        plan: plan.plan,
        planTimestamp: plan.plan_timestamp,
        questionnaire: null,
      },
      pendingMessage: null,
      lastError: null,
      retryText: null,
    });
  }

  /** Re-fetch everything shown (refresh semantics). */
  async refresh(): Promise<void> {
    await this.loadSessions();
    if (this.state.active) await this.openSession(this.state.active.sessionId);
  }

  async sendMessage(text: string): Promise<void> {
    const active = this.state.active;
    if (!active || this.state.sending) return;
    // optimistic echo; reconciled with the server transcript after the reply
    this.update({ pendingMessage: text, sending: true, lastError: null, retryText: null });
    try {
      const response = await this.api.sendMessage(active.sessionId, text);
      const transcript = await this.api.getTranscript(active.sessionId);
      this.update({ pendingMessage: null, sending: false });
      this.patchActive({
        transcript: transcript.messages,
        status: response.status,
        visitNumber: response.visit_number,
        visitCloseable: response.visit_closeable,
      });
    } catch (err) {
      const detail = err instanceof ApiError ? err.detail : String(err);
      // drop the echo, surface the error, keep the text for retry
      this.update({
        pendingMessage: null,
        sending: false,
        lastError: `message not delivered: ${detail}`,
        retryText: text,
      });
    }
  }

  async retryLastMessage(): Promise<void> {
    const text = this.state.retryText;
    if (text) await this.sendMessage(text);
  }

  async advanceVisit(reports: Report[]): Promise<void> {
    const active = this.state.active;
    if (!active) return;
    try {
      await this.api.advanceVisit(active.sessionId, reports);
      await this.refresh();
    } catch (err) {
      const detail = err instanceof ApiError ? err.detail : String(err);
      this.update({ lastError: `cannot advance visit: ${detail}` });
    }
  }

  async closeVisit(): Promise<void> {
    const active = this.state.active;
    if (!active) return;
    try {
      await this.api.closeVisit(active.sessionId);
      await this.refresh();
    } catch (err) {
      const detail = err instanceof ApiError ? err.detail : String(err);
      this.update({ lastError: `cannot close visit: ${detail}` });
    }
  }

  /** Poll for plan updates landing from the background planner. */
  async pollPlan(): Promise<void> {
    const active = this.state.active;
    if (!active) return;
    const plan = await this.api.getPlan(active.sessionId);
    if (plan.plan_timestamp !== active.planTimestamp) {
      this.patchActive({ plan: plan.plan, planTimestamp: plan.plan_timestamp });
    }
  }

  async loadQuestionnaire(): Promise<void> {
    const active = this.state.active;
    if (!active) return;
    try {
      const questionnaire = await this.api.getQuestionnaire(active.sessionId);
      this.patchActive({ questionnaire });
    } catch (err) {
      const detail = err instanceof ApiError ? err.detail : String(err);
      this.update({ lastError: `questionnaire unavailable: ${detail}` });
    }
  }

  /** Citation chip resolution, cached per document. */
  async resolveCitation(docId: string): Promise<GuidelineInfo> {
    const cached = this.guidelineCache.get(docId);
    if (cached) return cached;
    const info = await this.api.getGuideline(docId);
    this.guidelineCache.set(docId, info);
    return info;
  }
}

/** Transcript plus the optimistic echo, in display order. */
export function displayTranscript(state: ViewState): Message[] {
  const active = state.active;
  if (!active) return [];
  const messages = [...active.transcript];
  if (state.pendingMessage !== null) {
    messages.push({
      role: "patient",
      content: state.pendingMessage,
      visit_number: active.visitNumber,
      index: messages.length,
    });
  }
  return messages;
}

/** Visit timeline entries derived from the transcript and current state. */
export function visitTimeline(state: ViewState): { visit: number; messages: number; current: boolean }[] {
  const active = state.active;
  if (!active) return [];
  const timeline: { visit: number; messages: number; current: boolean }[] = [];
  for (let visit = 1; visit <= active.visitNumber; visit += 1) {
    timeline.push({
      visit,
      messages: active.transcript.filter((m) => m.visit_number === visit).length,
      current: visit === active.visitNumber,
    });
  }
  return timeline;
}
