// Typed client for the session service HTTP API. Field names mirror the
// server JSON exactly; no clinical logic lives on this side.

export interface SessionSummary {
  session_id: string;
  scenario: Record<string, unknown>;
  visit_number: number;
  status: SessionStatus;
}

export type SessionStatus = "active_visit" | "between_visits" | "completed";

export interface SessionState {
  session_id: string;
  scenario: Record<string, unknown>;
  status: SessionStatus;
  visit_number: number;
  visit_closeable: boolean;
  summary: Record<string, string>;
  differential: Differential;
  plan_timestamp: number;
}

export interface Differential {
  probable_diagnosis: string;
  plausible_alternative_diagnoses: string[];
}

export interface Message {
  role: "patient" | "doctor" | "system_report";
  content: string;
  visit_number: number;
  index: number;
}

export interface ActionItem {
  item: string;
  citations: string[];
}

export interface Plan {
  in_visit_investigations: ActionItem[];
  ordered_investigations: ActionItem[];
  recommendations_or_actions: ActionItem[];
  provenance: string[];
  reasoning: { analysis: string[]; management_goals: string[] };
}

export interface PlanResponse {
  plan: Plan | null;
  plan_timestamp: number;
  markdown: string | null;
}

export interface MessageResponse {
  reply: string;
  visit_number: number;
  status: SessionStatus;
  visit_closeable: boolean;
}

export interface Report {
  provider: string;
  intervention: string;
  result: string;
}

export interface GuidelineInfo {
  doc_id: string;
  corpus: string;
  title: string;
  abstract: string;
}

export interface Questionnaire {
  differential: string[];
  selected_guidelines: Record<string, string[]>;
  plan: Plan | null;
  deviations: string;
  alternatives: string;
  competing_priorities: string;
  cost_effectiveness_side_effects: string;
  prognosis: string;
  escalation_followup: string;
  warnings: string[];
}

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private token: string | null = null,
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "content-type": "application/json" };
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, `network error: ${(err as Error).message}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = (await response.json()) as { detail?: string };
        if (payload.detail) detail = payload.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(scenario: Record<string, unknown> = {}): Promise<SessionSummary> {
    return this.request("POST", "/sessions", { scenario });
  }

  listSessions(): Promise<{ sessions: SessionSummary[] }> {
    return this.request("GET", "/sessions");
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}/state`);
  }

  getTranscript(sessionId: string): Promise<{ messages: Message[] }> {
    return this.request("GET", `/sessions/${sessionId}/transcript`);
  }

  getPlan(sessionId: string): Promise<PlanResponse> {
    return this.request("GET", `/sessions/${sessionId}/plan`);
  }

  getQuestionnaire(sessionId: string): Promise<Questionnaire> {
    return this.request("GET", `/sessions/${sessionId}/questionnaire`);
  }

  getGuideline(docId: string): Promise<GuidelineInfo> {
    return this.request("GET", `/guidelines/${docId}`);
  }

  sendMessage(sessionId: string, text: string): Promise<MessageResponse> {
    return this.request("POST", `/sessions/${sessionId}/messages`, { text });
  }

  advanceVisit(sessionId: string, reports: Report[]): Promise<{ visit_number: number }> {
    return this.request("POST", `/sessions/${sessionId}/advance`, { reports });
  }

  closeVisit(sessionId: string): Promise<{ status: SessionStatus }> {
    return this.request("POST", `/sessions/${sessionId}/close`);
  }
}
