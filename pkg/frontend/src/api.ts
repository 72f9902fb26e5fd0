// Thin typed client over the service endpoints. All state lives on the
// server; the client never caches decisions locally.

import type {
  DecisionAck,
  OverlaysResponse,
  QueueCard,
  QueueResponse,
  SessionReport,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly code: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiRequestError";
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(base + path, init);
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiRequestError(body.code ?? resp.status, body.message ?? resp.statusText);
  }
  return body as T;
}

export class Client {
  constructor(private readonly base: string = "") {}

  fetchQueue(session: string): Promise<QueueResponse> {
    return request(this.base, `/api/queue?session=${encodeURIComponent(session)}`);
  }

  fetchOverlays(rowId: number): Promise<OverlaysResponse> {
    return request(this.base, `/api/instance/${rowId}/overlays`);
  }

  fetchVerdict(rowId: number): Promise<QueueCard> {
    return request(this.base, `/api/instance/${rowId}/verdict`);
  }

  submitDecision(
    rowId: number,
    analystId: string,
    decidedLabel: 0 | 1,
    note?: string,
  ): Promise<DecisionAck> {
    return request(this.base, `/api/instance/${rowId}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        analyst_id: analystId,
        decided_label: decidedLabel,
        note: note ?? null,
      }),
    });
  }

  fetchReport(session: string): Promise<SessionReport> {
    return request(this.base, `/api/report?session=${encodeURIComponent(session)}`);
  }
}
