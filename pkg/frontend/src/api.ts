/** Thin typed client over fetch. Every request goes to the statetest
 * service; failures are split into service errors (the backend answered
 * with an error body) and network errors (no backend at all). */
import type {
  Diagnostic,
  ModelResponse,
  SessionDetail,
  SessionView,
  Value,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly diagnostics: Diagnostic[] = [],
  ) {
    super(message);
  }
}

export class BackendUnreachable extends Error {
  constructor(cause: unknown) {
    super(`backend unreachable: ${String(cause)}`);
  }
}

export type StimulusRequest =
  | { kind: "set_var"; name: string; value: Value }
  | { kind: "raise"; name: string };

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  uploadModel(source: string): Promise<ModelResponse> {
    return this.request("POST", "/models", source, "text/plain");
  }

  createSession(modelId: string): Promise<SessionView> {
    return this.request("POST", "/sessions", JSON.stringify({ model_id: modelId }));
  }

  sendStimulus(sessionId: string, stimulus: StimulusRequest): Promise<SessionView> {
    return this.request(
      "POST",
      `/sessions/${sessionId}/stimulus`,
      JSON.stringify(stimulus),
    );
  }

  getSession(sessionId: string): Promise<SessionDetail> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  resetSession(sessionId: string): Promise<SessionView> {
    return this.request("POST", `/sessions/${sessionId}/reset`, "{}");
  }

  private async request<T>(
    method: string,
    path: string,
    body?: string,
    contentType = "application/json",
  ): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.base + path, {
        method,
        body,
        headers: body === undefined ? undefined : { "Content-Type": contentType },
      });
    } catch (cause) {
      throw new BackendUnreachable(cause);
    }
    const payload = await response.json().catch(() => null);
    if (!response.ok) {
      const code = payload?.code ?? "E_HTTP";
      const message = payload?.message ?? `HTTP ${response.status}`;
      throw new ServiceError(response.status, code, message, payload?.diagnostics ?? []);
    }
    return payload as T;
  }
}
